#pragma once

#include "amt/retriever.hpp"

namespace amt {

// A contiguous run of sentences from one passage, capped at max_words unless
// a single sentence alone exceeds the cap (then it stands alone, flagged).
struct Segment {
    std::string source_chunk_id;
    std::string text;
    std::uint32_t word_count = 0;
    std::uint32_t span_begin = 0;  // sentence ordinals within the passage
    std::uint32_t span_end = 0;    // exclusive
    bool oversize = false;
};

struct RefinerConfig {
    std::size_t min_words = 20;  // segment growth threshold
    std::size_t max_words = 80;  // hard cap
    Lang lang = Lang::Latin;
    SentenceSplitConfig split;
};

struct RefinerToggles {
    bool relevance = true;
    bool usefulness = true;
};

struct RefinedKnowledge {
    std::vector<Segment> segments;
    std::string text;  // in-order join of retained segments, blank-line separated
    bool empty_evidence = false;
    std::size_t parse_warnings = 0;  // unparseable filter completions (fail-open)
};

// Greedy left-to-right merge: a sentence joins the current segment iff the
// segment is still below min_words and the combined count stays <= max_words.
std::vector<Segment> decompose_passage(const ScoredPassage& passage, const RefinerConfig& cfg);
std::vector<Segment> decompose(const std::vector<ScoredPassage>& passages,
                               const RefinerConfig& cfg);

// Leading Yes/No token of a filter completion, case-insensitive. nullopt means
// unparseable; callers retain the item and count a warning.
std::optional<bool> parse_yes_no(const std::string& completion);

class Refiner {
public:
    Refiner(ChatProvider& chat, const PromptLibrary& prompts, RefinerConfig cfg = {})
        : chat_(chat), prompts_(prompts), cfg_(cfg) {}

    std::vector<ScoredPassage> relevance_filter(const std::string& question,
                                                const std::vector<ScoredPassage>& passages,
                                                std::size_t* warnings = nullptr) const;

    std::vector<Segment> usefulness_filter(const std::string& question,
                                           const std::vector<Segment>& segments,
                                           std::size_t* warnings = nullptr) const;

    RefinedKnowledge refine(const std::string& question,
                            const std::vector<ScoredPassage>& passages,
                            RefinerToggles toggles = {}) const;

    const RefinerConfig& config() const { return cfg_; }

private:
    ChatProvider& chat_;
    const PromptLibrary& prompts_;
    RefinerConfig cfg_;
};

}  // namespace amt
