#pragma once

#include "amt/refine.hpp"

namespace amt {

enum class DatasetTag { Usmle, Mcmle, Medmcqa };

std::string dataset_tag_name(DatasetTag tag);
DatasetTag dataset_tag_from_name(const std::string& name);

struct McQuestion {
    std::string question_id;
    std::string stem;
    std::vector<std::pair<char, std::string>> options;  // ordered, labels A..E
    char gold = 'A';
    DatasetTag tag = DatasetTag::Usmle;

    void validate() const;  // >= 2 options, gold among the labels
    // stem plus one "A) text" line per option; the question slot content.
    std::string formatted() const;
    const std::string* option_text(char label) const;
};

struct Answer {
    std::string raw_completion;
    std::optional<char> parsed_label;
    std::string parse_path;  // which cascade rule fired ("answer-pattern", ...)
};

struct StageToggles {
    bool retriever = true;
    RetrieverVariant variant = RetrieverVariant::Hybrid;
    bool rewrite = true;
    bool expand = true;
    bool relevance = true;
    bool usefulness = true;
};

struct AnswerTrace {
    struct Record {
        std::string stage;
        std::string input_digest;
        std::string output_digest;
        long long micros = 0;
    };
    std::vector<Record> stages;

    std::string digest() const;  // hash over all stage records
};

ChatRequest build_reader_prompt(const PromptLibrary& prompts, const RefinedKnowledge& refined,
                                const McQuestion& question);

// Parse cascade: (1) "answer is X" / "Answer: X"; (2) a standalone label token
// on the final line; (3) unique option text in the final sentence; (4) none.
// Conflicting rule-1 labels are ambiguous and yield none.
Answer parse_mc_answer(const std::string& completion, const McQuestion& question);

// The full pipeline for one question. Retriever may be null only when the
// retriever toggle is off.
class Pipeline {
public:
    Pipeline(ChatProvider& chat, const PromptLibrary& prompts, const Retriever* retriever,
             RetrievalParams params = {}, RefinerConfig refiner_cfg = {})
        : chat_(chat),
          prompts_(prompts),
          retriever_(retriever),
          params_(params),
          refiner_cfg_(refiner_cfg) {}

    Answer answer(const McQuestion& question, const StageToggles& toggles,
                  AnswerTrace* trace = nullptr) const;

private:
    ChatProvider& chat_;
    const PromptLibrary& prompts_;
    const Retriever* retriever_;
    RetrievalParams params_;
    RefinerConfig refiner_cfg_;
};

}  // namespace amt
