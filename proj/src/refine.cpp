#include "amt/refine.hpp"

#include <cctype>

namespace amt {

std::vector<Segment> decompose_passage(const ScoredPassage& passage, const RefinerConfig& cfg) {
    auto sentences = split_sentences(passage.text, cfg.lang, cfg.split);
    std::vector<Segment> segments;
    const char* joiner = cfg.lang == Lang::Latin ? " " : "";

    Segment current;
    std::uint32_t sentence_count = 0;  // sentences in the current segment
    auto flush = [&]() {
        if (sentence_count == 0) return;
        current.oversize = sentence_count == 1 && current.word_count > cfg.max_words;
        segments.push_back(std::move(current));
        current = Segment{};
        sentence_count = 0;
    };

    for (std::uint32_t ordinal = 0; ordinal < sentences.size(); ++ordinal) {
        const auto& sentence = sentences[ordinal];
        auto words = static_cast<std::uint32_t>(count_words(sentence, cfg.lang));
        bool joins = sentence_count > 0 && current.word_count < cfg.min_words &&
                     current.word_count + words <= cfg.max_words;
        if (!joins) flush();
        if (sentence_count == 0) {
            current.source_chunk_id = passage.chunk_id;
            current.span_begin = ordinal;
            current.text = sentence;
            current.word_count = words;
        } else {
            current.text += joiner;
            current.text += sentence;
            current.word_count += words;
        }
        current.span_end = ordinal + 1;
        ++sentence_count;
    }
    flush();
    return segments;
}

std::vector<Segment> decompose(const std::vector<ScoredPassage>& passages,
                               const RefinerConfig& cfg) {
    std::vector<Segment> segments;
    for (const auto& p : passages) {
        auto piece = decompose_passage(p, cfg);
        segments.insert(segments.end(), piece.begin(), piece.end());
    }
    return segments;
}

std::optional<bool> parse_yes_no(const std::string& completion) {
    std::size_t i = 0;
    while (i < completion.size() &&
           !std::isalpha(static_cast<unsigned char>(completion[i]))) {
        ++i;
    }
    std::size_t b = i;
    while (i < completion.size() && std::isalpha(static_cast<unsigned char>(completion[i]))) ++i;
    auto token = lowercase(completion.substr(b, i - b));
    if (token == "yes") return true;
    if (token == "no") return false;
    return std::nullopt;
}

std::vector<ScoredPassage> Refiner::relevance_filter(const std::string& question,
                                                     const std::vector<ScoredPassage>& passages,
                                                     std::size_t* warnings) const {
    std::vector<ScoredPassage> retained;
    for (const auto& p : passages) {
        std::string completion;
        try {
            completion = chat_.complete(prompts_.request(
                TemplateId::Relevance, {{"passage", p.text}, {"question", question}}, 8));
        } catch (const std::exception& e) {
            throw ProviderError("relevance filter failed on " + p.chunk_id + ": " + e.what());
        }
        auto verdict = parse_yes_no(completion);
        if (!verdict.has_value()) {
            if (warnings) ++*warnings;
            retained.push_back(p);  // fail-open
        } else if (*verdict) {
            retained.push_back(p);
        }
    }
    return retained;
}

std::vector<Segment> Refiner::usefulness_filter(const std::string& question,
                                                const std::vector<Segment>& segments,
                                                std::size_t* warnings) const {
    std::vector<Segment> retained;
    for (const auto& s : segments) {
        std::string completion;
        try {
            completion = chat_.complete(prompts_.request(
                TemplateId::Usefulness, {{"segment", s.text}, {"question", question}}, 8));
        } catch (const std::exception& e) {
            throw ProviderError("usefulness filter failed on segment of " + s.source_chunk_id +
                                ": " + e.what());
        }
        auto verdict = parse_yes_no(completion);
        if (!verdict.has_value()) {
            if (warnings) ++*warnings;
            retained.push_back(s);  // fail-open
        } else if (*verdict) {
            retained.push_back(s);
        }
    }
    return retained;
}

RefinedKnowledge Refiner::refine(const std::string& question,
                                 const std::vector<ScoredPassage>& passages,
                                 RefinerToggles toggles) const {
    RefinedKnowledge out;
    auto relevant = toggles.relevance
                        ? relevance_filter(question, passages, &out.parse_warnings)
                        : passages;
    auto segments = decompose(relevant, cfg_);
    out.segments = toggles.usefulness
                       ? usefulness_filter(question, segments, &out.parse_warnings)
                       : std::move(segments);
    for (std::size_t i = 0; i < out.segments.size(); ++i) {
        if (i) out.text += "\n\n";
        out.text += out.segments[i].text;
    }
    out.empty_evidence = out.segments.empty();
    return out;
}

}  // namespace amt
