#include "amt/reader.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <regex>
#include <sstream>

namespace amt {

std::string dataset_tag_name(DatasetTag tag) {
    switch (tag) {
        case DatasetTag::Usmle: return "usmle";
        case DatasetTag::Mcmle: return "mcmle";
        case DatasetTag::Medmcqa: return "medmcqa";
    }
    return "unknown";
}

DatasetTag dataset_tag_from_name(const std::string& name) {
    if (name == "usmle") return DatasetTag::Usmle;
    if (name == "mcmle") return DatasetTag::Mcmle;
    if (name == "medmcqa") return DatasetTag::Medmcqa;
    throw std::invalid_argument("unknown dataset_tag: " + name);
}

void McQuestion::validate() const {
    if (options.size() < 2) {
        throw DataError("question " + question_id + ": needs at least 2 options");
    }
    if (!option_text(gold)) {
        throw DataError("question " + question_id + ": gold label '" + std::string(1, gold) +
                        "' is not an option");
    }
}

std::string McQuestion::formatted() const {
    std::string out = stem;
    for (const auto& [label, text] : options) {
        out += "\n";
        out += label;
        out += ") ";
        out += text;
    }
    return out;
}

const std::string* McQuestion::option_text(char label) const {
    for (const auto& [l, text] : options) {
        if (l == label) return &text;
    }
    return nullptr;
}

std::string AnswerTrace::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& r : stages) {
        h = fnv1a64(r.stage, h);
        h = fnv1a64(r.input_digest, h);
        h = fnv1a64(r.output_digest, h);
    }
    return hex64(h);
}

ChatRequest build_reader_prompt(const PromptLibrary& prompts, const RefinedKnowledge& refined,
                                const McQuestion& question) {
    question.validate();
    const std::string knowledge = refined.text.empty() ? "None." : refined.text;
    return prompts.request(TemplateId::Reader,
                           {{"knowledge", knowledge}, {"question", question.formatted()}});
}

namespace {

bool valid_label(const McQuestion& q, char label) { return q.option_text(label) != nullptr; }

std::string final_nonblank_line(const std::string& text) {
    std::size_t end = text.size();
    while (end > 0) {
        std::size_t b = text.find_last_of('\n', end - 1);
        std::size_t begin = b == std::string::npos ? 0 : b + 1;
        std::string line = trim(text.substr(begin, end - begin));
        if (!line.empty()) return line;
        if (b == std::string::npos) break;
        end = b;
    }
    return "";
}

}  // namespace

Answer parse_mc_answer(const std::string& completion, const McQuestion& question) {
    Answer answer;
    answer.raw_completion = completion;

    // Rule 1: "answer is X" / "Answer: X"
    static const std::regex pattern(R"((?:answer\s+is|answer\s*:)\s*\(?([A-Ea-e])\b)",
                                    std::regex::icase);
    std::optional<char> found;
    bool ambiguous = false;
    for (auto it = std::sregex_iterator(completion.begin(), completion.end(), pattern);
         it != std::sregex_iterator(); ++it) {
        char label = static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0])));
        if (!valid_label(question, label)) continue;
        if (found && *found != label) ambiguous = true;
        found = label;
    }
    if (found && !ambiguous) {
        answer.parsed_label = *found;
        answer.parse_path = "answer-pattern";
        return answer;
    }
    if (ambiguous) {
        answer.parse_path = "ambiguous";
        return answer;
    }

    // Rule 2: standalone label token on the final line.
    std::string last_line = final_nonblank_line(completion);
    static const std::regex standalone(R"(^\(?([A-Ea-e])[\)\].:]?$)");
    std::smatch m;
    if (std::regex_match(last_line, m, standalone)) {
        char label = static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])));
        if (valid_label(question, label)) {
            answer.parsed_label = label;
            answer.parse_path = "final-line-label";
            return answer;
        }
    }

    // Rule 3: unique option text verbatim in the final sentence.
    auto sentences = split_sentences(completion, DatasetTag::Mcmle == question.tag ? Lang::Cjk
                                                                                   : Lang::Latin);
    if (!sentences.empty()) {
        auto final_sentence = lowercase(sentences.back());
        std::optional<char> match;
        bool unique = true;
        for (const auto& [label, text] : question.options) {
            if (final_sentence.find(lowercase(text)) != std::string::npos) {
                if (match) unique = false;
                match = label;
            }
        }
        if (match && unique) {
            answer.parsed_label = *match;
            answer.parse_path = "option-text";
            return answer;
        }
    }

    answer.parse_path = "none";
    return answer;
}

namespace {

using Clock = std::chrono::steady_clock;

void record_stage(AnswerTrace* trace, const std::string& stage, const std::string& input,
                  const std::string& output, Clock::time_point begin) {
    if (!trace) return;
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - begin);
    trace->stages.push_back({stage, hex64(fnv1a64(input)), hex64(fnv1a64(output)),
                             micros.count()});
}

}  // namespace

Answer Pipeline::answer(const McQuestion& question, const StageToggles& toggles,
                        AnswerTrace* trace) const {
    question.validate();
    const std::string question_text = question.formatted();

    AugmentedQuery query;
    query.original = question_text;
    query.rewritten = question_text;
    query.expanded = question_text;
    query.concatenated = question_text;

    RefinedKnowledge refined;
    refined.empty_evidence = true;

    if (toggles.retriever) {
        if (!retriever_) throw std::invalid_argument("retriever enabled but not configured");

        if (toggles.rewrite || toggles.expand) {
            auto begin = Clock::now();
            Augmenter augmenter(chat_, prompts_);
            try {
                query = augmenter.augment(question_text, {toggles.rewrite, toggles.expand});
            } catch (const std::exception& e) {
                throw ProviderError("augment stage failed: " + std::string(e.what()));
            }
            record_stage(trace, "augment", question_text, query.concatenated, begin);
        }

        auto begin = Clock::now();
        std::vector<ScoredPassage> passages;
        try {
            passages = retriever_->retrieve_variant(toggles.variant, query, params_);
        } catch (const std::exception& e) {
            throw ProviderError("retrieve stage failed: " + std::string(e.what()));
        }
        std::string passage_digest;
        for (const auto& p : passages) passage_digest += p.chunk_id + "\n";
        record_stage(trace, "retrieve", query.concatenated, passage_digest, begin);

        begin = Clock::now();
        Refiner refiner(chat_, prompts_, refiner_cfg_);
        try {
            refined = refiner.refine(question_text, passages,
                                     {toggles.relevance, toggles.usefulness});
        } catch (const std::exception& e) {
            throw ProviderError("refine stage failed: " + std::string(e.what()));
        }
        record_stage(trace, "refine", passage_digest, refined.text, begin);
    }

    auto begin = Clock::now();
    auto request = build_reader_prompt(prompts_, refined, question);
    std::string completion;
    try {
        completion = chat_.complete(request);
    } catch (const std::exception& e) {
        throw ProviderError("reader stage failed: " + std::string(e.what()));
    }
    record_stage(trace, "reader", request.filled_prompt, completion, begin);

    begin = Clock::now();
    auto answer = parse_mc_answer(completion, question);
    record_stage(trace, "parse", completion,
                 answer.parsed_label ? std::string(1, *answer.parsed_label) : "none", begin);
    return answer;
}

}  // namespace amt
