#pragma once

#include <filesystem>
#include <functional>

#include "amt/reader.hpp"

namespace amt {

struct QuestionResult {
    std::string question_id;
    std::optional<char> parsed_label;
    char gold = 'A';
    bool correct = false;
    std::string trace_digest;
    std::string error;  // nonempty when the question failed and scored wrong
};

struct EvalRun {
    std::string config_digest;
    std::string dataset_tag;
    std::uint64_t count = 0;
    std::uint64_t correct = 0;
    double accuracy = 0.0;  // correct / count, exact integer arithmetic behind it
    std::vector<QuestionResult> per_question;
    std::uint64_t chat_calls = 0;

    std::string to_csv() const;
    std::string to_json() const;
};

struct AblationRow {
    std::string name;
    EvalRun run;
};

// Line-delimited records: {"question_id","stem","options":{"A":...},"gold","dataset_tag"}.
// Malformed records abort with the line number and field.
std::vector<McQuestion> load_dataset(const std::filesystem::path& path);

std::string toggles_digest(const StageToggles& toggles, const RetrievalParams& params);

// Per-question failures are recorded as incorrect with the error note; the
// run itself never aborts. chat_call_counter, when given, reads the provider's
// cumulative call count around the run.
EvalRun evaluate(const std::vector<McQuestion>& questions, const Pipeline& pipeline,
                 const StageToggles& toggles, const RetrievalParams& params,
                 const std::function<std::uint64_t()>& chat_call_counter = nullptr);

// 8 stage-toggle rows ({retriever, augmenter, refiner} on/off) followed by the
// 7 retriever-variant rows, all over the same question set.
std::vector<AblationRow> ablation_matrix(const std::vector<McQuestion>& questions,
                                         const Pipeline& pipeline, const StageToggles& base,
                                         const RetrievalParams& params,
                                         const std::function<std::uint64_t()>& chat_call_counter =
                                             nullptr);

std::string ablation_markdown(const std::vector<AblationRow>& rows);
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace amt
