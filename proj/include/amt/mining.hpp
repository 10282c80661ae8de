#pragma once

#include <filesystem>

#include "amt/reader.hpp"

namespace amt {

struct TrainingExample {
    std::string question_id;
    std::string question;      // formatted stem + options
    char gold = 'A';
    std::vector<std::string> positives;       // chunk_ids whose context fixed the answer
    std::vector<std::string> hard_negatives;  // recalled but unhelpful
    std::vector<std::string> easy_negatives;  // random chunks outside the recall set
    bool empty_positive = false;
};

struct MiningConfig {
    RetrievalParams params;          // bm25_depth is n
    std::size_t easy_negatives = 8;  // e
    std::uint64_t seed = 0;
};

struct MiningReport {
    std::uint64_t skipped_correct_closed_book = 0;
    std::uint64_t mined = 0;
};

// Labels retrieval training data by downstream answer correctness: questions
// the reader already answers correctly closed-book are skipped; for the rest,
// each of the n BM25 recalls is offered as context and judged by whether the
// re-ask lands on gold.
std::vector<TrainingExample> mine_training_examples(const std::vector<McQuestion>& questions,
                                                    const Retriever& retriever,
                                                    ChatProvider& chat,
                                                    const PromptLibrary& prompts,
                                                    const MiningConfig& cfg,
                                                    MiningReport* report = nullptr);

void write_training_examples(const std::vector<TrainingExample>& examples,
                             const std::filesystem::path& path);

}  // namespace amt
