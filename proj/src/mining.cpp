#include "amt/mining.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "amt/mock.hpp"  // SplitMix64

namespace amt {

using nlohmann::json;

namespace {

std::optional<char> ask(ChatProvider& chat, const PromptLibrary& prompts,
                        const McQuestion& question, const std::string& context) {
    RefinedKnowledge knowledge;
    knowledge.text = context;  // empty context renders the "None." sentinel
    auto completion = chat.complete(build_reader_prompt(prompts, knowledge, question));
    return parse_mc_answer(completion, question).parsed_label;
}

}  // namespace

std::vector<TrainingExample> mine_training_examples(const std::vector<McQuestion>& questions,
                                                    const Retriever& retriever,
                                                    ChatProvider& chat,
                                                    const PromptLibrary& prompts,
                                                    const MiningConfig& cfg,
                                                    MiningReport* report) {
    cfg.params.validate();
    const auto& store = retriever.store();
    std::vector<TrainingExample> examples;

    for (const auto& question : questions) {
        question.validate();
        auto closed_book = ask(chat, prompts, question, "");
        if (closed_book && *closed_book == question.gold) {
            if (report) ++report->skipped_correct_closed_book;
            continue;
        }

        TrainingExample ex;
        ex.question_id = question.question_id;
        ex.question = question.formatted();
        ex.gold = question.gold;

        auto recalled = retriever.bm25_search(question.formatted(), cfg.params.bm25_depth,
                                              cfg.params.bm25);
        std::unordered_set<std::string> recalled_ids;
        for (const auto& p : recalled) {
            recalled_ids.insert(p.chunk_id);
            auto label = ask(chat, prompts, question, p.text);
            if (label && *label == question.gold) {
                ex.positives.push_back(p.chunk_id);
            } else {
                ex.hard_negatives.push_back(p.chunk_id);
            }
        }
        ex.empty_positive = ex.positives.empty();

        if (cfg.easy_negatives > 0 && store.size() > recalled_ids.size()) {
            SplitMix64 rng(cfg.seed ^ fnv1a64(question.question_id));
            std::unordered_set<std::string> chosen;
            std::size_t available = store.size() - recalled_ids.size();
            std::size_t want = std::min(cfg.easy_negatives, available);
            while (chosen.size() < want) {
                const auto& c = store.at(rng.next() % store.size());
                if (recalled_ids.count(c.chunk_id)) continue;
                if (chosen.insert(c.chunk_id).second) ex.easy_negatives.push_back(c.chunk_id);
            }
        }

        examples.push_back(std::move(ex));
        if (report) ++report->mined;
    }
    return examples;
}

void write_training_examples(const std::vector<TrainingExample>& examples,
                             const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write training examples: " + path.string());
    for (const auto& ex : examples) {
        json rec = {{"question_id", ex.question_id},
                    {"question", ex.question},
                    {"gold", std::string(1, ex.gold)},
                    {"positives", ex.positives},
                    {"hard_negatives", ex.hard_negatives},
                    {"easy_negatives", ex.easy_negatives},
                    {"empty_positive", ex.empty_positive}};
        out << rec.dump() << "\n";
    }
}

}  // namespace amt
