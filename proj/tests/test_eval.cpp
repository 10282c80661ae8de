#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "amt/eval.hpp"
#include "helpers.hpp"

using namespace amt;
using namespace amt::testing;

namespace {

const PromptLibrary& prompts() {
    static PromptLibrary lib = PromptLibrary::load(AMT_PROMPT_DIR);
    return lib;
}

std::vector<McQuestion> synthetic_questions(std::size_t count) {
    std::vector<McQuestion> out;
    for (std::size_t i = 0; i < count; ++i) {
        McQuestion q;
        q.question_id = "q" + std::to_string(i);
        q.stem = "synthetic question " + std::to_string(i) + "?";
        q.options = {{'A', "alpha"}, {'B', "beta"}, {'C', "gamma"}, {'D', "delta"}};
        q.gold = "ABCD"[i % 4];
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace

TEST_CASE("load_dataset: empty file, valid fixture, schema violations") {
    auto path = std::filesystem::temp_directory_path() / "amt_dataset_test.jsonl";

    {
        std::ofstream out(path);
    }
    CHECK(load_dataset(path).empty());

    {
        std::ofstream out(path);
        out << R"({"question_id":"a","stem":"s?","options":{"A":"x","B":"y"},"gold":"A","dataset_tag":"usmle"})"
            << "\n";
        out << R"({"question_id":"b","stem":"t?","options":{"A":"x","B":"y","C":"z"},"gold":"C","dataset_tag":"medmcqa"})"
            << "\n";
        out << R"({"question_id":"c","stem":"u?","options":{"A":"x","B":"y"},"gold":"B","dataset_tag":"mcmle"})"
            << "\n";
    }
    auto questions = load_dataset(path);
    REQUIRE(questions.size() == 3);
    CHECK(questions[1].gold == 'C');
    CHECK(questions[2].tag == DatasetTag::Mcmle);

    {
        std::ofstream out(path);
        out << R"({"question_id":"a","stem":"s?","options":{"A":"x","B":"y"},"dataset_tag":"usmle"})"
            << "\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(path), "dataset line 1: missing field gold", DataError);
    std::filesystem::remove(path);
}

TEST_CASE("evaluate: oracle mock scores 1.0, adversarial 0.0, mixed matches the script") {
    auto questions = synthetic_questions(20);

    MockChat oracle;
    oracle.set_handler([&questions](const ChatRequest& req) -> std::optional<std::string> {
        for (const auto& q : questions) {
            if (req.filled_prompt.find(q.stem) != std::string::npos) {
                return "The answer is " + std::string(1, q.gold);
            }
        }
        return std::string("The answer is A");
    });
    StageToggles closed_book;
    closed_book.retriever = false;
    Pipeline pipeline(oracle, prompts(), nullptr);
    auto run = evaluate(questions, pipeline, closed_book, {},
                        [&] { return oracle.calls(); });
    CHECK(run.count == 20);
    CHECK(run.correct == 20);
    CHECK(run.accuracy == 1.0);
    CHECK(run.chat_calls == 20);

    MockChat adversarial;
    adversarial.set_handler([&questions](const ChatRequest& req) -> std::optional<std::string> {
        for (const auto& q : questions) {
            if (req.filled_prompt.find(q.stem) != std::string::npos) {
                char wrong = q.gold == 'A' ? 'B' : 'A';
                return "The answer is " + std::string(1, wrong);
            }
        }
        return std::string("The answer is A");
    });
    Pipeline bad(adversarial, prompts(), nullptr);
    CHECK(evaluate(questions, bad, closed_book, {}).accuracy == 0.0);

    // mixed: correct on even question ids only
    MockChat mixed;
    mixed.set_handler([&questions](const ChatRequest& req) -> std::optional<std::string> {
        for (std::size_t i = 0; i < questions.size(); ++i) {
            if (req.filled_prompt.find(questions[i].stem) != std::string::npos) {
                char label = i % 2 == 0 ? questions[i].gold
                                        : (questions[i].gold == 'A' ? 'B' : 'A');
                return "The answer is " + std::string(1, label);
            }
        }
        return std::nullopt;
    });
    Pipeline half(mixed, prompts(), nullptr);
    auto mixed_run = evaluate(questions, half, closed_book, {});
    CHECK(mixed_run.correct == 10);
    CHECK(mixed_run.accuracy == 0.5);
    CHECK(mixed_run.accuracy * mixed_run.count == mixed_run.correct);
}

TEST_CASE("per-question failures are recorded as incorrect, never aborting") {
    auto questions = synthetic_questions(3);
    struct FlakyChat : ChatProvider {
        int n = 0;
        std::string complete(const ChatRequest&) override {
            if (++n == 2) throw ProviderError("boom");
            return "The answer is A";
        }
    } chat;
    StageToggles closed_book;
    closed_book.retriever = false;
    Pipeline pipeline(chat, prompts(), nullptr);
    auto run = evaluate(questions, pipeline, closed_book, {});
    CHECK(run.count == 3);
    REQUIRE(run.per_question.size() == 3);
    CHECK(run.per_question[1].error.find("boom") != std::string::npos);
    CHECK_FALSE(run.per_question[1].correct);
}

TEST_CASE("ablation matrix: 8 toggle rows + 7 variant rows, closed-book row consistent") {
    auto questions = synthetic_questions(4);
    auto store = random_store(8, 3);
    MockSparseEncoder encoder(30000, 2);
    MockDenseEmbedder embedder(16, 2);
    MockPairScorer scorer(embedder);
    auto sparse = SparseIndex::build(store, encoder);
    auto dense = DenseIndex::build(store, embedder);
    Retriever retriever(store, sparse, dense, encoder, embedder, scorer);

    MockChat chat;
    chat.set_handler([&questions](const ChatRequest& req) -> std::optional<std::string> {
        if (req.template_id == TemplateId::Relevance ||
            req.template_id == TemplateId::Usefulness) {
            return std::string("Yes");
        }
        for (const auto& q : questions) {
            if (req.filled_prompt.find(q.stem) != std::string::npos) {
                return "The answer is " + std::string(1, q.gold);
            }
        }
        return std::string("echo");
    });

    RetrievalParams params;
    params.sparse_depth = params.dense_depth = 4;
    params.final_depth = 4;
    params.bm25_depth = 4;
    Pipeline pipeline(chat, prompts(), &retriever, params);
    auto rows = ablation_matrix(questions, pipeline, StageToggles{}, params,
                                [&] { return chat.calls(); });
    REQUIRE(rows.size() == 15);
    for (const auto& row : rows) CHECK(row.run.accuracy == 1.0);

    // closed-book row equals a fresh all-off evaluate run
    StageToggles off;
    off.retriever = false;
    off.rewrite = off.expand = off.relevance = off.usefulness = false;
    auto closed = evaluate(questions, pipeline, off, params);
    CHECK(rows[0].name == "retriever=off augmenter=off refiner=off");
    CHECK(rows[0].run.to_csv() == closed.to_csv());

    // cost accounting: enabling the refiner never reduces chat calls
    auto find_row = [&](const std::string& name) -> const EvalRun& {
        for (const auto& r : rows) {
            if (r.name == name) return r.run;
        }
        FAIL("row not found: " << name);
        static EvalRun dummy;
        return dummy;
    };
    CHECK(find_row("retriever=on augmenter=off refiner=on").chat_calls >=
          find_row("retriever=on augmenter=off refiner=off").chat_calls);

    auto md = ablation_markdown(rows);
    CHECK(md.find("| retriever=off augmenter=off refiner=off |") != std::string::npos);
    auto csv = ablation_csv(rows);
    CHECK(csv.find("variant=hybtextr,4,4,4/4") != std::string::npos);
}
