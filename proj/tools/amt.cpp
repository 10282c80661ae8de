// amt: command-line front end for the retrieval-augmented medical QA pipeline.
//
// Exit codes: 0 success, 2 usage, 3 config, 4 provider/transport, 5 data.

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "amt/cache.hpp"
#include "amt/eval.hpp"
#include "amt/http.hpp"
#include "amt/mining.hpp"
#include "amt/mock.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitProvider = 4;
constexpr int kExitData = 5;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliConfig {
    std::filesystem::path store_dir;
    std::filesystem::path sparse_dir;
    std::filesystem::path dense_dir;
    std::filesystem::path prompts_dir = AMT_PROMPT_DIR;
    amt::Lang lang = amt::Lang::Latin;
    std::uint64_t seed = 0;
    amt::RetrievalParams params;
    amt::StageToggles toggles;
    amt::RefinerConfig refiner;
    std::size_t easy_negatives = 8;

    std::string provider_kind = "mock";
    std::size_t dense_dim = 64;
    std::size_t vocab_size = 30000;
    std::string answer_label;  // mock reader output; empty leaves it unscripted
    amt::ProviderConfig http;
    std::filesystem::path cache_dir;
};

template <typename T>
void read_field(const json& obj, const char* key, T& into) {
    if (!obj.contains(key)) return;
    try {
        into = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field has the wrong type: ") + key);
    }
}

CliConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }

    CliConfig cfg;
    std::string str;
    read_field(root, "store_dir", str);
    cfg.store_dir = str;
    str = "";
    read_field(root, "sparse_dir", str);
    cfg.sparse_dir = str;
    str = "";
    read_field(root, "dense_dir", str);
    cfg.dense_dir = str;
    str = "";
    read_field(root, "prompts_dir", str);
    if (!str.empty()) cfg.prompts_dir = str;
    str = "latin-script";
    read_field(root, "language", str);
    try {
        cfg.lang = amt::lang_from_tag(str);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    read_field(root, "seed", cfg.seed);
    str = "";
    read_field(root, "cache_dir", str);
    cfg.cache_dir = str;

    if (root.contains("params")) {
        const auto& p = root.at("params");
        read_field(p, "sparse_depth", cfg.params.sparse_depth);
        read_field(p, "dense_depth", cfg.params.dense_depth);
        read_field(p, "final_depth", cfg.params.final_depth);
        read_field(p, "bm25_depth", cfg.params.bm25_depth);
        read_field(p, "bm25_k1", cfg.params.bm25.k1);
        read_field(p, "bm25_b", cfg.params.bm25.b);
        try {
            cfg.params.validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    if (root.contains("toggles")) {
        const auto& t = root.at("toggles");
        read_field(t, "retriever", cfg.toggles.retriever);
        read_field(t, "rewrite", cfg.toggles.rewrite);
        read_field(t, "expand", cfg.toggles.expand);
        read_field(t, "relevance", cfg.toggles.relevance);
        read_field(t, "usefulness", cfg.toggles.usefulness);
        std::string variant;
        read_field(t, "variant", variant);
        if (!variant.empty()) {
            try {
                cfg.toggles.variant = amt::variant_from_name(variant);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (root.contains("refiner")) {
        const auto& r = root.at("refiner");
        read_field(r, "min_words", cfg.refiner.min_words);
        read_field(r, "max_words", cfg.refiner.max_words);
        if (cfg.refiner.min_words == 0 || cfg.refiner.max_words < cfg.refiner.min_words)
            throw ConfigError("refiner: need 0 < min_words <= max_words");
    }
    cfg.refiner.lang = cfg.lang;
    if (root.contains("mining")) {
        read_field(root.at("mining"), "easy_negatives", cfg.easy_negatives);
    }

    if (root.contains("provider")) {
        const auto& p = root.at("provider");
        read_field(p, "kind", cfg.provider_kind);
        if (cfg.provider_kind != "mock" && cfg.provider_kind != "http")
            throw ConfigError("provider.kind must be \"mock\" or \"http\", got " +
                              cfg.provider_kind);
        read_field(p, "dense_dim", cfg.dense_dim);
        read_field(p, "vocab_size", cfg.vocab_size);
        read_field(p, "answer_label", cfg.answer_label);
        read_field(p, "endpoint", cfg.http.endpoint);
        read_field(p, "auth_env_var", cfg.http.auth_env_var);
        read_field(p, "timeout_seconds", cfg.http.timeout_seconds);
        read_field(p, "retry_budget", cfg.http.retry_budget);
        read_field(p, "max_in_flight", cfg.http.max_in_flight);
        if (cfg.provider_kind == "http" && cfg.http.endpoint.empty())
            throw ConfigError("provider.endpoint is required when provider.kind is \"http\"");
    }
    return cfg;
}

// Owns whichever provider stack the config selected; `chat` points at the
// outermost chat provider (cache wrapper when a cache dir is set).
struct Providers {
    std::unique_ptr<amt::MockDenseEmbedder> mock_dense_keeper;  // scorer references it
    std::unique_ptr<amt::ChatProvider> chat_owned;
    std::unique_ptr<amt::CachedChat> cache;
    std::unique_ptr<amt::DenseEmbedder> dense;
    std::unique_ptr<amt::SparseEncoder> sparse;
    std::unique_ptr<amt::PairScorer> scorer;
    amt::ChatProvider* chat = nullptr;
};

Providers make_providers(const CliConfig& cfg) {
    Providers p;
    if (cfg.provider_kind == "mock") {
        auto mock = std::make_unique<amt::MockChat>(cfg.seed);
        std::string label = cfg.answer_label;
        mock->set_handler([label](const amt::ChatRequest& req) -> std::optional<std::string> {
            switch (req.template_id) {
                case amt::TemplateId::Rewrite:
                case amt::TemplateId::Expand:
                    return std::string{};  // fall back to the original question
                case amt::TemplateId::Relevance:
                case amt::TemplateId::Usefulness:
                    return std::string{"Yes"};
                case amt::TemplateId::Reader:
                    if (!label.empty()) return "The answer is " + label;
                    return std::nullopt;
            }
            return std::nullopt;
        });
        p.chat_owned = std::move(mock);
        p.mock_dense_keeper = std::make_unique<amt::MockDenseEmbedder>(cfg.dense_dim, cfg.seed);
        p.scorer = std::make_unique<amt::MockPairScorer>(*p.mock_dense_keeper,
                                                         amt::TruncationConfig{}, cfg.lang);
        p.dense = std::make_unique<amt::MockDenseEmbedder>(cfg.dense_dim, cfg.seed);
        p.sparse = std::make_unique<amt::MockSparseEncoder>(cfg.vocab_size, cfg.seed, cfg.lang);
    } else {
        p.chat_owned = std::make_unique<amt::HttpChat>(cfg.http);
        p.dense = std::make_unique<amt::HttpDenseEmbedder>(cfg.http, cfg.dense_dim);
        p.sparse = std::make_unique<amt::HttpSparseEncoder>(cfg.http, cfg.vocab_size);
        p.scorer = std::make_unique<amt::HttpPairScorer>(cfg.http, cfg.lang);
    }
    p.chat = p.chat_owned.get();
    if (!cfg.cache_dir.empty()) {
        p.cache = std::make_unique<amt::CachedChat>(*p.chat_owned, cfg.cache_dir);
        p.chat = p.cache.get();
    }
    return p;
}

std::filesystem::path require_dir(const std::filesystem::path& dir, const char* field) {
    if (dir.empty()) throw ConfigError(std::string("config field is required here: ") + field);
    return dir;
}

amt::ChunkStore load_store(const CliConfig& cfg) {
    auto dir = require_dir(cfg.store_dir, "store_dir");
    if (!std::filesystem::exists(dir))
        throw amt::DataError("store_dir does not exist: " + dir.string());
    return amt::ChunkStore::load(dir);
}

// Everything a retrieval-backed subcommand needs, loaded once.
struct Stack {
    amt::ChunkStore store;
    amt::SparseIndex sparse_index;
    amt::DenseIndex dense_index;
    Providers providers;
    std::unique_ptr<amt::Retriever> retriever;
    std::unique_ptr<amt::PromptLibrary> prompts;
};

Stack load_stack(const CliConfig& cfg) {
    Stack s;
    s.store = load_store(cfg);
    auto sdir = require_dir(cfg.sparse_dir, "sparse_dir");
    auto ddir = require_dir(cfg.dense_dir, "dense_dir");
    if (!std::filesystem::exists(sdir))
        throw amt::DataError("sparse_dir does not exist: " + sdir.string());
    if (!std::filesystem::exists(ddir))
        throw amt::DataError("dense_dir does not exist: " + ddir.string());
    s.sparse_index = amt::SparseIndex::load(sdir);
    s.dense_index = amt::DenseIndex::load(ddir);
    s.providers = make_providers(cfg);
    s.retriever = std::make_unique<amt::Retriever>(s.store, s.sparse_index, s.dense_index,
                                                   *s.providers.sparse, *s.providers.dense,
                                                   *s.providers.scorer);
    s.prompts = std::make_unique<amt::PromptLibrary>(amt::PromptLibrary::load(cfg.prompts_dir));
    return s;
}

json passages_json(const std::vector<amt::ScoredPassage>& passages) {
    json out = json::array();
    for (const auto& p : passages) {
        out.push_back({{"chunk_id", p.chunk_id},
                       {"score", p.score},
                       {"stage", amt::stage_name(p.stage)},
                       {"text", p.text}});
    }
    return out;
}

amt::McQuestion pick_question(const std::vector<amt::McQuestion>& questions,
                              const std::string& id) {
    for (const auto& q : questions) {
        if (q.question_id == id) return q;
    }
    throw amt::DataError("question_id not found in dataset: " + id);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw amt::DataError("cannot write output: " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval-augmented medical QA pipeline"};
    app.require_subcommand(1);

    std::filesystem::path config_path;
    std::optional<std::uint64_t> seed_override;
    std::string cache_dir_override;
    bool dry_run = false;
    app.add_option("--config", config_path, "pipeline config (JSON)")->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--cache-dir", cache_dir_override, "override the chat cache directory");
    app.add_flag("--dry-run", dry_run, "validate config and inputs, make no provider calls");

    std::filesystem::path docs_path, questions_path, out_path, csv_path, json_path, md_path;
    std::string query, question_text, question_id, what = "both", variant_override;

    auto* ingest_cmd = app.add_subcommand("ingest", "split documents into the chunk store");
    ingest_cmd->add_option("--docs", docs_path, "document JSONL")->required();

    auto* index_cmd = app.add_subcommand("index", "build retrieval indexes from the store");
    index_cmd->add_option("--what", what, "sparse | dense | both")
        ->check(CLI::IsMember({"sparse", "dense", "both"}));

    auto* search_cmd = app.add_subcommand("search", "retrieve passages for a raw query");
    search_cmd->add_option("--query", query, "query text")->required();
    search_cmd->add_option("--variant", variant_override, "retriever variant name");

    auto* augment_cmd = app.add_subcommand("augment", "rewrite and expand a question");
    augment_cmd->add_option("--question", question_text, "question text")->required();

    auto* refine_cmd = app.add_subcommand("refine", "retrieve and refine knowledge");
    refine_cmd->add_option("--question", question_text, "question text")->required();

    auto* answer_cmd = app.add_subcommand("answer", "answer one dataset question");
    answer_cmd->add_option("--questions", questions_path, "question JSONL")->required();
    answer_cmd->add_option("--id", question_id, "question_id to answer")->required();

    auto* eval_cmd = app.add_subcommand("eval", "score a whole dataset");
    eval_cmd->add_option("--questions", questions_path, "question JSONL")->required();
    eval_cmd->add_option("--csv", csv_path, "write the per-question CSV here");
    eval_cmd->add_option("--json", json_path, "write the full run JSON here");

    auto* ablate_cmd = app.add_subcommand("ablate", "stage-toggle and variant grid");
    ablate_cmd->add_option("--questions", questions_path, "question JSONL")->required();
    ablate_cmd->add_option("--markdown", md_path, "write the markdown table here");
    ablate_cmd->add_option("--csv", csv_path, "write the CSV table here");

    auto* mine_cmd = app.add_subcommand("mine", "mine weak-supervision training examples");
    mine_cmd->add_option("--questions", questions_path, "question JSONL")->required();
    mine_cmd->add_option("--out", out_path, "training example JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        CliConfig cfg = load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (!cache_dir_override.empty()) cfg.cache_dir = cache_dir_override;

        auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();

        if (dry_run) {
            // Validate whatever the subcommand would read, then stop before any
            // provider is constructed.
            json stages = json::array();
            if (cfg.toggles.retriever) {
                if (cfg.toggles.rewrite || cfg.toggles.expand) stages.push_back("augment");
                stages.push_back("retrieve:" + variant_name(cfg.toggles.variant));
                stages.push_back("refine");
            }
            stages.push_back("reader");
            stages.push_back("parse");
            json plan = {{"subcommand", name},
                         {"dry_run", true},
                         {"seed", cfg.seed},
                         {"stages", stages},
                         {"provider_kind", cfg.provider_kind}};
            if (name == "ingest") {
                plan["docs"] = docs_path.string();
                if (!std::filesystem::exists(docs_path))
                    throw amt::DataError("docs file does not exist: " + docs_path.string());
            } else if (name != "index") {
                plan["store_dir"] = require_dir(cfg.store_dir, "store_dir").string();
            }
            if (!questions_path.empty()) {
                plan["questions"] = questions_path.string();
                plan["question_count"] = amt::load_dataset(questions_path).size();
            }
            amt::PromptLibrary::load(cfg.prompts_dir);
            plan["provider_calls"] = 0;
            std::cout << plan.dump(2) << "\n";
            return kExitOk;
        }

        if (name == "ingest") {
            auto docs = amt::read_document_file(docs_path);
            amt::IngestConfig icfg;
            amt::IngestReport report;
            auto store = amt::ingest(docs, icfg, &report);
            auto dir = require_dir(cfg.store_dir, "store_dir");
            std::filesystem::create_directories(dir);
            store.save(dir);
            json out = {{"documents", report.documents},
                        {"chunks", report.chunks},
                        {"skipped_empty", report.skipped_empty},
                        {"oversize_splits", report.oversize_splits},
                        {"store_dir", dir.string()}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (name == "index") {
            auto store = load_store(cfg);
            auto providers = make_providers(cfg);
            json out = {{"chunks", store.size()}};
            if (what == "sparse" || what == "both") {
                auto dir = require_dir(cfg.sparse_dir, "sparse_dir");
                std::filesystem::create_directories(dir);
                amt::SparseIndex::build(store, *providers.sparse).save(dir);
                out["sparse_dir"] = dir.string();
            }
            if (what == "dense" || what == "both") {
                auto dir = require_dir(cfg.dense_dir, "dense_dir");
                std::filesystem::create_directories(dir);
                amt::DenseIndex::build(store, *providers.dense).save(dir);
                out["dense_dir"] = dir.string();
            }
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        auto stack = load_stack(cfg);

        if (name == "search") {
            auto variant = variant_override.empty() ? cfg.toggles.variant
                                                    : amt::variant_from_name(variant_override);
            amt::AugmentedQuery aq;
            aq.original = aq.concatenated = query;
            auto results = stack.retriever->retrieve_variant(variant, aq, cfg.params);
            std::cout << passages_json(results).dump(2) << "\n";
            return kExitOk;
        }

        if (name == "augment") {
            amt::Augmenter augmenter(*stack.providers.chat, *stack.prompts);
            auto aq = augmenter.augment(question_text,
                                        {cfg.toggles.rewrite, cfg.toggles.expand});
            json out = {{"original", aq.original},
                        {"rewritten", aq.rewritten},
                        {"expanded", aq.expanded},
                        {"concatenated", aq.concatenated},
                        {"rewrite_fallback", aq.rewrite_fallback},
                        {"expand_fallback", aq.expand_fallback}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (name == "refine") {
            amt::Augmenter augmenter(*stack.providers.chat, *stack.prompts);
            auto aq = augmenter.augment(question_text,
                                        {cfg.toggles.rewrite, cfg.toggles.expand});
            auto passages = stack.retriever->retrieve(aq, cfg.params);
            amt::Refiner refiner(*stack.providers.chat, *stack.prompts, cfg.refiner);
            auto refined = refiner.refine(question_text, passages,
                                          {cfg.toggles.relevance, cfg.toggles.usefulness});
            json segs = json::array();
            for (const auto& s : refined.segments) {
                segs.push_back({{"source_chunk_id", s.source_chunk_id},
                                {"text", s.text},
                                {"word_count", s.word_count},
                                {"oversize", s.oversize}});
            }
            json out = {{"segments", segs},
                        {"text", refined.text},
                        {"empty_evidence", refined.empty_evidence},
                        {"parse_warnings", refined.parse_warnings}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        amt::Pipeline pipeline(*stack.providers.chat, *stack.prompts, stack.retriever.get(),
                               cfg.params, cfg.refiner);
        auto questions = amt::load_dataset(questions_path);

        if (name == "answer") {
            auto question = pick_question(questions, question_id);
            amt::AnswerTrace trace;
            auto answer = pipeline.answer(question, cfg.toggles, &trace);
            json stages = json::array();
            for (const auto& s : trace.stages) stages.push_back(s.stage);
            json out = {{"question_id", question.question_id},
                        {"parsed", answer.parsed_label ? std::string(1, *answer.parsed_label)
                                                       : ""},
                        {"gold", std::string(1, question.gold)},
                        {"correct",
                         answer.parsed_label && *answer.parsed_label == question.gold},
                        {"parse_path", answer.parse_path},
                        {"raw_completion", answer.raw_completion},
                        {"stages", stages}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (name == "eval") {
            auto run = amt::evaluate(questions, pipeline, cfg.toggles, cfg.params);
            if (!csv_path.empty()) write_text(csv_path, run.to_csv());
            if (!json_path.empty()) write_text(json_path, run.to_json());
            json out = {{"count", run.count},
                        {"correct", run.correct},
                        {"accuracy", run.accuracy},
                        {"config_digest", run.config_digest}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (name == "ablate") {
            auto rows = amt::ablation_matrix(questions, pipeline, cfg.toggles, cfg.params);
            auto md = amt::ablation_markdown(rows);
            if (!md_path.empty()) write_text(md_path, md);
            if (!csv_path.empty()) write_text(csv_path, amt::ablation_csv(rows));
            std::cout << md;
            return kExitOk;
        }

        if (name == "mine") {
            amt::MiningConfig mcfg;
            mcfg.params = cfg.params;
            mcfg.easy_negatives = cfg.easy_negatives;
            mcfg.seed = cfg.seed;
            amt::MiningReport report;
            auto examples = amt::mine_training_examples(questions, *stack.retriever,
                                                        *stack.providers.chat, *stack.prompts,
                                                        mcfg, &report);
            amt::write_training_examples(examples, out_path);
            json out = {{"mined", report.mined},
                        {"skipped_correct_closed_book", report.skipped_correct_closed_book},
                        {"out", out_path.string()}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        std::cerr << "unhandled subcommand: " << name << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << json({{"error", "config"}, {"message", e.what()}}).dump() << "\n";
        return kExitConfig;
    } catch (const amt::TransportError& e) {
        std::cerr << json({{"error", "transport"},
                           {"message", e.what()},
                           {"attempts", e.attempts}})
                         .dump()
                  << "\n";
        return kExitProvider;
    } catch (const amt::ProviderError& e) {
        std::cerr << json({{"error", "provider"}, {"message", e.what()}, {"status", e.status}})
                         .dump()
                  << "\n";
        return kExitProvider;
    } catch (const amt::DataError& e) {
        std::cerr << json({{"error", "data"}, {"message", e.what()}}).dump() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << json({{"error", "config"}, {"message", e.what()}}).dump() << "\n";
        return kExitConfig;
    }
}
