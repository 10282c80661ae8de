#include "amt/eval.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace amt {

using nlohmann::json;

std::vector<McQuestion> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset: " + path.string());
    std::vector<McQuestion> questions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fail = [&](const std::string& what) -> DataError {
            return DataError("dataset line " + std::to_string(line_no) + ": " + what);
        };
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw fail(e.what());
        }
        McQuestion q;
        for (const char* field : {"question_id", "stem", "options", "gold", "dataset_tag"}) {
            if (!rec.contains(field)) throw fail(std::string("missing field ") + field);
        }
        q.question_id = rec.at("question_id").get<std::string>();
        q.stem = rec.at("stem").get<std::string>();
        for (auto it = rec.at("options").begin(); it != rec.at("options").end(); ++it) {
            if (it.key().size() != 1) throw fail("bad option label " + it.key());
            q.options.emplace_back(it.key()[0], it.value().get<std::string>());
        }
        std::sort(q.options.begin(), q.options.end());
        auto gold = rec.at("gold").get<std::string>();
        if (gold.size() != 1) throw fail("bad gold label " + gold);
        q.gold = gold[0];
        q.tag = dataset_tag_from_name(rec.at("dataset_tag").get<std::string>());
        try {
            q.validate();
        } catch (const std::exception& e) {
            throw fail(e.what());
        }
        questions.push_back(std::move(q));
    }
    return questions;
}

std::string toggles_digest(const StageToggles& toggles, const RetrievalParams& params) {
    std::ostringstream material;
    material << toggles.retriever << variant_name(toggles.variant) << toggles.rewrite
             << toggles.expand << toggles.relevance << toggles.usefulness << '|'
             << params.sparse_depth << ',' << params.dense_depth << ',' << params.final_depth
             << ',' << params.bm25_depth << ',' << params.bm25.k1 << ',' << params.bm25.b;
    return hex64(fnv1a64(material.str()));
}

EvalRun evaluate(const std::vector<McQuestion>& questions, const Pipeline& pipeline,
                 const StageToggles& toggles, const RetrievalParams& params,
                 const std::function<std::uint64_t()>& chat_call_counter) {
    EvalRun run;
    run.config_digest = toggles_digest(toggles, params);
    if (!questions.empty()) run.dataset_tag = dataset_tag_name(questions.front().tag);
    std::uint64_t calls_before = chat_call_counter ? chat_call_counter() : 0;

    for (const auto& question : questions) {
        QuestionResult result;
        result.question_id = question.question_id;
        result.gold = question.gold;
        AnswerTrace trace;
        try {
            auto answer = pipeline.answer(question, toggles, &trace);
            result.parsed_label = answer.parsed_label;
            result.correct = answer.parsed_label && *answer.parsed_label == question.gold;
        } catch (const std::exception& e) {
            result.error = e.what();
            result.correct = false;
        }
        result.trace_digest = trace.digest();
        run.count += 1;
        if (result.correct) run.correct += 1;
        run.per_question.push_back(std::move(result));
    }
    run.accuracy = run.count ? static_cast<double>(run.correct) / run.count : 0.0;
    if (chat_call_counter) run.chat_calls = chat_call_counter() - calls_before;
    return run;
}

std::string EvalRun::to_csv() const {
    std::ostringstream out;
    out << "question_id,parsed,gold,correct,trace_digest,error\n";
    for (const auto& r : per_question) {
        out << r.question_id << ',' << (r.parsed_label ? std::string(1, *r.parsed_label) : "-")
            << ',' << r.gold << ',' << (r.correct ? 1 : 0) << ',' << r.trace_digest << ','
            << r.error << '\n';
    }
    out << "TOTAL," << correct << '/' << count << ",,,," << '\n';
    return out.str();
}

std::string EvalRun::to_json() const {
    json per = json::array();
    for (const auto& r : per_question) {
        per.push_back({{"question_id", r.question_id},
                       {"parsed", r.parsed_label ? std::string(1, *r.parsed_label) : ""},
                       {"gold", std::string(1, r.gold)},
                       {"correct", r.correct},
                       {"trace_digest", r.trace_digest},
                       {"error", r.error}});
    }
    json rec = {{"config_digest", config_digest}, {"dataset_tag", dataset_tag},
                {"count", count},                 {"correct", correct},
                {"accuracy", accuracy},           {"chat_calls", chat_calls},
                {"per_question", per}};
    return rec.dump(2);
}

std::vector<AblationRow> ablation_matrix(const std::vector<McQuestion>& questions,
                                         const Pipeline& pipeline, const StageToggles& base,
                                         const RetrievalParams& params,
                                         const std::function<std::uint64_t()>& counter) {
    std::vector<AblationRow> rows;

    // 8 on/off combinations of {retriever, augmenter, refiner}
    for (int retriever = 0; retriever < 2; ++retriever) {
        for (int augmenter = 0; augmenter < 2; ++augmenter) {
            for (int refiner = 0; refiner < 2; ++refiner) {
                StageToggles t = base;
                t.retriever = retriever;
                t.rewrite = t.expand = augmenter;
                t.relevance = t.usefulness = refiner;
                std::string name = std::string("retriever=") + (retriever ? "on" : "off") +
                                   " augmenter=" + (augmenter ? "on" : "off") +
                                   " refiner=" + (refiner ? "on" : "off");
                rows.push_back({name, evaluate(questions, pipeline, t, params, counter)});
            }
        }
    }

    // 7 retriever-variant rows with the base toggles, retriever forced on
    for (auto v : {RetrieverVariant::Bm25, RetrieverVariant::Sparse, RetrieverVariant::Dense,
                   RetrieverVariant::SparseDense, RetrieverVariant::SparseRerank,
                   RetrieverVariant::DenseRerank, RetrieverVariant::Hybrid}) {
        StageToggles t = base;
        t.retriever = true;
        t.variant = v;
        rows.push_back({"variant=" + variant_name(v),
                        evaluate(questions, pipeline, t, params, counter)});
    }
    return rows;
}

std::string ablation_markdown(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "| configuration | correct | count | accuracy |\n";
    out << "|---|---|---|---|\n";
    for (const auto& row : rows) {
        out << "| " << row.name << " | " << row.run.correct << " | " << row.run.count << " | "
            << row.run.correct << "/" << row.run.count << " |\n";
    }
    return out.str();
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "configuration,correct,count,accuracy\n";
    for (const auto& row : rows) {
        out << row.name << ',' << row.run.correct << ',' << row.run.count << ','
            << row.run.correct << '/' << row.run.count << '\n';
    }
    return out.str();
}

}  // namespace amt
