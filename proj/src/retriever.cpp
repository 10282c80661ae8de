#include "amt/retriever.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <stdexcept>

namespace amt {

namespace {

using Clock = std::chrono::steady_clock;

void record(RetrievalTrace* trace, const std::string& stage, Clock::time_point begin,
            std::size_t results) {
    if (!trace) return;
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - begin);
    trace->stages.push_back({stage, micros.count(), results});
}

}  // namespace

std::string stage_name(Stage stage) {
    switch (stage) {
        case Stage::Bm25: return "bm25";
        case Stage::Sparse: return "sparse";
        case Stage::Dense: return "dense";
        case Stage::Fused: return "fused";
        case Stage::Reranked: return "reranked";
    }
    return "unknown";
}

void RetrievalParams::validate() const {
    if (sparse_depth < 1 || dense_depth < 1 || final_depth < 1 || bm25_depth < 1) {
        throw std::invalid_argument("retrieval params: i, j, k, n must all be >= 1");
    }
    if (final_depth > sparse_depth + dense_depth) {
        throw std::invalid_argument("retrieval params: k must be <= i + j");
    }
}

std::string variant_name(RetrieverVariant v) {
    switch (v) {
        case RetrieverVariant::Bm25: return "bm25";
        case RetrieverVariant::Sparse: return "sparse";
        case RetrieverVariant::Dense: return "dense";
        case RetrieverVariant::SparseDense: return "sparse+dense";
        case RetrieverVariant::SparseRerank: return "sparse+rerank";
        case RetrieverVariant::DenseRerank: return "dense+rerank";
        case RetrieverVariant::Hybrid: return "hybtextr";
    }
    return "unknown";
}

RetrieverVariant variant_from_name(const std::string& name) {
    for (auto v : {RetrieverVariant::Bm25, RetrieverVariant::Sparse, RetrieverVariant::Dense,
                   RetrieverVariant::SparseDense, RetrieverVariant::SparseRerank,
                   RetrieverVariant::DenseRerank, RetrieverVariant::Hybrid}) {
        if (variant_name(v) == name) return v;
    }
    throw std::invalid_argument("unknown retriever variant: " + name);
}

namespace {

std::vector<ScoredPassage> to_passages(const std::vector<Hit>& hits, const ChunkStore& store,
                                       Stage stage) {
    std::vector<ScoredPassage> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        const auto& c = store.at(h.chunk);
        out.push_back({c.chunk_id, c.text, h.score, stage});
    }
    return out;
}

}  // namespace

std::vector<ScoredPassage> Retriever::sparse_search(const std::string& query,
                                                    std::size_t depth) const {
    auto weights = sparse_encoder_.encode({query}).at(0);
    return to_passages(sparse_index_.search(weights, depth, store_), store_, Stage::Sparse);
}

std::vector<ScoredPassage> Retriever::dense_search(const std::string& query,
                                                   std::size_t depth) const {
    auto vec = dense_embedder_.embed({query}).at(0);
    return to_passages(dense_index_.search(vec, depth, store_), store_, Stage::Dense);
}

std::vector<ScoredPassage> Retriever::bm25_search(const std::string& query, std::size_t depth,
                                                  Bm25Params params) const {
    auto terms = sparse_encoder_.term_counts(query);
    return to_passages(sparse_index_.bm25(terms, depth, params, store_), store_, Stage::Bm25);
}

std::vector<ScoredPassage> fuse(const std::vector<ScoredPassage>& sparse_results,
                                const std::vector<ScoredPassage>& dense_results) {
    std::map<std::string, const ScoredPassage*> by_id;
    for (const auto& p : sparse_results) by_id.emplace(p.chunk_id, &p);
    for (const auto& p : dense_results) by_id.emplace(p.chunk_id, &p);
    std::vector<ScoredPassage> out;
    out.reserve(by_id.size());
    for (const auto& [id, p] : by_id) out.push_back({id, p->text, 0.0, Stage::Fused});
    return out;
}

std::vector<ScoredPassage> interleave_by_rank(const std::vector<ScoredPassage>& sparse_results,
                                              const std::vector<ScoredPassage>& dense_results,
                                              std::size_t depth) {
    std::vector<ScoredPassage> out;
    std::map<std::string, bool> seen;
    std::size_t rank = 0;
    while (out.size() < depth &&
           (rank < sparse_results.size() || rank < dense_results.size())) {
        for (const auto* list : {&sparse_results, &dense_results}) {
            if (rank >= list->size() || out.size() >= depth) continue;
            const auto& p = (*list)[rank];
            if (seen.emplace(p.chunk_id, true).second) {
                out.push_back({p.chunk_id, p.text, 0.0, Stage::Fused});
            }
        }
        ++rank;
    }
    return out;
}

std::vector<ScoredPassage> Retriever::rerank(const std::string& query,
                                             std::vector<ScoredPassage> fused,
                                             std::size_t depth) const {
    if (fused.empty()) return {};
    std::vector<std::string> texts;
    texts.reserve(fused.size());
    for (const auto& p : fused) texts.push_back(p.text);
    std::vector<double> scores;
    try {
        scores = scorer_.score(query, texts);
    } catch (const std::exception& e) {
        throw ProviderError("rerank failed for query \"" + query + "\": " + e.what());
    }
    for (std::size_t i = 0; i < fused.size(); ++i) {
        fused[i].score = scores[i];
        fused[i].stage = Stage::Reranked;
    }
    std::stable_sort(fused.begin(), fused.end(), [](const ScoredPassage& a, const ScoredPassage& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (fused.size() > depth) fused.resize(depth);
    return fused;
}

std::vector<ScoredPassage> Retriever::retrieve(const AugmentedQuery& query,
                                               const RetrievalParams& p,
                                               RetrievalTrace* trace) const {
    return retrieve_variant(RetrieverVariant::Hybrid, query, p, trace);
}

std::vector<ScoredPassage> Retriever::retrieve_variant(RetrieverVariant variant,
                                                       const AugmentedQuery& query,
                                                       const RetrievalParams& p,
                                                       RetrievalTrace* trace) const {
    p.validate();
    const std::string& q = query.concatenated.empty() ? query.original : query.concatenated;
    auto begin = Clock::now();
    switch (variant) {
        case RetrieverVariant::Bm25: {
            auto out = bm25_search(q, p.final_depth, p.bm25);
            record(trace, "bm25", begin, out.size());
            return out;
        }
        case RetrieverVariant::Sparse: {
            auto out = sparse_search(q, p.final_depth);
            record(trace, "sparse", begin, out.size());
            return out;
        }
        case RetrieverVariant::Dense: {
            auto out = dense_search(q, p.final_depth);
            record(trace, "dense", begin, out.size());
            return out;
        }
        case RetrieverVariant::SparseDense: {
            auto s = sparse_search(q, p.sparse_depth);
            record(trace, "sparse", begin, s.size());
            begin = Clock::now();
            auto d = dense_search(q, p.dense_depth);
            record(trace, "dense", begin, d.size());
            begin = Clock::now();
            auto out = interleave_by_rank(s, d, p.final_depth);
            record(trace, "interleave", begin, out.size());
            return out;
        }
        case RetrieverVariant::SparseRerank: {
            auto s = sparse_search(q, p.sparse_depth);
            record(trace, "sparse", begin, s.size());
            begin = Clock::now();
            auto out = rerank(q, std::move(s), p.final_depth);
            record(trace, "rerank", begin, out.size());
            return out;
        }
        case RetrieverVariant::DenseRerank: {
            auto d = dense_search(q, p.dense_depth);
            record(trace, "dense", begin, d.size());
            begin = Clock::now();
            auto out = rerank(q, std::move(d), p.final_depth);
            record(trace, "rerank", begin, out.size());
            return out;
        }
        case RetrieverVariant::Hybrid: {
            auto s = sparse_search(q, p.sparse_depth);
            record(trace, "sparse", begin, s.size());
            begin = Clock::now();
            auto d = dense_search(q, p.dense_depth);
            record(trace, "dense", begin, d.size());
            begin = Clock::now();
            auto fused = fuse(s, d);
            record(trace, "fuse", begin, fused.size());
            begin = Clock::now();
            auto out = rerank(q, std::move(fused), p.final_depth);
            record(trace, "rerank", begin, out.size());
            return out;
        }
    }
    throw std::invalid_argument("unknown retriever variant");
}

}  // namespace amt
