#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amt/augment.hpp"
#include "amt/index.hpp"

namespace amt {

enum class Stage { Bm25, Sparse, Dense, Fused, Reranked };

std::string stage_name(Stage stage);

struct ScoredPassage {
    std::string chunk_id;
    std::string text;
    double score = 0.0;
    Stage stage = Stage::Fused;
};

struct RetrievalParams {
    std::size_t sparse_depth = 32;   // i
    std::size_t dense_depth = 32;    // j
    std::size_t final_depth = 32;    // k
    std::size_t bm25_depth = 32;     // n, weak-supervision recall
    Bm25Params bm25;

    void validate() const;  // i,j,k,n >= 1 and k <= i + j
};

// First-phase retrieval flavor; Hybrid = sparse + dense + fuse + rerank.
enum class RetrieverVariant {
    Bm25,
    Sparse,
    Dense,
    SparseDense,
    SparseRerank,
    DenseRerank,
    Hybrid,
};

std::string variant_name(RetrieverVariant v);
RetrieverVariant variant_from_name(const std::string& name);

struct StageTiming {
    std::string stage;
    long long micros = 0;
    std::size_t results = 0;
};

struct RetrievalTrace {
    std::vector<StageTiming> stages;
};

class Retriever {
public:
    Retriever(const ChunkStore& store, const SparseIndex& sparse_index,
              const DenseIndex& dense_index, SparseEncoder& sparse_encoder,
              DenseEmbedder& dense_embedder, PairScorer& scorer)
        : store_(store),
          sparse_index_(sparse_index),
          dense_index_(dense_index),
          sparse_encoder_(sparse_encoder),
          dense_embedder_(dense_embedder),
          scorer_(scorer) {}

    std::vector<ScoredPassage> sparse_search(const std::string& query, std::size_t depth) const;
    std::vector<ScoredPassage> dense_search(const std::string& query, std::size_t depth) const;
    std::vector<ScoredPassage> bm25_search(const std::string& query, std::size_t depth,
                                           Bm25Params params) const;
    std::vector<ScoredPassage> rerank(const std::string& query,
                                      std::vector<ScoredPassage> fused, std::size_t depth) const;

    // Full HybTextR: sparse(i) + dense(j) -> fuse -> rerank(k) over the
    // concatenated augmented query.
    std::vector<ScoredPassage> retrieve(const AugmentedQuery& query, const RetrievalParams& p,
                                        RetrievalTrace* trace = nullptr) const;

    // Ablation rows: first-phase variant wired per Table-style configurations.
    std::vector<ScoredPassage> retrieve_variant(RetrieverVariant variant,
                                                const AugmentedQuery& query,
                                                const RetrievalParams& p,
                                                RetrievalTrace* trace = nullptr) const;

    const ChunkStore& store() const { return store_; }

private:
    const ChunkStore& store_;
    const SparseIndex& sparse_index_;
    const DenseIndex& dense_index_;
    SparseEncoder& sparse_encoder_;
    DenseEmbedder& dense_embedder_;
    PairScorer& scorer_;
};

// Set union by chunk_id; scores dropped, canonical chunk_id-ascending order.
std::vector<ScoredPassage> fuse(const std::vector<ScoredPassage>& sparse_results,
                                const std::vector<ScoredPassage>& dense_results);

// Scoreless rank-interleaving fusion (sparse first at each rank) with dedup;
// the "Sparse + Dense" row, where no reranker rescoring follows.
std::vector<ScoredPassage> interleave_by_rank(const std::vector<ScoredPassage>& sparse_results,
                                              const std::vector<ScoredPassage>& dense_results,
                                              std::size_t depth);

}  // namespace amt
