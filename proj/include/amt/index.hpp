#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "amt/corpus.hpp"
#include "amt/providers.hpp"

namespace amt {

// A scored hit by chunk position in the store the index was built over.
struct Hit {
    std::size_t chunk = 0;
    double score = 0.0;
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

// Impact-quantized inverted index. Each posting carries the 8-bit quantized
// encoder weight plus the raw term frequency, so BM25 runs over the same
// lists. Postings are sorted by chunk position; weights are linearly scaled
// into 1..255 against the per-index maximum.
class SparseIndex {
public:
    struct Posting {
        std::uint32_t chunk;
        std::uint8_t qweight;
        std::uint32_t tf;
    };

    static SparseIndex build(const ChunkStore& store, SparseEncoder& encoder);

    // Impact scoring: sum over terms of query_weight * dequantized doc weight.
    std::vector<Hit> search(const SparseWeights& query, std::size_t depth,
                            const ChunkStore& store) const;

    // BM25 over the stored raw term frequencies; idf = ln(1 + (N-df+0.5)/(df+0.5)),
    // each distinct query term counted once.
    std::vector<Hit> bm25(const std::map<std::uint32_t, std::uint32_t>& query_terms,
                          std::size_t depth, Bm25Params params, const ChunkStore& store) const;

    float max_weight() const { return max_weight_; }
    float dequantize(std::uint8_t q) const { return q / 255.0f * max_weight_; }
    std::size_t doc_count() const { return doc_lengths_.size(); }
    const std::map<std::uint32_t, std::vector<Posting>>& lists() const { return lists_; }

    void save(const std::filesystem::path& dir) const;
    static SparseIndex load(const std::filesystem::path& dir);

private:
    std::map<std::uint32_t, std::vector<Posting>> lists_;
    std::vector<std::uint32_t> doc_lengths_;  // sum of raw tf per chunk
    double avg_doc_length_ = 0.0;
    float max_weight_ = 0.0f;
};

// Exact inner-product k-NN over a row-major matrix of chunk vectors.
class DenseIndex {
public:
    static DenseIndex build(const ChunkStore& store, DenseEmbedder& embedder);

    std::vector<Hit> search(const DenseVector& query, std::size_t depth,
                            const ChunkStore& store) const;

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ ? data_.size() / dim_ : 0; }

    void save(const std::filesystem::path& dir) const;
    static DenseIndex load(const std::filesystem::path& dir);

private:
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

// Shared top-`depth` selection: score descending, ties by ascending chunk_id.
std::vector<Hit> top_hits(std::vector<Hit> scored, std::size_t depth, const ChunkStore& store);

}  // namespace amt
