#pragma once

// Shared fixtures and independent brute-force oracles for the test suites.
// The oracles deliberately avoid the library's index code paths: they rescore
// every chunk from the provider outputs directly.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "amt/corpus.hpp"
#include "amt/mock.hpp"

namespace amt::testing {

inline std::vector<Document> random_documents(std::size_t count, std::uint64_t seed,
                                              std::size_t max_sentences = 5) {
    static const char* vocab[] = {"renal",   "cardiac", "embolism", "biopsy",  "fever",
                                  "plaque",  "vessel",  "chronic",  "acute",   "lesion",
                                  "statin",  "cathether", "purpura", "eosinophil", "creatinine",
                                  "ischemia", "stenosis", "angina", "diagnosis", "therapy"};
    SplitMix64 rng(seed);
    std::vector<Document> docs;
    for (std::size_t d = 0; d < count; ++d) {
        std::string body;
        std::size_t sentences = 1 + rng.next() % max_sentences;
        for (std::size_t s = 0; s < sentences; ++s) {
            std::size_t len = 2 + rng.next() % 10;
            for (std::size_t w = 0; w < len; ++w) {
                if (w) body += " ";
                body += vocab[rng.next() % 20];
            }
            body += ". ";
        }
        docs.push_back({"doc" + std::to_string(d), "", body, Lang::Latin});
    }
    return docs;
}

inline ChunkStore random_store(std::size_t docs, std::uint64_t seed) {
    return ingest(random_documents(docs, seed), {});
}

struct OracleHit {
    std::string chunk_id;
    double score;
};

inline void sort_oracle(std::vector<OracleHit>& hits) {
    std::stable_sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
}

// Brute-force sparse scorer over quantized doc weights. Quantization is
// re-derived here from the encoder outputs, independent of SparseIndex.
inline std::vector<OracleHit> oracle_sparse(const ChunkStore& store, MockSparseEncoder& encoder,
                                            const std::string& query, std::size_t depth) {
    float max_w = 0.0f;
    std::vector<SparseWeights> encodings;
    for (const auto& c : store.chunks()) {
        encodings.push_back(encoder.encode_one(c.text));
        for (const auto& [t, w] : encodings.back()) max_w = std::max(max_w, w);
    }
    auto qw = encoder.encode_one(query);
    std::vector<OracleHit> hits;
    for (std::size_t i = 0; i < store.size(); ++i) {
        double score = 0.0;
        bool touched = false;
        for (const auto& [term, w] : encodings[i]) {
            auto it = qw.find(term);
            if (it == qw.end()) continue;
            auto q = static_cast<std::uint8_t>(
                std::clamp<long>(std::lround(w / max_w * 255.0f), 1, 255));
            score += double(it->second) * (q / 255.0f * max_w);
            touched = true;
        }
        if (touched) hits.push_back({store.at(i).chunk_id, score});
    }
    sort_oracle(hits);
    if (hits.size() > depth) hits.resize(depth);
    return hits;
}

// Textbook BM25 oracle computed from the encoder's term counts.
inline std::vector<OracleHit> oracle_bm25(const ChunkStore& store, MockSparseEncoder& encoder,
                                          const std::string& query, std::size_t depth,
                                          double k1 = 0.9, double b = 0.4) {
    std::vector<std::map<std::uint32_t, std::uint32_t>> counts;
    std::vector<double> lengths;
    double total = 0;
    for (const auto& c : store.chunks()) {
        counts.push_back(encoder.term_counts(c.text));
        double len = 0;
        for (const auto& [t, tf] : counts.back()) len += tf;
        lengths.push_back(len);
        total += len;
    }
    double avg = store.size() ? total / store.size() : 0;
    auto qterms = encoder.term_counts(query);

    std::vector<OracleHit> hits;
    for (std::size_t i = 0; i < store.size(); ++i) {
        double score = 0;
        bool touched = false;
        for (const auto& [term, qtf] : qterms) {
            auto it = counts[i].find(term);
            if (it == counts[i].end() || it->second == 0) continue;
            double df = 0;
            for (const auto& dc : counts) {
                if (dc.count(term) && dc.at(term) > 0) df += 1;
            }
            double idf = std::log(1.0 + (store.size() - df + 0.5) / (df + 0.5));
            double tf = it->second;
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * lengths[i] / avg));
            touched = true;
        }
        if (touched) hits.push_back({store.at(i).chunk_id, score});
    }
    sort_oracle(hits);
    if (hits.size() > depth) hits.resize(depth);
    return hits;
}

// Naive-loop dense oracle: inner product against every stored vector.
inline std::vector<OracleHit> oracle_dense(const ChunkStore& store, MockDenseEmbedder& embedder,
                                           const std::string& query, std::size_t depth) {
    auto q = embedder.embed_one(query);
    std::vector<OracleHit> hits;
    for (const auto& c : store.chunks()) {
        auto v = embedder.embed_one(c.text);
        double dot = 0;
        for (std::size_t i = 0; i < q.size(); ++i) dot += double(q[i]) * v[i];
        hits.push_back({c.chunk_id, dot});
    }
    sort_oracle(hits);
    if (hits.size() > depth) hits.resize(depth);
    return hits;
}

}  // namespace amt::testing
