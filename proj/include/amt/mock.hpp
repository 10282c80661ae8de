#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <unordered_map>

#include "amt/providers.hpp"

namespace amt {

// splitmix64: platform-independent generator for mock outputs (libstdc++
// distributions are not portable across implementations).
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [-1, 1)
    double next_signed_unit() {
        return static_cast<double>(next() >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    }
    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
};

// Scripted chat provider. Lookup order: exact filled_prompt in the script
// table, then the handler if set, then a deterministic hash-derived fallback.
class MockChat : public ChatProvider {
public:
    using Handler = std::function<std::optional<std::string>(const ChatRequest&)>;

    explicit MockChat(std::uint64_t seed = 0) : seed_(seed) {}
    MockChat(MockChat&& other) noexcept
        : seed_(other.seed_),
          table_(std::move(other.table_)),
          handler_(std::move(other.handler_)),
          calls_(other.calls_.load()) {}

    void script(std::string prompt, std::string completion) {
        table_[std::move(prompt)] = std::move(completion);
    }
    void set_handler(Handler handler) { handler_ = std::move(handler); }

    std::string complete(const ChatRequest& request) override {
        ++calls_;
        if (auto it = table_.find(request.filled_prompt); it != table_.end()) return it->second;
        if (handler_) {
            if (auto out = handler_(request)) return *out;
        }
        return fallback(request.filled_prompt, seed_);
    }

    static std::string fallback(std::string_view prompt, std::uint64_t seed) {
        return "mock-completion-" + hex64(fnv1a64(prompt, 0xcbf29ce484222325ULL ^ seed));
    }

    std::uint64_t calls() const { return calls_; }

private:
    std::uint64_t seed_;
    std::unordered_map<std::string, std::string> table_;
    Handler handler_;
    std::atomic<std::uint64_t> calls_{0};
};

// Unit-norm vector keyed on (text, seed); identical text gives identical output.
class MockDenseEmbedder : public DenseEmbedder {
public:
    explicit MockDenseEmbedder(std::size_t dim = 768, std::uint64_t seed = 0)
        : dim_(dim), seed_(seed) {}
    MockDenseEmbedder(MockDenseEmbedder&& other) noexcept
        : dim_(other.dim_), seed_(other.seed_), calls_(other.calls_.load()) {}

    std::size_t dim() const override { return dim_; }

    std::vector<DenseVector> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw ProviderError("embed_dense: empty input list");
        calls_ += texts.size();
        std::vector<DenseVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed_one(t));
        return out;
    }

    DenseVector embed_one(std::string_view text) const {
        SplitMix64 rng(fnv1a64(text) ^ seed_);
        DenseVector v(dim_);
        double norm2 = 0.0;
        for (auto& x : v) {
            x = static_cast<float>(rng.next_signed_unit());
            norm2 += static_cast<double>(x) * x;
        }
        double inv = norm2 > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
        for (auto& x : v) x = static_cast<float>(x * inv);
        return v;
    }

    std::uint64_t calls() const { return calls_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::atomic<std::uint64_t> calls_{0};
};

// Maps each distinct lowercased token to fnv(token, seed) % vocab with weight
// 1 + log(1 + tf). Hash collisions keep the max weight (max aggregation).
class MockSparseEncoder : public SparseEncoder {
public:
    explicit MockSparseEncoder(std::size_t vocab = 30000, std::uint64_t seed = 0,
                               Lang lang = Lang::Latin)
        : vocab_(vocab), seed_(seed), lang_(lang) {}
    MockSparseEncoder(MockSparseEncoder&& other) noexcept
        : vocab_(other.vocab_),
          seed_(other.seed_),
          lang_(other.lang_),
          calls_(other.calls_.load()) {}

    std::size_t vocab_size() const override { return vocab_; }

    std::uint32_t term_id(std::string_view token) const {
        return static_cast<std::uint32_t>(fnv1a64(lowercase(token), seed_ ^ 0x5eed) % vocab_);
    }

    std::vector<SparseWeights> encode(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw ProviderError("embed_sparse: empty input list");
        calls_ += texts.size();
        std::vector<SparseWeights> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(encode_one(t));
        return out;
    }

    SparseWeights encode_one(const std::string& text) const {
        SparseWeights weights;
        for (const auto& [token, tf] : token_frequencies(text)) {
            auto id = term_id(token);
            float w = static_cast<float>(1.0 + std::log(1.0 + tf));
            auto it = weights.find(id);
            if (it == weights.end() || it->second < w) weights[id] = w;
        }
        return weights;
    }

    std::map<std::uint32_t, std::uint32_t> term_counts(const std::string& text) override {
        std::map<std::uint32_t, std::uint32_t> counts;
        for (const auto& [token, tf] : token_frequencies(text)) counts[term_id(token)] += tf;
        return counts;
    }

    std::map<std::string, std::uint32_t> token_frequencies(const std::string& text) const {
        std::map<std::string, std::uint32_t> tf;
        for (const auto& token : tokenize(text, lang_)) tf[lowercase(token)] += 1;
        return tf;
    }

    std::uint64_t calls() const { return calls_; }

private:
    std::size_t vocab_;
    std::uint64_t seed_;
    Lang lang_;
    std::atomic<std::uint64_t> calls_{0};
};

// Cosine similarity of mock dense embeddings of the truncated pair.
class MockPairScorer : public PairScorer {
public:
    MockPairScorer(const MockDenseEmbedder& embedder, TruncationConfig truncation = {},
                   Lang lang = Lang::Latin)
        : embedder_(embedder), truncation_(truncation), lang_(lang) {}
    MockPairScorer(MockPairScorer&& other) noexcept
        : embedder_(other.embedder_),
          truncation_(other.truncation_),
          lang_(other.lang_),
          calls_(other.calls_.load()) {}

    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& passages) override {
        std::vector<double> scores;
        scores.reserve(passages.size());
        auto q = embedder_.embed_one(truncate_words(query, truncation_.query_cap(), lang_));
        for (const auto& p : passages) {
            auto d = embedder_.embed_one(truncate_words(p, truncation_.passage_cap(), lang_));
            double dot = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) dot += static_cast<double>(q[i]) * d[i];
            scores.push_back(dot);
        }
        calls_ += passages.size();
        return scores;
    }

    std::uint64_t calls() const { return calls_; }

private:
    const MockDenseEmbedder& embedder_;
    TruncationConfig truncation_;
    Lang lang_;
    std::atomic<std::uint64_t> calls_{0};
};

}  // namespace amt
