#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "amt/text.hpp"

namespace amt {

enum class TemplateId { Rewrite, Expand, Relevance, Usefulness, Reader };

std::string template_id_name(TemplateId id);

struct ChatRequest {
    TemplateId template_id = TemplateId::Reader;
    std::string filled_prompt;
    double temperature = 0.0;
    int max_output_tokens = 1024;
};

using DenseVector = std::vector<float>;
// term-id -> weight; entries are strictly positive by construction.
using SparseWeights = std::map<std::uint32_t, float>;

struct ProviderError : std::runtime_error {
    int status;
    explicit ProviderError(const std::string& msg, int status_code = 0)
        : std::runtime_error(msg), status(status_code) {}
};

struct TransportError : std::runtime_error {
    int attempts;
    explicit TransportError(const std::string& msg, int attempt_count)
        : std::runtime_error(msg), attempts(attempt_count) {}
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

class DenseEmbedder {
public:
    virtual ~DenseEmbedder() = default;
    virtual std::size_t dim() const = 0;
    // Order-preserving, one vector per input. Empty input is a contract violation.
    virtual std::vector<DenseVector> embed(const std::vector<std::string>& texts) = 0;
};

class SparseEncoder {
public:
    virtual ~SparseEncoder() = default;
    virtual std::size_t vocab_size() const = 0;
    virtual std::vector<SparseWeights> encode(const std::vector<std::string>& texts) = 0;
    // Raw term frequencies in the encoder's term-id space; stored alongside the
    // impact postings so BM25 can run over the same inverted lists.
    virtual std::map<std::uint32_t, std::uint32_t> term_counts(const std::string& text) = 0;
};

class PairScorer {
public:
    virtual ~PairScorer() = default;
    // One finite score per passage, order-preserving, higher = more relevant.
    virtual std::vector<double> score(const std::string& query,
                                      const std::vector<std::string>& passages) = 0;
};

// Reranker input caps ("126+384" subword budget). Whitespace tokens run
// shorter than subwords, so the caps are shrunk by `subword_multiplier`.
struct TruncationConfig {
    std::size_t query_tokens = 126;
    std::size_t passage_tokens = 384;
    double subword_multiplier = 1.3;

    std::size_t query_cap() const {
        return static_cast<std::size_t>(query_tokens / subword_multiplier);
    }
    std::size_t passage_cap() const {
        return static_cast<std::size_t>(passage_tokens / subword_multiplier);
    }
};

struct ProviderConfig {
    std::string endpoint;             // e.g. "http://localhost:8080"
    std::string auth_env_var;         // env var holding the API secret
    double timeout_seconds = 30.0;
    int retry_budget = 2;
    std::string cache_dir;            // empty disables caching
    std::size_t max_in_flight = 8;
    TruncationConfig truncation;
};

}  // namespace amt
