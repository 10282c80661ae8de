#pragma once

#include <memory>
#include <semaphore>

#include "amt/providers.hpp"

namespace amt {

// Thin JSON-over-HTTP client shared by the remote provider adapters. Applies
// the retry budget, the timeout, the bearer token from the configured env
// var, and the in-flight limiter.
class HttpJsonClient {
public:
    explicit HttpJsonClient(const ProviderConfig& config);
    ~HttpJsonClient();

    // POSTs `body` to `path`; returns the response body. Throws TransportError
    // once the retry budget is exhausted, ProviderError on a non-2xx status.
    std::string post(const std::string& path, const std::string& body);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// POST /v1/chat {"template_id","prompt","temperature","max_output_tokens"}
//   -> {"completion": "..."}
class HttpChat : public ChatProvider {
public:
    explicit HttpChat(const ProviderConfig& config);
    std::string complete(const ChatRequest& request) override;

private:
    HttpJsonClient client_;
};

// POST /v1/embed_dense {"texts":[...]} -> {"vectors":[[f,...],...]}
class HttpDenseEmbedder : public DenseEmbedder {
public:
    HttpDenseEmbedder(const ProviderConfig& config, std::size_t dim);
    std::size_t dim() const override { return dim_; }
    std::vector<DenseVector> embed(const std::vector<std::string>& texts) override;

private:
    HttpJsonClient client_;
    std::size_t dim_;
};

// POST /v1/embed_sparse {"texts":[...]} -> {"weights":[{"<term-id>":w,...},...]}
// POST /v1/term_counts {"text":"..."}   -> {"counts":{"<term-id>":tf,...}}
class HttpSparseEncoder : public SparseEncoder {
public:
    HttpSparseEncoder(const ProviderConfig& config, std::size_t vocab);
    std::size_t vocab_size() const override { return vocab_; }
    std::vector<SparseWeights> encode(const std::vector<std::string>& texts) override;
    std::map<std::uint32_t, std::uint32_t> term_counts(const std::string& text) override;

private:
    HttpJsonClient client_;
    std::size_t vocab_;
};

// POST /v1/score_pairs {"query":"...","passages":[...]} -> {"scores":[...]}
// Query and passages are truncated to the configured caps before transport.
class HttpPairScorer : public PairScorer {
public:
    explicit HttpPairScorer(const ProviderConfig& config, Lang lang = Lang::Latin);
    std::vector<double> score(const std::string& query,
                              const std::vector<std::string>& passages) override;

private:
    HttpJsonClient client_;
    TruncationConfig truncation_;
    Lang lang_;
};

}  // namespace amt
