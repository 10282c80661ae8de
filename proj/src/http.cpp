#include "amt/http.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace amt {

using nlohmann::json;

struct HttpJsonClient::Impl {
    httplib::Client client;
    int retry_budget;
    std::counting_semaphore<> limiter;

    Impl(const ProviderConfig& cfg)
        : client(cfg.endpoint),
          retry_budget(cfg.retry_budget),
          limiter(static_cast<std::ptrdiff_t>(cfg.max_in_flight ? cfg.max_in_flight : 1)) {
        auto seconds = static_cast<time_t>(cfg.timeout_seconds);
        auto micros = static_cast<time_t>((cfg.timeout_seconds - seconds) * 1e6);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        if (!cfg.auth_env_var.empty()) {
            if (const char* secret = std::getenv(cfg.auth_env_var.c_str())) {
                client.set_default_headers({{"Authorization", std::string("Bearer ") + secret}});
            }
        }
    }
};

HttpJsonClient::HttpJsonClient(const ProviderConfig& config)
    : impl_(std::make_unique<Impl>(config)) {}

HttpJsonClient::~HttpJsonClient() = default;

std::string HttpJsonClient::post(const std::string& path, const std::string& body) {
    impl_->limiter.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{impl_->limiter};

    int attempts = 0;
    for (;;) {
        ++attempts;
        auto res = impl_->client.Post(path, body, "application/json");
        if (res) {
            if (res->status >= 200 && res->status < 300) return res->body;
            throw ProviderError("provider rejected " + path + " with status " +
                                    std::to_string(res->status),
                                res->status);
        }
        if (attempts > impl_->retry_budget) {
            throw TransportError("transport failure on " + path + " after " +
                                     std::to_string(attempts) + " attempts",
                                 attempts);
        }
    }
}

HttpChat::HttpChat(const ProviderConfig& config) : client_(config) {}

std::string HttpChat::complete(const ChatRequest& request) {
    json body = {{"template_id", template_id_name(request.template_id)},
                 {"prompt", request.filled_prompt},
                 {"temperature", request.temperature},
                 {"max_output_tokens", request.max_output_tokens}};
    auto res = json::parse(client_.post("/v1/chat", body.dump()));
    return res.at("completion").get<std::string>();
}

HttpDenseEmbedder::HttpDenseEmbedder(const ProviderConfig& config, std::size_t dim)
    : client_(config), dim_(dim) {}

std::vector<DenseVector> HttpDenseEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ProviderError("embed_dense: empty input list");
    json body = {{"texts", texts}};
    auto res = json::parse(client_.post("/v1/embed_dense", body.dump()));
    std::vector<DenseVector> out;
    for (const auto& row : res.at("vectors")) {
        DenseVector v = row.get<DenseVector>();
        if (v.size() != dim_) {
            throw ProviderError("embed_dense: vector dimension " + std::to_string(v.size()) +
                                " != configured " + std::to_string(dim_));
        }
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size()) throw ProviderError("embed_dense: count mismatch");
    return out;
}

HttpSparseEncoder::HttpSparseEncoder(const ProviderConfig& config, std::size_t vocab)
    : client_(config), vocab_(vocab) {}

std::vector<SparseWeights> HttpSparseEncoder::encode(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ProviderError("embed_sparse: empty input list");
    json body = {{"texts", texts}};
    auto res = json::parse(client_.post("/v1/embed_sparse", body.dump()));
    std::vector<SparseWeights> out;
    for (const auto& row : res.at("weights")) {
        SparseWeights w;
        for (auto it = row.begin(); it != row.end(); ++it) {
            auto id = static_cast<std::uint32_t>(std::stoul(it.key()));
            auto weight = it.value().get<float>();
            if (weight > 0.0f && id < vocab_) w[id] = weight;
        }
        out.push_back(std::move(w));
    }
    if (out.size() != texts.size()) throw ProviderError("embed_sparse: count mismatch");
    return out;
}

std::map<std::uint32_t, std::uint32_t> HttpSparseEncoder::term_counts(const std::string& text) {
    json body = {{"text", text}};
    auto res = json::parse(client_.post("/v1/term_counts", body.dump()));
    std::map<std::uint32_t, std::uint32_t> counts;
    for (auto it = res.at("counts").begin(); it != res.at("counts").end(); ++it) {
        counts[static_cast<std::uint32_t>(std::stoul(it.key()))] = it.value().get<std::uint32_t>();
    }
    return counts;
}

HttpPairScorer::HttpPairScorer(const ProviderConfig& config, Lang lang)
    : client_(config), truncation_(config.truncation), lang_(lang) {}

std::vector<double> HttpPairScorer::score(const std::string& query,
                                          const std::vector<std::string>& passages) {
    if (passages.empty()) return {};
    json jp = json::array();
    for (const auto& p : passages) jp.push_back(truncate_words(p, truncation_.passage_cap(), lang_));
    json body = {{"query", truncate_words(query, truncation_.query_cap(), lang_)},
                 {"passages", jp}};
    auto res = json::parse(client_.post("/v1/score_pairs", body.dump()));
    auto scores = res.at("scores").get<std::vector<double>>();
    if (scores.size() != passages.size()) throw ProviderError("score_pairs: count mismatch");
    return scores;
}

}  // namespace amt
