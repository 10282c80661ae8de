#include "amt/cache.hpp"

#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace amt {

std::string template_id_name(TemplateId id) {
    switch (id) {
        case TemplateId::Rewrite: return "rewrite";
        case TemplateId::Expand: return "expand";
        case TemplateId::Relevance: return "relevance";
        case TemplateId::Usefulness: return "usefulness";
        case TemplateId::Reader: return "reader";
    }
    return "unknown";
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hexd = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hexd[digest[i] >> 4]);
        out.push_back(hexd[digest[i] & 0xf]);
    }
    return out;
}

std::string cache_key(const ChatRequest& request) {
    std::ostringstream material;
    material << template_id_name(request.template_id) << '\x1f' << request.filled_prompt
             << '\x1f' << request.temperature << '\x1f' << request.max_output_tokens;
    return sha256_hex(material.str());
}

CachedChat::CachedChat(ChatProvider& inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string CachedChat::complete(const ChatRequest& request) {
    auto path = dir_ / cache_key(request);
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::ostringstream body;
            body << in.rdbuf();
            ++hits_;
            return body.str();
        }
    }
    std::string completion = inner_.complete(request);
    {
        std::lock_guard<std::mutex> lock(write_mutex_);
        auto tmp = path;
        tmp += ".tmp";
        std::ofstream out(tmp, std::ios::binary);
        out << completion;
        out.close();
        std::filesystem::rename(tmp, path);
    }
    ++misses_;
    return completion;
}

}  // namespace amt
