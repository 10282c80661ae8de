#pragma once

#include <filesystem>
#include <memory>
#include <mutex>

#include "amt/providers.hpp"

namespace amt {

std::string sha256_hex(std::string_view data);

// Content-addressed cache key. Prompts are truncated before the key is
// computed upstream, so keys are truncation-invariant.
std::string cache_key(const ChatRequest& request);

// Wraps a chat provider with a persistent on-disk cache: one file per key, a
// hit returns the stored bytes without touching the inner provider.
class CachedChat : public ChatProvider {
public:
    CachedChat(ChatProvider& inner, std::filesystem::path dir);

    std::string complete(const ChatRequest& request) override;

    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }

private:
    ChatProvider& inner_;
    std::filesystem::path dir_;
    std::mutex write_mutex_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

}  // namespace amt
