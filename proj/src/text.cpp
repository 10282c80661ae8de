#include "amt/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace amt {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_len(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xe) return 3;
    if ((lead >> 3) == 0x1e) return 4;
    return 1;  // invalid byte, treat as one unit
}

}  // namespace

Lang lang_from_tag(std::string_view tag) {
    if (tag == "latin-script") return Lang::Latin;
    if (tag == "cjk") return Lang::Cjk;
    throw std::invalid_argument("unknown language_tag: " + std::string(tag));
}

std::string lang_to_tag(Lang lang) {
    return lang == Lang::Latin ? "latin-script" : "cjk";
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string clean_body(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 && c != '\n') {
            if (c == '\t') out.push_back(' ');
            continue;
        }
        if (u == 0x7f) continue;
        out.push_back(c);
    }
    return out;
}

std::string trim(std::string_view text) {
    std::size_t b = 0, e = text.size();
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    return std::string(text.substr(b, e - b));
}

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> tokenize(std::string_view text, Lang lang) {
    std::vector<std::string> tokens;
    if (lang == Lang::Latin) {
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && is_space(text[i])) ++i;
            std::size_t b = i;
            while (i < text.size() && !is_space(text[i])) ++i;
            if (i > b) tokens.emplace_back(text.substr(b, i - b));
        }
    } else {
        std::size_t i = 0;
        while (i < text.size()) {
            if (is_space(text[i])) {
                ++i;
                continue;
            }
            std::size_t n = utf8_len(static_cast<unsigned char>(text[i]));
            n = std::min(n, text.size() - i);
            tokens.emplace_back(text.substr(i, n));
            i += n;
        }
    }
    return tokens;
}

std::size_t count_words(std::string_view text, Lang lang) {
    if (lang == Lang::Latin) {
        std::size_t count = 0;
        bool in_token = false;
        for (char c : text) {
            if (is_space(c)) {
                in_token = false;
            } else if (!in_token) {
                in_token = true;
                ++count;
            }
        }
        return count;
    }
    std::size_t count = 0, i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        i += std::min(utf8_len(static_cast<unsigned char>(text[i])), text.size() - i);
        ++count;
    }
    return count;
}

std::string truncate_words(std::string_view text, std::size_t max_words, Lang lang) {
    if (count_words(text, lang) <= max_words) return std::string(text);
    auto tokens = tokenize(text, lang);
    tokens.resize(max_words);
    std::string out;
    const char* sep = lang == Lang::Latin ? " " : "";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

namespace {

bool matches_cjk_terminator(std::string_view text, std::size_t i, std::size_t* len) {
    static const std::string_view terms[] = {"\xe3\x80\x82", "\xef\xbc\x81", "\xef\xbc\x9f"};  // 。！？
    for (auto t : terms) {
        if (text.substr(i, t.size()) == t) {
            *len = t.size();
            return true;
        }
    }
    return false;
}

// The token ending at position `dot` (inclusive), lowercased.
std::string token_ending_at(std::string_view text, std::size_t dot, std::size_t start) {
    std::size_t b = dot;
    while (b > start && !is_space(text[b - 1])) --b;
    return lowercase(text.substr(b, dot - b + 1));
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text, Lang lang,
                                         const SentenceSplitConfig& cfg) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string s = trim(text.substr(start, end - start));
        if (!s.empty()) sentences.push_back(std::move(s));
        start = end;
    };

    if (lang == Lang::Cjk) {
        std::size_t i = 0;
        while (i < text.size()) {
            std::size_t tlen = 0;
            if (matches_cjk_terminator(text, i, &tlen)) {
                i += tlen;
                // absorb a run of terminators
                while (i < text.size() && matches_cjk_terminator(text, i, &tlen)) i += tlen;
                flush(i);
            } else {
                i += std::min(utf8_len(static_cast<unsigned char>(text[i])), text.size() - i);
            }
        }
        flush(text.size());
        return sentences;
    }

    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '.' || c == '?' || c == '!') {
            std::size_t run_begin = i;
            while (i < text.size() && (text[i] == '.' || text[i] == '?' || text[i] == '!')) ++i;
            bool at_boundary = (i == text.size()) || is_space(text[i]);
            if (at_boundary && cfg.abbreviation_guard && text[run_begin] == '.' &&
                i - run_begin == 1) {
                auto token = token_ending_at(text, run_begin, start);
                for (const auto& abbr : cfg.abbreviation_stoplist) {
                    if (token == abbr) {
                        at_boundary = false;
                        break;
                    }
                }
            }
            if (at_boundary) flush(i);
        } else {
            ++i;
        }
    }
    flush(text.size());
    return sentences;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace amt
