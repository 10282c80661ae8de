#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace amt {

// Script family of a document; drives tokenization and sentence splitting.
enum class Lang { Latin, Cjk };

Lang lang_from_tag(std::string_view tag);            // "latin-script" | "cjk"
std::string lang_to_tag(Lang lang);

// FNV-1a, 64-bit. Used for deterministic mock keying and trace digests.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

// Strips control characters other than '\n' (tabs become spaces).
std::string clean_body(std::string_view raw);

std::string trim(std::string_view text);
std::string lowercase(std::string_view text);

// Whitespace tokens for latin text, single non-whitespace code points for cjk.
std::vector<std::string> tokenize(std::string_view text, Lang lang);
std::size_t count_words(std::string_view text, Lang lang);

// Keeps the first max_words tokens (latin rule); cjk keeps code points.
std::string truncate_words(std::string_view text, std::size_t max_words, Lang lang = Lang::Latin);

struct SentenceSplitConfig {
    bool abbreviation_guard = true;
    // Tokens ending in '.' that never terminate a sentence, compared lowercase.
    std::vector<std::string> abbreviation_stoplist = {
        "e.g.", "i.e.", "etc.", "vs.", "cf.", "dr.", "mr.", "mrs.", "ms.",
        "st.", "fig.", "no.", "al.", "approx.",
    };
};

// Splits text into trimmed sentences. Latin terminators . ? ! end a sentence
// only when followed by whitespace or end of text; the guard suppresses
// boundaries after stoplisted abbreviations. Cjk terminators are 。！？.
std::vector<std::string> split_sentences(std::string_view text, Lang lang,
                                         const SentenceSplitConfig& cfg = {});

// Collapses every whitespace run to a single space and trims; the equality
// relation behind every "modulo boundary whitespace" reconstruction check.
std::string collapse_whitespace(std::string_view text);

}  // namespace amt
