#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "amt/text.hpp"

namespace amt {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    Lang lang = Lang::Latin;
};

// The smallest retrieval unit: one sentence of a document (or a word-boundary
// slice of an oversize sentence).
struct Chunk {
    std::string chunk_id;  // doc_id + "#" + zero-padded ordinal
    std::string doc_id;
    std::string text;
    std::uint32_t ordinal = 0;
    std::uint32_t word_count = 0;
    Lang lang = Lang::Latin;
};

struct CorpusStats {
    std::uint64_t paragraph_count = 0;
    std::uint64_t token_count = 0;
};

struct IngestConfig {
    SentenceSplitConfig split;      // split.abbreviation_guard=false for strict period splitting
    std::size_t max_chunk_words = 512;
};

struct IngestReport {
    std::uint64_t documents = 0;
    std::uint64_t chunks = 0;
    std::vector<std::string> skipped_empty;   // doc_ids with empty bodies
    std::uint64_t oversize_splits = 0;        // sentences cut at the word cap
};

class ChunkStore {
public:
    void add(Chunk chunk);

    std::size_t size() const { return chunks_.size(); }
    const Chunk& at(std::size_t idx) const { return chunks_.at(idx); }
    const std::vector<Chunk>& chunks() const { return chunks_; }
    const Chunk* find(const std::string& chunk_id) const;
    bool contains_doc(const std::string& doc_id) const;

    CorpusStats stats() const;

    // Store directory layout: chunks.jsonl + chunks.offsets + stats.json.
    void save(const std::filesystem::path& dir) const;
    static ChunkStore load(const std::filesystem::path& dir);

private:
    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::uint32_t> doc_chunk_counts_;
};

// Splits one document body into chunks. Exposed for tests; ingest() drives it.
std::vector<Chunk> chunk_document(const Document& doc, const IngestConfig& cfg,
                                  IngestReport* report = nullptr);

// Duplicate doc_id raises DataError naming the id; empty bodies are skipped
// and reported.
ChunkStore ingest(const std::vector<Document>& documents, const IngestConfig& cfg,
                  IngestReport* report = nullptr);

// Line-delimited input records: {"doc_id","title","body","language_tag"}.
std::vector<Document> read_document_file(const std::filesystem::path& path);

}  // namespace amt
