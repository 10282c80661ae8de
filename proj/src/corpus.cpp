#include "amt/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace amt {

using nlohmann::json;

namespace {

std::string make_chunk_id(const std::string& doc_id, std::uint32_t ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%06u", ordinal);
    return doc_id + buf;
}

}  // namespace

void ChunkStore::add(Chunk chunk) {
    if (by_id_.count(chunk.chunk_id)) {
        throw DataError("duplicate chunk_id: " + chunk.chunk_id);
    }
    by_id_[chunk.chunk_id] = chunks_.size();
    doc_chunk_counts_[chunk.doc_id]++;
    chunks_.push_back(std::move(chunk));
}

const Chunk* ChunkStore::find(const std::string& chunk_id) const {
    auto it = by_id_.find(chunk_id);
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

bool ChunkStore::contains_doc(const std::string& doc_id) const {
    return doc_chunk_counts_.count(doc_id) > 0;
}

CorpusStats ChunkStore::stats() const {
    CorpusStats s;
    for (const auto& c : chunks_) {
        s.paragraph_count += 1;
        s.token_count += count_words(c.text, c.lang);
    }
    return s;
}

void ChunkStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream records(dir / "chunks.jsonl", std::ios::binary);
    std::ofstream offsets(dir / "chunks.offsets", std::ios::binary);
    if (!records || !offsets) throw DataError("cannot write chunk store: " + dir.string());
    std::uint64_t offset = 0;
    for (const auto& c : chunks_) {
        json rec = {{"chunk_id", c.chunk_id}, {"doc_id", c.doc_id},   {"text", c.text},
                    {"ordinal", c.ordinal},   {"word_count", c.word_count},
                    {"language_tag", lang_to_tag(c.lang)}};
        std::string line = rec.dump();
        offsets << offset << "\n";
        records << line << "\n";
        offset += line.size() + 1;
    }
    auto st = stats();
    std::ofstream stats_out(dir / "stats.json", std::ios::binary);
    stats_out << json{{"paragraph_count", st.paragraph_count},
                      {"token_count", st.token_count}}
                     .dump(2)
              << "\n";
}

ChunkStore ChunkStore::load(const std::filesystem::path& dir) {
    std::ifstream records(dir / "chunks.jsonl", std::ios::binary);
    if (!records) throw DataError("cannot open chunk store: " + dir.string());
    ChunkStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(records, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("chunk store line " + std::to_string(line_no) + ": " + e.what());
        }
        Chunk c;
        c.chunk_id = rec.at("chunk_id").get<std::string>();
        c.doc_id = rec.at("doc_id").get<std::string>();
        c.text = rec.at("text").get<std::string>();
        c.ordinal = rec.at("ordinal").get<std::uint32_t>();
        c.word_count = rec.at("word_count").get<std::uint32_t>();
        c.lang = lang_from_tag(rec.at("language_tag").get<std::string>());
        store.add(std::move(c));
    }
    return store;
}

std::vector<Chunk> chunk_document(const Document& doc, const IngestConfig& cfg,
                                  IngestReport* report) {
    std::vector<Chunk> chunks;
    auto sentences = split_sentences(doc.body, doc.lang, cfg.split);
    std::uint32_t ordinal = 0;
    for (auto& sentence : sentences) {
        std::vector<std::string> pieces;
        if (cfg.max_chunk_words > 0 && count_words(sentence, doc.lang) > cfg.max_chunk_words) {
            auto tokens = tokenize(sentence, doc.lang);
            const char* sep = doc.lang == Lang::Latin ? " " : "";
            for (std::size_t b = 0; b < tokens.size(); b += cfg.max_chunk_words) {
                std::string piece;
                std::size_t e = std::min(b + cfg.max_chunk_words, tokens.size());
                for (std::size_t t = b; t < e; ++t) {
                    if (t > b) piece += sep;
                    piece += tokens[t];
                }
                pieces.push_back(std::move(piece));
            }
            if (report) report->oversize_splits += pieces.size() - 1;
        } else {
            pieces.push_back(std::move(sentence));
        }
        for (auto& piece : pieces) {
            Chunk c;
            c.doc_id = doc.doc_id;
            c.ordinal = ordinal;
            c.chunk_id = make_chunk_id(doc.doc_id, ordinal);
            c.word_count = static_cast<std::uint32_t>(count_words(piece, doc.lang));
            c.lang = doc.lang;
            c.text = std::move(piece);
            chunks.push_back(std::move(c));
            ++ordinal;
        }
    }
    return chunks;
}

ChunkStore ingest(const std::vector<Document>& documents, const IngestConfig& cfg,
                  IngestReport* report) {
    ChunkStore store;
    for (const auto& raw : documents) {
        if (raw.doc_id.empty()) throw DataError("document record missing doc_id");
        if (store.contains_doc(raw.doc_id)) {
            throw DataError("duplicate doc_id: " + raw.doc_id);
        }
        Document doc = raw;
        doc.body = clean_body(doc.body);
        if (trim(doc.body).empty()) {
            if (report) report->skipped_empty.push_back(doc.doc_id);
            continue;
        }
        auto chunks = chunk_document(doc, cfg, report);
        if (chunks.empty()) {
            if (report) report->skipped_empty.push_back(doc.doc_id);
            continue;
        }
        for (auto& c : chunks) store.add(std::move(c));
        if (report) {
            report->documents += 1;
            report->chunks = store.size();
        }
    }
    return store;
}

std::vector<Document> read_document_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open document file: " + path.string());
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("document file line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.contains("doc_id") || !rec.contains("body")) {
            throw DataError("document file line " + std::to_string(line_no) +
                            ": record needs doc_id and body");
        }
        Document d;
        d.doc_id = rec.at("doc_id").get<std::string>();
        d.title = rec.value("title", "");
        d.body = rec.at("body").get<std::string>();
        d.lang = lang_from_tag(rec.value("language_tag", "latin-script"));
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace amt
