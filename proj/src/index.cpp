#include "amt/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace amt {

using nlohmann::json;

std::vector<Hit> top_hits(std::vector<Hit> scored, std::size_t depth, const ChunkStore& store) {
    std::stable_sort(scored.begin(), scored.end(), [&](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return store.at(a.chunk).chunk_id < store.at(b.chunk).chunk_id;
    });
    if (scored.size() > depth) scored.resize(depth);
    return scored;
}

SparseIndex SparseIndex::build(const ChunkStore& store, SparseEncoder& encoder) {
    SparseIndex index;
    index.doc_lengths_.assign(store.size(), 0);
    if (store.size() == 0) return index;

    std::vector<std::string> texts;
    texts.reserve(store.size());
    for (const auto& c : store.chunks()) texts.push_back(c.text);

    std::vector<SparseWeights> encodings;
    try {
        encodings = encoder.encode(texts);
    } catch (const std::exception& e) {
        throw DataError(std::string("sparse index build: encoder failure: ") + e.what());
    }
    if (encodings.size() != texts.size()) {
        throw DataError("sparse index build: encoder returned wrong count");
    }

    float max_w = 0.0f;
    for (std::size_t i = 0; i < encodings.size(); ++i) {
        for (const auto& [term, w] : encodings[i]) {
            if (!(w > 0.0f) || !std::isfinite(w)) {
                throw DataError("sparse index build: non-positive weight for chunk " +
                                store.at(i).chunk_id);
            }
            max_w = std::max(max_w, w);
        }
    }
    index.max_weight_ = max_w;

    std::uint64_t total_len = 0;
    for (std::size_t i = 0; i < store.size(); ++i) {
        auto counts = encoder.term_counts(store.at(i).text);
        std::uint32_t len = 0;
        for (const auto& [term, tf] : counts) len += tf;
        index.doc_lengths_[i] = len;
        total_len += len;

        for (const auto& [term, w] : encodings[i]) {
            auto q = static_cast<std::uint8_t>(
                std::clamp<long>(std::lround(w / max_w * 255.0f), 1, 255));
            auto it = counts.find(term);
            std::uint32_t tf = it == counts.end() ? 0 : it->second;
            index.lists_[term].push_back({static_cast<std::uint32_t>(i), q, tf});
        }
    }
    index.avg_doc_length_ = store.size() ? static_cast<double>(total_len) / store.size() : 0.0;
    return index;
}

std::vector<Hit> SparseIndex::search(const SparseWeights& query, std::size_t depth,
                                     const ChunkStore& store) const {
    std::vector<double> acc(doc_lengths_.size(), 0.0);
    std::vector<bool> touched(doc_lengths_.size(), false);
    for (const auto& [term, qw] : query) {
        auto it = lists_.find(term);
        if (it == lists_.end()) continue;
        for (const auto& p : it->second) {
            acc[p.chunk] += static_cast<double>(qw) * dequantize(p.qweight);
            touched[p.chunk] = true;
        }
    }
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (touched[i]) hits.push_back({i, acc[i]});
    }
    return top_hits(std::move(hits), depth, store);
}

std::vector<Hit> SparseIndex::bm25(const std::map<std::uint32_t, std::uint32_t>& query_terms,
                                   std::size_t depth, Bm25Params params,
                                   const ChunkStore& store) const {
    const double n = static_cast<double>(doc_lengths_.size());
    std::vector<double> acc(doc_lengths_.size(), 0.0);
    std::vector<bool> touched(doc_lengths_.size(), false);
    for (const auto& [term, qtf] : query_terms) {
        auto it = lists_.find(term);
        if (it == lists_.end()) continue;
        double df = 0;
        for (const auto& p : it->second) {
            if (p.tf > 0) df += 1;
        }
        if (df == 0) continue;
        double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            if (p.tf == 0) continue;
            double norm = params.k1 * (1.0 - params.b +
                                       params.b * doc_lengths_[p.chunk] / avg_doc_length_);
            acc[p.chunk] += idf * (p.tf * (params.k1 + 1.0)) / (p.tf + norm);
            touched[p.chunk] = true;
        }
    }
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (touched[i]) hits.push_back({i, acc[i]});
    }
    return top_hits(std::move(hits), depth, store);
}

void SparseIndex::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream lists(dir / "postings.jsonl", std::ios::binary);
    std::ofstream offsets(dir / "postings.offsets", std::ios::binary);
    if (!lists || !offsets) throw DataError("cannot write sparse index: " + dir.string());
    std::uint64_t offset = 0;
    for (const auto& [term, postings] : lists_) {
        json rows = json::array();
        for (const auto& p : postings) rows.push_back({p.chunk, p.qweight, p.tf});
        std::string line = json{{"term", term}, {"postings", rows}}.dump();
        offsets << offset << "\n";
        lists << line << "\n";
        offset += line.size() + 1;
    }
    json meta = {{"max_weight", max_weight_},
                 {"avg_doc_length", avg_doc_length_},
                 {"doc_lengths", doc_lengths_}};
    std::ofstream(dir / "sparse_meta.json", std::ios::binary) << meta.dump() << "\n";
}

SparseIndex SparseIndex::load(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "sparse_meta.json", std::ios::binary);
    if (!meta_in) throw DataError("cannot open sparse index: " + dir.string());
    json meta = json::parse(meta_in);
    SparseIndex index;
    index.max_weight_ = meta.at("max_weight").get<float>();
    index.avg_doc_length_ = meta.at("avg_doc_length").get<double>();
    index.doc_lengths_ = meta.at("doc_lengths").get<std::vector<std::uint32_t>>();

    std::ifstream lists(dir / "postings.jsonl", std::ios::binary);
    std::string line;
    while (std::getline(lists, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        auto term = rec.at("term").get<std::uint32_t>();
        auto& postings = index.lists_[term];
        for (const auto& row : rec.at("postings")) {
            postings.push_back({row[0].get<std::uint32_t>(),
                                static_cast<std::uint8_t>(row[1].get<unsigned>()),
                                row[2].get<std::uint32_t>()});
        }
    }
    return index;
}

DenseIndex DenseIndex::build(const ChunkStore& store, DenseEmbedder& embedder) {
    DenseIndex index;
    index.dim_ = embedder.dim();
    if (store.size() == 0) return index;
    std::vector<std::string> texts;
    texts.reserve(store.size());
    for (const auto& c : store.chunks()) texts.push_back(c.text);
    auto vectors = embedder.embed(texts);
    index.data_.reserve(store.size() * index.dim_);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != index.dim_) {
            throw DataError("dense index build: bad vector length for chunk " +
                            store.at(i).chunk_id);
        }
        for (float x : vectors[i]) {
            if (!std::isfinite(x)) {
                throw DataError("dense index build: non-finite entry for chunk " +
                                store.at(i).chunk_id);
            }
            index.data_.push_back(x);
        }
    }
    return index;
}

std::vector<Hit> DenseIndex::search(const DenseVector& query, std::size_t depth,
                                    const ChunkStore& store) const {
    if (query.size() != dim_) {
        throw DataError("dense search: query dimension " + std::to_string(query.size()) +
                        " != index dimension " + std::to_string(dim_));
    }
    std::vector<Hit> hits;
    hits.reserve(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        const float* row = data_.data() + r * dim_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) dot += static_cast<double>(row[d]) * query[d];
        hits.push_back({r, dot});
    }
    return top_hits(std::move(hits), depth, store);
}

void DenseIndex::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "dense_matrix.bin", std::ios::binary);
    if (!out) throw DataError("cannot write dense index: " + dir.string());
    std::uint64_t dim = dim_, count = rows();
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(float)));
}

DenseIndex DenseIndex::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "dense_matrix.bin", std::ios::binary);
    if (!in) throw DataError("cannot open dense index: " + dir.string());
    std::uint64_t dim = 0, count = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    DenseIndex index;
    index.dim_ = dim;
    index.data_.resize(dim * count);
    in.read(reinterpret_cast<char*>(index.data_.data()),
            static_cast<std::streamsize>(index.data_.size() * sizeof(float)));
    if (!in) throw DataError("dense index truncated: " + dir.string());
    return index;
}

}  // namespace amt
