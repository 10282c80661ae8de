#include <doctest.h>

#include <set>

#include "amt/retriever.hpp"
#include "helpers.hpp"

using namespace amt;
using namespace amt::testing;

namespace {

ScoredPassage passage(const std::string& id, Stage stage = Stage::Sparse) {
    return {id, "text of " + id, 1.0, stage};
}

struct RetrieverFixture {
    ChunkStore store;
    MockSparseEncoder encoder{30000, 2};
    MockDenseEmbedder embedder{32, 2};
    MockPairScorer scorer{embedder};
    SparseIndex sparse_index;
    DenseIndex dense_index;

    explicit RetrieverFixture(std::uint64_t seed = 7, std::size_t docs = 20)
        : store(random_store(docs, seed)),
          sparse_index(SparseIndex::build(store, encoder)),
          dense_index(DenseIndex::build(store, embedder)) {}

    Retriever make() {
        return Retriever(store, sparse_index, dense_index, encoder, embedder, scorer);
    }
};

}  // namespace

TEST_CASE("params invariants") {
    RetrievalParams p;
    CHECK_NOTHROW(p.validate());
    p.sparse_depth = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = RetrievalParams{};
    p.final_depth = 100;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("fuse: disjoint, identical, and random overlapping lists") {
    std::vector<ScoredPassage> a, b;
    for (int i = 0; i < 32; ++i) a.push_back(passage("a" + std::to_string(i)));
    for (int i = 0; i < 32; ++i) b.push_back(passage("b" + std::to_string(i), Stage::Dense));
    CHECK(fuse(a, b).size() == 64);
    CHECK(fuse(a, a).size() == 32);

    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ScoredPassage> s, d;
        std::set<std::string> expected;
        for (int i = 0; i < 20; ++i) {
            auto id = "c" + std::to_string(rng.next() % 30);
            s.push_back(passage(id));
            expected.insert(id);
        }
        for (int i = 0; i < 20; ++i) {
            auto id = "c" + std::to_string(rng.next() % 30);
            d.push_back(passage(id, Stage::Dense));
            expected.insert(id);
        }
        auto fused = fuse(s, d);
        CHECK(fused.size() == expected.size());
        std::string prev;
        for (const auto& p : fused) {
            CHECK(expected.count(p.chunk_id) == 1);
            CHECK(p.stage == Stage::Fused);
            CHECK(p.score == 0.0);
            CHECK(prev < p.chunk_id);  // canonical ascending order
            prev = p.chunk_id;
        }
    }
}

TEST_CASE("rerank: single passage returned regardless of score") {
    RetrieverFixture fx;
    auto retriever = fx.make();
    auto out = retriever.rerank("any query", {passage("only", Stage::Fused)}, 32);
    REQUIRE(out.size() == 1);
    CHECK(out[0].chunk_id == "only");
    CHECK(out[0].stage == Stage::Reranked);
}

TEST_CASE("rerank order equals direct mock cosine sort; empty input returns empty") {
    RetrieverFixture fx;
    auto retriever = fx.make();
    CHECK(retriever.rerank("q", {}, 8).empty());

    std::vector<ScoredPassage> fused;
    for (std::size_t i = 0; i < std::min<std::size_t>(fx.store.size(), 12); ++i) {
        const auto& c = fx.store.at(i);
        fused.push_back({c.chunk_id, c.text, 0.0, Stage::Fused});
    }
    const std::string query = "renal plaque fever";
    auto out = retriever.rerank(query, fused, 5);

    // recomputation oracle straight from the mock scorer
    std::vector<std::string> texts;
    for (const auto& p : fused) texts.push_back(p.text);
    auto scores = fx.scorer.score(query, texts);
    std::vector<std::pair<double, std::string>> expected;
    for (std::size_t i = 0; i < fused.size(); ++i) {
        expected.push_back({scores[i], fused[i].chunk_id});
    }
    std::stable_sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    REQUIRE(out.size() == 5);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(out[i].chunk_id == expected[i].second);
        CHECK(out[i].score == doctest::Approx(expected[i].first).epsilon(1e-9));
    }
}

TEST_CASE("rerank dominance: 32 of 40, kept scores >= excluded scores") {
    RetrieverFixture fx(11, 30);
    auto retriever = fx.make();
    std::vector<ScoredPassage> fused;
    for (std::size_t i = 0; i < std::min<std::size_t>(fx.store.size(), 40); ++i) {
        const auto& c = fx.store.at(i);
        fused.push_back({c.chunk_id, c.text, 0.0, Stage::Fused});
    }
    REQUIRE(fused.size() >= 33);
    std::size_t m = fused.size();
    auto kept = retriever.rerank("acute vessel", fused, 32);
    REQUIRE(kept.size() == std::min<std::size_t>(32, m));

    std::vector<std::string> texts;
    for (const auto& p : fused) texts.push_back(p.text);
    auto all_scores = fx.scorer.score("acute vessel", texts);
    std::set<std::string> kept_ids;
    for (const auto& p : kept) kept_ids.insert(p.chunk_id);
    double min_kept = 1e300;
    for (const auto& p : kept) min_kept = std::min(min_kept, p.score);
    for (std::size_t i = 0; i < fused.size(); ++i) {
        if (!kept_ids.count(fused[i].chunk_id)) CHECK(min_kept >= all_scores[i] - 1e-12);
    }
}

TEST_CASE("retrieve finds a planted chunk with the mock providers") {
    auto docs = random_documents(20, 3);
    docs.push_back({"planted", "", "unmistakable evidence qqqmarker sits here.", Lang::Latin});
    RetrieverFixture fx;
    fx.store = ingest(docs, {});
    fx.sparse_index = SparseIndex::build(fx.store, fx.encoder);
    fx.dense_index = DenseIndex::build(fx.store, fx.embedder);
    auto retriever = fx.make();

    AugmentedQuery q;
    q.original = "unmistakable evidence qqqmarker sits here.";
    q.concatenated = q.original;
    RetrievalParams p;
    RetrievalTrace trace;
    auto out = retriever.retrieve(q, p, &trace);
    bool found = false;
    for (const auto& sp : out) found = found || sp.chunk_id == "planted#000000";
    CHECK(found);
    CHECK(trace.stages.size() == 4);  // sparse, dense, fuse, rerank
}

TEST_CASE("retrieve is deterministic call to call") {
    RetrieverFixture fx;
    auto retriever = fx.make();
    AugmentedQuery q;
    q.original = "chronic lesion biopsy";
    q.concatenated = q.original;
    RetrievalParams p;
    auto a = retriever.retrieve(q, p);
    auto b = retriever.retrieve(q, p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].chunk_id == b[i].chunk_id);
        CHECK(a[i].score == b[i].score);
    }
}

TEST_CASE("interleave_by_rank alternates and dedups") {
    std::vector<ScoredPassage> s = {passage("s1"), passage("x"), passage("s3")};
    std::vector<ScoredPassage> d = {passage("x", Stage::Dense), passage("d2", Stage::Dense)};
    auto out = interleave_by_rank(s, d, 10);
    REQUIRE(out.size() == 4);
    CHECK(out[0].chunk_id == "s1");
    CHECK(out[1].chunk_id == "x");
    CHECK(out[2].chunk_id == "d2");
    CHECK(out[3].chunk_id == "s3");
}

TEST_CASE("variant dispatch produces the stated stages") {
    RetrieverFixture fx;
    auto retriever = fx.make();
    AugmentedQuery q;
    q.original = "renal biopsy";
    q.concatenated = q.original;
    RetrievalParams p;
    p.sparse_depth = p.dense_depth = 8;
    p.final_depth = 6;
    p.bm25_depth = 8;

    for (auto v : {RetrieverVariant::Bm25, RetrieverVariant::Sparse, RetrieverVariant::Dense,
                   RetrieverVariant::SparseDense, RetrieverVariant::SparseRerank,
                   RetrieverVariant::DenseRerank, RetrieverVariant::Hybrid}) {
        auto out = retriever.retrieve_variant(v, q, p);
        CHECK(out.size() <= 6);
        std::set<std::string> ids;
        for (const auto& sp : out) CHECK(ids.insert(sp.chunk_id).second);  // no duplicates
    }
}
