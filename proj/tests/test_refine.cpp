#include <doctest.h>

#include <sstream>

#include "amt/refine.hpp"
#include "amt/mock.hpp"

using namespace amt;

namespace {

const PromptLibrary& prompts() {
    static PromptLibrary lib = PromptLibrary::load(AMT_PROMPT_DIR);
    return lib;
}

std::string sentence_of(std::size_t words, const std::string& tag) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) s += " ";
        s += tag + std::to_string(i);
    }
    s += ".";
    return s;
}

ScoredPassage make_passage(std::string id, std::string text) {
    return {std::move(id), std::move(text), 0.0, Stage::Reranked};
}

MockChat always(const std::string& verdict) {
    MockChat chat;
    chat.set_handler([verdict](const ChatRequest&) { return verdict; });
    return chat;
}

}  // namespace

TEST_CASE("single short sentence is one segment") {
    auto segs = decompose_passage(make_passage("c", sentence_of(10, "w")), {});
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].word_count == 10);
    CHECK_FALSE(segs[0].oversize);
    CHECK(segs[0].span_begin == 0);
    CHECK(segs[0].span_end == 1);
}

TEST_CASE("hand-trace of the greedy rule: [15,15,60] -> [30,60]") {
    std::string text = sentence_of(15, "a") + " " + sentence_of(15, "b") + " " +
                       sentence_of(60, "c");
    auto segs = decompose_passage(make_passage("c", text), {});
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].word_count == 30);
    CHECK(segs[1].word_count == 60);
}

TEST_CASE("a 95-word single sentence stands alone flagged") {
    auto segs = decompose_passage(make_passage("c", sentence_of(95, "w")), {});
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].word_count == 95);
    CHECK(segs[0].oversize);
}

TEST_CASE("segment reconstruction matches the passage") {
    std::string text = sentence_of(5, "a") + " " + sentence_of(40, "b") + " " +
                       sentence_of(90, "c") + " " + sentence_of(12, "d") + " " +
                       sentence_of(12, "e");
    auto p = make_passage("c", text);
    auto segs = decompose_passage(p, {});
    std::string joined;
    for (const auto& s : segs) {
        if (!joined.empty()) joined += " ";
        joined += s.text;
    }
    CHECK(collapse_whitespace(joined) == collapse_whitespace(p.text));
    for (const auto& s : segs) {
        if (!s.oversize) CHECK(s.word_count <= 80);
        if (s.oversize) {
            CHECK(s.word_count > 80);
            CHECK(s.span_end - s.span_begin == 1);
        }
    }
}

TEST_CASE("yes/no parsing") {
    CHECK(parse_yes_no("Yes") == true);
    CHECK(parse_yes_no("  yes, it is relevant") == true);
    CHECK(parse_yes_no("NO.") == false);
    CHECK(parse_yes_no("'Yes'") == true);
    CHECK_FALSE(parse_yes_no("maybe").has_value());
    CHECK_FALSE(parse_yes_no("").has_value());
}

TEST_CASE("relevance filter: always-yes retains all, always-no drops all") {
    std::vector<ScoredPassage> passages = {make_passage("a", "first passage."),
                                           make_passage("b", "second passage.")};
    auto yes = always("Yes");
    auto no = always("No");
    Refiner keep(yes, prompts());
    Refiner drop(no, prompts());
    CHECK(keep.relevance_filter("q?", passages).size() == 2);
    CHECK(drop.relevance_filter("q?", passages).empty());
    CHECK(drop.relevance_filter("q?", {}).empty());
}

TEST_CASE("unparseable filter completion fails open with a warning") {
    auto weird = always("cannot say");
    Refiner refiner(weird, prompts());
    std::size_t warnings = 0;
    auto kept = refiner.relevance_filter("q?", {make_passage("a", "text.")}, &warnings);
    CHECK(kept.size() == 1);
    CHECK(warnings == 1);
}

TEST_CASE("usefulness filter on segments; empty list stays empty") {
    auto yes = always("Yes");
    Refiner refiner(yes, prompts());
    CHECK(refiner.usefulness_filter("q?", {}).empty());
    std::vector<Segment> segs = {{"c", "a segment.", 2, 0, 1, false}};
    CHECK(refiner.usefulness_filter("q?", segs).size() == 1);
}

TEST_CASE("refine: always-yes mocks rejoin all passages via their segments") {
    auto yes = always("Yes");
    Refiner refiner(yes, prompts());
    std::vector<ScoredPassage> passages = {
        make_passage("a", sentence_of(30, "a")),
        make_passage("b", sentence_of(25, "b") + " " + sentence_of(70, "c")),
    };
    auto refined = refiner.refine("q?", passages);
    CHECK_FALSE(refined.empty_evidence);
    REQUIRE(refined.segments.size() == 3);
    CHECK(refined.segments[0].source_chunk_id == "a");
    CHECK(refined.segments[1].source_chunk_id == "b");
    CHECK(refined.segments[2].source_chunk_id == "b");
    CHECK(collapse_whitespace(refined.text) ==
          collapse_whitespace(passages[0].text + " " + passages[1].text));
}

TEST_CASE("refine: always-no relevance yields empty refined knowledge, flagged") {
    auto no = always("No");
    Refiner refiner(no, prompts());
    auto refined = refiner.refine("q?", {make_passage("a", "something.")});
    CHECK(refined.empty_evidence);
    CHECK(refined.text.empty());
    CHECK(refined.segments.empty());
}

TEST_CASE("refine preserves provenance and source order") {
    MockChat chat;
    // relevance: all yes; usefulness: drop any segment containing "skipme"
    chat.set_handler([](const ChatRequest& req) -> std::optional<std::string> {
        if (req.template_id == TemplateId::Relevance) return std::string("Yes");
        return req.filled_prompt.find("skipme") != std::string::npos ? std::string("No")
                                                                     : std::string("Yes");
    });
    Refiner refiner(chat, prompts());
    std::vector<ScoredPassage> passages = {
        make_passage("p1", sentence_of(25, "one")),
        make_passage("p2", sentence_of(25, "skipme")),
        make_passage("p3", sentence_of(25, "three")),
    };
    auto refined = refiner.refine("q?", passages);
    REQUIRE(refined.segments.size() == 2);
    CHECK(refined.segments[0].source_chunk_id == "p1");
    CHECK(refined.segments[1].source_chunk_id == "p3");
    // every character of the text traces to a source passage
    CHECK(refined.text.find("skipme") == std::string::npos);
}

TEST_CASE("monotone filtering: retained segments are a subset of inputs") {
    MockChat chat(42);  // fallback completions are unparseable -> fail-open retains
    Refiner refiner(chat, prompts());
    std::vector<ScoredPassage> passages = {make_passage("a", sentence_of(30, "x"))};
    auto refined = refiner.refine("q?", passages);
    CHECK(refined.segments.size() == 1);
    CHECK(refined.parse_warnings == 2);  // one passage judgment + one segment judgment
}
