#include <doctest.h>

#include <fstream>
#include <sstream>

#include "amt/augment.hpp"
#include "amt/mock.hpp"

using namespace amt;

namespace {

const PromptLibrary& prompts() {
    static PromptLibrary lib = PromptLibrary::load(AMT_PROMPT_DIR);
    return lib;
}

// Echoes back the question slot content regardless of template.
MockChat echo_mock() {
    MockChat chat;
    chat.set_handler([](const ChatRequest& req) -> std::optional<std::string> {
        // the question sits on the first line after "Question: "
        auto begin = req.filled_prompt.find(": ") + 2;
        auto end = req.filled_prompt.find('\n');
        return req.filled_prompt.substr(begin, end - begin);
    });
    return chat;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

}  // namespace

TEST_CASE("template fidelity: filled prompt differs from the resource only in the slot") {
    const std::string question = "What causes livedo reticularis after catheterization?";
    for (auto id : {TemplateId::Rewrite, TemplateId::Expand}) {
        auto filled = prompts().fill(id, {{"question", question}});
        // substituting the slot back with the marker recovers the resource bytes
        auto pos = filled.find(question);
        REQUIRE(pos != std::string::npos);
        std::string recovered = filled.substr(0, pos) + "{question}" +
                                filled.substr(pos + question.size());
        std::string file = id == TemplateId::Rewrite ? "rewrite.txt" : "expand.txt";
        auto resource = read_file(std::string(AMT_PROMPT_DIR) + "/" + file);
        if (!resource.empty() && resource.back() == '\n') resource.pop_back();
        CHECK(recovered == resource);
    }
}

TEST_CASE("unsubstituted slot markers are rejected") {
    CHECK_THROWS_AS(prompts().fill(TemplateId::Relevance, {{"passage", "p"}}),
                    std::invalid_argument);
}

TEST_CASE("rewrite with echo mock returns the question") {
    auto chat = echo_mock();
    Augmenter augmenter(chat, prompts());
    CHECK(augmenter.rewrite("Why is the sky blue?") == "Why is the sky blue?");
}

TEST_CASE("rewrite maps colloquial phrasing to the scripted terminology") {
    MockChat chat;
    const std::string question = "Why does this patient have a high blood cell count?";
    chat.script(prompts().fill(TemplateId::Rewrite, {{"question", question}}),
                "What is the etiology of this patient's leukocytosis?");
    Augmenter augmenter(chat, prompts());
    auto rewritten = augmenter.rewrite(question);
    CHECK(rewritten.find("leukocytosis") != std::string::npos);
}

TEST_CASE("empty completion falls back to the original with a warning") {
    MockChat chat;
    chat.set_handler([](const ChatRequest&) { return std::string("   "); });
    Augmenter augmenter(chat, prompts());
    bool fallback = false;
    CHECK(augmenter.rewrite("question?", &fallback) == "question?");
    CHECK(fallback);

    // expansion fallback is empty and excluded from concatenation
    auto q = augmenter.augment("question?", {true, true});
    CHECK(q.expand_fallback);
    CHECK(q.expanded.empty());
    CHECK(q.concatenated == "question?");
}

TEST_CASE("augment toggles") {
    auto chat = echo_mock();
    Augmenter augmenter(chat, prompts());

    SUBCASE("both off: all fields equal the original") {
        auto q = augmenter.augment("the question?", {false, false});
        CHECK(q.original == "the question?");
        CHECK(q.rewritten == "the question?");
        CHECK(q.expanded == "the question?");
        CHECK(q.concatenated == "the question?");
        CHECK(!q.rewrite_ran);
        CHECK(!q.expand_ran);
    }
    SUBCASE("both on with echo mock: question + separator + question") {
        auto q = augmenter.augment("the question?", {true, true});
        CHECK(q.concatenated == "the question?\nthe question?");
    }
    SUBCASE("expansion disabled: concatenated is the rewrite only") {
        auto q = augmenter.augment("the question?", {true, false});
        CHECK(q.concatenated == "the question?");
        CHECK(q.expanded == "the question?");  // disabled stage keeps the original
    }
}

TEST_CASE("disabled stages never touch the provider") {
    struct ExplodingChat : ChatProvider {
        std::string complete(const ChatRequest&) override {
            throw ProviderError("must not be called");
        }
    } chat;
    Augmenter augmenter(chat, prompts());
    CHECK_NOTHROW(augmenter.augment("q?", {false, false}));
}

TEST_CASE("scripted two-stage augmentation assembles in order") {
    MockChat chat;
    const std::string question = "fixture question?";
    chat.script(prompts().fill(TemplateId::Rewrite, {{"question", question}}), "REWRITTEN");
    chat.script(prompts().fill(TemplateId::Expand, {{"question", question}}), "EXPANDED");
    Augmenter augmenter(chat, prompts());
    auto q = augmenter.augment(question, {true, true});
    CHECK(q.concatenated == "REWRITTEN\nEXPANDED");
}
