#include "amt/augment.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amt {

namespace {

const std::map<TemplateId, std::string> kTemplateFiles = {
    {TemplateId::Rewrite, "rewrite.txt"},     {TemplateId::Expand, "expand.txt"},
    {TemplateId::Relevance, "relevance.txt"}, {TemplateId::Usefulness, "usefulness.txt"},
    {TemplateId::Reader, "reader.txt"},
};

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (const auto& [id, filename] : kTemplateFiles) {
        std::ifstream in(dir / filename, std::ios::binary);
        if (!in) {
            throw std::runtime_error("missing prompt template: " + (dir / filename).string());
        }
        std::ostringstream body;
        body << in.rdbuf();
        std::string text = body.str();
        // tolerate a single trailing newline added by editors
        if (!text.empty() && text.back() == '\n') text.pop_back();
        lib.templates_[id] = std::move(text);
    }
    return lib;
}

const std::string& PromptLibrary::raw(TemplateId id) const { return templates_.at(id); }

std::string PromptLibrary::fill(TemplateId id,
                                const std::map<std::string, std::string>& slots) const {
    std::string out = raw(id);
    for (const auto& [name, value] : slots) {
        std::string marker = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    // any marker left means a slot went unfilled
    std::size_t open = out.find('{');
    while (open != std::string::npos) {
        std::size_t close = out.find('}', open);
        if (close != std::string::npos && close - open <= 16) {
            throw std::invalid_argument("unsubstituted slot marker in " + template_id_name(id) +
                                        " prompt: " + out.substr(open, close - open + 1));
        }
        open = out.find('{', open + 1);
    }
    return out;
}

ChatRequest PromptLibrary::request(TemplateId id,
                                   const std::map<std::string, std::string>& slots,
                                   int max_output_tokens) const {
    ChatRequest req;
    req.template_id = id;
    req.filled_prompt = fill(id, slots);
    req.temperature = 0.0;
    req.max_output_tokens = max_output_tokens;
    return req;
}

std::string Augmenter::rewrite(const std::string& question, bool* fallback) const {
    if (question.empty()) throw std::invalid_argument("rewrite: empty question");
    auto completion = trim(chat_.complete(prompts_.request(TemplateId::Rewrite,
                                                           {{"question", question}})));
    if (completion.empty()) {
        if (fallback) *fallback = true;
        return question;
    }
    if (fallback) *fallback = false;
    return completion;
}

std::string Augmenter::expand(const std::string& question, bool* fallback) const {
    if (question.empty()) throw std::invalid_argument("expand: empty question");
    auto completion = trim(chat_.complete(prompts_.request(TemplateId::Expand,
                                                           {{"question", question}})));
    if (fallback) *fallback = completion.empty();
    return completion;
}

AugmentedQuery Augmenter::augment(const std::string& question, AugmentToggles toggles) const {
    AugmentedQuery q;
    q.original = question;
    q.rewritten = question;
    q.expanded = question;

    if (toggles.rewrite) {
        q.rewritten = rewrite(question, &q.rewrite_fallback);
        q.rewrite_ran = true;
    }
    q.concatenated = q.rewritten;
    if (toggles.expand) {
        auto expansion = expand(question, &q.expand_fallback);
        q.expand_ran = true;
        q.expanded = expansion;
        if (!expansion.empty()) q.concatenated = q.rewritten + "\n" + expansion;
    }
    return q;
}

}  // namespace amt
