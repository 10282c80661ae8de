#pragma once

#include <filesystem>
#include <map>

#include "amt/providers.hpp"

namespace amt {

// Versioned prompt templates, one text file per template with {slot} markers.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& raw(TemplateId id) const;

    // Substitutes every {name} marker from `slots`. An unknown marker left
    // unsubstituted is a contract violation and throws.
    std::string fill(TemplateId id, const std::map<std::string, std::string>& slots) const;

    ChatRequest request(TemplateId id, const std::map<std::string, std::string>& slots,
                        int max_output_tokens = 1024) const;

private:
    std::map<TemplateId, std::string> templates_;
};

struct AugmentToggles {
    bool rewrite = true;
    bool expand = true;
};

struct AugmentedQuery {
    std::string original;
    std::string rewritten;
    std::string expanded;
    std::string concatenated;  // rewritten + "\n" + expanded when both present
    bool rewrite_fallback = false;  // empty completion, fell back to original
    bool expand_fallback = false;   // empty completion, expansion dropped
    bool rewrite_ran = false;
    bool expand_ran = false;
};

class Augmenter {
public:
    Augmenter(ChatProvider& chat, const PromptLibrary& prompts)
        : chat_(chat), prompts_(prompts) {}

    std::string rewrite(const std::string& question, bool* fallback = nullptr) const;
    std::string expand(const std::string& question, bool* fallback = nullptr) const;
    AugmentedQuery augment(const std::string& question, AugmentToggles toggles) const;

private:
    ChatProvider& chat_;
    const PromptLibrary& prompts_;
};

}  // namespace amt
