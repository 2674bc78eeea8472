#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "amsearch/gateway.hpp"

namespace amsearch {

// One scripted response. A rule fires when every set constraint holds:
//   tag          - the bundle's tag equals it
//   fingerprint  - the bundle's fingerprint equals it exactly
//   substrings   - each entry occurs in the bundle's last user message
struct ScriptRule {
    std::optional<Tag> tag;
    std::optional<std::string> fingerprint;
    std::vector<std::string> substrings;
    std::string response;
};

// Deterministic offline backend: first matching rule wins, in insertion
// order. With no match it returns the fallback, or fails permanently with
// "unscripted prompt" when none is configured. Replies are a pure function
// of the request, so any call sequence is replayable.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ScriptRule> rules = {},
                             std::optional<std::string> fallback = std::nullopt);

    // Loads a JSON list of {"tag": ..., "match": {...}, "response": ...}
    // where match carries "fingerprint", "substring" or "all_of" (a list of
    // substrings). Throws DataError naming the offending entry.
    static std::vector<ScriptRule> rules_from_json(const std::string& json_text);
    static std::shared_ptr<ScriptedBackend> from_file(const std::string& path);

    void add_rule(ScriptRule rule);
    void set_fallback(std::optional<std::string> fallback);

    std::string id() const override { return "scripted"; }
    std::string complete(const PromptBundle& bundle) override;

    int total_calls() const;
    int calls(Tag tag) const;

private:
    std::vector<ScriptRule> rules_;
    std::optional<std::string> fallback_;
    mutable std::mutex mutex_;
    std::map<Tag, int> calls_by_tag_;
    int total_calls_ = 0;
};

} // namespace amsearch
