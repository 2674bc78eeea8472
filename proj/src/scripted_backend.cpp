#include "amsearch/scripted_backend.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace amsearch {

namespace {

bool rule_matches(const ScriptRule& rule, const PromptBundle& bundle,
                  const std::string& bundle_fingerprint, const std::string& last_user) {
    if (rule.tag && *rule.tag != bundle.tag) return false;
    if (rule.fingerprint && *rule.fingerprint != bundle_fingerprint) return false;
    for (const std::string& needle : rule.substrings)
        if (last_user.find(needle) == std::string::npos) return false;
    return true;
}

} // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules, std::optional<std::string> fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

std::vector<ScriptRule> ScriptedBackend::rules_from_json(const std::string& json_text) {
    auto doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded())
        throw DataError("script file is not valid JSON");
    if (!doc.is_array())
        throw DataError("script file must be a JSON list of rules");
    std::vector<ScriptRule> rules;
    rules.reserve(doc.size());
    std::size_t index = 0;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("match") || !item.contains("response"))
            throw DataError("script rule " + std::to_string(index) +
                            " must carry match and response");
        ScriptRule rule;
        if (item.contains("tag"))
            rule.tag = tag_from_string(item.at("tag").get<std::string>());
        const auto& match = item.at("match");
        if (!match.is_object())
            throw DataError("script rule " + std::to_string(index) + " match must be an object");
        if (match.contains("fingerprint"))
            rule.fingerprint = match.at("fingerprint").get<std::string>();
        if (match.contains("substring"))
            rule.substrings.push_back(match.at("substring").get<std::string>());
        if (match.contains("all_of"))
            for (const auto& needle : match.at("all_of"))
                rule.substrings.push_back(needle.get<std::string>());
        if (!rule.fingerprint && rule.substrings.empty())
            throw DataError("script rule " + std::to_string(index) +
                            " match needs fingerprint, substring or all_of");
        rule.response = item.at("response").get<std::string>();
        rules.push_back(std::move(rule));
        ++index;
    }
    return rules;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open script file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::make_shared<ScriptedBackend>(rules_from_json(buffer.str()));
}

void ScriptedBackend::add_rule(ScriptRule rule) {
    rules_.push_back(std::move(rule));
}

void ScriptedBackend::set_fallback(std::optional<std::string> fallback) {
    fallback_ = std::move(fallback);
}

std::string ScriptedBackend::complete(const PromptBundle& bundle) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++total_calls_;
        ++calls_by_tag_[bundle.tag];
    }
    const std::string fp = amsearch::fingerprint(bundle);
    const std::string last_user = bundle.last_user_text();
    for (const ScriptRule& rule : rules_)
        if (rule_matches(rule, bundle, fp, last_user))
            return rule.response;
    if (fallback_)
        return *fallback_;
    throw GatewayError("unscripted prompt (tag=" + std::string(to_string(bundle.tag)) +
                           ", fingerprint=" + fp + ")",
                       /*transient=*/false);
}

int ScriptedBackend::total_calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return total_calls_;
}

int ScriptedBackend::calls(Tag tag) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = calls_by_tag_.find(tag);
    return it == calls_by_tag_.end() ? 0 : it->second;
}

} // namespace amsearch
