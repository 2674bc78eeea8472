#include "amsearch/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "amsearch/errors.hpp"

namespace amsearch {

namespace {

void check_keys(const nlohmann::json& object, const std::set<std::string>& known,
                const std::string& where) {
    for (const auto& [key, value] : object.items())
        if (!known.count(key))
            throw DataError("unknown config key \"" + key + "\" in " + where);
}

template <typename T>
void read_into(const nlohmann::json& object, const char* key, T& target) {
    if (object.contains(key))
        target = object.at(key).get<T>();
}

} // namespace

AppConfig parse_app_config(const nlohmann::json& doc) {
    if (!doc.is_object())
        throw DataError("config must be a JSON object");
    check_keys(doc, {"gateway", "search", "brain", "harness", "use_association", "max_reasks",
                     "trace_path", "run_log_path"},
               "config root");

    AppConfig config;

    if (doc.contains("gateway")) {
        const auto& g = doc.at("gateway");
        check_keys(g, {"backend", "base_url", "model", "api_key_env", "script_path",
                       "script_fallback", "cache_enabled", "cache_path", "max_attempts",
                       "base_delay_ms", "backoff_factor"},
                   "gateway");
        read_into(g, "backend", config.gateway.backend);
        read_into(g, "base_url", config.gateway.base_url);
        read_into(g, "model", config.gateway.model);
        read_into(g, "api_key_env", config.gateway.api_key_env);
        read_into(g, "script_path", config.gateway.script_path);
        if (g.contains("script_fallback") && !g.at("script_fallback").is_null())
            config.gateway.script_fallback = g.at("script_fallback").get<std::string>();
        read_into(g, "cache_enabled", config.gateway.cache_enabled);
        read_into(g, "cache_path", config.gateway.cache_path);
        read_into(g, "max_attempts", config.gateway.retry.max_attempts);
        read_into(g, "base_delay_ms", config.gateway.retry.base_delay_ms);
        read_into(g, "backoff_factor", config.gateway.retry.backoff_factor);
        if (config.gateway.backend != "scripted" && config.gateway.backend != "http")
            throw DataError("gateway.backend must be \"scripted\" or \"http\", got \"" +
                            config.gateway.backend + "\"");
    }

    if (doc.contains("search")) {
        const auto& s = doc.at("search");
        check_keys(s, {"branch_factor", "max_rounds", "exploration_weight", "assoc_weight"},
                   "search");
        read_into(s, "branch_factor", config.search.branch_factor);
        read_into(s, "max_rounds", config.search.max_rounds);
        read_into(s, "exploration_weight", config.search.exploration_weight);
        read_into(s, "assoc_weight", config.search.assoc_weight);
    }

    if (doc.contains("brain")) {
        const auto& b = doc.at("brain");
        check_keys(b, {"enabled", "corpus_path", "top_k", "snippet_chars"}, "brain");
        read_into(b, "enabled", config.brain.enabled);
        read_into(b, "corpus_path", config.brain.corpus_path);
        read_into(b, "top_k", config.brain.top_k);
        read_into(b, "snippet_chars", config.brain.snippet_chars);
    }

    if (doc.contains("harness")) {
        const auto& h = doc.at("harness");
        check_keys(h, {"subset_cap", "seed"}, "harness");
        read_into(h, "subset_cap", config.harness.subset_cap);
        read_into(h, "seed", config.harness.seed);
    }

    read_into(doc, "use_association", config.use_association);
    read_into(doc, "max_reasks", config.max_reasks);
    if (doc.contains("trace_path") && !doc.at("trace_path").is_null())
        config.trace_path = doc.at("trace_path").get<std::string>();
    if (doc.contains("run_log_path") && !doc.at("run_log_path").is_null())
        config.run_log_path = doc.at("run_log_path").get<std::string>();

    try {
        config.search.validate();
    } catch (const std::invalid_argument& err) {
        throw DataError(std::string("config search block invalid: ") + err.what());
    }
    if (config.max_reasks < 0)
        throw DataError("max_reasks must be >= 0");
    return config;
}

AppConfig load_app_config(const std::optional<std::string>& config_path,
                          const FlagOverrides& flags) {
    AppConfig config;
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in)
            throw DataError("cannot open config file: " + *config_path);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        auto doc = nlohmann::json::parse(buffer.str(), nullptr, false);
        if (doc.is_discarded())
            throw DataError("config file is not valid JSON: " + *config_path);
        config = parse_app_config(doc);
    }

    if (flags.k) config.search.branch_factor = *flags.k;
    if (flags.depth) config.search.max_rounds = *flags.depth;
    if (flags.beta) config.search.assoc_weight = *flags.beta;
    if (flags.no_brain) {
        config.use_association = false;
        config.brain.enabled = false;
    }
    if (flags.subset) config.harness.subset_cap = *flags.subset;
    if (flags.seed) config.harness.seed = *flags.seed;
    if (flags.trace) config.trace_path = *flags.trace;

    try {
        config.search.validate();
    } catch (const std::invalid_argument& err) {
        throw DataError(std::string("search parameters invalid after flags: ") + err.what());
    }
    return config;
}

} // namespace amsearch
