#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "amsearch/gateway.hpp"
#include "amsearch/search_tree.hpp"

namespace amsearch {

struct GatewayConfig {
    std::string backend = "scripted"; // "scripted" or "http"
    // http backend
    std::string base_url = "http://localhost:8080/v1";
    std::string model = "local-model";
    // Name of the env var holding the bearer token; "" disables auth. The
    // token itself never appears in a config file.
    std::string api_key_env = "OPENAI_API_KEY";
    // scripted backend
    std::string script_path;
    std::optional<std::string> script_fallback;
    // shared
    bool cache_enabled = false;
    std::string cache_path;
    RetryPolicy retry;
};

struct BrainConfig {
    bool enabled = true;
    std::string corpus_path; // "" leaves retrieval off even when enabled
    int top_k = 3;
    int snippet_chars = 512;
};

struct HarnessConfig {
    std::size_t subset_cap = 0; // 0 keeps the full dataset
    unsigned seed = 42;
};

struct AppConfig {
    GatewayConfig gateway;
    HyperParams search;
    BrainConfig brain;
    HarnessConfig harness;
    bool use_association = true;
    int max_reasks = 2;
    std::optional<std::string> trace_path;
    std::optional<std::string> run_log_path;
};

// Command-line values that override the file. Unset fields leave the file
// (or default) value in place.
struct FlagOverrides {
    std::optional<int> k;
    std::optional<int> depth;
    std::optional<double> beta;
    bool no_brain = false;
    std::optional<std::size_t> subset;
    std::optional<unsigned> seed;
    std::optional<std::string> trace;
};

// Strict parse: unknown keys raise DataError naming the key, so typos never
// silently fall back to defaults.
AppConfig parse_app_config(const nlohmann::json& doc);

// Defaults, overlaid by the config file when given, overlaid by flags.
AppConfig load_app_config(const std::optional<std::string>& config_path,
                          const FlagOverrides& flags);

} // namespace amsearch
