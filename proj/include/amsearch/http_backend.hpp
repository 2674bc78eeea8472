#pragma once

#include <string>

#include "amsearch/gateway.hpp"

namespace amsearch {

struct HttpBackendOptions {
    // Origin plus optional path prefix, e.g. "http://localhost:8080/v1".
    std::string base_url;
    std::string model;
    // Name of the environment variable holding the bearer token. "" disables
    // auth (local servers); a set name whose variable is missing is an error,
    // secrets never live in config files.
    std::string api_key_env = "OPENAI_API_KEY";
    int connect_timeout_ms = 5000;
    int read_timeout_ms = 120000;
};

// Splits a base URL into the origin handed to the HTTP client and the path
// prefix prepended to endpoints. Throws std::invalid_argument on junk.
struct ParsedBaseUrl {
    std::string origin;      // scheme://host[:port]
    std::string path_prefix; // "" or "/v1"-style, no trailing slash
};
ParsedBaseUrl parse_base_url(const std::string& base_url);

// Chat-completions client for any OpenAI-compatible server. Connection
// failures and 429/5xx statuses surface as transient GatewayError; other
// statuses and undecodable payloads are permanent.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendOptions options);

    std::string id() const override;
    std::string complete(const PromptBundle& bundle) override;
    bool probe() override; // GET {prefix}/models; any HTTP response counts as alive

private:
    HttpBackendOptions options_;
    ParsedBaseUrl url_;
    std::string api_key_; // resolved once at construction
};

} // namespace amsearch
