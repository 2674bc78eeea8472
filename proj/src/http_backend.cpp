#include "amsearch/http_backend.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace amsearch {

ParsedBaseUrl parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("base_url must start with http:// or https://: " + base_url);
    const std::string scheme = base_url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw std::invalid_argument("unsupported scheme in base_url: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    ParsedBaseUrl parsed;
    if (path_start == std::string::npos) {
        parsed.origin = base_url;
    } else {
        parsed.origin = base_url.substr(0, path_start);
        parsed.path_prefix = base_url.substr(path_start);
    }
    while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/')
        parsed.path_prefix.pop_back();
    if (parsed.origin.size() <= scheme_end + 3)
        throw std::invalid_argument("base_url has no host: " + base_url);
    return parsed;
}

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)), url_(parse_base_url(options_.base_url)) {
    if (options_.model.empty())
        throw std::invalid_argument("http backend requires a model name");
    if (!options_.api_key_env.empty()) {
        const char* value = std::getenv(options_.api_key_env.c_str());
        if (value == nullptr || *value == '\0')
            throw GatewayError("environment variable " + options_.api_key_env +
                                   " is not set (required for bearer auth)",
                               /*transient=*/false);
        api_key_ = value;
    }
}

std::string HttpBackend::id() const {
    return "http:" + options_.model;
}

namespace {

httplib::Headers make_headers(const std::string& api_key) {
    httplib::Headers headers;
    if (!api_key.empty())
        headers.emplace("Authorization", "Bearer " + api_key);
    return headers;
}

} // namespace

std::string HttpBackend::complete(const PromptBundle& bundle) {
    nlohmann::ordered_json body;
    body["model"] = options_.model;
    auto messages = nlohmann::ordered_json::array();
    for (const Message& m : bundle.messages)
        messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    body["messages"] = std::move(messages);
    body["temperature"] = bundle.temperature;
    body["max_tokens"] = bundle.max_tokens;

    httplib::Client client(url_.origin);
    client.set_connection_timeout(0, options_.connect_timeout_ms * 1000);
    client.set_read_timeout(options_.read_timeout_ms / 1000,
                            (options_.read_timeout_ms % 1000) * 1000);

    auto result = client.Post(url_.path_prefix + "/chat/completions", make_headers(api_key_),
                              body.dump(), "application/json");
    if (!result)
        throw GatewayError("connection to " + url_.origin + " failed: " +
                               httplib::to_string(result.error()),
                           /*transient=*/true);
    if (result->status == 429 || result->status >= 500)
        throw GatewayError("upstream returned status " + std::to_string(result->status),
                           /*transient=*/true);
    if (result->status < 200 || result->status >= 300)
        throw GatewayError("upstream returned status " + std::to_string(result->status) + ": " +
                               result->body,
                           /*transient=*/false);

    auto doc = nlohmann::json::parse(result->body, nullptr, false);
    if (doc.is_discarded())
        throw GatewayError("malformed backend payload: not JSON", /*transient=*/false);
    try {
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& err) {
        throw GatewayError(std::string("malformed backend payload: ") + err.what(),
                           /*transient=*/false);
    }
}

bool HttpBackend::probe() {
    httplib::Client client(url_.origin);
    client.set_connection_timeout(0, options_.connect_timeout_ms * 1000);
    auto result = client.Get(url_.path_prefix + "/models", make_headers(api_key_));
    return static_cast<bool>(result);
}

} // namespace amsearch
