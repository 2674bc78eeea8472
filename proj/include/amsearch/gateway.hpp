#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amsearch/errors.hpp"

namespace amsearch {

enum class Role { kSystem, kUser, kAssistant };

// Routing label for a model call. Backends and the cache treat it as part of
// the request identity; scripted rules match on it.
enum class Tag { kGeneration, kAssociation, kEvaluation, kJudgment, kComparison };

const char* to_string(Role role);
const char* to_string(Tag tag);
Role role_from_string(const std::string& text);
Tag tag_from_string(const std::string& text);

struct Message {
    Role role = Role::kUser;
    std::string text;
};

struct PromptBundle {
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    Tag tag = Tag::kGeneration;

    // Text of the last user-role message, or "" when there is none.
    std::string last_user_text() const;
};

struct Completion {
    std::string text;
    std::string backend_id;
    std::int64_t latency_ms = 0;
    bool cached = false;
};

// FNV-1a 64-bit over a byte string, as a 16-char lowercase hex string.
std::string fnv1a64_hex(std::string_view bytes);

// Stable request identity: roles, message texts, temperature (exact bits) and
// tag. Token limits and any transport detail stay out of it.
std::string fingerprint(const PromptBundle& bundle);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    // Returns the completion text. Throws GatewayError; `transient()` on the
    // error tells the retry loop whether another attempt makes sense.
    virtual std::string complete(const PromptBundle& bundle) = 0;
    virtual bool probe() { return true; }
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 500;
    double backoff_factor = 2.0;
};

// Delay before retry number `attempt` (1-based): base * factor^(attempt - 1).
int retry_delay_ms(const RetryPolicy& policy, int attempt);

struct CacheOptions {
    bool enabled = false;
    std::size_t max_entries = 4096;
    std::string path; // "" keeps the cache in memory only; otherwise JSONL persistence
};

// Single entry point for model calls: routes a PromptBundle to the backend,
// retries transient failures with exponential backoff and serves repeats from
// an LRU cache keyed by fingerprint. Safe to call from multiple threads.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<Backend> backend,
                     RetryPolicy retry = {},
                     CacheOptions cache = {});

    Completion complete(const PromptBundle& bundle);
    bool probe() const;

    const RetryPolicy& retry_policy() const { return retry_; }
    std::size_t cache_size() const;

    // Test seam: replaces the real sleep between retry attempts.
    void set_sleeper(std::function<void(int)> sleeper) { sleeper_ = std::move(sleeper); }

private:
    std::optional<std::string> cache_get(const std::string& key);
    void cache_put(const std::string& key, const std::string& text, bool persist);
    void load_cache_file();

    std::shared_ptr<Backend> backend_;
    RetryPolicy retry_;
    CacheOptions cache_;
    std::function<void(int)> sleeper_;

    mutable std::mutex mutex_;
    std::list<std::pair<std::string, std::string>> lru_; // front = most recent
    std::unordered_map<std::string, std::list<std::pair<std::string, std::string>>::iterator> index_;
};

} // namespace amsearch
