#include "amsearch/gateway.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include "json.hpp"

namespace amsearch {

const char* to_string(Role role) {
    switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
    }
    throw std::logic_error("unknown role");
}

const char* to_string(Tag tag) {
    switch (tag) {
    case Tag::kGeneration: return "generation";
    case Tag::kAssociation: return "association";
    case Tag::kEvaluation: return "evaluation";
    case Tag::kJudgment: return "judgment";
    case Tag::kComparison: return "comparison";
    }
    throw std::logic_error("unknown tag");
}

Role role_from_string(const std::string& text) {
    if (text == "system") return Role::kSystem;
    if (text == "user") return Role::kUser;
    if (text == "assistant") return Role::kAssistant;
    throw std::invalid_argument("unknown role: " + text);
}

Tag tag_from_string(const std::string& text) {
    if (text == "generation") return Tag::kGeneration;
    if (text == "association") return Tag::kAssociation;
    if (text == "evaluation") return Tag::kEvaluation;
    if (text == "judgment") return Tag::kJudgment;
    if (text == "comparison") return Tag::kComparison;
    throw std::invalid_argument("unknown tag: " + text);
}

std::string PromptBundle::last_user_text() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        if (it->role == Role::kUser) return it->text;
    return "";
}

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

std::string fingerprint(const PromptBundle& bundle) {
    // Length-prefixed fields so that distinct message splits never collide.
    std::string buffer;
    for (const Message& m : bundle.messages) {
        buffer += to_string(m.role);
        buffer += ':';
        buffer += std::to_string(m.text.size());
        buffer += ':';
        buffer += m.text;
        buffer += '\x1f';
    }
    const auto temp_bits = std::bit_cast<std::uint64_t>(bundle.temperature);
    buffer += "t:";
    buffer += std::to_string(temp_bits);
    buffer += "|tag:";
    buffer += to_string(bundle.tag);
    return fnv1a64_hex(buffer);
}

int retry_delay_ms(const RetryPolicy& policy, int attempt) {
    if (attempt < 1)
        throw std::invalid_argument("retry attempt is 1-based");
    const double delay = policy.base_delay_ms * std::pow(policy.backoff_factor, attempt - 1);
    return static_cast<int>(delay);
}

Gateway::Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, CacheOptions cache)
    : backend_(std::move(backend)), retry_(retry), cache_(std::move(cache)) {
    if (!backend_)
        throw std::invalid_argument("gateway requires a backend");
    if (retry_.max_attempts < 1)
        throw std::invalid_argument("max_attempts must be >= 1");
    sleeper_ = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
    if (cache_.enabled && !cache_.path.empty())
        load_cache_file();
}

bool Gateway::probe() const {
    return backend_->probe();
}

std::size_t Gateway::cache_size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return lru_.size();
}

std::optional<std::string> Gateway::cache_get(const std::string& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
}

void Gateway::cache_put(const std::string& key, const std::string& text, bool persist) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(key);
    if (it != index_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        it->second->second = text;
        return;
    }
    lru_.emplace_front(key, text);
    index_[key] = lru_.begin();
    while (lru_.size() > cache_.max_entries) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
    }
    if (persist && !cache_.path.empty()) {
        std::ofstream out(cache_.path, std::ios::app);
        if (out) {
            nlohmann::ordered_json line = {{"fingerprint", key}, {"text", text}};
            out << line.dump() << '\n';
        } else {
            std::cerr << "[warn] cannot append to cache file " << cache_.path << '\n';
        }
    }
}

void Gateway::load_cache_file() {
    std::ifstream in(cache_.path);
    if (!in) return; // a missing file starts an empty cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.contains("fingerprint") || !doc.contains("text")) {
            std::cerr << "[warn] skipping malformed cache line " << line_no << '\n';
            continue;
        }
        cache_put(doc.at("fingerprint").get<std::string>(), doc.at("text").get<std::string>(),
                  /*persist=*/false);
    }
}

Completion Gateway::complete(const PromptBundle& bundle) {
    const std::string key = fingerprint(bundle);
    if (cache_.enabled) {
        if (auto hit = cache_get(key)) {
            Completion c;
            c.text = *hit;
            c.backend_id = backend_->id();
            c.latency_ms = 0;
            c.cached = true;
            return c;
        }
    }

    const auto start = std::chrono::steady_clock::now();
    std::string text;
    int attempt = 1;
    for (;; ++attempt) {
        try {
            text = backend_->complete(bundle);
            break;
        } catch (const GatewayError& err) {
            if (!err.transient() || attempt >= retry_.max_attempts)
                throw GatewayError(err.what(), err.transient(), attempt);
            sleeper_(retry_delay_ms(retry_, attempt));
        }
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;

    if (cache_.enabled)
        cache_put(key, text, /*persist=*/true);

    Completion c;
    c.text = text;
    c.backend_id = backend_->id();
    c.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    c.cached = false;
    return c;
}

} // namespace amsearch
