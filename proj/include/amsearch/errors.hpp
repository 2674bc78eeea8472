#pragma once

#include <stdexcept>
#include <string>

namespace amsearch {

// Terminal gateway failure (retries exhausted, malformed payload, unscripted
// prompt in strict mode). `transient` marks failures the retry loop may retry.
class GatewayError : public std::runtime_error {
public:
    GatewayError(std::string message, bool transient = false, int attempts = 1)
        : std::runtime_error(std::move(message)), transient_(transient), attempts_(attempts) {}

    bool transient() const { return transient_; }
    int attempts() const { return attempts_; }

private:
    bool transient_;
    int attempts_;
};

// Judge output could not be parsed after the configured re-asks.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Schema violation or unreadable input file; message names the offending record.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace amsearch
