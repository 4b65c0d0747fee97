#pragma once

#include <stdexcept>
#include <string>

namespace btcactor {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorKind { usage = 1, data = 2, internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

// Thrown when a transaction subgraph outgrows its configured limits; the
// pipeline treats it as "graph skipped" rather than a fatal failure.
class SizeLimitExceeded : public Error {
public:
    explicit SizeLimitExceeded(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

[[noreturn]] inline void fail_usage(const std::string& msg) { throw Error(ErrorKind::usage, msg); }
[[noreturn]] inline void fail_data(const std::string& msg) { throw Error(ErrorKind::data, msg); }
[[noreturn]] inline void fail_internal(const std::string& msg) { throw Error(ErrorKind::internal, msg); }

} // namespace btcactor
