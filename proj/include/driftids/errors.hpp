#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftids {

enum class ErrorKind {
    dimension,
    numeric,
    contract,
    config,
    data,
    parameter,
    schema,
    value,
    io,
    undefined_metric,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type so the CLI can map it
// onto a single machine-parsable line.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        fail(kind, message);
    }
}

}  // namespace driftids
