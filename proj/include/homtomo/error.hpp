#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homtomo {

/// Failure categories; the CLI maps these onto exit codes.
enum class ErrorKind {
    invalid_argument,
    grid_mismatch,
    leakage,
    not_hermitian,
    inconsistent_data,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::grid_mismatch: return "grid_mismatch";
        case ErrorKind::leakage: return "leakage";
        case ErrorKind::not_hermitian: return "not_hermitian";
        case ErrorKind::inconsistent_data: return "inconsistent_data";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) {
        fail(kind, what);
    }
}

}  // namespace homtomo
