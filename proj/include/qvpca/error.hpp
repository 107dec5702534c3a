#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qvpca {

enum class ErrorKind {
    invalid_input,
    degenerate_basis,
    degenerate_spectrum,
    insufficient_data,
    blow_up,
    parse,
    shape,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::degenerate_basis: return "degenerate_basis";
    case ErrorKind::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::blow_up: return "blow_up";
    case ErrorKind::parse: return "parse";
    case ErrorKind::shape: return "shape";
    }
    return "unknown";
}

/// Every failure raised by the library. `module()` names the component that
/// detected it so the CLI can report it in machine-readable form.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message)
        : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const char* module, const std::string& message) {
    throw Error(kind, module, message);
}

inline void require(bool condition, ErrorKind kind, const char* module, const std::string& message) {
    if (!condition) fail(kind, module, message);
}

} // namespace detail
} // namespace qvpca
