#pragma once

#include <stdexcept>
#include <string>

namespace texharm {

/// Failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
    Argument,   // bad argument value or shape
    Domain,     // image in the wrong pixel-value domain
    Geometry,   // offset/bbox geometry cannot be satisfied
    Size,       // content does not fit the requested canvas
    Config,     // missing or malformed configuration
    Format,     // malformed or unsupported file
    Io,         // file could not be opened/read/written
    Numeric,    // non-finite or degenerate intermediate
    Usage,      // API misuse (e.g. stale backward cache)
};

const char* to_string(ErrorKind kind);

/// Base error for the whole library. what() is prefixed with the module
/// name, e.g. "softglcm: zero in-bounds pixel pairs for offset d=7 theta=0".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

[[noreturn]] void fail(ErrorKind kind, const char* module, const std::string& message);

}  // namespace texharm
