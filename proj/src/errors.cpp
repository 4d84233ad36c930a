#include "texharm/errors.hpp"

namespace texharm {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Argument: return "argument";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Geometry: return "geometry";
        case ErrorKind::Size: return "size";
        case ErrorKind::Config: return "config";
        case ErrorKind::Format: return "format";
        case ErrorKind::Io: return "io";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + message), kind_(kind), module_(std::move(module)) {}

void fail(ErrorKind kind, const char* module, const std::string& message) {
    throw Error(kind, module, message);
}

}  // namespace texharm
