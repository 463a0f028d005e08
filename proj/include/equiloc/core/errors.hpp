#pragma once

#include <stdexcept>
#include <string>

namespace equiloc {

enum class ErrorKind {
    capability,
    resolution,
    precondition,
    domain,
    shape,
    wall,
    cone,
    hyperplane,
    unsupported_model,
    consistency,
    parse,
    data
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::capability: return "capability";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::domain: return "domain";
    case ErrorKind::shape: return "shape";
    case ErrorKind::wall: return "wall";
    case ErrorKind::cone: return "cone";
    case ErrorKind::hyperplane: return "hyperplane";
    case ErrorKind::unsupported_model: return "unsupported-model";
    case ErrorKind::consistency: return "internal-consistency";
    case ErrorKind::parse: return "parse";
    case ErrorKind::data: return "data";
    }
    return "unknown";
}

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + " error: " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace equiloc
