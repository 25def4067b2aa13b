#pragma once

#include <stdexcept>
#include <string>

namespace hdl {

enum class ErrorKind {
    ParameterDomain,
    UnknownFamily,
    IncompatibleSupport,
    IntegrandInvalid,
    NoSampler,
    UndefinedCentering,
    OutOfRange,
    EmptySample,
    Arithmetic,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ParameterDomain: return "parameter-domain";
    case ErrorKind::UnknownFamily: return "unknown-family";
    case ErrorKind::IncompatibleSupport: return "incompatible-support";
    case ErrorKind::IntegrandInvalid: return "integrand-invalid";
    case ErrorKind::NoSampler: return "no-sampler";
    case ErrorKind::UndefinedCentering: return "undefined-centering";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::EmptySample: return "empty-sample";
    case ErrorKind::Arithmetic: return "arithmetic";
    }
    return "unknown";
}

/// Every library failure carries a machine-checkable kind next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace hdl
