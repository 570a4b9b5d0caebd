#pragma once

#include <stdexcept>
#include <string>

namespace kdvlab {

enum class ErrorKind {
    InvalidArgument,   ///< malformed rule, out-of-range order, bad truncation level
    InvalidParams,     ///< parameters violate positivity / distinctness / class hypotheses
    WindowExceeded,    ///< evaluation point outside what double precision can represent
    Unsupported,       ///< requested derivative order or size beyond the implemented range
    GridTooNarrow,
    GridTooCoarse,
    PhaseResolution,   ///< k * window too small to separate e^{ikx} from e^{-ikx}
    ClassMismatch,     ///< operation needs a stronger summability class
    NotSummable,
    Schema
};

[[nodiscard]] constexpr const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::WindowExceeded: return "WindowExceeded";
        case ErrorKind::Unsupported: return "Unsupported";
        case ErrorKind::GridTooNarrow: return "GridTooNarrow";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::PhaseResolution: return "PhaseResolution";
        case ErrorKind::ClassMismatch: return "ClassMismatch";
        case ErrorKind::NotSummable: return "NotSummable";
        case ErrorKind::Schema: return "Schema";
    }
    return "Unknown";
}

/// Structured failure raised by every module. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace kdvlab
