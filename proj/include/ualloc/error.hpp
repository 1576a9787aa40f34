// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ualloc {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    IndeterminateRatio,
    NoRoot,
    Infeasible,
    NonMonotone,
    Config,
    Divergence,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::IndeterminateRatio: return "indeterminate_ratio";
        case ErrorCode::NoRoot: return "no_root";
        case ErrorCode::Infeasible: return "infeasible";
        case ErrorCode::NonMonotone: return "non_monotone";
        case ErrorCode::Config: return "config";
        case ErrorCode::Divergence: return "divergence";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

/// Library exception; the C API maps `code()` onto `ua_status`.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ualloc
