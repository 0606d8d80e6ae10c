#include "trendforge/error.hpp"

namespace trendforge {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parameter: return "parameter error";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::EmptyInput: return "empty input";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::Network: return "network error";
        case ErrorKind::Schema: return "schema error";
        case ErrorKind::Training: return "training error";
        case ErrorKind::Config: return "config error";
        case ErrorKind::MissingArtifact: return "missing artifact";
    }
    return "error";
}

}  // namespace trendforge
