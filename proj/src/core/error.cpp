#include "core/error.hpp"

namespace shmcpd {

const char *to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateDelay: return "DegenerateDelay";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::EstimatesUnready: return "EstimatesUnready";
    case ErrorCode::InsufficientTraining: return "InsufficientTraining";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace shmcpd
