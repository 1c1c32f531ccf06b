#pragma once

#include <stdexcept>
#include <string>

namespace mtd {

/// Error categories surfaced through exceptions. The CLI maps these to
/// process exit codes; library callers can switch on code().
enum class ErrorCode {
    NotSymmetric,
    WeightStructureMismatch,
    NonPositiveMuMin,
    Unsatisfiable,
    NonPositiveDefinite,
    NoStabilizingSolution,
    EbarNotPsd,
    HypothesisNotVerified,
    DimensionMismatch,
    UnknownCatalogId,
    EventOffGrid,
    SchemaViolation,
    MissingInput,
    NumericalFailure,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::WeightStructureMismatch: return "WeightStructureMismatch";
        case ErrorCode::NonPositiveMuMin: return "NonPositiveMuMin";
        case ErrorCode::Unsatisfiable: return "Unsatisfiable";
        case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
        case ErrorCode::NoStabilizingSolution: return "NoStabilizingSolution";
        case ErrorCode::EbarNotPsd: return "EbarNotPsd";
        case ErrorCode::HypothesisNotVerified: return "HypothesisNotVerified";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::UnknownCatalogId: return "UnknownCatalogId";
        case ErrorCode::EventOffGrid: return "EventOffGrid";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

}  // namespace mtd
