#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adiabatic {

enum class ErrorKind {
    UnknownFamily,
    InvalidParameter,
    DimensionMismatch,
    OutOfDomain,
    NumericalFailure,
    GapCollapse,
    TrackingAmbiguous,
    GridTooCoarse,
    NonFinite,
    OrderUnavailable,
    LevelOutOfRange,
    PathTooLong,
    DegenerateInput,
    StepSizeUnderflow,
    ParseError,
    ValidationError,
    IoError,
};

inline std::string_view to_string(ErrorKind kind) noexcept
{
    switch(kind)
    {
    case ErrorKind::UnknownFamily: return "UnknownFamily";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::GapCollapse: return "GapCollapse";
    case ErrorKind::TrackingAmbiguous: return "TrackingAmbiguous";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::OrderUnavailable: return "OrderUnavailable";
    case ErrorKind::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorKind::PathTooLong: return "PathTooLong";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the library. `kind()` classifies the failure,
/// `field()` names the offending parameter or config key when there is one,
/// and `stage()` is filled in by the run pipeline to say which step failed.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string field = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + message)
        , kind_(kind)
        , field_(std::move(field))
    { }

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }
    const std::string& stage() const noexcept { return stage_; }

    Error with_stage(std::string stage) const
    {
        Error e = *this;
        e.stage_ = std::move(stage);
        return e;
    }

    /// Configuration problems are user errors (exit 2); everything raised by
    /// the numerics is a numeric failure (exit 3).
    bool is_config_error() const noexcept
    {
        switch(kind_)
        {
        case ErrorKind::UnknownFamily:
        case ErrorKind::InvalidParameter:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::ParseError:
        case ErrorKind::ValidationError:
        case ErrorKind::LevelOutOfRange:
        case ErrorKind::OrderUnavailable:
            return true;
        default:
            return false;
        }
    }

private:
    ErrorKind kind_;
    std::string field_;
    std::string stage_;
};

} // namespace adiabatic
