#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinbath {

enum class ErrorKind {
    OutOfRange,
    InvalidKind,
    DimensionMismatch,
    BadTopology,
    TooLarge,
    BadArguments,
    PlanMismatch,
    NotHermitian,
    NoConvergence,
    BasisMismatch,
    BadGrid,
    Underdetermined,
    Parse,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InvalidKind: return "InvalidKind";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadTopology: return "BadTopology";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BadArguments: return "BadArguments";
    case ErrorKind::PlanMismatch: return "PlanMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::BadGrid: return "BadGrid";
    case ErrorKind::Underdetermined: return "Underdetermined";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace spinbath
