#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rejsim {

enum class Errc {
    UnknownState,
    DuplicateState,
    NonPositiveRate,
    SelfTransition,
    DuplicateRule,
    MalformedLine,
    SelfLoop,
    NonPositiveWeight,
    AsymmetricWeight,
    DegenerateParameters,
    SlotOutOfRange,
    IsolatedNode,
    EdgeExists,
    EdgeAbsent,
    ZeroRange,
    ProbabilityOutOfRange,
    ScriptExhausted,
    TimeInPast,
    NonFiniteTime,
    ModelNotRejectionSimulable,
    BadInitialAssignment,
    CorruptState,
    OutOfOrderStream,
    StateSpaceTooLarge,
    OgaRequiresSis,
    Unsupported,
    IoError,
    ParseError,
};

std::string_view errc_name(Errc code) noexcept;

/// All library failures are reported through this exception; `code()`
/// identifies the failure class, `what()` carries the detail.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace rejsim
