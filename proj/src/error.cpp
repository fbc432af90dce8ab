#include "rejsim/error.hpp"

namespace rejsim {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::UnknownState: return "UnknownState";
    case Errc::DuplicateState: return "DuplicateState";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::SelfTransition: return "SelfTransition";
    case Errc::DuplicateRule: return "DuplicateRule";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::NonPositiveWeight: return "NonPositiveWeight";
    case Errc::AsymmetricWeight: return "AsymmetricWeight";
    case Errc::DegenerateParameters: return "DegenerateParameters";
    case Errc::SlotOutOfRange: return "SlotOutOfRange";
    case Errc::IsolatedNode: return "IsolatedNode";
    case Errc::EdgeExists: return "EdgeExists";
    case Errc::EdgeAbsent: return "EdgeAbsent";
    case Errc::ZeroRange: return "ZeroRange";
    case Errc::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::TimeInPast: return "TimeInPast";
    case Errc::NonFiniteTime: return "NonFiniteTime";
    case Errc::ModelNotRejectionSimulable: return "ModelNotRejectionSimulable";
    case Errc::BadInitialAssignment: return "BadInitialAssignment";
    case Errc::CorruptState: return "CorruptState";
    case Errc::OutOfOrderStream: return "OutOfOrderStream";
    case Errc::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case Errc::OgaRequiresSis: return "OgaRequiresSis";
    case Errc::Unsupported: return "Unsupported";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace rejsim
