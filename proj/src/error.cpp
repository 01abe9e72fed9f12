#include "agentcollab/error.hpp"

namespace agentcollab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateAgentId: return "DuplicateAgentId";
    case ErrorCode::ReservedAgentId: return "ReservedAgentId";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::MultipleParents: return "MultipleParents";
    case ErrorCode::UnknownSubAgent: return "UnknownSubAgent";
    case ErrorCode::UnknownActionGroup: return "UnknownActionGroup";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::DuplicateToolName: return "DuplicateToolName";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MalformedToolCall: return "MalformedToolCall";
    case ErrorCode::MalformedRequest: return "MalformedRequest";
    case ErrorCode::ScriptMismatch: return "ScriptMismatch";
    case ErrorCode::UnknownRecipient: return "UnknownRecipient";
    case ErrorCode::RecipientNotVisible: return "RecipientNotVisible";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::TurnBudgetExceeded: return "TurnBudgetExceeded";
    case ErrorCode::IterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::UnknownPayloadId: return "UnknownPayloadId";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::ClassifierUnavailable: return "ClassifierUnavailable";
    case ErrorCode::RelayFailure: return "RelayFailure";
    case ErrorCode::EmptyJoin: return "EmptyJoin";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::JudgeParseFailure: return "JudgeParseFailure";
    case ErrorCode::EmptySessionSet: return "EmptySessionSet";
    case ErrorCode::MissingTimestamps: return "MissingTimestamps";
    case ErrorCode::IncompatibleRuns: return "IncompatibleRuns";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace agentcollab
