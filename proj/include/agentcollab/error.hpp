#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agentcollab {

enum class ErrorCode {
  // agent graph
  DuplicateAgentId,
  ReservedAgentId,
  CycleDetected,
  MultipleRoots,
  MultipleParents,
  UnknownSubAgent,
  UnknownActionGroup,
  UnknownAgent,
  DuplicateToolName,
  // provider
  BackendUnavailable,
  MalformedToolCall,
  MalformedRequest,
  ScriptMismatch,
  // comm
  UnknownRecipient,
  RecipientNotVisible,
  DepthExceeded,
  TurnBudgetExceeded,
  IterationCapExceeded,
  // payload
  UnknownPayloadId,
  DivisionByZero,
  // routing
  ClassifierUnavailable,
  RelayFailure,
  EmptyJoin,
  // harness / judge / metrics
  SchemaViolation,
  UnknownTool,
  SchemaMismatch,
  JudgeParseFailure,
  EmptySessionSet,
  MissingTimestamps,
  IncompatibleRuns,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error raised by every agentcollab component. The code identifies the
/// failure class; what() carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace agentcollab
