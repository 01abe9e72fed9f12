#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/message.hpp"

namespace agentcollab {

// Tag grammar (byte-exact):
//   wrapper    <payload id="pN">BLOCK</payload>
//   reference  <payload_ref id="pN"/>
// BLOCK is a fenced code block from its opening ``` through its closing ```.

enum class PayloadKind { code, other_structured };

std::string_view to_string(PayloadKind kind) noexcept;

struct PayloadSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing fence
  PayloadKind kind = PayloadKind::code;

  std::size_t length() const { return end - begin; }
  bool operator==(const PayloadSpan&) const = default;
};

struct PayloadRecord {
  std::string payload_id;
  std::string content;
  PayloadKind kind = PayloadKind::code;
  AgentId source_agent;
  std::int64_t created_at_ms = 0;
};

/// Session-wide, insert-only store of detected payloads. Registration is
/// serialized; ids are "p1", "p2", ... in registration order.
class PayloadRegistry {
 public:
  const PayloadRecord& add(std::string content, PayloadKind kind, AgentId source,
                           std::int64_t now_ms);
  /// UnknownPayloadId if absent.
  const PayloadRecord& get(std::string_view payload_id) const;
  bool contains(std::string_view payload_id) const;
  std::size_t size() const;
  std::vector<PayloadRecord> records() const;

 private:
  mutable std::mutex mutex_;
  // Records live behind unique_ptr so references stay valid across inserts.
  std::map<std::string, std::unique_ptr<const PayloadRecord>, std::less<>> records_;
  std::vector<std::string> order_;
};

/// Fenced code blocks: a line starting with ``` (optional language hint)
/// through the next line that is exactly ``` (trailing whitespace allowed).
/// Unterminated fences are plain text.
std::vector<PayloadSpan> detect_payloads(std::string_view text);

std::string payload_wrapper_open(std::string_view payload_id);
inline constexpr std::string_view kPayloadWrapperClose = "</payload>";
std::string payload_reference(std::string_view payload_id);

/// Registers each detected block and wraps it in place.
Message wrap_payloads(PayloadRegistry& registry, const Message& message);

struct ExpansionResult {
  std::string text;
  std::vector<std::string> expanded_ids;
};

/// Replaces every reference tag by the registered block, verbatim.
ExpansionResult expand_references(const PayloadRegistry& registry, std::string_view text);

/// Turns wrapped payloads back into reference tags, i.e. what a supervisor
/// writes when it reuses a block instead of regenerating it. Each wrapper
/// closes at the first "</payload>" after it, so a block that itself
/// contains that string needs the registry overload.
std::string wrappers_to_references(std::string_view wrapped);

/// Same, but a wrapper only matches when it encloses exactly the
/// registered bytes for its id.
std::string wrappers_to_references(const PayloadRegistry& registry, std::string_view wrapped);

/// (original - referenced) / original. DivisionByZero when original is 0.
double reference_savings(double original_tokens, double referenced_tokens);

}  // namespace agentcollab
