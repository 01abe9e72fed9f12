#include "agentcollab/payload.hpp"

#include "agentcollab/error.hpp"

namespace agentcollab {

std::string_view to_string(PayloadKind kind) noexcept {
  return kind == PayloadKind::code ? "code" : "other-structured";
}

const PayloadRecord& PayloadRegistry::add(std::string content, PayloadKind kind, AgentId source,
                                          std::int64_t now_ms) {
  std::lock_guard lock(mutex_);
  auto id = "p" + std::to_string(order_.size() + 1);
  auto record = std::make_unique<PayloadRecord>(
      PayloadRecord{id, std::move(content), kind, std::move(source), now_ms});
  auto [it, _] = records_.emplace(id, std::move(record));
  order_.push_back(id);
  return *it->second;
}

const PayloadRecord& PayloadRegistry::get(std::string_view payload_id) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(payload_id);
  if (it == records_.end()) fail(ErrorCode::UnknownPayloadId, std::string(payload_id));
  return *it->second;
}

bool PayloadRegistry::contains(std::string_view payload_id) const {
  std::lock_guard lock(mutex_);
  return records_.find(payload_id) != records_.end();
}

std::size_t PayloadRegistry::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

std::vector<PayloadRecord> PayloadRegistry::records() const {
  std::lock_guard lock(mutex_);
  std::vector<PayloadRecord> out;
  for (const auto& id : order_) out.push_back(*records_.find(id)->second);
  return out;
}

namespace {

constexpr std::string_view kFence = "```";

bool is_closing_fence(std::string_view line) {
  if (line.substr(0, kFence.size()) != kFence) return false;
  for (auto c : line.substr(kFence.size())) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

bool is_opening_fence(std::string_view line) {
  if (line.substr(0, kFence.size()) != kFence) return false;
  // Info strings may not contain backticks.
  return line.find('`', kFence.size()) == std::string_view::npos;
}

}  // namespace

std::vector<PayloadSpan> detect_payloads(std::string_view text) {
  std::vector<PayloadSpan> spans;
  std::size_t open_at = std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line_end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(pos, line_end - pos);
    if (open_at == std::string_view::npos) {
      if (is_opening_fence(line)) open_at = pos;
    } else if (is_closing_fence(line)) {
      // The span stops right after the closing backticks.
      spans.push_back({open_at, pos + kFence.size(), PayloadKind::code});
      open_at = std::string_view::npos;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return spans;
}

std::string payload_wrapper_open(std::string_view payload_id) {
  return "<payload id=\"" + std::string(payload_id) + "\">";
}

std::string payload_reference(std::string_view payload_id) {
  return "<payload_ref id=\"" + std::string(payload_id) + "\"/>";
}

Message wrap_payloads(PayloadRegistry& registry, const Message& message) {
  auto spans = detect_payloads(message.content);
  if (spans.empty()) return message;
  Message out = message;
  out.content.clear();
  std::size_t cursor = 0;
  for (const auto& span : spans) {
    out.content.append(message.content, cursor, span.begin - cursor);
    auto block = message.content.substr(span.begin, span.length());
    const auto& rec = registry.add(block, span.kind, message.sender, message.timestamp_ms);
    out.content += payload_wrapper_open(rec.payload_id);
    out.content += block;
    out.content += kPayloadWrapperClose;
    cursor = span.end;
  }
  out.content.append(message.content, cursor, std::string::npos);
  return out;
}

namespace {

// Matches an opening token of the form PREFIX + "p" + digits + SUFFIX at
// `pos`; returns the id and the end offset.
bool match_tag(std::string_view text, std::size_t pos, std::string_view prefix,
               std::string_view suffix, std::string& id, std::size_t& end) {
  if (text.substr(pos, prefix.size()) != prefix) return false;
  auto i = pos + prefix.size();
  if (i >= text.size() || text[i] != 'p') return false;
  auto j = i + 1;
  while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
  if (j == i + 1) return false;
  if (text.substr(j, suffix.size()) != suffix) return false;
  id = std::string(text.substr(i, j - i));
  end = j + suffix.size();
  return true;
}

}  // namespace

ExpansionResult expand_references(const PayloadRegistry& registry, std::string_view text) {
  ExpansionResult result;
  std::size_t cursor = 0;
  std::size_t pos = text.find('<');
  while (pos != std::string_view::npos) {
    std::string id;
    std::size_t end = 0;
    if (match_tag(text, pos, "<payload_ref id=\"", "\"/>", id, end)) {
      const auto& rec = registry.get(id);
      result.text.append(text.substr(cursor, pos - cursor));
      result.text += rec.content;
      result.expanded_ids.push_back(id);
      cursor = end;
      pos = text.find('<', end);
    } else {
      pos = text.find('<', pos + 1);
    }
  }
  result.text.append(text.substr(cursor));
  return result;
}

std::string wrappers_to_references(std::string_view wrapped) {
  std::string out;
  std::size_t cursor = 0;
  std::size_t pos = wrapped.find('<');
  while (pos != std::string_view::npos) {
    std::string id;
    std::size_t open_end = 0;
    if (match_tag(wrapped, pos, "<payload id=\"", "\">", id, open_end)) {
      auto close = wrapped.find(kPayloadWrapperClose, open_end);
      if (close != std::string_view::npos) {
        out.append(wrapped.substr(cursor, pos - cursor));
        out += payload_reference(id);
        cursor = close + kPayloadWrapperClose.size();
        pos = wrapped.find('<', cursor);
        continue;
      }
    }
    pos = wrapped.find('<', pos + 1);
  }
  out.append(wrapped.substr(cursor));
  return out;
}

std::string wrappers_to_references(const PayloadRegistry& registry, std::string_view wrapped) {
  std::string out;
  std::size_t cursor = 0;
  std::size_t pos = wrapped.find('<');
  while (pos != std::string_view::npos) {
    std::string id;
    std::size_t open_end = 0;
    if (match_tag(wrapped, pos, "<payload id=\"", "\">", id, open_end) && registry.contains(id)) {
      const auto& content = registry.get(id).content;
      auto close = open_end + content.size();
      if (wrapped.substr(open_end, content.size()) == content &&
          wrapped.substr(close, kPayloadWrapperClose.size()) == kPayloadWrapperClose) {
        out.append(wrapped.substr(cursor, pos - cursor));
        out += payload_reference(id);
        cursor = close + kPayloadWrapperClose.size();
        pos = wrapped.find('<', cursor);
        continue;
      }
    }
    pos = wrapped.find('<', pos + 1);
  }
  out.append(wrapped.substr(cursor));
  return out;
}

double reference_savings(double original_tokens, double referenced_tokens) {
  if (original_tokens == 0.0) fail(ErrorCode::DivisionByZero, "original token count is zero");
  return (original_tokens - referenced_tokens) / original_tokens;
}

}  // namespace agentcollab
