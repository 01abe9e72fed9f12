#include "agentcollab/tokenizer.hpp"

namespace agentcollab {

namespace {

enum class CharClass { letter, digit, blank, newline, other };

CharClass classify(unsigned char c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80) return CharClass::letter;
  if (c >= '0' && c <= '9') return CharClass::digit;
  if (c == ' ' || c == '\t') return CharClass::blank;
  if (c == '\n' || c == '\r') return CharClass::newline;
  return CharClass::other;
}

std::int64_t ceil_div(std::int64_t n, std::int64_t d) { return (n + d - 1) / d; }

}  // namespace

std::int64_t count_output_tokens(std::string_view text) {
  std::int64_t tokens = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    auto cls = classify(static_cast<unsigned char>(text[i]));
    std::size_t j = i + 1;
    if (cls != CharClass::other) {
      while (j < text.size() && classify(static_cast<unsigned char>(text[j])) == cls) ++j;
    }
    auto len = static_cast<std::int64_t>(j - i);
    switch (cls) {
      case CharClass::letter: tokens += ceil_div(len, 4); break;
      case CharClass::digit: tokens += ceil_div(len, 3); break;
      case CharClass::newline: tokens += 1; break;
      case CharClass::other: tokens += 1; break;
      case CharClass::blank: break;
    }
    i = j;
  }
  return tokens;
}

}  // namespace agentcollab
