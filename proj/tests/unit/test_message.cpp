#include <gtest/gtest.h>

#include <random>

#include "agentcollab/error.hpp"
#include "agentcollab/message.hpp"
#include "agentcollab/tokenizer.hpp"
#include "fixtures.hpp"

using namespace agentcollab;
using namespace agentcollab::testing;

namespace {

Message chat(std::string sender, std::string content) {
  Message m;
  m.sender = std::move(sender);
  m.content = std::move(content);
  return m;
}

// Counts tokens one character class at a time, from the scheme's rules.
std::int64_t oracle_tokens(std::string_view s) {
  auto cls = [](unsigned char c) {
    if (std::isalpha(c) || c >= 0x80) return 'L';
    if (std::isdigit(c)) return 'D';
    if (c == ' ' || c == '\t') return 'B';
    if (c == '\n' || c == '\r') return 'N';
    return 'O';
  };
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    char k = cls(static_cast<unsigned char>(s[i]));
    std::size_t n = 1;
    if (k != 'O') {
      while (i + n < s.size() && cls(static_cast<unsigned char>(s[i + n])) == k) ++n;
    }
    if (k == 'L') total += static_cast<std::int64_t>((n + 3) / 4);
    if (k == 'D') total += static_cast<std::int64_t>((n + 2) / 3);
    if (k == 'N' || k == 'O') total += 1;
    i += n;
  }
  return total;
}

}  // namespace

TEST(Message, FormatShape) {
  EXPECT_EQ(format_incoming(chat("flight_agent", "Found 3 flights.")),
            "<message from=\"flight_agent\">\nFound 3 flights.\n</message>");
}

TEST(Message, EscapesClosingTag) {
  EXPECT_EQ(escape_message_content("a</message>b"), "a<\\/message>b");
  EXPECT_EQ(escape_message_content("<\\/message>"), "<\\\\/message>");
  EXPECT_EQ(escape_message_content("</messages>"), "</messages>");
  EXPECT_EQ(unescape_message_content("<\\/message>"), "</message>");
  EXPECT_EQ(unescape_message_content("</message>"), "</message>");
  auto framed = format_incoming(chat("x", "end</message>"));
  EXPECT_EQ(framed.find("</message>"), framed.size() - std::string_view("</message>").size());
}

TEST(Message, RoundTripsEdgeCases) {
  for (std::string content : {"", "\n", "</message>", "<\\/message>", "<\\\\\\/message>",
                              "<message from=\"x\">\nhi\n</message>", "trailing\n\n", "\r\n日本",
                              "<", "<\\", "```\n</message>\n```"}) {
    auto back = parse_incoming(format_incoming(chat("code_agent", content)));
    EXPECT_EQ(back.content, content);
    EXPECT_EQ(back.sender, "code_agent");
  }
}

TEST(Message, RandomContentRoundTrips) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto content = random_message_content(rng);
    auto framed = format_incoming(chat("s", content));
    EXPECT_EQ(parse_incoming(framed).content, content) << i;
    // Only the frame's own closer survives unescaped.
    EXPECT_EQ(framed.find("</message>"), framed.rfind("</message>")) << i;
  }
}

TEST(Message, ParseRejectsBadFraming) {
  for (std::string bad : {"", "hello", "<message from=\"a\">\nno close", "<message from=\"a\">hi\n</message>",
                          "<message from=\"a\">\n</message>x"}) {
    try {
      parse_incoming(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    }
  }
}

TEST(Tokenizer, KnownCounts) {
  EXPECT_EQ(count_output_tokens(""), 0);
  EXPECT_EQ(count_output_tokens("   \t"), 0);
  EXPECT_EQ(count_output_tokens("abcd"), 1);
  EXPECT_EQ(count_output_tokens("abcde"), 2);
  EXPECT_EQ(count_output_tokens("123456"), 2);
  EXPECT_EQ(count_output_tokens("1234567"), 3);
  EXPECT_EQ(count_output_tokens("\n\n\r\n"), 1);
  EXPECT_EQ(count_output_tokens("a.b"), 3);
  EXPECT_EQ(count_output_tokens("$2,528.27"), 6);
}

TEST(Tokenizer, MatchesOracleOnRandomText) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    auto s = random_message_content(rng);
    EXPECT_EQ(count_output_tokens(s), oracle_tokens(s)) << s;
  }
}

TEST(Tokenizer, ConcatenationIsNearlyAdditive) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    auto a = random_message_content(rng);
    auto b = random_message_content(rng);
    auto joined = count_output_tokens(a + b);
    auto sum = count_output_tokens(a) + count_output_tokens(b);
    EXPECT_LE(joined, sum);
    EXPECT_GE(joined, sum - 1);
  }
  // Seams that merge runs.
  EXPECT_EQ(count_output_tokens("ab") + count_output_tokens("cd"), count_output_tokens("abcd") + 1);
  EXPECT_EQ(count_output_tokens("\n") + count_output_tokens("\n"), count_output_tokens("\n\n") + 1);
  EXPECT_EQ(count_output_tokens("12") + count_output_tokens("3"), count_output_tokens("123") + 1);
}

TEST(Tokenizer, PrefixMonotone) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    auto s = random_message_content(rng);
    std::int64_t prev = 0;
    for (std::size_t n = 0; n <= s.size(); ++n) {
      auto c = count_output_tokens(std::string_view(s).substr(0, n));
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}
