#pragma once

#include <cstdint>
#include <string_view>

namespace agentcollab {

// Repository-wide output-token count. Deterministic subword scheme:
//   * letter runs split into pieces of up to 4 bytes (bytes >= 0x80 count
//     as letters, so UTF-8 text stays inside word pieces);
//   * digit runs split into groups of up to 3;
//   * every other printable byte is its own token;
//   * spaces and tabs are free, each run of \n and \r bytes is one token.
// Concatenating two texts can merge at most one run at the seam, so
// count(a + b) stays within 1 of count(a) + count(b).
std::int64_t count_output_tokens(std::string_view text);

}  // namespace agentcollab
