#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace newsmotion {

struct Token {
  std::string text;
  std::size_t offset = 0;  // byte offset of the token's first kept character

  friend bool operator==(const Token&, const Token&) = default;
};

// Lowercases, drops punctuation except hyphens joining two word characters,
// splits on whitespace. Bytes >= 0x80 count as word characters.
std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

}  // namespace newsmotion
