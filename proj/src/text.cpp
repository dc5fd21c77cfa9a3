#include "newsmotion/text.hpp"

#include <cctype>

namespace newsmotion {

namespace {

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize_with_offsets(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    const std::string_view chunk = text.substr(start, i - start);

    Token token;
    bool have_offset = false;
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      const char c = chunk[k];
      bool keep = is_word_char(c);
      if (c == '-') {
        keep = !token.text.empty() && k + 1 < chunk.size() && is_word_char(chunk[k + 1]) &&
               is_word_char(chunk[k - 1]);
      }
      if (!keep) continue;
      if (!have_offset) {
        token.offset = start + k;
        have_offset = true;
      }
      token.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (!token.text.empty()) tokens.push_back(std::move(token));
  }
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

}  // namespace newsmotion
