#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fallacy {

/// Half-open byte range [start, end) into the source text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const CharSpan&) const = default;
};

struct Token {
  std::string text;  // lowercased
  CharSpan span;     // offsets in the original (un-lowercased) text

  bool operator==(const Token&) const = default;
};

namespace detail {

// Bytes >= 0x80 belong to UTF-8 multi-byte sequences and are kept inside words.
constexpr bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace detail

/// Lowercasing word tokenizer. A token is a maximal run of alphanumeric characters,
/// where an apostrophe between two alphanumerics stays inside the token ("you're").
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!detail::is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n) {
      const auto c = static_cast<unsigned char>(text[i]);
      if (detail::is_word_byte(c)) {
        ++i;
      } else if (c == '\'' && i + 1 < n && detail::is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
        ++i;
      } else {
        break;
      }
    }
    Token tok;
    tok.span = {start, i};
    tok.text.reserve(i - start);
    for (std::size_t j = start; j < i; ++j) tok.text.push_back(detail::ascii_lower(text[j]));
    out.push_back(std::move(tok));
  }
  return out;
}

inline std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

}  // namespace fallacy
