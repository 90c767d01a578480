#include <random>
#include <regex>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fallacy/tokenize.hpp"

using namespace fallacy;

TEST(Tokenize, LowercasesAndKeepsContractions) {
  const auto words = tokenize_words("You're an IDIOT, aren't you?");
  EXPECT_EQ(words, (std::vector<std::string>{"you're", "an", "idiot", "aren't", "you"}));
}

TEST(Tokenize, SpansPointIntoOriginalText) {
  const std::string text = "  Hello,   World's 42!";
  for (const auto& t : tokenize(text)) {
    const auto raw = text.substr(t.span.start, t.span.size());
    std::string lowered;
    for (char c : raw) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    EXPECT_EQ(lowered, t.text);
  }
}

TEST(Tokenize, DanglingApostrophesSplit) {
  EXPECT_EQ(tokenize_words("'quoted' dogs' x''y"), (std::vector<std::string>{"quoted", "dogs", "x", "y"}));
}

TEST(Tokenize, Utf8StaysInsideWords) {
  const auto words = tokenize_words("caf\xc3\xa9 na\xc3\xafve");
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0], "caf\xc3\xa9");
}

TEST(Tokenize, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ,.;!? '' ").empty());
}

TEST(Tokenize, MatchesRegexOracleOnRandomAscii) {
  const std::regex word("[A-Za-z0-9]+('[A-Za-z0-9]+)*");
  const std::string alphabet = "abAB09 '.,-x";
  std::mt19937 gen(7);
  std::uniform_int_distribution<std::size_t> len(0, 40), pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    for (std::size_t i = len(gen); i > 0; --i) text.push_back(alphabet[pick(gen)]);
    std::vector<std::pair<std::size_t, std::size_t>> expected;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), word); it != std::sregex_iterator(); ++it)
      expected.emplace_back(static_cast<std::size_t>(it->position()), static_cast<std::size_t>(it->length()));
    const auto got = tokenize(text);
    ASSERT_EQ(got.size(), expected.size()) << text;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].span.start, expected[i].first) << text;
      EXPECT_EQ(got[i].span.size(), expected[i].second) << text;
    }
  }
}
