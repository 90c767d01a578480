#pragma once

// Word distributions, Jensen-Shannon divergence (base 2) and its per-word decomposition
// for word-shift graphs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fallacy/corpus.hpp"
#include "fallacy/error.hpp"
#include "fallacy/tokenize.hpp"

namespace fallacy {

struct WordDistribution {
  std::map<std::string, double> probability;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t vocabulary_size() const { return probability.size(); }
  double p(const std::string& w) const {
    const auto it = probability.find(w);
    return it == probability.end() ? 0.0 : it->second;
  }
};

inline const std::set<std::string>& default_stop_words() {
  static const std::set<std::string> words = {
      "a",     "about", "all",   "also",  "an",    "and",  "any",   "are",   "as",    "at",   "be",    "been",
      "but",   "by",    "can",   "could", "did",   "do",   "does",  "for",   "from",  "had",  "has",   "have",
      "he",    "her",   "his",   "how",   "i",     "if",   "in",    "into",  "is",    "it",   "its",   "just",
      "me",    "more",  "my",    "no",    "not",   "of",   "on",    "one",   "or",    "our",  "out",   "she",
      "so",    "some",  "than",  "that",  "the",   "their","them",  "then",  "there", "they", "this",  "to",
      "up",    "us",    "was",   "we",    "were",  "what", "when",  "which", "who",   "will", "with",  "would",
      "you",   "your"};
  return words;
}

inline WordDistribution word_distribution_from_counts(std::map<std::string, std::uint64_t> counts) {
  WordDistribution d;
  for (const auto& [_, c] : counts) d.total += c;
  if (d.total == 0) throw InvalidArgument("word distribution over an empty token stream");
  for (const auto& [w, c] : counts) {
    if (c > 0) d.probability.emplace(w, static_cast<double>(c) / static_cast<double>(d.total));
  }
  std::erase_if(counts, [](const auto& kv) { return kv.second == 0; });
  d.counts = std::move(counts);
  return d;
}

/// Relative token frequencies over `texts`, using the classifier's tokenizer.
inline WordDistribution word_distribution(std::span<const std::string_view> texts,
                                          const std::set<std::string>* stop_words = nullptr) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto text : texts) {
    for (auto& tok : tokenize_words(text)) {
      if (stop_words && stop_words->count(tok)) continue;
      ++counts[std::move(tok)];
    }
  }
  return word_distribution_from_counts(std::move(counts));
}

inline WordDistribution word_distribution(const Corpus& corpus, std::span<const std::size_t> comment_indices,
                                          const std::set<std::string>* stop_words = nullptr) {
  std::vector<std::string_view> texts;
  texts.reserve(comment_indices.size());
  for (const auto i : comment_indices) texts.push_back(corpus.comment(i).text);
  return word_distribution(texts, stop_words);
}

namespace detail {

inline void check_pi(double pi1) {
  if (!(pi1 > 0.0 && pi1 < 1.0)) throw InvalidArgument("JSD weight pi1 must lie in (0, 1), got " + std::to_string(pi1));
}

inline double xlog2_ratio(double x, double m) { return x > 0.0 ? x * std::log2(x / m) : 0.0; }

/// Visits the union vocabulary in lexicographic order with (word, p, q).
template <class Fn>
void for_each_word(const WordDistribution& p, const WordDistribution& q, Fn&& fn) {
  auto a = p.probability.begin(), b = q.probability.begin();
  while (a != p.probability.end() || b != q.probability.end()) {
    if (b == q.probability.end() || (a != p.probability.end() && a->first < b->first)) {
      fn(a->first, a->second, 0.0);
      ++a;
    } else if (a == p.probability.end() || b->first < a->first) {
      fn(b->first, 0.0, b->second);
      ++b;
    } else {
      fn(a->first, a->second, b->second);
      ++a, ++b;
    }
  }
}

}  // namespace detail

/// Weight of the first distribution proportional to its token total.
inline double proportional_pi(const WordDistribution& p, const WordDistribution& q) {
  return static_cast<double>(p.total) / static_cast<double>(p.total + q.total);
}

/// pi1 * KL(P || M) + pi2 * KL(Q || M) with M = pi1 P + pi2 Q, in bits.
inline double jsd(const WordDistribution& p, const WordDistribution& q, double pi1 = 0.5) {
  detail::check_pi(pi1);
  const double pi2 = 1.0 - pi1;
  double kl_p = 0.0, kl_q = 0.0;
  detail::for_each_word(p, q, [&](const std::string&, double pw, double qw) {
    const double m = pw == qw ? pw : pi1 * pw + pi2 * qw;
    kl_p += detail::xlog2_ratio(pw, m);
    kl_q += detail::xlog2_ratio(qw, m);
  });
  return std::max(0.0, pi1 * kl_p + pi2 * kl_q);
}

enum class Side { first, second };

inline std::string_view to_string(Side s) { return s == Side::first ? "first" : "second"; }

struct WordShiftEntry {
  std::string word;
  double contribution = 0.0;
  Side side = Side::first;
  double p_first = 0.0;
  double p_second = 0.0;
};

inline constexpr std::size_t kAllWords = std::numeric_limits<std::size_t>::max();

/// Per-word JSD contributions, largest first (ties by word), truncated to `top_n`.
inline std::vector<WordShiftEntry> word_shift(const WordDistribution& p, const WordDistribution& q, double pi1 = 0.5,
                                              std::size_t top_n = 30) {
  detail::check_pi(pi1);
  const double pi2 = 1.0 - pi1;
  std::vector<WordShiftEntry> entries;
  detail::for_each_word(p, q, [&](const std::string& w, double pw, double qw) {
    const double m = pw == qw ? pw : pi1 * pw + pi2 * qw;
    const double delta = pi1 * detail::xlog2_ratio(pw, m) + pi2 * detail::xlog2_ratio(qw, m);
    entries.push_back({w, delta, qw > pw ? Side::second : Side::first, pw, qw});
  });
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.contribution != b.contribution) return a.contribution > b.contribution;
    return a.word < b.word;
  });
  if (entries.size() > top_n) entries.resize(top_n);
  return entries;
}

inline nlohmann::json to_json(const WordShiftEntry& e) {
  return {{"word", e.word}, {"contribution", e.contribution}, {"side", to_string(e.side)},
          {"p_first", e.p_first}, {"p_second", e.p_second}};
}

}  // namespace fallacy
