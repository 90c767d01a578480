#pragma once

// Trigger trigrams: greedily pick the highest-scoring tokens whose (clipped) trigrams
// do not overlap, then map them back to character offsets for highlighting.

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fallacy/error.hpp"
#include "fallacy/scorer.hpp"
#include "fallacy/tokenize.hpp"

namespace fallacy {

struct TokenWeight {
  std::string token;
  double score = 0.0;
};

struct TriggerSpan {
  std::size_t center = 0;
  std::size_t first = 0;  // inclusive token range, center -/+ 1 clipped to the sequence
  std::size_t last = 0;
  double score = 0.0;     // center token's score
  std::string center_token;

  bool overlaps(const TriggerSpan& o) const { return first <= o.last && o.first <= last; }
  bool operator==(const TriggerSpan&) const = default;
};

using TokenPredicate = std::function<bool(std::size_t index, std::string_view token)>;

/// Greedy selection: candidates in descending score (ties to the lower index); a
/// candidate is accepted when it is not excluded and its trigram is disjoint from every
/// trigram accepted so far. Stops after `n` acceptances; may return fewer.
inline std::vector<TriggerSpan> select_trigger_trigrams(std::span<const TokenWeight> tokens, std::size_t n = 3,
                                                        const TokenPredicate& excluded = {}) {
  if (n < 1) throw InvalidArgument("select_trigger_trigrams: n must be >= 1");
  std::vector<std::size_t> order(tokens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tokens[a].score > tokens[b].score; });
  std::vector<TriggerSpan> accepted;
  for (const auto i : order) {
    if (accepted.size() == n) break;
    if (excluded && excluded(i, tokens[i].token)) continue;
    TriggerSpan s;
    s.center = i;
    s.first = i == 0 ? 0 : i - 1;
    s.last = std::min(i + 1, tokens.size() - 1);
    s.score = tokens[i].score;
    s.center_token = tokens[i].token;
    const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](const auto& a) { return a.overlaps(s); });
    if (!clash) accepted.push_back(std::move(s));
  }
  return accepted;
}

/// Selection over scorer output; tokens flagged special are never centers.
inline std::vector<TriggerSpan> select_trigger_trigrams(std::span<const ScoredToken> tokens, std::size_t n = 3) {
  std::vector<TokenWeight> weights;
  weights.reserve(tokens.size());
  for (const auto& t : tokens) weights.push_back({t.token, t.score});
  return select_trigger_trigrams(weights, n, [&](std::size_t i, std::string_view) { return tokens[i].special; });
}

struct HighlightSpan {
  std::size_t start = 0;  // byte offsets into the text
  std::size_t end = 0;
  std::string center_token;
  double score = 0.0;

  bool operator==(const HighlightSpan&) const = default;
};

struct HighlightRecord {
  std::string id;
  std::string text;
  std::vector<HighlightSpan> spans;
};

/// Maps trigger spans onto character offsets using the tokens the scores were computed
/// over. Each highlight runs from the first located token of the trigram to the last.
inline HighlightRecord render_highlight(std::string_view text, std::span<const ScoredToken> tokens,
                                        std::span<const TriggerSpan> spans) {
  HighlightRecord rec;
  rec.text = std::string(text);
  for (const auto& s : spans) {
    if (s.first > s.center || s.center > s.last || s.last >= tokens.size()) {
      throw InvalidArgument("trigger span [" + std::to_string(s.first) + ", " + std::to_string(s.last) +
                            "] does not fit a sequence of " + std::to_string(tokens.size()) + " tokens");
    }
    if (!s.center_token.empty() && s.center_token != tokens[s.center].token) {
      throw InvalidArgument("trigger span centre '" + s.center_token + "' does not match token '" +
                            tokens[s.center].token + "' at index " + std::to_string(s.center));
    }
    if (!tokens[s.center].span) {
      throw InvalidArgument("centre token '" + tokens[s.center].token + "' has no position in the text");
    }
    std::size_t start = tokens[s.center].span->start, end = tokens[s.center].span->end;
    for (std::size_t i = s.first; i <= s.last; ++i) {
      if (!tokens[i].span) continue;
      const auto& sp = *tokens[i].span;
      if (sp.end > text.size() || sp.start > sp.end) {
        throw InvalidArgument("token span of '" + tokens[i].token + "' lies outside the text");
      }
      start = std::min(start, sp.start);
      end = std::max(end, sp.end);
    }
    rec.spans.push_back({start, end, tokens[s.center].token, s.score});
  }
  return rec;
}

/// Highlights against the builtin tokenizer's view of `text`.
inline HighlightRecord render_highlight(std::string_view text, std::span<const TriggerSpan> spans) {
  std::vector<ScoredToken> tokens;
  for (auto& t : tokenize(text)) tokens.push_back({std::move(t.text), t.span, 0.0, false});
  return render_highlight(text, tokens, spans);
}

inline nlohmann::json to_json(const HighlightRecord& r) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : r.spans) {
    spans.push_back({{"start", s.start}, {"end", s.end}, {"center_token", s.center_token}, {"score", s.score}});
  }
  return {{"id", r.id}, {"text", r.text}, {"spans", std::move(spans)}};
}

}  // namespace fallacy
