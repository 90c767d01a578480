#pragma once

// Deterministic synthetic data: a planted-lexicon labeled set for the classifier and a
// threaded forum dump with planted regimes, heavy posters and profile shifts.

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "fallacy/classifier.hpp"
#include "fallacy/corpus.hpp"
#include "fallacy/detail/rng.hpp"

namespace fallacy::synthetic {

inline constexpr std::array<std::string_view, 40> kAttackWords = {
    "idiot",     "moron",    "stupid",    "liar",      "clown",     "ignorant", "dumb",     "troll",
    "hypocrite", "fool",     "pathetic",  "delusional", "brainless", "coward",   "loser",    "imbecile",
    "halfwit",   "nitwit",   "buffoon",   "dimwit",    "bigot",     "shill",    "dolt",     "simpleton",
    "clueless",  "gullible", "spineless", "dishonest", "sheep",     "crybaby",  "nutjob",   "lunatic",
    "hack",      "fraud",    "snowflake", "dunce",     "numbskull", "cretin",   "windbag",  "blockhead"};

inline constexpr std::array<std::string_view, 40> kCivilWords = {
    "evidence",  "study",      "data",       "source",     "research",  "statistics", "analysis", "argument",
    "reasoning", "citation",   "survey",     "report",     "findings",  "historians", "economists", "policy",
    "framework", "consensus",  "experiment", "methodology", "sample",   "measure",    "observed", "literature",
    "documented", "peer",      "review",     "hypothesis", "logic",     "premise",    "conclusion", "factual",
    "reference", "empirical",  "nuance",     "context",    "tradeoff",  "counterpoint", "precedent", "perspective"};

inline constexpr std::array<std::string_view, 96> kFillerWords = {
    "the",   "a",      "of",     "to",      "and",    "in",      "that",   "is",     "it",      "for",    "on",
    "with",  "as",     "this",   "was",     "but",    "be",      "they",   "have",   "not",     "are",    "or",
    "from",  "by",     "at",     "an",      "we",     "can",     "will",   "would",  "there",   "their",  "what",
    "about", "which",  "when",   "if",      "more",   "people",  "think",  "really", "government", "tax", "law",
    "state", "money",  "country", "world",  "god",    "church",  "belief", "faith",  "science", "climate", "energy",
    "vote",  "party",  "debate", "issue",   "point",  "question", "answer", "year",  "time",    "because", "should",
    "could", "every",  "some",   "many",    "most",   "other",   "than",   "then",   "now",     "just",   "only",
    "also",  "how",    "why",    "where",   "who",    "all",     "any",    "our",    "your",    "my",     "his",
    "her",   "them",   "those",  "these",   "much",   "still",   "even",   "never"};

namespace detail {

template <std::size_t N>
std::string_view pick(fallacy::detail::Rng& rng, const std::array<std::string_view, N>& words) {
  return words[rng.below(N)];
}

/// Filler sentence of [min_len, max_len] words with `planted` words inserted at random positions.
inline std::string compose(fallacy::detail::Rng& rng, std::size_t min_len, std::size_t max_len,
                           const std::vector<std::string_view>& planted) {
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::vector<std::string_view> words;
  for (std::size_t i = 0; i < len; ++i) words.push_back(pick(rng, kFillerWords));
  for (const auto w : planted) {
    const auto pos = rng.below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), w);
  }
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  out += rng.below(3) == 0 ? "!" : ".";
  return out;
}

inline std::string attack_text(fallacy::detail::Rng& rng) {
  std::vector<std::string_view> planted;
  const auto k = 1 + rng.below(3);
  for (std::size_t i = 0; i < k; ++i) planted.push_back(pick(rng, kAttackWords));
  if (rng.below(2) == 0) planted.insert(planted.begin(), "you");
  return compose(rng, 6, 16, planted);
}

inline std::string civil_text(fallacy::detail::Rng& rng) {
  std::vector<std::string_view> planted;
  const auto k = 1 + rng.below(3);
  for (std::size_t i = 0; i < k; ++i) planted.push_back(pick(rng, kCivilWords));
  return compose(rng, 6, 16, planted);
}

}  // namespace detail

/// Balanced labeled set: every document carries 1-3 words from its class lexicon.
inline std::vector<LabeledExample> planted_lexicon_corpus(std::size_t n_docs, std::uint64_t seed) {
  fallacy::detail::Rng rng(fallacy::detail::substream_seed(seed, "synthetic-labeled"));
  std::vector<LabeledExample> out;
  out.reserve(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    LabeledExample e;
    e.label = i % 2 == 0 ? Label::adhominem : Label::none;
    e.id = "doc" + std::to_string(i);
    e.text = e.label == Label::adhominem ? detail::attack_text(rng) : detail::civil_text(rng);
    out.push_back(std::move(e));
  }
  return out;
}

struct ForumSpec {
  std::vector<std::string> topics{"politics", "religion", "science"};
  std::vector<double> topic_weights{0.5, 0.3, 0.2};
  std::size_t users = 60;
  std::size_t civil_users = 20;   // the last `civil_users` users never post attacks
  std::size_t heavy_users = 5;    // the first `heavy_users` users post far more often
  double heavy_weight = 12.0;
  int start_year = 2010;
  unsigned start_month = 1;
  // Regimes: months per regime, comments per month, multiplier on attack propensity.
  std::vector<std::size_t> regime_months{40, 40, 40};
  std::vector<std::size_t> regime_comments{35, 50, 40};
  std::vector<double> regime_attack_multiplier{0.35, 1.6, 0.7};
  std::size_t comments_per_post = 10;
  double top_level_probability = 0.3;
};

struct Forum {
  std::vector<PostRecord> posts;
  std::vector<CommentRecord> comments;
  std::vector<AuthorProfile> profiles;
  std::vector<bool> planted_attack;  // ground truth per comment
};

inline std::string user_name(std::size_t u) {
  return fmt::format("user_{:02}", u);
}

/// Threaded forum with three planted temporal regimes (attack rate low, high, medium),
/// a few heavy posters and civil users whose profiles differ in reward points and
/// efficiency. Author names are raw ("user_07"); ingestion pseudonymises them.
inline Forum planted_forum(const ForumSpec& spec, std::uint64_t seed) {
  using namespace std::chrono;
  fallacy::detail::Rng rng(fallacy::detail::substream_seed(seed, "synthetic-forum"));
  Forum f;

  std::vector<double> user_weight(spec.users, 1.0), propensity(spec.users, 0.0);
  for (std::size_t u = 0; u < spec.users; ++u) {
    if (u < spec.heavy_users) user_weight[u] = spec.heavy_weight;
    if (u + spec.civil_users < spec.users) propensity[u] = 0.2 + 0.4 * rng.uniform();
  }
  // Heavy posters are the most combative.
  for (std::size_t u = 0; u < spec.heavy_users && u + spec.civil_users < spec.users; ++u) propensity[u] = 0.6;
  double weight_total = 0.0;
  for (const double w : user_weight) weight_total += w;
  auto draw_user = [&]() {
    double r = rng.uniform() * weight_total;
    for (std::size_t u = 0; u < spec.users; ++u) {
      r -= user_weight[u];
      if (r < 0.0) return u;
    }
    return spec.users - 1;
  };
  auto draw_topic = [&]() {
    double total = 0.0;
    for (const double w : spec.topic_weights) total += w;
    double r = rng.uniform() * total;
    for (std::size_t t = 0; t < spec.topics.size(); ++t) {
      r -= spec.topic_weights[t];
      if (r < 0.0) return t;
    }
    return spec.topics.size() - 1;
  };

  std::vector<std::size_t> authored(spec.users, 0), attacks(spec.users, 0);
  std::size_t month_offset = 0, post_counter = 0, comment_counter = 0;
  for (std::size_t regime = 0; regime < spec.regime_months.size(); ++regime) {
    for (std::size_t rm = 0; rm < spec.regime_months[regime]; ++rm, ++month_offset) {
      const year_month ym = year_month{year{spec.start_year}, month{spec.start_month}} + months{month_offset};
      const sys_days month_start{ym / day{1}};
      std::size_t remaining = spec.regime_comments[regime];
      while (remaining > 0) {
        const std::size_t in_post = std::min(remaining, spec.comments_per_post);
        remaining -= in_post;
        PostRecord post;
        post.post_id = "p" + std::to_string(++post_counter);
        post.author = user_name(draw_user());
        post.topic = spec.topics[draw_topic()];
        post.timestamp = sys_seconds{month_start} + seconds{static_cast<std::int64_t>(rng.below(18 * 86400))};
        post.title = "Debate " + std::to_string(post_counter) + " on " + post.topic;
        std::vector<std::size_t> thread;  // indices into f.comments
        for (std::size_t c = 0; c < in_post; ++c) {
          CommentRecord cm;
          cm.id = "c" + std::to_string(++comment_counter);
          cm.post_id = post.post_id;
          cm.topic = post.topic;
          const std::size_t author = draw_user();
          cm.author = user_name(author);
          cm.timestamp = post.timestamp + seconds{static_cast<std::int64_t>(60 + rng.below(9 * 86400))};
          const double p_attack = std::min(0.95, propensity[author] * spec.regime_attack_multiplier[regime]);
          const bool attack = rng.uniform() < p_attack;
          cm.text = attack ? detail::attack_text(rng) : detail::civil_text(rng);
          const bool top = thread.empty() || rng.uniform() < spec.top_level_probability;
          if (!top) {
            const auto& parent = f.comments[thread[rng.below(thread.size())]];
            cm.parent_id = parent.id;
            if (cm.timestamp < parent.timestamp) cm.timestamp = parent.timestamp + seconds{30};
            const double r = rng.uniform();
            if (attack) {
              cm.reaction = r < 0.8 ? Reaction::dispute : (r < 0.9 ? Reaction::support : Reaction::clarify);
            } else {
              cm.reaction = r < 0.45 ? Reaction::support : (r < 0.8 ? Reaction::dispute : Reaction::clarify);
            }
          }
          ++authored[author];
          attacks[author] += attack;
          thread.push_back(f.comments.size());
          f.planted_attack.push_back(attack);
          f.comments.push_back(std::move(cm));
        }
        f.posts.push_back(std::move(post));
      }
    }
  }
  // Comments are emitted in thread order; sort chronologically (stable) like a real dump.
  std::vector<std::size_t> order(f.comments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f.comments[a].timestamp < f.comments[b].timestamp; });
  std::vector<CommentRecord> sorted;
  std::vector<bool> planted;
  for (const auto i : order) {
    sorted.push_back(f.comments[i]);
    planted.push_back(f.planted_attack[i]);
  }
  f.comments = std::move(sorted);
  f.planted_attack = std::move(planted);

  for (std::size_t u = 0; u < spec.users; ++u) {
    const bool civil = u + spec.civil_users >= spec.users;
    AuthorProfile p;
    p.author = user_name(u);
    p.posts = static_cast<std::int64_t>(authored[u]);
    p.reward_points = static_cast<std::int64_t>(std::max(0.0, std::round((civil ? 120.0 : 420.0) + 40.0 * rng.normal())));
    p.efficiency = std::clamp(std::round(((civil ? 72.0 : 48.0) + 6.0 * rng.normal()) * 10.0) / 10.0, 0.0, 100.0);
    p.allies = static_cast<std::int64_t>(rng.below(30));
    p.enemies = static_cast<std::int64_t>(rng.below(30));
    p.hostiles = static_cast<std::int64_t>(rng.below(10));
    f.profiles.push_back(std::move(p));
  }
  return f;
}

}  // namespace fallacy::synthetic
