#pragma once

// Author-level reply networks and the activity analyses built on them: S(lambda, rho)
// activity sets, reciprocity (and its surface over threshold grids), activity groups,
// top-poster tables and cross-topic user overlap.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fallacy/corpus.hpp"
#include "fallacy/error.hpp"
#include "fallacy/scorer.hpp"

namespace fallacy {

enum class Flavor { support, dispute };

inline std::string_view to_string(Flavor f) { return f == Flavor::support ? "support" : "dispute"; }

struct ReplyGraph {
  Flavor flavor = Flavor::support;
  std::set<AuthorId> nodes;
  std::map<std::pair<AuthorId, AuthorId>, std::size_t> edges;  // (src, dst) -> reply count

  void add_edge(const AuthorId& src, const AuthorId& dst, std::size_t weight = 1) {
    nodes.insert(src);
    nodes.insert(dst);
    edges[{src, dst}] += weight;
  }
  std::size_t total_weight() const {
    std::size_t w = 0;
    for (const auto& [_, v] : edges) w += v;
    return w;
  }
};

struct ReplyNetworks {
  ReplyGraph support{Flavor::support, {}, {}};
  ReplyGraph dispute{Flavor::dispute, {}, {}};
  std::size_t top_level = 0;           // comments with no parent comment
  std::size_t ignored_reactions = 0;   // clarify / none replies
  std::size_t self_replies = 0;        // support/dispute replies to one's own comment
  std::size_t outside_restriction = 0; // support/dispute replies with an endpoint outside restrict_to
};

/// Support and dispute graphs over a set of comments. An edge src -> dst counts direct replies
/// by src, with the matching reaction, to comments written by dst. With `restrict_to`
/// both endpoints must be members and the node set is limited to members.
inline ReplyNetworks build_reply_networks(const Corpus& corpus, std::span<const std::size_t> comment_indices,
                                          const std::optional<std::set<AuthorId>>& restrict_to = std::nullopt) {
  ReplyNetworks net;
  auto member = [&](const AuthorId& a) { return !restrict_to || restrict_to->count(a) > 0; };
  for (const std::size_t i : comment_indices) {
    const auto& c = corpus.comment(i);
    if (member(c.author)) {
      net.support.nodes.insert(c.author);
      net.dispute.nodes.insert(c.author);
    }
    const auto parent = corpus.parent_of(i);
    if (!parent) {
      ++net.top_level;
      continue;
    }
    if (c.reaction != Reaction::support && c.reaction != Reaction::dispute) {
      ++net.ignored_reactions;
      continue;
    }
    const auto& dst = corpus.comment(*parent).author;
    if (dst == c.author) {
      ++net.self_replies;
      continue;
    }
    if (!member(c.author) || !member(dst)) {
      ++net.outside_restriction;
      continue;
    }
    (c.reaction == Reaction::support ? net.support : net.dispute).add_edge(c.author, dst);
  }
  return net;
}

inline ReplyNetworks build_reply_networks(const Corpus& corpus, std::string_view topic,
                                          const std::optional<std::set<AuthorId>>& restrict_to = std::nullopt) {
  corpus.require_topic(topic);
  return build_reply_networks(corpus, corpus.comments_in_topic(topic), restrict_to);
}

/// Fraction of directed edges (u, v) whose reverse (v, u) is also an edge; weights ignored.
inline double reciprocity(const ReplyGraph& graph) {
  if (graph.edges.empty()) throw Undefined("reciprocity undefined: graph has no edges");
  std::size_t mutual = 0;
  for (const auto& [e, _] : graph.edges) mutual += graph.edges.count({e.second, e.first});
  return static_cast<double>(mutual) / static_cast<double>(graph.edges.size());
}

inline std::optional<double> reciprocity_or_null(const ReplyGraph& graph) {
  if (graph.edges.empty()) return std::nullopt;
  return reciprocity(graph);
}

struct ActivitySet {
  std::size_t lambda = 0;  // minimum top-level comments
  std::size_t rho = 0;     // minimum direct replies received
  std::set<AuthorId> members;
};

/// S(lambda, rho) = X(lambda) & Y(rho) from precomputed structural counts.
inline ActivitySet activity_set(const std::map<AuthorId, AuthorCounts>& counts, std::size_t lambda, std::size_t rho) {
  ActivitySet s{lambda, rho, {}};
  for (const auto& [a, c] : counts) {
    if (c.top_level_comments >= lambda && c.direct_replies_received >= rho) s.members.insert(a);
  }
  return s;
}

inline ActivitySet activity_set(const Corpus& corpus, std::string_view topic, std::size_t lambda, std::size_t rho) {
  return activity_set(structural_counts(corpus, topic), lambda, rho);
}

struct SurfaceCell {
  std::size_t lambda = 0;
  std::size_t rho = 0;
  std::size_t members = 0;
  std::optional<double> support;  // nullopt: no edges, reciprocity undefined
  std::optional<double> dispute;
};

struct ReciprocitySurface {
  std::vector<std::size_t> lambdas;
  std::vector<std::size_t> rhos;
  std::vector<std::vector<SurfaceCell>> cells;  // [lambda index][rho index]
};

namespace detail {

inline void require_ascending(std::span<const std::size_t> grid, const char* name) {
  if (grid.empty()) throw InvalidArgument(std::string(name) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw InvalidArgument(std::string(name) + " grid must be strictly ascending");
  }
}

}  // namespace detail

/// Size of S(lambda, rho) and reciprocity of the support/dispute networks restricted
/// to it, for every grid cell.
inline ReciprocitySurface reciprocity_surface(const Corpus& corpus, std::string_view topic,
                                              std::span<const std::size_t> lambdas, std::span<const std::size_t> rhos) {
  detail::require_ascending(lambdas, "lambda");
  detail::require_ascending(rhos, "rho");
  const auto counts = structural_counts(corpus, topic);
  ReciprocitySurface s;
  s.lambdas.assign(lambdas.begin(), lambdas.end());
  s.rhos.assign(rhos.begin(), rhos.end());
  for (const auto l : lambdas) {
    auto& row = s.cells.emplace_back();
    for (const auto r : rhos) {
      const auto set = activity_set(counts, l, r);
      const auto net = build_reply_networks(corpus, topic, set.members);
      row.push_back({l, r, set.members.size(), reciprocity_or_null(net.support), reciprocity_or_null(net.dispute)});
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Activity groups

struct GroupRow {
  std::size_t lo = 0;
  std::optional<std::size_t> hi;  // inclusive; nullopt for the open top group
  std::size_t users = 0;
  std::size_t comments = 0;
  std::size_t scored_comments = 0;
  std::size_t ah_comments = 0;
  double pct_users = 0.0;
  double pct_comments = 0.0;
  std::optional<double> pct_ah;   // within the group's scored comments

  std::string range_label() const {
    if (!hi) return ">=" + std::to_string(lo);
    return std::to_string(lo) + "-" + std::to_string(*hi);
  }
};

/// Group ranges from ascending boundaries b0 < b1 < ... < bm: [0, b0], [b0+1, b1], ...,
/// [b(m-2)+1, b(m-1)-1], [>= b(m-1)]. The last boundary opens the top group, so the
/// default {10, 50, 100, 2000} gives 0-10, 11-50, 51-100, 101-1999, >=2000.
inline std::vector<std::pair<std::size_t, std::optional<std::size_t>>> group_ranges(std::span<const std::size_t> boundaries) {
  if (boundaries.size() < 2) throw InvalidArgument("activity groups need at least two boundaries");
  detail::require_ascending(boundaries, "group boundary");
  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> out;
  out.emplace_back(0, boundaries[0]);
  const std::size_t m = boundaries.size();
  for (std::size_t i = 1; i + 1 < m; ++i) out.emplace_back(boundaries[i - 1] + 1, boundaries[i]);
  out.emplace_back(boundaries[m - 2] + 1, boundaries[m - 1] - 1);
  out.emplace_back(boundaries[m - 1], std::nullopt);
  // A boundary pair like {10, 11} collapses the penultimate group to an empty range.
  std::erase_if(out, [](const auto& r) { return r.second && *r.second < r.first; });
  return out;
}

/// Users bucketed by their top-level comment count in the topic; per group the share of
/// users, the share of all comments they wrote, and the ad hominem rate among them.
inline std::vector<GroupRow> activity_groups(const AnnotatedCorpus& annotated, std::string_view topic,
                                             std::span<const std::size_t> boundaries) {
  const auto& corpus = annotated.corpus();
  const auto counts = structural_counts(corpus, topic);
  const auto ranges = group_ranges(boundaries);
  std::vector<GroupRow> rows;
  for (const auto& [lo, hi] : ranges) {
    GroupRow g;
    g.lo = lo;
    g.hi = hi;
    rows.push_back(g);
  }
  auto group_of = [&](std::size_t tlc) {
    for (std::size_t g = 0; g < rows.size(); ++g) {
      if (tlc >= rows[g].lo && (!rows[g].hi || tlc <= *rows[g].hi)) return g;
    }
    return rows.size() - 1;
  };
  std::map<AuthorId, std::size_t> author_group;
  std::size_t total_users = 0;
  for (const auto& [a, c] : counts) {
    if (c.total_comments == 0) continue;
    const auto g = group_of(c.top_level_comments);
    author_group[a] = g;
    ++rows[g].users;
    ++total_users;
  }
  std::size_t total_comments = 0;
  for (const std::size_t i : corpus.comments_in_topic(topic)) {
    auto& row = rows[author_group.at(corpus.comment(i).author)];
    ++row.comments;
    ++total_comments;
    if (annotated.scored(i)) {
      ++row.scored_comments;
      row.ah_comments += annotated.is_adhominem(i);
    }
  }
  for (auto& row : rows) {
    if (total_users) row.pct_users = 100.0 * static_cast<double>(row.users) / static_cast<double>(total_users);
    if (total_comments) row.pct_comments = 100.0 * static_cast<double>(row.comments) / static_cast<double>(total_comments);
    if (row.scored_comments) {
      row.pct_ah = 100.0 * static_cast<double>(row.ah_comments) / static_cast<double>(row.scored_comments);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Top tables

struct RankedAuthor {
  AuthorId author;
  std::size_t count = 0;

  bool operator==(const RankedAuthor&) const = default;
};

struct TopTables {
  std::vector<RankedAuthor> top_posters;    // by top-level comments
  std::vector<RankedAuthor> top_receivers;  // by direct replies received
  std::size_t overlap = 0;                  // authors present in both lists
};

inline TopTables top_tables(const Corpus& corpus, std::string_view topic, std::size_t n = 10) {
  if (n < 1) throw InvalidArgument("top_tables: n must be >= 1");
  const auto counts = structural_counts(corpus, topic);
  auto ranked = [&](auto key) {
    std::vector<RankedAuthor> all;
    for (const auto& [a, c] : counts) all.push_back({a, key(c)});
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      if (x.count != y.count) return x.count > y.count;
      return x.author < y.author;
    });
    if (all.size() > n) all.resize(n);
    return all;
  };
  TopTables t;
  t.top_posters = ranked([](const AuthorCounts& c) { return c.top_level_comments; });
  t.top_receivers = ranked([](const AuthorCounts& c) { return c.direct_replies_received; });
  std::set<AuthorId> posters;
  for (const auto& r : t.top_posters) posters.insert(r.author);
  for (const auto& r : t.top_receivers) t.overlap += posters.count(r.author);
  return t;
}

// ---------------------------------------------------------------------------
// Topic overlap

struct CountBucket {
  std::size_t lo = 1;
  std::optional<std::size_t> hi;  // inclusive; nullopt = unbounded

  bool contains(std::size_t v) const { return v >= lo && (!hi || v <= *hi); }
  std::string label() const { return hi ? std::to_string(lo) + "-" + std::to_string(*hi) : ">=" + std::to_string(lo); }
};

struct OverlapCell {
  CountBucket bucket;
  std::size_t users = 0;        // users of topic_a whose comment count falls in the bucket
  std::size_t overlapping = 0;  // of those, users with at least one comment in topic_b
  std::optional<double> fraction;
};

inline void validate_buckets(std::span<const CountBucket> buckets) {
  if (buckets.empty()) throw InvalidArgument("no count buckets given");
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto& b = buckets[i];
    if (b.hi && *b.hi < b.lo) throw InvalidArgument("count bucket " + b.label() + " is empty");
    if (i + 1 < buckets.size()) {
      if (!b.hi || *b.hi >= buckets[i + 1].lo) throw InvalidArgument("count buckets must be ascending and disjoint");
    }
  }
}

/// Per bucket of topic_a comment counts, the fraction of those users who also commented
/// in topic_b. Empty buckets are undefined (nullopt).
inline std::vector<OverlapCell> topic_overlap(const Corpus& corpus, std::string_view topic_a, std::string_view topic_b,
                                              std::span<const CountBucket> buckets) {
  corpus.require_topic(topic_a);
  corpus.require_topic(topic_b);
  if (topic_a == topic_b) throw InvalidArgument("topic_overlap: topics must differ");
  validate_buckets(buckets);
  std::map<AuthorId, std::size_t> count_a;
  for (const auto i : corpus.comments_in_topic(topic_a)) ++count_a[corpus.comment(i).author];
  std::set<AuthorId> in_b;
  for (const auto i : corpus.comments_in_topic(topic_b)) in_b.insert(corpus.comment(i).author);
  std::vector<OverlapCell> cells;
  for (const auto& b : buckets) {
    OverlapCell cell{b, 0, 0, std::nullopt};
    for (const auto& [a, n] : count_a) {
      if (!b.contains(n)) continue;
      ++cell.users;
      cell.overlapping += in_b.count(a);
    }
    if (cell.users) cell.fraction = static_cast<double>(cell.overlapping) / static_cast<double>(cell.users);
    cells.push_back(cell);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// JSON views

inline nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const ReciprocitySurface& s) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& row : s.cells) {
    for (const auto& c : row) {
      cells.push_back({{"lambda", c.lambda}, {"rho", c.rho}, {"members", c.members},
                       {"support_reciprocity", optional_json(c.support)}, {"dispute_reciprocity", optional_json(c.dispute)}});
    }
  }
  return {{"lambdas", s.lambdas}, {"rhos", s.rhos}, {"cells", std::move(cells)}};
}

inline nlohmann::json to_json(const GroupRow& g) {
  return {{"range", g.range_label()},   {"lo", g.lo},
          {"hi", g.hi ? nlohmann::json(*g.hi) : nlohmann::json(nullptr)},
          {"users", g.users},           {"comments", g.comments},
          {"scored_comments", g.scored_comments}, {"ah_comments", g.ah_comments},
          {"pct_users", g.pct_users},   {"pct_comments", g.pct_comments},
          {"pct_ah", optional_json(g.pct_ah)}};
}

inline nlohmann::json to_json(const TopTables& t) {
  auto list = [](const std::vector<RankedAuthor>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t i = 0; i < v.size(); ++i) a.push_back({{"rank", i + 1}, {"author", v[i].author}, {"count", v[i].count}});
    return a;
  };
  return {{"top_level_comments", list(t.top_posters)}, {"direct_replies", list(t.top_receivers)}, {"overlap", t.overlap}};
}

}  // namespace fallacy
