#pragma once

// Threaded forum corpus: JSON Lines ingestion, pseudonymisation, validation and
// structural indexes (by post, parent, author, topic and calendar month).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fallacy/detail/io.hpp"
#include "fallacy/detail/sha256.hpp"
#include "fallacy/detail/time.hpp"
#include "fallacy/error.hpp"

namespace fallacy {

using AuthorId = std::string;
using nlohmann::json;

enum class Reaction { support, dispute, clarify, none };

inline std::string_view to_string(Reaction r) {
  switch (r) {
    case Reaction::support: return "support";
    case Reaction::dispute: return "dispute";
    case Reaction::clarify: return "clarify";
    case Reaction::none: break;
  }
  return "none";
}

struct PostRecord {
  std::string post_id;
  AuthorId author;
  Timestamp timestamp;
  std::string topic;
  std::string title;

  bool operator==(const PostRecord&) const = default;
};

struct CommentRecord {
  std::string id;
  std::string post_id;
  std::optional<std::string> parent_id;  // absent for top-level comments
  AuthorId author;
  Timestamp timestamp;
  std::string topic;
  std::string text;
  Reaction reaction = Reaction::none;

  bool is_top_level() const { return !parent_id.has_value(); }
  bool operator==(const CommentRecord&) const = default;
};

struct AuthorProfile {
  AuthorId author;
  std::int64_t posts = 0;
  std::int64_t reward_points = 0;
  double efficiency = 0.0;  // percentage, [0, 100]
  std::int64_t allies = 0;
  std::int64_t enemies = 0;
  std::int64_t hostiles = 0;

  bool operator==(const AuthorProfile&) const = default;
};

/// Pseudonyms are 16-byte truncated SHA-256 digests rendered as 32 lowercase hex chars.
inline bool is_pseudonym(std::string_view s) {
  return s.size() == 32 &&
         std::all_of(s.begin(), s.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

/// Deterministic pseudonym: hex of the first 16 bytes of SHA-256(salt || name).
inline AuthorId hash_author(std::string_view name, std::string_view salt) {
  if (name.empty()) throw InvalidArgument("hash_author: empty author name");
  const auto digest = detail::Sha256{}.update(salt).update(name).finish();
  return detail::to_hex(digest.data(), 16);
}

struct IngestOptions {
  std::string salt;      // empty: author names are kept as-is
  bool lenient = false;  // drop comments whose parent chain is broken instead of failing
};

struct IngestReport {
  std::size_t posts = 0;
  std::size_t comments = 0;
  std::size_t profiles = 0;
  std::size_t dropped_comments = 0;  // lenient mode only
  std::vector<std::string> dropped_ids;
};

/// Immutable, validated corpus. Construct through Corpus::build or ingest_corpus.
class Corpus {
 public:
  /// Unknown JSON fields, keyed "post:<id>", "comment:<id>" or "profile:<author>".
  using Provenance = std::map<std::string, json>;

  static Corpus build(std::vector<PostRecord> posts, std::vector<CommentRecord> comments,
                      std::vector<AuthorProfile> profiles = {}, Provenance provenance = {},
                      bool lenient = false, IngestReport* report = nullptr);

  std::span<const PostRecord> posts() const { return posts_; }
  std::span<const CommentRecord> comments() const { return comments_; }
  std::span<const AuthorProfile> profiles() const { return profiles_; }
  bool has_profiles() const { return !profiles_.empty(); }
  const std::set<std::string>& topics() const { return topics_; }
  const Provenance& provenance() const { return provenance_; }

  bool has_topic(std::string_view topic) const { return topics_.count(std::string(topic)) > 0; }
  /// Throws InvalidArgument listing the valid topics when `topic` is unknown.
  void require_topic(std::string_view topic) const;

  std::optional<std::size_t> find_comment(std::string_view id) const {
    auto it = comment_index_.find(std::string(id));
    if (it == comment_index_.end()) return std::nullopt;
    return it->second;
  }
  const CommentRecord& comment(std::size_t index) const { return comments_[index]; }
  /// Index of the parent comment, if any.
  std::optional<std::size_t> parent_of(std::size_t index) const {
    const auto p = parent_index_[index];
    if (p == kNone) return std::nullopt;
    return p;
  }
  std::span<const std::size_t> children_of(std::size_t index) const { return children_[index]; }
  std::span<const std::size_t> comments_in_topic(std::string_view topic) const;
  std::span<const std::size_t> comments_by_author(std::string_view author) const;
  std::span<const std::size_t> comments_in_post(std::string_view post_id) const;
  std::vector<AuthorId> authors() const;

  /// First and last absolute month (year*12 + month-1) covered by comments.
  std::int64_t first_month() const { return first_month_; }
  std::int64_t last_month() const { return last_month_; }
  std::size_t month_count() const { return comments_.empty() ? 0 : static_cast<std::size_t>(last_month_ - first_month_ + 1); }
  std::size_t month_of(std::size_t comment_index) const { return comment_month_[comment_index]; }
  std::span<const std::size_t> comments_in_month(std::size_t month) const { return by_month_[month]; }

  bool operator==(const Corpus& other) const {
    return posts_ == other.posts_ && comments_ == other.comments_ && profiles_ == other.profiles_ &&
           topics_ == other.topics_ && provenance_ == other.provenance_;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::vector<PostRecord> posts_;
  std::vector<CommentRecord> comments_;
  std::vector<AuthorProfile> profiles_;
  std::set<std::string> topics_;
  Provenance provenance_;

  std::unordered_map<std::string, std::size_t> comment_index_;
  std::vector<std::size_t> parent_index_;
  std::vector<std::vector<std::size_t>> children_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_topic_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_author_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_post_;
  std::vector<std::size_t> comment_month_;
  std::vector<std::vector<std::size_t>> by_month_;
  std::int64_t first_month_ = 0;
  std::int64_t last_month_ = -1;
};

namespace detail {

inline std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

inline std::string join_limited(const std::vector<std::string>& items, std::size_t limit = 20) {
  if (items.size() <= limit) return join(items);
  std::vector<std::string> head(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(limit));
  return join(head) + ", ... (" + std::to_string(items.size()) + " total)";
}

}  // namespace detail

inline void Corpus::require_topic(std::string_view topic) const {
  if (has_topic(topic)) return;
  throw InvalidArgument("unknown topic '" + std::string(topic) + "'; valid topics: " +
                        detail::join(std::vector<std::string>(topics_.begin(), topics_.end())));
}

inline std::span<const std::size_t> Corpus::comments_in_topic(std::string_view topic) const {
  auto it = by_topic_.find(topic);
  if (it == by_topic_.end()) return {};
  return it->second;
}

inline std::span<const std::size_t> Corpus::comments_by_author(std::string_view author) const {
  auto it = by_author_.find(author);
  if (it == by_author_.end()) return {};
  return it->second;
}

inline std::span<const std::size_t> Corpus::comments_in_post(std::string_view post_id) const {
  auto it = by_post_.find(post_id);
  if (it == by_post_.end()) return {};
  return it->second;
}

inline std::vector<AuthorId> Corpus::authors() const {
  std::vector<AuthorId> out;
  out.reserve(by_author_.size());
  for (const auto& [a, _] : by_author_) out.push_back(a);
  return out;
}

inline Corpus Corpus::build(std::vector<PostRecord> posts, std::vector<CommentRecord> comments,
                            std::vector<AuthorProfile> profiles, Provenance provenance, bool lenient,
                            IngestReport* report) {
  Corpus c;
  std::unordered_map<std::string, std::size_t> post_index;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!post_index.emplace(posts[i].post_id, i).second) {
      throw DataError("duplicate post_id '" + posts[i].post_id + "'");
    }
    c.topics_.insert(posts[i].topic);
  }

  {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < comments.size(); ++i) {
      if (!seen.emplace(comments[i].id, i).second) throw DataError("duplicate comment id '" + comments[i].id + "'");
    }
  }

  // Comments whose post or parent chain cannot be resolved. Strict mode reports all of
  // them at once; lenient mode drops them (transitively) and records the count.
  std::vector<std::string> errors;
  std::vector<std::string> dangling;
  std::vector<bool> keep(comments.size(), true);
  {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < comments.size(); ++i) idx.emplace(comments[i].id, i);
    bool changed = true;
    bool first_pass = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < comments.size(); ++i) {
        if (!keep[i]) continue;
        const auto& cm = comments[i];
        if (!cm.parent_id) continue;
        auto it = idx.find(*cm.parent_id);
        const bool missing = it == idx.end() || !keep[it->second];
        if (missing) {
          if (first_pass) dangling.push_back(*cm.parent_id);
          if (lenient) {
            keep[i] = false;
            changed = true;
          }
        }
      }
      first_pass = false;
    }
  }
  if (!lenient && !dangling.empty()) {
    std::sort(dangling.begin(), dangling.end());
    dangling.erase(std::unique(dangling.begin(), dangling.end()), dangling.end());
    throw DataError("dangling parent_id reference(s): " + detail::join_limited(dangling));
  }

  std::vector<std::string> dropped;
  for (std::size_t i = 0; i < comments.size(); ++i) {
    if (keep[i]) {
      c.comments_.push_back(std::move(comments[i]));
    } else {
      dropped.push_back(comments[i].id);
      provenance.erase("comment:" + comments[i].id);
    }
  }

  const std::size_t n = c.comments_.size();
  c.parent_index_.assign(n, kNone);
  c.children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) c.comment_index_.emplace(c.comments_[i].id, i);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& cm = c.comments_[i];
    auto pit = post_index.find(cm.post_id);
    if (pit == post_index.end()) {
      errors.push_back("comment '" + cm.id + "' references unknown post_id '" + cm.post_id + "'");
      continue;
    }
    const auto& post = posts[pit->second];
    if (!c.topics_.count(cm.topic)) {
      errors.push_back("comment '" + cm.id + "' has topic '" + cm.topic + "' not declared by any post");
    }
    if (cm.timestamp < post.timestamp) {
      errors.push_back("comment '" + cm.id + "' predates its post '" + cm.post_id + "'");
    }
    if (cm.reaction != Reaction::none && !cm.parent_id) {
      errors.push_back("comment '" + cm.id + "' has reaction '" + std::string(to_string(cm.reaction)) +
                       "' but no parent_id");
    }
    if (cm.parent_id) {
      const std::size_t p = c.comment_index_.at(*cm.parent_id);
      if (c.comments_[p].post_id != cm.post_id) {
        errors.push_back("comment '" + cm.id + "' replies to '" + *cm.parent_id + "' from a different post");
      }
      if (p == i) errors.push_back("comment '" + cm.id + "' is its own parent");
      c.parent_index_[i] = p;
      c.children_[p].push_back(i);
    }
  }

  std::set<std::string> profile_authors;
  for (const auto& p : profiles) {
    if (!profile_authors.insert(p.author).second) errors.push_back("duplicate profile for author '" + p.author + "'");
    if (p.posts < 0 || p.reward_points < 0 || p.allies < 0 || p.enemies < 0 || p.hostiles < 0) {
      errors.push_back("profile '" + p.author + "' has a negative count");
    }
    if (!(p.efficiency >= 0.0 && p.efficiency <= 100.0)) {
      errors.push_back("profile '" + p.author + "' efficiency outside [0,100]");
    }
  }

  if (!errors.empty()) throw DataError("corpus validation failed: " + detail::join_limited(errors, 10));

  c.posts_ = std::move(posts);
  c.profiles_ = std::move(profiles);
  c.provenance_ = std::move(provenance);

  if (n > 0) {
    std::int64_t lo = absolute_month(c.comments_[0].timestamp), hi = lo;
    for (const auto& cm : c.comments_) {
      const auto m = absolute_month(cm.timestamp);
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    c.first_month_ = lo;
    c.last_month_ = hi;
  }
  c.comment_month_.resize(n);
  c.by_month_.assign(c.month_count(), {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cm = c.comments_[i];
    const auto m = static_cast<std::size_t>(absolute_month(cm.timestamp) - c.first_month_);
    c.comment_month_[i] = m;
    c.by_month_[m].push_back(i);
    c.by_topic_[cm.topic].push_back(i);
    c.by_author_[cm.author].push_back(i);
    c.by_post_[cm.post_id].push_back(i);
  }

  if (report) {
    report->posts = c.posts_.size();
    report->comments = n;
    report->profiles = c.profiles_.size();
    report->dropped_comments = dropped.size();
    report->dropped_ids = std::move(dropped);
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON Lines codec

namespace detail {

class LineContext {
 public:
  LineContext(std::string file, std::size_t line) : file_(std::move(file)), line_(line) {}

  [[noreturn]] void fail(std::string_view field, std::string_view what) const {
    throw DataError(file_ + ":" + std::to_string(line_) + ": field '" + std::string(field) + "': " + std::string(what));
  }

  std::string string_field(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) fail(key, "missing");
    if (!it->is_string()) fail(key, "expected a string");
    return it->get<std::string>();
  }

  std::optional<std::string> optional_string(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(key, "expected a string or null");
    return it->get<std::string>();
  }

  Timestamp timestamp_field(const json& obj, const char* key) const {
    const auto raw = string_field(obj, key);
    const auto t = parse_iso8601(raw);
    if (!t) fail(key, "not an ISO-8601 timestamp: '" + raw + "'");
    return *t;
  }

  std::int64_t count_field(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) fail(key, "missing");
    if (it->is_number_integer()) return it->get<std::int64_t>();
    if (it->is_number_float()) {
      const double v = it->get<double>();
      if (v == static_cast<double>(static_cast<std::int64_t>(v))) return static_cast<std::int64_t>(v);
    }
    fail(key, "expected an integer");
  }

  double real_field(const json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) fail(key, "missing");
    if (!it->is_number()) fail(key, "expected a number");
    return it->get<double>();
  }

  json parse(std::string_view line) const {
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(file_ + ":" + std::to_string(line_) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError(file_ + ":" + std::to_string(line_) + ": expected a JSON object");
    return obj;
  }

 private:
  std::string file_;
  std::size_t line_;
};

inline json extra_fields(const json& obj, std::initializer_list<const char*> known) {
  json extras = json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) is_known = is_known || it.key() == k;
    if (!is_known) extras[it.key()] = it.value();
  }
  return extras;
}

inline AuthorId pseudonymise(const std::string& name, const std::string& salt) {
  if (salt.empty() || is_pseudonym(name)) return name;
  return hash_author(name, salt);
}

inline Reaction parse_reaction(const LineContext& ctx, const json& obj) {
  auto it = obj.find("reaction");
  if (it == obj.end() || it->is_null()) return Reaction::none;
  if (!it->is_string()) ctx.fail("reaction", "expected a string or null");
  const auto r = it->get<std::string>();
  if (r == "support") return Reaction::support;
  if (r == "dispute") return Reaction::dispute;
  if (r == "clarify") return Reaction::clarify;
  if (r == "none") return Reaction::none;
  ctx.fail("reaction", "unknown reaction '" + r + "'");
}

}  // namespace detail

inline std::vector<PostRecord> read_posts(const std::filesystem::path& path, const std::string& salt,
                                          Corpus::Provenance& provenance) {
  std::vector<PostRecord> out;
  const auto name = path.filename().string();
  detail::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    detail::LineContext ctx(name, line_no);
    const json obj = ctx.parse(line);
    PostRecord p;
    p.post_id = ctx.string_field(obj, "post_id");
    const auto author = ctx.string_field(obj, "author");
    if (author.empty()) ctx.fail("author", "empty");
    p.author = detail::pseudonymise(author, salt);
    p.timestamp = ctx.timestamp_field(obj, "timestamp");
    p.topic = ctx.string_field(obj, "topic");
    p.title = ctx.optional_string(obj, "title").value_or("");
    auto extras = detail::extra_fields(obj, {"post_id", "author", "timestamp", "topic", "title"});
    if (!extras.empty()) provenance["post:" + p.post_id] = std::move(extras);
    out.push_back(std::move(p));
  });
  return out;
}

inline std::vector<CommentRecord> read_comments(const std::filesystem::path& path, const std::string& salt,
                                                Corpus::Provenance& provenance) {
  std::vector<CommentRecord> out;
  const auto name = path.filename().string();
  detail::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    detail::LineContext ctx(name, line_no);
    const json obj = ctx.parse(line);
    CommentRecord c;
    c.id = ctx.string_field(obj, "id");
    c.post_id = ctx.string_field(obj, "post_id");
    c.parent_id = ctx.optional_string(obj, "parent_id");
    const auto author = ctx.string_field(obj, "author");
    if (author.empty()) ctx.fail("author", "empty");
    c.author = detail::pseudonymise(author, salt);
    c.timestamp = ctx.timestamp_field(obj, "timestamp");
    c.topic = ctx.string_field(obj, "topic");
    c.text = ctx.optional_string(obj, "text").value_or("");
    c.reaction = detail::parse_reaction(ctx, obj);
    auto extras =
        detail::extra_fields(obj, {"id", "post_id", "parent_id", "author", "timestamp", "topic", "text", "reaction"});
    if (!extras.empty()) provenance["comment:" + c.id] = std::move(extras);
    out.push_back(std::move(c));
  });
  return out;
}

inline std::vector<AuthorProfile> read_profiles(const std::filesystem::path& path, const std::string& salt,
                                                Corpus::Provenance& provenance) {
  std::vector<AuthorProfile> out;
  const auto name = path.filename().string();
  detail::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    detail::LineContext ctx(name, line_no);
    const json obj = ctx.parse(line);
    AuthorProfile p;
    const auto author = ctx.string_field(obj, "author");
    if (author.empty()) ctx.fail("author", "empty");
    p.author = detail::pseudonymise(author, salt);
    p.posts = ctx.count_field(obj, "posts");
    p.reward_points = ctx.count_field(obj, "reward_points");
    p.efficiency = ctx.real_field(obj, "efficiency");
    p.allies = ctx.count_field(obj, "allies");
    p.enemies = ctx.count_field(obj, "enemies");
    p.hostiles = ctx.count_field(obj, "hostiles");
    auto extras = detail::extra_fields(
        obj, {"author", "posts", "reward_points", "efficiency", "allies", "enemies", "hostiles"});
    if (!extras.empty()) provenance["profile:" + p.author] = std::move(extras);
    out.push_back(std::move(p));
  });
  return out;
}

/// Loads posts/comments/profiles JSON Lines files into a validated Corpus. With a
/// non-empty salt every author name is replaced by hash_author(name, salt); values that
/// already look like pseudonyms are left untouched so re-ingesting emitted files is a no-op.
inline Corpus ingest_corpus(const std::filesystem::path& posts_path, const std::filesystem::path& comments_path,
                            const std::optional<std::filesystem::path>& profiles_path, const IngestOptions& options = {},
                            IngestReport* report = nullptr) {
  Corpus::Provenance provenance;
  auto posts = read_posts(posts_path, options.salt, provenance);
  auto comments = read_comments(comments_path, options.salt, provenance);
  std::vector<AuthorProfile> profiles;
  if (profiles_path) profiles = read_profiles(*profiles_path, options.salt, provenance);
  return Corpus::build(std::move(posts), std::move(comments), std::move(profiles), std::move(provenance),
                       options.lenient, report);
}

namespace detail {

inline json with_extras(json obj, const Corpus::Provenance& provenance, const std::string& key) {
  auto it = provenance.find(key);
  if (it != provenance.end()) {
    for (auto e = it->second.begin(); e != it->second.end(); ++e) obj[e.key()] = e.value();
  }
  return obj;
}

}  // namespace detail

inline json to_json(const PostRecord& p) {
  return json{{"post_id", p.post_id}, {"author", p.author}, {"timestamp", format_iso8601(p.timestamp)},
              {"topic", p.topic}, {"title", p.title}};
}

inline json to_json(const CommentRecord& c) {
  json obj{{"id", c.id},         {"post_id", c.post_id}, {"author", c.author}, {"timestamp", format_iso8601(c.timestamp)},
           {"topic", c.topic},   {"text", c.text}};
  obj["parent_id"] = c.parent_id ? json(*c.parent_id) : json(nullptr);
  obj["reaction"] = c.reaction == Reaction::none ? json(nullptr) : json(std::string(to_string(c.reaction)));
  return obj;
}

inline json to_json(const AuthorProfile& p) {
  return json{{"author", p.author},   {"posts", p.posts},     {"reward_points", p.reward_points},
              {"efficiency", p.efficiency}, {"allies", p.allies}, {"enemies", p.enemies},
              {"hostiles", p.hostiles}};
}

/// Writes posts.jsonl, comments.jsonl and (if present) profiles.jsonl into `dir`,
/// re-attaching preserved unknown fields.
inline void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::string posts, comments, profiles;
  const auto& prov = corpus.provenance();
  for (const auto& p : corpus.posts()) posts += detail::with_extras(to_json(p), prov, "post:" + p.post_id).dump() + "\n";
  for (const auto& c : corpus.comments()) comments += detail::with_extras(to_json(c), prov, "comment:" + c.id).dump() + "\n";
  for (const auto& p : corpus.profiles()) profiles += detail::with_extras(to_json(p), prov, "profile:" + p.author).dump() + "\n";
  detail::write_file_atomic(dir / "posts.jsonl", posts);
  detail::write_file_atomic(dir / "comments.jsonl", comments);
  if (corpus.has_profiles()) detail::write_file_atomic(dir / "profiles.jsonl", profiles);
}

inline Corpus load_written_corpus(const std::filesystem::path& dir, const IngestOptions& options = {}) {
  const auto profiles = dir / "profiles.jsonl";
  return ingest_corpus(dir / "posts.jsonl", dir / "comments.jsonl",
                       std::filesystem::exists(profiles) ? std::optional(profiles) : std::nullopt, options);
}

// ---------------------------------------------------------------------------
// Structural queries

struct AuthorCounts {
  std::size_t top_level_comments = 0;
  std::size_t direct_replies_received = 0;
  std::size_t total_comments = 0;

  bool operator==(const AuthorCounts&) const = default;
};

/// Per-author counts within one topic, ordered by AuthorId. An author appears if they
/// commented in the topic or received a reply there.
inline std::map<AuthorId, AuthorCounts> structural_counts(const Corpus& corpus, std::string_view topic) {
  corpus.require_topic(topic);
  std::map<AuthorId, AuthorCounts> out;
  for (const std::size_t i : corpus.comments_in_topic(topic)) {
    const auto& c = corpus.comment(i);
    auto& mine = out[c.author];
    ++mine.total_comments;
    if (c.is_top_level()) ++mine.top_level_comments;
    if (const auto p = corpus.parent_of(i)) ++out[corpus.comment(*p).author].direct_replies_received;
  }
  return out;
}

}  // namespace fallacy
