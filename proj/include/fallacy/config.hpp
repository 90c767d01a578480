#pragma once

// Pipeline configuration: a JSON tree validated against a fixed schema. Every violation
// is collected before reporting, unknown keys are rejected, and `--set key=value`
// overrides are applied on top of the file.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fallacy/classifier.hpp"
#include "fallacy/detail/io.hpp"
#include "fallacy/error.hpp"
#include "fallacy/networks.hpp"
#include "fallacy/temporal.hpp"

namespace fallacy {

using nlohmann::json;

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(format(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string format(const std::vector<std::string>& v) {
    std::string s = "invalid configuration (" + std::to_string(v.size()) + " problem" + (v.size() == 1 ? "" : "s") + "):";
    for (const auto& m : v) s += "\n  - " + m;
    return s;
  }
  std::vector<std::string> violations_;
};

struct PipelineConfig {
  std::filesystem::path base_dir;  // relative paths resolve against the config file's directory
  json resolved;                   // defaults merged with the file and overrides

  struct {
    std::filesystem::path posts, comments;
    std::optional<std::filesystem::path> profiles;
    std::string salt;
    bool lenient = false;
  } corpus;
  std::optional<std::filesystem::path> labeled;
  std::uint64_t seed = 0;
  ClassifierConfig classifier;
  std::size_t folds = 10;
  std::vector<double> sweep_fractions;
  std::size_t sweep_seeds = 5;
  struct {
    std::string kind = "builtin";
    std::optional<std::filesystem::path> model;
    std::vector<std::string> command;
    double threshold = 0.5;
    std::size_t batch_size = 256;
    bool skip_failed = false;
  } scorer;
  struct {
    std::size_t trigrams = 3;
    bool only_adhominem = true;
  } explain;
  struct {
    std::vector<std::size_t> lambdas, rhos, group_boundaries;
    std::size_t top_n = 10;
    std::vector<CountBucket> count_buckets;
    std::optional<std::string> overlap_base;
  } networks;
  struct {
    std::optional<std::vector<std::string>> topics;
    std::vector<Quantity> quantities;
    std::size_t k = 2;
    std::size_t min_size = 6;
    std::optional<double> gamma;
    std::size_t window = 12;
    bool smooth_before_detection = false;
  } temporal;
  struct {
    double pi1 = 0.5;
    bool proportional = false;
    std::size_t top_n = 30;
    bool stop_words = false;
  } wordshift;
};

namespace detail {

using Check = std::function<void(const json&, const std::string& key, std::vector<std::string>& out)>;

struct Field {
  std::string key;  // dotted path
  json default_value;
  Check check;
  bool required = false;
};

inline bool is_uint(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

inline Check string_check(bool nullable = false) {
  return [=](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!(v.is_string() || (nullable && v.is_null()))) out.push_back(k + ": expected a string" + (nullable ? " or null" : ""));
  };
}

inline Check bool_check() {
  return [](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!v.is_boolean()) out.push_back(k + ": expected true or false");
  };
}

inline Check uint_check(std::uint64_t lo, std::uint64_t hi = UINT64_MAX) {
  return [=](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!is_uint(v)) return out.push_back(k + ": expected a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi) {
      out.push_back(k + ": " + std::to_string(x) + " is outside [" + std::to_string(lo) + ", " +
                    (hi == UINT64_MAX ? std::string("inf") : std::to_string(hi)) + "]");
    }
  };
}

/// Real in (lo, hi) with each end open or closed.
inline Check real_check(double lo, double hi, bool lo_open, bool hi_open, bool nullable = false) {
  return [=](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (nullable && v.is_null()) return;
    if (!v.is_number()) return out.push_back(k + ": expected a number" + (nullable ? " or null" : ""));
    const double x = v.get<double>();
    const bool ok = std::isfinite(x) && (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
    if (!ok) {
      out.push_back(k + ": " + v.dump() + " is outside " + (lo_open ? "(" : "[") + json(lo).dump() + ", " +
                    (std::isinf(hi) ? std::string("inf") : json(hi).dump()) + (hi_open ? ")" : "]"));
    }
  };
}

inline Check ascending_uint_list(bool allow_empty = false) {
  return [=](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!v.is_array() || (!allow_empty && v.empty())) return out.push_back(k + ": expected a non-empty list of integers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!is_uint(v[i])) return out.push_back(k + "[" + std::to_string(i) + "]: expected a non-negative integer");
      if (i > 0 && v[i].get<std::uint64_t>() <= v[i - 1].get<std::uint64_t>()) {
        return out.push_back(k + ": values must be strictly ascending");
      }
    }
  };
}

inline Check string_list(bool nullable, bool allow_empty) {
  return [=](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (nullable && v.is_null()) return;
    if (!v.is_array() || (!allow_empty && v.empty())) return out.push_back(k + ": expected a non-empty list of strings");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) return out.push_back(k + "[" + std::to_string(i) + "]: expected a string");
    }
  };
}

inline std::vector<Field> schema() {
  auto fractions = [](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!v.is_array() || v.empty()) return out.push_back(k + ": expected a non-empty list of fractions");
    for (std::size_t i = 0; i < v.size(); ++i) {
      real_check(0.0, 1.0, true, false)(v[i], k + "[" + std::to_string(i) + "]", out);
    }
  };
  auto buckets = [](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!v.is_array() || v.empty()) return out.push_back(k + ": expected a non-empty list of [lo, hi] pairs");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& b = v[i];
      const auto where = k + "[" + std::to_string(i) + "]";
      if (!b.is_array() || b.size() != 2 || !is_uint(b[0]) || !(b[1].is_null() || is_uint(b[1]))) {
        out.push_back(where + ": expected [lo, hi] with hi an integer or null");
      }
    }
  };
  auto quantities = [](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!v.is_array() || v.empty()) return out.push_back(k + ": expected a non-empty list of quantity names");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string() || !parse_quantity(v[i].get<std::string>())) {
        out.push_back(k + "[" + std::to_string(i) + "]: unknown quantity " + v[i].dump() +
                      " (valid: comments, ah_comments, ah_fraction, active_users, ah_users, ah_user_fraction)");
      }
    }
  };
  auto scorer_kind = [](const json& v, const std::string& k, std::vector<std::string>& out) {
    if (!v.is_string() || (v != "builtin" && v != "external")) out.push_back(k + ": expected \"builtin\" or \"external\"");
  };
  const double inf = std::numeric_limits<double>::infinity();
  return {
      {"corpus.posts", nullptr, string_check(), true},
      {"corpus.comments", nullptr, string_check(), true},
      {"corpus.profiles", nullptr, string_check(true)},
      {"corpus.salt", "", string_check()},
      {"corpus.lenient", false, bool_check()},
      {"labeled", nullptr, string_check(true)},
      {"seed", 42, uint_check(0)},
      {"classifier.hash_bits", 18, uint_check(4, 26)},
      {"classifier.l2", 1e-4, real_check(0.0, inf, false, true)},
      {"classifier.max_epochs", 500, uint_check(1, 1000000)},
      {"classifier.tolerance", 1e-6, real_check(0.0, inf, true, true)},
      {"classifier.folds", 10, uint_check(2)},
      {"sweep.fractions", json::array({0.05, 0.1, 0.25, 0.5, 1.0}), fractions},
      {"sweep.seeds", 5, uint_check(1)},
      {"scorer.kind", "builtin", scorer_kind},
      {"scorer.model", nullptr, string_check(true)},
      {"scorer.command", json::array(), string_list(false, true)},
      {"scorer.threshold", 0.5, real_check(0.0, 1.0, true, true)},
      {"scorer.batch_size", 256, uint_check(1)},
      {"scorer.skip_failed", false, bool_check()},
      {"explain.trigrams", 3, uint_check(1)},
      {"explain.only_adhominem", true, bool_check()},
      {"networks.lambdas", json::array({0, 1, 2, 5, 10}), ascending_uint_list()},
      {"networks.rhos", json::array({0, 1, 2, 5, 10}), ascending_uint_list()},
      {"networks.group_boundaries", json::array({10, 50, 100, 2000}), ascending_uint_list()},
      {"networks.top_n", 10, uint_check(1)},
      {"networks.count_buckets", json::array({json::array({1, 10}), json::array({11, 50}), json::array({51, nullptr})}),
       buckets},
      {"networks.overlap_base", nullptr, string_check(true)},
      {"temporal.topics", nullptr, string_list(true, false)},
      {"temporal.quantities", json::array({"comments", "ah_fraction", "ah_user_fraction"}), quantities},
      {"temporal.k", 2, uint_check(1)},
      {"temporal.min_size", 6, uint_check(1)},
      {"temporal.gamma", nullptr, real_check(0.0, inf, true, true, true)},
      {"temporal.window", 12, uint_check(1)},
      {"temporal.smooth_before_detection", false, bool_check()},
      {"wordshift.pi1", 0.5, real_check(0.0, 1.0, true, true)},
      {"wordshift.proportional", false, bool_check()},
      {"wordshift.top_n", 30, uint_check(1)},
      {"wordshift.stop_words", false, bool_check()},
  };
}

inline std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

inline json::json_pointer pointer_of(std::string_view key) {
  json::json_pointer p;
  for (auto& part : split_key(key)) p /= part;
  return p;
}

/// Walks `user` and reports keys that are neither schema leaves nor sections.
inline void find_unknown(const json& user, const std::string& prefix, const std::vector<Field>& fields,
                         std::vector<std::string>& out) {
  for (const auto& [k, v] : user.items()) {
    const auto key = prefix.empty() ? k : prefix + "." + k;
    bool leaf = false, section = false;
    for (const auto& f : fields) {
      if (f.key == key) leaf = true;
      else if (f.key.rfind(key + ".", 0) == 0) section = true;
    }
    if (leaf) continue;
    if (!section) {
      out.push_back(key + ": unknown key");
    } else if (!v.is_object()) {
      out.push_back(key + ": expected a section (object)");
    } else {
      find_unknown(v, key, fields, out);
    }
  }
}

}  // namespace detail

/// Parses a `--set key=value` override. The value is read as JSON when it parses,
/// otherwise as a plain string.
inline void apply_override(json& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError({"override '" + std::string(assignment) + "': expected key=value"});
  }
  const auto key = assignment.substr(0, eq);
  const auto raw = std::string(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  if (!tree.is_object()) tree = json::object();
  json* node = &tree;
  const auto parts = detail::split_key(key);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto& next = (*node)[parts[i]];
    if (!next.is_object()) next = json::object();
    node = &next;
  }
  (*node)[parts.back()] = std::move(value);
}

/// Validates `user` (the parsed config file with overrides applied) and builds the
/// typed configuration. All violations are reported together.
inline PipelineConfig make_config(const json& user, const std::filesystem::path& base_dir) {
  const auto fields = detail::schema();
  std::vector<std::string> problems;
  if (!user.is_object()) throw ConfigError({"top level: expected a JSON object"});
  detail::find_unknown(user, "", fields, problems);
  json resolved = json::object();
  for (const auto& f : fields) {
    const auto ptr = detail::pointer_of(f.key);
    const bool present = user.contains(ptr);
    if (!present && f.required) {
      problems.push_back(f.key + ": required");
      continue;
    }
    const json& v = present ? user.at(ptr) : f.default_value;
    if (present) f.check(v, f.key, problems);
    resolved[ptr] = v;
  }

  const auto get = [&](std::string_view key) -> const json& { return resolved.at(detail::pointer_of(key)); };
  // Cross-field rules only make sense once the individual fields are well-formed.
  if (problems.empty()) {
    if (get("scorer.kind") == "external" && get("scorer.command").empty()) {
      problems.push_back("scorer.command: required when scorer.kind is \"external\"");
    }
    if (get("networks.group_boundaries").size() < 2) problems.push_back("networks.group_boundaries: need at least two values");
    std::vector<CountBucket> bs;
    for (const auto& b : get("networks.count_buckets")) {
      bs.push_back({b[0].get<std::size_t>(), b[1].is_null() ? std::nullopt : std::optional(b[1].get<std::size_t>())});
    }
    try {
      validate_buckets(bs);
    } catch (const InvalidArgument& e) {
      problems.push_back(std::string("networks.count_buckets: ") + e.what());
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));

  PipelineConfig c;
  c.base_dir = base_dir;
  c.resolved = resolved;
  auto path = [&](std::string_view key) { return base_dir / get(key).get<std::string>(); };
  auto opt_path = [&](std::string_view key) -> std::optional<std::filesystem::path> {
    if (get(key).is_null()) return std::nullopt;
    return path(key);
  };
  c.corpus.posts = path("corpus.posts");
  c.corpus.comments = path("corpus.comments");
  c.corpus.profiles = opt_path("corpus.profiles");
  c.corpus.salt = get("corpus.salt").get<std::string>();
  c.corpus.lenient = get("corpus.lenient").get<bool>();
  c.labeled = opt_path("labeled");
  c.seed = get("seed").get<std::uint64_t>();
  c.classifier.hash_bits = get("classifier.hash_bits").get<unsigned>();
  c.classifier.l2 = get("classifier.l2").get<double>();
  c.classifier.max_epochs = get("classifier.max_epochs").get<unsigned>();
  c.classifier.tolerance = get("classifier.tolerance").get<double>();
  c.folds = get("classifier.folds").get<std::size_t>();
  c.sweep_fractions = get("sweep.fractions").get<std::vector<double>>();
  c.sweep_seeds = get("sweep.seeds").get<std::size_t>();
  c.scorer.kind = get("scorer.kind").get<std::string>();
  c.scorer.model = opt_path("scorer.model");
  c.scorer.command = get("scorer.command").get<std::vector<std::string>>();
  c.scorer.threshold = get("scorer.threshold").get<double>();
  c.scorer.batch_size = get("scorer.batch_size").get<std::size_t>();
  c.scorer.skip_failed = get("scorer.skip_failed").get<bool>();
  c.explain.trigrams = get("explain.trigrams").get<std::size_t>();
  c.explain.only_adhominem = get("explain.only_adhominem").get<bool>();
  c.networks.lambdas = get("networks.lambdas").get<std::vector<std::size_t>>();
  c.networks.rhos = get("networks.rhos").get<std::vector<std::size_t>>();
  c.networks.group_boundaries = get("networks.group_boundaries").get<std::vector<std::size_t>>();
  c.networks.top_n = get("networks.top_n").get<std::size_t>();
  for (const auto& b : get("networks.count_buckets")) {
    c.networks.count_buckets.push_back(
        {b[0].get<std::size_t>(), b[1].is_null() ? std::nullopt : std::optional(b[1].get<std::size_t>())});
  }
  if (!get("networks.overlap_base").is_null()) c.networks.overlap_base = get("networks.overlap_base").get<std::string>();
  if (!get("temporal.topics").is_null()) c.temporal.topics = get("temporal.topics").get<std::vector<std::string>>();
  for (const auto& q : get("temporal.quantities")) c.temporal.quantities.push_back(*parse_quantity(q.get<std::string>()));
  c.temporal.k = get("temporal.k").get<std::size_t>();
  c.temporal.min_size = get("temporal.min_size").get<std::size_t>();
  if (!get("temporal.gamma").is_null()) c.temporal.gamma = get("temporal.gamma").get<double>();
  c.temporal.window = get("temporal.window").get<std::size_t>();
  c.temporal.smooth_before_detection = get("temporal.smooth_before_detection").get<bool>();
  c.wordshift.pi1 = get("wordshift.pi1").get<double>();
  c.wordshift.proportional = get("wordshift.proportional").get<bool>();
  c.wordshift.top_n = get("wordshift.top_n").get<std::size_t>();
  c.wordshift.stop_words = get("wordshift.stop_words").get<bool>();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  json user;
  try {
    user = json::parse(detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": not valid JSON: " + e.what()});
  }
  for (const auto& o : overrides) apply_override(user, o);
  return make_config(user, path.parent_path());
}

}  // namespace fallacy
