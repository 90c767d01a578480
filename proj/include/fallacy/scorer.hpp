#pragma once

// Scoring a corpus with the builtin baseline model or an external scorer process that
// speaks the line protocol: requests {"id","text"} on stdin, responses
// {"id","p_adhominem","token_scores"?} on stdout, one JSON object per line.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fallacy/classifier.hpp"
#include "fallacy/corpus.hpp"
#include "fallacy/detail/io.hpp"
#include "fallacy/detail/process.hpp"
#include "fallacy/error.hpp"

namespace fallacy {

struct ScoredToken {
  std::string token;
  std::optional<CharSpan> span;  // absent when the token cannot be located in the text
  double score = 0.0;
  bool special = false;          // classifier-internal token ([CLS], [SEP], ...)

  bool operator==(const ScoredToken&) const = default;
};

struct AnnotatedComment {
  std::string id;
  std::optional<double> p;  // nullopt: scoring failed and was skipped
  bool label = false;       // p >= threshold
  std::optional<std::vector<ScoredToken>> token_scores;

  bool operator==(const AnnotatedComment&) const = default;
};

/// One annotation per comment, in corpus order.
class AnnotatedCorpus {
 public:
  AnnotatedCorpus(const Corpus& corpus, std::vector<AnnotatedComment> annotations, std::string scorer, double threshold)
      : corpus_(&corpus), annotations_(std::move(annotations)), scorer_(std::move(scorer)), threshold_(threshold) {
    if (annotations_.size() != corpus.comments().size()) {
      throw DataError("annotation count " + std::to_string(annotations_.size()) + " does not match corpus comment count " +
                      std::to_string(corpus.comments().size()));
    }
    for (std::size_t i = 0; i < annotations_.size(); ++i) {
      if (annotations_[i].id != corpus.comment(i).id) {
        throw DataError("annotation " + std::to_string(i) + " has id '" + annotations_[i].id + "', expected '" +
                        corpus.comment(i).id + "'");
      }
    }
  }

  const Corpus& corpus() const { return *corpus_; }
  const AnnotatedComment& at(std::size_t comment_index) const { return annotations_[comment_index]; }
  std::span<const AnnotatedComment> annotations() const { return annotations_; }
  const std::string& scorer() const { return scorer_; }
  double threshold() const { return threshold_; }

  bool scored(std::size_t i) const { return annotations_[i].p.has_value(); }
  /// True only for scored comments labeled ad hominem.
  bool is_adhominem(std::size_t i) const { return annotations_[i].p.has_value() && annotations_[i].label; }
  std::size_t skipped() const {
    return static_cast<std::size_t>(std::count_if(annotations_.begin(), annotations_.end(),
                                                  [](const auto& a) { return !a.p.has_value(); }));
  }

 private:
  const Corpus* corpus_;
  std::vector<AnnotatedComment> annotations_;
  std::string scorer_;
  double threshold_;
};

struct BuiltinScorer {
  BaselineModel model;
  std::string name = "builtin-baseline";
};

struct ExternalScorer {
  std::vector<std::string> argv;  // e.g. {"python3", "scorer.py", "--model", "bert-base"}
};

using Scorer = std::variant<BuiltinScorer, ExternalScorer>;

struct ScoreOptions {
  double threshold = 0.5;
  std::size_t batch_size = 256;
  bool skip_failed = false;  // record nulls instead of failing on external scorer errors
};

struct ScoreReport {
  std::size_t batches = 0;
  std::size_t skipped = 0;
  std::vector<std::string> failures;  // one message per failed batch (skip_failed mode)
};

namespace protocol {

inline std::string request_line(std::string_view id, std::string_view text) {
  return json{{"id", id}, {"text", text}}.dump() + "\n";
}

struct Response {
  std::string id;
  double p = 0.0;
  std::optional<std::vector<ScoredToken>> token_scores;  // spans not yet aligned
};

inline bool is_special_token(std::string_view t) {
  if (t.size() < 3 || t.front() != '[' || t.back() != ']') return false;
  return std::all_of(t.begin() + 1, t.end() - 1, [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
}

/// Parses one response line. token_scores entries are [token, score] or
/// [token, score, special]; bracketed upper-case tokens ("[CLS]") count as special.
inline Response parse_response(std::string_view line, std::size_t line_no) {
  const auto where = "scorer response line " + std::to_string(line_no) + ": ";
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw ScorerError(where + "malformed JSON: " + e.what());
  }
  if (!obj.is_object()) throw ScorerError(where + "expected a JSON object");
  if (!obj.contains("id") || !obj["id"].is_string()) throw ScorerError(where + "missing string field 'id'");
  if (!obj.contains("p_adhominem") || !obj["p_adhominem"].is_number()) {
    throw ScorerError(where + "missing numeric field 'p_adhominem'");
  }
  Response r;
  r.id = obj["id"].get<std::string>();
  r.p = obj["p_adhominem"].get<double>();
  if (!(r.p >= 0.0 && r.p <= 1.0)) {
    throw ScorerError(where + "p_adhominem " + obj["p_adhominem"].dump() + " for id '" + r.id + "' outside [0,1]");
  }
  if (obj.contains("token_scores") && !obj["token_scores"].is_null()) {
    const auto& ts = obj["token_scores"];
    if (!ts.is_array()) throw ScorerError(where + "token_scores must be an array");
    std::vector<ScoredToken> tokens;
    for (const auto& e : ts) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_string() || !e[1].is_number() ||
          (e.size() == 3 && !e[2].is_boolean())) {
        throw ScorerError(where + "token_scores entries must be [token, score] or [token, score, special]");
      }
      ScoredToken t;
      t.token = e[0].get<std::string>();
      t.score = e[1].get<double>();
      t.special = e.size() == 3 ? e[2].get<bool>() : is_special_token(t.token);
      tokens.push_back(std::move(t));
    }
    r.token_scores = std::move(tokens);
  }
  return r;
}

/// Problems with a scorer transcript, empty when conformant: one response per request,
/// same id set, p in [0,1], well-formed token_scores.
inline std::vector<std::string> check_transcript(std::string_view requests_jsonl, std::string_view responses_jsonl) {
  std::vector<std::string> problems;
  auto lines = [](std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(start, end - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(std::move(line));
      start = end + 1;
    }
    return out;
  };
  std::multiset<std::string> wanted, got;
  for (const auto& l : lines(requests_jsonl)) {
    try {
      wanted.insert(json::parse(l).at("id").get<std::string>());
    } catch (const json::exception& e) {
      problems.push_back(std::string("bad request line: ") + e.what());
    }
  }
  std::size_t n = 0;
  for (const auto& l : lines(responses_jsonl)) {
    try {
      got.insert(parse_response(l, ++n).id);
    } catch (const ScorerError& e) {
      problems.push_back(e.what());
    }
  }
  if (wanted != got) {
    std::vector<std::string> missing, extra;
    std::set_difference(wanted.begin(), wanted.end(), got.begin(), got.end(), std::back_inserter(missing));
    std::set_difference(got.begin(), got.end(), wanted.begin(), wanted.end(), std::back_inserter(extra));
    if (!missing.empty()) problems.push_back("missing ids: " + detail::join_limited(missing));
    if (!extra.empty()) problems.push_back("unexpected or duplicate ids: " + detail::join_limited(extra));
  }
  return problems;
}

}  // namespace protocol

/// Locates tokens left to right in `text` (ASCII case-insensitive; a leading "##"
/// word-piece marker is ignored). Specials and tokens that cannot be found get no span.
inline void align_token_spans(std::string_view text, std::vector<ScoredToken>& tokens) {
  std::string lowered(text);
  for (auto& c : lowered) c = detail::ascii_lower(c);
  std::size_t cursor = 0;
  for (auto& t : tokens) {
    t.span.reset();
    if (t.special) continue;
    std::string_view needle = t.token;
    if (needle.substr(0, 2) == "##" && needle.size() > 2) needle.remove_prefix(2);
    if (needle.empty()) continue;
    std::string lowered_needle(needle);
    for (auto& c : lowered_needle) c = detail::ascii_lower(c);
    const auto pos = lowered.find(lowered_needle, cursor);
    if (pos == std::string::npos) continue;
    t.span = CharSpan{pos, pos + lowered_needle.size()};
    cursor = pos + lowered_needle.size();
  }
}

namespace detail {

inline std::string scorer_identity(const Scorer& scorer) {
  if (const auto* b = std::get_if<BuiltinScorer>(&scorer)) return b->name;
  return "external:" + join(std::get<ExternalScorer>(scorer).argv, " ");
}

inline AnnotatedComment builtin_annotation(const BaselineModel& model, const CommentRecord& c, double threshold) {
  const auto pred = predict(model, c.text, threshold);
  AnnotatedComment a;
  a.id = c.id;
  a.p = pred.p_adhominem;
  a.label = pred.p_adhominem >= threshold;
  std::vector<ScoredToken> tokens;
  tokens.reserve(pred.token_scores.size());
  for (const auto& t : pred.token_scores) tokens.push_back({t.token, t.span, t.score, false});
  a.token_scores = std::move(tokens);
  return a;
}

/// Scores comments [begin, end) with one external process invocation.
inline std::vector<AnnotatedComment> external_batch(const ExternalScorer& ext, const Corpus& corpus, std::size_t begin,
                                                    std::size_t end, double threshold) {
  std::string input;
  for (std::size_t i = begin; i < end; ++i) input += protocol::request_line(corpus.comment(i).id, corpus.comment(i).text);
  const auto result = run_process(ext.argv, input);
  if (result.exit_code != 0) {
    throw ScorerError("external scorer exited with code " + std::to_string(result.exit_code) +
                      (result.err.empty() ? std::string() : "; stderr: " + result.err));
  }
  std::map<std::string, protocol::Response> by_id;
  std::size_t line_no = 0;
  std::size_t start = 0;
  const std::string_view out = result.out;
  while (start < out.size()) {
    auto stop = out.find('\n', start);
    if (stop == std::string_view::npos) stop = out.size();
    auto line = out.substr(start, stop - start);
    start = stop + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto r = protocol::parse_response(line, line_no);
    const auto id = r.id;
    if (!by_id.emplace(id, std::move(r)).second) throw ScorerError("scorer returned id '" + id + "' more than once");
  }
  std::vector<std::string> missing;
  std::vector<AnnotatedComment> anns;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& c = corpus.comment(i);
    auto it = by_id.find(c.id);
    if (it == by_id.end()) {
      missing.push_back(c.id);
      continue;
    }
    AnnotatedComment a;
    a.id = c.id;
    a.p = it->second.p;
    a.label = it->second.p >= threshold;
    if (it->second.token_scores) {
      auto tokens = std::move(*it->second.token_scores);
      align_token_spans(c.text, tokens);
      a.token_scores = std::move(tokens);
    }
    anns.push_back(std::move(a));
    by_id.erase(it);
  }
  std::vector<std::string> problems;
  if (!missing.empty()) problems.push_back("scorer response is missing ids: " + join_limited(missing));
  if (!by_id.empty()) {
    std::vector<std::string> extra;
    for (const auto& [id, _] : by_id) extra.push_back(id);
    problems.push_back("scorer returned unknown ids: " + join_limited(extra));
  }
  if (!problems.empty()) throw ScorerError(join(problems, "; "));
  return anns;
}

}  // namespace detail

/// Scores every comment; output is in corpus order whatever the batching. The label
/// rule is p >= threshold, so ties go to the ad hominem class.
inline AnnotatedCorpus score_corpus(const Corpus& corpus, const Scorer& scorer, const ScoreOptions& options = {},
                                    ScoreReport* report = nullptr) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) throw InvalidArgument("threshold must lie in (0,1)");
  if (options.batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  const std::size_t n = corpus.comments().size();
  std::vector<AnnotatedComment> anns;
  anns.reserve(n);
  ScoreReport rep;
  for (std::size_t begin = 0; begin < n; begin += options.batch_size) {
    const std::size_t end = std::min(n, begin + options.batch_size);
    ++rep.batches;
    if (const auto* b = std::get_if<BuiltinScorer>(&scorer)) {
      for (std::size_t i = begin; i < end; ++i) anns.push_back(detail::builtin_annotation(b->model, corpus.comment(i), options.threshold));
      continue;
    }
    try {
      auto batch = detail::external_batch(std::get<ExternalScorer>(scorer), corpus, begin, end, options.threshold);
      for (auto& a : batch) anns.push_back(std::move(a));
    } catch (const ScorerError& e) {
      if (!options.skip_failed) throw;
      rep.failures.push_back("batch " + std::to_string(rep.batches - 1) + ": " + e.what());
      for (std::size_t i = begin; i < end; ++i) {
        AnnotatedComment a;
        a.id = corpus.comment(i).id;
        anns.push_back(std::move(a));
        ++rep.skipped;
      }
    }
  }
  if (report) *report = rep;
  return AnnotatedCorpus(corpus, std::move(anns), detail::scorer_identity(scorer), options.threshold);
}

// ---------------------------------------------------------------------------
// Persistence: annotations.jsonl {"id","p","label","token_scores"} plus a sidecar
// metadata object recording scorer identity and threshold.

inline json to_json(const ScoredToken& t) {
  json j{{"token", t.token}, {"score", t.score}};
  j["start"] = t.span ? json(t.span->start) : json(nullptr);
  j["end"] = t.span ? json(t.span->end) : json(nullptr);
  if (t.special) j["special"] = true;
  return j;
}

inline json to_json(const AnnotatedComment& a) {
  json j{{"id", a.id}, {"label", a.label}};
  j["p"] = a.p ? json(*a.p) : json(nullptr);
  if (a.token_scores) {
    json ts = json::array();
    for (const auto& t : *a.token_scores) ts.push_back(to_json(t));
    j["token_scores"] = std::move(ts);
  } else {
    j["token_scores"] = nullptr;
  }
  return j;
}

inline std::string annotations_to_jsonl(const AnnotatedCorpus& ac) {
  std::string out;
  for (const auto& a : ac.annotations()) out += to_json(a).dump() + "\n";
  return out;
}

inline json annotation_metadata(const AnnotatedCorpus& ac) {
  return json{{"scorer", ac.scorer()},
              {"threshold", ac.threshold()},
              {"comments", ac.annotations().size()},
              {"skipped", ac.skipped()}};
}

inline void save_annotations(const AnnotatedCorpus& ac, const std::filesystem::path& jsonl_path,
                             const std::filesystem::path& meta_path) {
  detail::write_file_atomic(jsonl_path, annotations_to_jsonl(ac));
  detail::write_file_atomic(meta_path, annotation_metadata(ac).dump(2) + "\n");
}

inline AnnotatedCorpus load_annotations(const Corpus& corpus, const std::filesystem::path& jsonl_path,
                                        const std::filesystem::path& meta_path) {
  json meta;
  try {
    meta = json::parse(detail::read_file(meta_path));
  } catch (const json::exception& e) {
    throw DataError(meta_path.string() + ": malformed JSON: " + e.what());
  }
  const double threshold = meta.value("threshold", 0.5);
  std::map<std::string, AnnotatedComment> by_id;
  const auto name = jsonl_path.filename().string();
  detail::for_each_line(jsonl_path, [&](std::size_t line_no, std::string_view line) {
    const auto where = name + ":" + std::to_string(line_no) + ": ";
    try {
      const auto j = json::parse(line);
      AnnotatedComment a;
      a.id = j.at("id").get<std::string>();
      if (!j.at("p").is_null()) a.p = j.at("p").get<double>();
      a.label = j.at("label").get<bool>();
      if (a.p && !(*a.p >= 0.0 && *a.p <= 1.0)) throw DataError(where + "p outside [0,1]");
      if (a.p && a.label != (*a.p >= threshold)) throw DataError(where + "label inconsistent with threshold");
      if (j.contains("token_scores") && !j["token_scores"].is_null()) {
        std::vector<ScoredToken> ts;
        for (const auto& e : j["token_scores"]) {
          ScoredToken t;
          t.token = e.at("token").get<std::string>();
          t.score = e.at("score").get<double>();
          if (!e.at("start").is_null()) t.span = CharSpan{e.at("start").get<std::size_t>(), e.at("end").get<std::size_t>()};
          t.special = e.value("special", false);
          ts.push_back(std::move(t));
        }
        a.token_scores = std::move(ts);
      }
      if (!by_id.emplace(a.id, a).second) throw DataError(where + "duplicate annotation for '" + a.id + "'");
    } catch (const json::exception& e) {
      throw DataError(where + "malformed annotation: " + e.what());
    }
  });
  std::vector<AnnotatedComment> anns;
  std::vector<std::string> missing;
  for (const auto& c : corpus.comments()) {
    auto it = by_id.find(c.id);
    if (it == by_id.end()) {
      missing.push_back(c.id);
      continue;
    }
    anns.push_back(std::move(it->second));
    by_id.erase(it);
  }
  if (!missing.empty()) throw DataError("annotations missing for comments: " + detail::join_limited(missing));
  if (!by_id.empty()) throw DataError("annotations reference unknown comments, e.g. '" + by_id.begin()->first + "'");
  return AnnotatedCorpus(corpus, std::move(anns), meta.value("scorer", ""), threshold);
}

}  // namespace fallacy
