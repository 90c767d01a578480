#pragma once

// Subcommand implementations behind the command-line tool. Each step reads its inputs
// from the output bundle, writes its own files atomically and returns the list of
// analysis cells that failed (an empty list means complete success).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "fallacy/classifier.hpp"
#include "fallacy/config.hpp"
#include "fallacy/corpus.hpp"
#include "fallacy/detail/io.hpp"
#include "fallacy/detail/rng.hpp"
#include "fallacy/detail/sha256.hpp"
#include "fallacy/evaluation.hpp"
#include "fallacy/explain.hpp"
#include "fallacy/networks.hpp"
#include "fallacy/scorer.hpp"
#include "fallacy/stats.hpp"
#include "fallacy/temporal.hpp"
#include "fallacy/wordshift.hpp"

namespace fallacy::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

class MissingArtifact : public DataError {
 public:
  MissingArtifact(const fs::path& path, std::string_view producer)
      : DataError("missing " + path.string() + ": run `fallacy-forensics " + std::string(producer) + "` first"),
        producer_(producer) {}
  const std::string& producer() const { return producer_; }

 private:
  std::string producer_;
};

/// Fixed locations of every artifact inside the output bundle.
struct Layout {
  fs::path out;

  fs::path corpus_dir() const { return out / "corpus"; }
  fs::path ingest_report() const { return out / "corpus" / "ingest_report.json"; }
  fs::path model() const { return out / "model" / "model.json"; }
  fs::path training_report() const { return out / "model" / "training.json"; }
  fs::path evaluation_dir() const { return out / "evaluation"; }
  fs::path annotations() const { return out / "annotations" / "annotations.jsonl"; }
  fs::path annotations_meta() const { return out / "annotations" / "meta.json"; }
  fs::path score_report() const { return out / "annotations" / "score_report.json"; }
  fs::path explain_dir() const { return out / "explain"; }
  fs::path networks_dir() const { return out / "networks"; }
  fs::path temporal_dir() const { return out / "temporal"; }
  fs::path partition() const { return out / "temporal" / "partition.json"; }
  fs::path wordshift_dir() const { return out / "wordshift"; }
  fs::path users_dir() const { return out / "users"; }
  fs::path config_resolved() const { return out / "config.resolved"; }
  fs::path manifest() const { return out / "manifest.json"; }
};

struct Outcome {
  std::vector<std::string> failures;

  void merge(const Outcome& o) { failures.insert(failures.end(), o.failures.begin(), o.failures.end()); }
  bool ok() const { return failures.empty(); }
};

namespace detail {

inline void require(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) throw MissingArtifact(path, producer);
}

inline void write_json(const fs::path& path, const json& j) { fallacy::detail::write_file_atomic(path, j.dump(2) + "\n"); }

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string num(double v) { return fmt::format("{}", v); }
inline std::string num(std::size_t v) { return std::to_string(v); }
inline std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { add(header); }
  void add(const std::vector<std::string>& row) {
    if (row.size() != width_) throw Error("csv row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) text_ += (i ? "," : "") + csv_field(row[i]);
    text_ += "\n";
  }
  void write(const fs::path& path) const { fallacy::detail::write_file_atomic(path, text_); }
  const std::string& text() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

/// File-system safe rendering of a topic name.
inline std::string slug(std::string_view topic) {
  std::string s;
  for (const char c : topic) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    s += ok ? c : '_';
  }
  return s.empty() ? "_" : s;
}

inline Corpus load_corpus(const PipelineConfig& cfg, const Layout& layout) {
  require(layout.corpus_dir() / "comments.jsonl", "ingest");
  return load_written_corpus(layout.corpus_dir(), {cfg.corpus.salt, false});
}

inline AnnotatedCorpus load_annotated(const Corpus& corpus, const Layout& layout) {
  require(layout.annotations(), "score");
  require(layout.annotations_meta(), "score");
  return load_annotations(corpus, layout.annotations(), layout.annotations_meta());
}

inline std::vector<LabeledExample> load_labeled(const PipelineConfig& cfg) {
  if (!cfg.labeled) throw InvalidArgument("config key 'labeled' must point to a labeled dataset for this subcommand");
  return read_labeled_dataset(*cfg.labeled);
}

inline std::vector<std::string> selected_topics(const PipelineConfig& cfg, const Corpus& corpus) {
  if (!cfg.temporal.topics) return {corpus.topics().begin(), corpus.topics().end()};
  for (const auto& t : *cfg.temporal.topics) corpus.require_topic(t);
  return *cfg.temporal.topics;
}

inline std::string segment_name(std::size_t i) { return "H" + std::to_string(i + 1); }

}  // namespace detail

// ---------------------------------------------------------------------------

inline Outcome ingest(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  IngestReport rep;
  const auto corpus =
      ingest_corpus(cfg.corpus.posts, cfg.corpus.comments, cfg.corpus.profiles, {cfg.corpus.salt, cfg.corpus.lenient}, &rep);
  write_corpus(corpus, layout.corpus_dir());
  json topics = json::object();
  for (const auto& t : corpus.topics()) topics[t] = corpus.comments_in_topic(t).size();
  json report{{"posts", rep.posts},
              {"comments", rep.comments},
              {"profiles", rep.profiles},
              {"dropped_comments", rep.dropped_comments},
              {"dropped_ids", rep.dropped_ids},
              {"topics", topics},
              {"authors", corpus.authors().size()}};
  if (corpus.month_count()) {
    report["first_month"] = month_label(corpus.first_month());
    report["last_month"] = month_label(corpus.last_month());
  }
  detail::write_json(layout.ingest_report(), report);
  log << "ingest: " << rep.posts << " posts, " << rep.comments << " comments, " << rep.profiles << " profiles";
  if (rep.dropped_comments) log << " (" << rep.dropped_comments << " dropped)";
  log << "\n";
  return {};
}

inline Outcome train(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto examples = detail::load_labeled(cfg);
  TrainingReport rep;
  const auto model = train_baseline(examples, cfg.classifier, fallacy::detail::substream_seed(cfg.seed, "train"), &rep);
  save_model(model, layout.model());
  detail::write_json(layout.training_report(), {{"examples", examples.size()},
                                                {"epochs", rep.epochs},
                                                {"converged", rep.converged},
                                                {"final_gradient_max", rep.final_gradient_max},
                                                {"final_loss", rep.final_loss}});
  log << "train: " << examples.size() << " examples, " << rep.epochs << " epochs"
      << (rep.converged ? "" : " (not converged)") << "\n";
  return {};
}

inline Outcome evaluate(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto examples = detail::load_labeled(cfg);
  const auto m = kfold_evaluate(examples, cfg.folds, cfg.seed, cfg.classifier);
  auto j = stats::to_json(m);
  j["examples"] = examples.size();
  detail::write_json(layout.evaluation_dir() / "kfold.json", j);
  detail::Csv csv({"class", "precision", "recall", "f1", "support"});
  for (const auto l : {Label::none, Label::adhominem}) {
    const auto& c = m.of(l);
    csv.add({std::string(to_string(l)), detail::num(c.precision), detail::num(c.recall), detail::num(c.f1),
             detail::num(c.support)});
  }
  csv.add({"macro", "", "", detail::num(m.macro_f1), detail::num(m.count)});
  csv.write(layout.evaluation_dir() / "kfold.csv");
  log << "evaluate: " << cfg.folds << "-fold macro-F1 " << fmt::format("{:.4f}", m.macro_f1) << "\n";
  return {};
}

inline Outcome sweep(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto examples = detail::load_labeled(cfg);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.sweep_seeds; ++i) seeds.push_back(fallacy::detail::substream_seed(cfg.seed, "sweep", i));
  const auto rows = label_fraction_sweep(examples, cfg.sweep_fractions, cfg.folds, seeds, cfg.classifier);
  Outcome outcome;
  json j = json::array();
  detail::Csv csv({"fraction", "mean_macro_f1", "std_macro_f1", "seeds"});
  for (const auto& r : rows) {
    j.push_back(to_json(r));
    csv.add({detail::num(r.fraction), detail::num(r.mean_macro_f1),
             r.mean_macro_f1 ? detail::num(r.std_macro_f1) : std::string(), detail::num(r.per_seed.size())});
    if (!r.mean_macro_f1) outcome.failures.push_back("sweep fraction " + detail::num(r.fraction) + ": " + r.error);
  }
  detail::write_json(layout.evaluation_dir() / "sweep.json",
                     {{"folds", cfg.folds}, {"seeds", cfg.sweep_seeds}, {"rows", std::move(j)}});
  csv.write(layout.evaluation_dir() / "sweep.csv");
  log << "sweep: " << rows.size() << " fractions x " << seeds.size() << " seeds\n";
  return outcome;
}

inline Outcome score(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto corpus = detail::load_corpus(cfg, layout);
  Scorer scorer;
  if (cfg.scorer.kind == "builtin") {
    const auto path = cfg.scorer.model.value_or(layout.model());
    if (!cfg.scorer.model) detail::require(path, "train");
    scorer = BuiltinScorer{load_model(path)};
  } else {
    scorer = ExternalScorer{cfg.scorer.command};
  }
  ScoreReport rep;
  const auto ac = score_corpus(corpus, scorer, {cfg.scorer.threshold, cfg.scorer.batch_size, cfg.scorer.skip_failed}, &rep);
  save_annotations(ac, layout.annotations(), layout.annotations_meta());
  detail::write_json(layout.score_report(), {{"batches", rep.batches}, {"skipped", rep.skipped}, {"failures", rep.failures}});
  std::size_t ah = 0;
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) ah += ac.is_adhominem(i);
  log << "score: " << corpus.comments().size() << " comments, " << ah << " ad hominem, " << rep.skipped << " skipped\n";
  Outcome outcome;
  for (const auto& f : rep.failures) outcome.failures.push_back("score " + f);
  return outcome;
}

inline Outcome explain(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto corpus = detail::load_corpus(cfg, layout);
  const auto ac = detail::load_annotated(corpus, layout);
  Outcome outcome;
  std::string jsonl;
  std::map<std::string, std::size_t> triggers;
  std::size_t records = 0;
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) {
    const auto& a = ac.at(i);
    if (!a.p || !a.token_scores) continue;
    if (cfg.explain.only_adhominem && !a.label) continue;
    const auto& tokens = *a.token_scores;
    try {
      const auto spans = select_trigger_trigrams(std::span<const ScoredToken>(tokens), cfg.explain.trigrams);
      auto rec = render_highlight(corpus.comment(i).text, tokens, spans);
      rec.id = a.id;
      for (const auto& s : rec.spans) ++triggers[s.center_token];
      jsonl += to_json(rec).dump() + "\n";
      ++records;
    } catch (const InvalidArgument& e) {
      outcome.failures.push_back("explain " + a.id + ": " + e.what());
    }
  }
  fallacy::detail::write_file_atomic(layout.explain_dir() / "highlights.jsonl", jsonl);
  std::vector<std::pair<std::string, std::size_t>> ranked(triggers.begin(), triggers.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  detail::Csv csv({"token", "count"});
  for (const auto& [t, n] : ranked) csv.add({t, detail::num(n)});
  csv.write(layout.explain_dir() / "trigger_tokens.csv");
  log << "explain: " << records << " highlighted comments\n";
  return outcome;
}

inline Outcome analyze_networks(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto corpus = detail::load_corpus(cfg, layout);
  const auto ac = detail::load_annotated(corpus, layout);
  Outcome outcome;
  json summary = json::object();
  for (const auto& topic : corpus.topics()) {
    const auto dir = layout.networks_dir() / detail::slug(topic);
    const auto net = build_reply_networks(corpus, topic);
    summary[topic] = {{"support", {{"nodes", net.support.nodes.size()}, {"edges", net.support.edges.size()},
                                   {"weight", net.support.total_weight()},
                                   {"reciprocity", optional_json(reciprocity_or_null(net.support))}}},
                      {"dispute", {{"nodes", net.dispute.nodes.size()}, {"edges", net.dispute.edges.size()},
                                   {"weight", net.dispute.total_weight()},
                                   {"reciprocity", optional_json(reciprocity_or_null(net.dispute))}}},
                      {"top_level_comments", net.top_level},
                      {"ignored_reactions", net.ignored_reactions},
                      {"self_replies", net.self_replies}};

    const auto surface = reciprocity_surface(corpus, topic, cfg.networks.lambdas, cfg.networks.rhos);
    detail::write_json(dir / "reciprocity_surface.json", to_json(surface));
    detail::Csv sc({"lambda", "rho", "members", "support_reciprocity", "dispute_reciprocity"});
    for (const auto& row : surface.cells) {
      for (const auto& c : row) {
        sc.add({detail::num(c.lambda), detail::num(c.rho), detail::num(c.members), detail::num(c.support),
                detail::num(c.dispute)});
      }
    }
    sc.write(dir / "reciprocity_surface.csv");

    const auto groups = activity_groups(ac, topic, cfg.networks.group_boundaries);
    json gj = json::array();
    detail::Csv gc({"top_level_comments", "users", "comments", "pct_users", "pct_comments", "pct_ah"});
    for (const auto& g : groups) {
      gj.push_back(to_json(g));
      gc.add({g.range_label(), detail::num(g.users), detail::num(g.comments), detail::num(g.pct_users),
              detail::num(g.pct_comments), detail::num(g.pct_ah)});
    }
    detail::write_json(dir / "activity_groups.json", gj);
    gc.write(dir / "activity_groups.csv");

    detail::write_json(dir / "top_tables.json", to_json(top_tables(corpus, topic, cfg.networks.top_n)));
  }
  detail::write_json(layout.networks_dir() / "summary.json", summary);

  std::vector<std::pair<std::string, std::string>> pairs;
  if (cfg.networks.overlap_base) {
    corpus.require_topic(*cfg.networks.overlap_base);
    for (const auto& t : corpus.topics()) {
      if (t != *cfg.networks.overlap_base) pairs.emplace_back(t, *cfg.networks.overlap_base);
    }
  } else {
    for (const auto& a : corpus.topics()) {
      for (const auto& b : corpus.topics()) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
  }
  json oj = json::array();
  detail::Csv oc({"topic", "other_topic", "bucket", "users", "overlapping", "fraction"});
  for (const auto& [a, b] : pairs) {
    for (const auto& cell : topic_overlap(corpus, a, b, cfg.networks.count_buckets)) {
      oj.push_back({{"topic", a}, {"other_topic", b}, {"bucket", cell.bucket.label()}, {"users", cell.users},
                    {"overlapping", cell.overlapping}, {"fraction", optional_json(cell.fraction)}});
      oc.add({a, b, cell.bucket.label(), detail::num(cell.users), detail::num(cell.overlapping), detail::num(cell.fraction)});
    }
  }
  detail::write_json(layout.networks_dir() / "topic_overlap.json", oj);
  oc.write(layout.networks_dir() / "topic_overlap.csv");
  log << "analyze networks: " << corpus.topics().size() << " topics\n";
  return outcome;
}

inline Outcome analyze_temporal(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto corpus = detail::load_corpus(cfg, layout);
  const auto ac = detail::load_annotated(corpus, layout);
  Outcome outcome;
  const auto topics = detail::selected_topics(cfg, corpus);
  const auto& dir = layout.temporal_dir();

  std::vector<MonthlySeries> series;
  json bands = json::object();
  for (const auto& topic : topics) {
    auto s = monthly_series(ac, topic);
    std::vector<double> frac, user_frac;
    for (const auto& p : s.months) {
      frac.push_back(p.ah_fraction);
      user_frac.push_back(p.ah_user_fraction);
    }
    const auto frac_ma = moving_average(frac, cfg.temporal.window);
    const auto user_ma = moving_average(user_frac, cfg.temporal.window);
    detail::Csv csv({"month", "total_comments", "scored_comments", "ah_comments", "ah_fraction", "ah_fraction_smoothed",
                     "active_users", "ah_users", "ah_user_fraction", "ah_user_fraction_smoothed", "active"});
    for (std::size_t m = 0; m < s.months.size(); ++m) {
      const auto& p = s.months[m];
      csv.add({month_label(s.first_month + static_cast<std::int64_t>(m)), detail::num(p.total_comments),
               detail::num(p.scored_comments), detail::num(p.ah_comments), detail::num(p.ah_fraction),
               detail::num(frac_ma[m]), detail::num(p.active_users), detail::num(p.ah_users),
               detail::num(p.ah_user_fraction), detail::num(user_ma[m]), p.active() ? "1" : "0"});
    }
    csv.write(dir / "series" / (detail::slug(topic) + ".csv"));

    // Pooled shares with both uncertainty constructions.
    std::int64_t ah = 0, scored = 0;
    std::vector<double> monthly, monthly_users;
    for (const auto& p : s.months) {
      ah += static_cast<std::int64_t>(p.ah_comments);
      scored += static_cast<std::int64_t>(p.scored_comments);
      if (p.scored_comments) monthly.push_back(p.ah_fraction);
      if (p.active_users) monthly_users.push_back(p.ah_user_fraction);
    }
    std::map<AuthorId, std::pair<std::size_t, std::size_t>> per_user;  // (scored, ah)
    for (const auto i : corpus.comments_in_topic(topic)) {
      if (!ac.scored(i)) continue;
      auto& u = per_user[corpus.comment(i).author];
      ++u.first;
      u.second += ac.is_adhominem(i);
    }
    std::int64_t ah_users = 0;
    for (const auto& [_, u] : per_user) ah_users += 2 * u.second >= u.first;
    if (scored == 0) {
      outcome.failures.push_back("temporal fraction band " + topic + ": no scored comments");
    } else {
      bands[topic] = {{"comments", stats::to_json(stats::fraction_band(ah, scored, monthly))},
                      {"users", stats::to_json(stats::fraction_band(ah_users, static_cast<std::int64_t>(per_user.size()),
                                                                    monthly_users))},
                      {"ah_comments", ah},
                      {"scored_comments", scored},
                      {"ah_users", ah_users},
                      {"users_with_scored_comments", per_user.size()}};
    }
    series.push_back(std::move(s));
  }
  detail::write_json(dir / "fraction_bands.json", bands);

  const auto signal = build_signal_matrix(series, cfg.temporal.quantities,
                                          cfg.temporal.smooth_before_detection ? cfg.temporal.window : 0);
  json channels = json::array(), dropped = json::array();
  std::vector<std::string> header{"month"};
  for (const auto& c : signal.channels) {
    channels.push_back({{"topic", c.topic}, {"quantity", to_string(c.quantity)}, {"mean", c.mean}, {"std", c.std}});
    header.push_back(c.topic + "/" + std::string(to_string(c.quantity)));
  }
  for (const auto& c : signal.dropped) dropped.push_back({{"topic", c.topic}, {"quantity", to_string(c.quantity)}});
  detail::write_json(dir / "signal.json", {{"first_month", month_label(signal.first_month)}, {"months", signal.rows},
                                           {"channels", channels}, {"dropped", dropped}, {"warnings", signal.warnings},
                                           {"smoothed", cfg.temporal.smooth_before_detection}});
  detail::Csv sig(header);
  for (std::size_t t = 0; t < signal.rows; ++t) {
    std::vector<std::string> row{month_label(signal.first_month + static_cast<std::int64_t>(t))};
    for (std::size_t d = 0; d < signal.cols(); ++d) row.push_back(detail::num(signal.at(t, d)));
    sig.add(row);
  }
  sig.write(dir / "signal.csv");
  for (const auto& w : signal.warnings) log << "warning: " << w << "\n";

  Segmentation seg;
  try {
    seg = detect_changepoints(signal, cfg.temporal.k, cfg.temporal.min_size, cfg.temporal.gamma);
  } catch (const InvalidArgument& e) {
    outcome.failures.push_back(std::string("temporal change points: ") + e.what());
    fs::remove(layout.partition());
    fs::remove(dir / "changepoints.json");
    log << "analyze temporal: change-point detection failed\n";
    return outcome;
  }
  detail::write_json(dir / "changepoints.json", to_json(seg, signal.first_month));

  const auto offset = static_cast<std::size_t>(signal.first_month - corpus.first_month());
  std::vector<std::size_t> cps;
  for (const auto cp : seg.change_points) cps.push_back(cp + offset);
  const auto parts = partition_corpus(corpus, cps);
  json segments = json::array();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& part = parts[i];
    std::size_t scored = 0, ah = 0;
    std::map<std::string, std::vector<std::size_t>> by_topic;
    for (const auto c : part.comments) {
      scored += ac.scored(c);
      ah += ac.is_adhominem(c);
      by_topic[corpus.comment(c).topic].push_back(c);
    }
    json per_topic = json::object();
    for (const auto& topic : topics) {
      const auto& idx = by_topic[topic];
      const auto net = build_reply_networks(corpus, idx);
      std::size_t t_scored = 0, t_ah = 0;
      for (const auto c : idx) {
        t_scored += ac.scored(c);
        t_ah += ac.is_adhominem(c);
      }
      per_topic[topic] = {{"comments", idx.size()},
                          {"ah_fraction", t_scored ? json(static_cast<double>(t_ah) / static_cast<double>(t_scored)) : json(nullptr)},
                          {"support_reciprocity", optional_json(reciprocity_or_null(net.support))},
                          {"dispute_reciprocity", optional_json(reciprocity_or_null(net.dispute))}};
    }
    const auto first = corpus.first_month() + static_cast<std::int64_t>(part.first);
    const auto last = corpus.first_month() + static_cast<std::int64_t>(part.last) - 1;
    segments.push_back({{"name", detail::segment_name(i)},
                        {"first_month", month_label(first)},
                        {"last_month", month_label(last)},
                        {"comments", part.comments.size()},
                        {"scored_comments", scored},
                        {"ah_fraction", scored ? json(static_cast<double>(ah) / static_cast<double>(scored)) : json(nullptr)},
                        {"topics", per_topic}});
  }
  detail::write_json(layout.partition(), {{"change_points", cps}, {"months", corpus.month_count()},
                                          {"segments", segments}});
  log << "analyze temporal: " << topics.size() << " topics, change points";
  for (const auto cp : cps) log << " " << month_label(corpus.first_month() + static_cast<std::int64_t>(cp));
  log << "\n";
  return outcome;
}

inline Outcome analyze_wordshift(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto corpus = detail::load_corpus(cfg, layout);
  detail::require(layout.partition(), "analyze temporal");
  const auto part_json = json::parse(fallacy::detail::read_file(layout.partition()));
  const auto cps = part_json.at("change_points").get<std::vector<std::size_t>>();
  if (part_json.at("months").get<std::size_t>() != corpus.month_count()) {
    throw DataError(layout.partition().string() + " does not match the ingested corpus: re-run `fallacy-forensics analyze temporal`");
  }
  const auto parts = partition_corpus(corpus, cps);
  const auto* stop = cfg.wordshift.stop_words ? &default_stop_words() : nullptr;
  Outcome outcome;
  std::vector<std::optional<WordDistribution>> dists;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      dists.push_back(word_distribution(corpus, parts[i].comments, stop));
    } catch (const InvalidArgument& e) {
      dists.push_back(std::nullopt);
      outcome.failures.push_back("wordshift " + detail::segment_name(i) + ": " + e.what());
    }
  }
  json pairs = json::array();
  for (std::size_t a = 0; a < parts.size(); ++a) {
    for (std::size_t b = a + 1; b < parts.size(); ++b) {
      if (!dists[a] || !dists[b]) continue;
      const auto& p = *dists[a];
      const auto& q = *dists[b];
      const double pi1 = cfg.wordshift.proportional ? proportional_pi(p, q) : cfg.wordshift.pi1;
      const auto name = detail::segment_name(a) + "_" + detail::segment_name(b);
      const auto entries = word_shift(p, q, pi1, cfg.wordshift.top_n);
      detail::Csv csv({"rank", "word", "contribution", "side", "p_first", "p_second"});
      for (std::size_t r = 0; r < entries.size(); ++r) {
        const auto& e = entries[r];
        csv.add({detail::num(r + 1), e.word, detail::num(e.contribution),
                 std::string(to_string(e.side)), detail::num(e.p_first), detail::num(e.p_second)});
      }
      csv.write(layout.wordshift_dir() / (name + ".csv"));
      pairs.push_back({{"first", detail::segment_name(a)}, {"second", detail::segment_name(b)}, {"pi1", pi1},
                       {"jsd_bits", jsd(p, q, pi1)}, {"tokens_first", p.total}, {"tokens_second", q.total},
                       {"vocabulary_first", p.vocabulary_size()}, {"vocabulary_second", q.vocabulary_size()}});
    }
  }
  detail::write_json(layout.wordshift_dir() / "summary.json",
                     {{"stop_words", cfg.wordshift.stop_words}, {"top_n", cfg.wordshift.top_n}, {"pairs", pairs}});
  log << "analyze wordshift: " << pairs.size() << " segment pairs\n";
  return outcome;
}

inline Outcome analyze_users(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  const auto corpus = detail::load_corpus(cfg, layout);
  const auto ac = detail::load_annotated(corpus, layout);
  if (!corpus.has_profiles()) {
    throw InvalidArgument("corpus has no author profiles: set corpus.profiles and re-run `fallacy-forensics ingest`");
  }
  std::map<AuthorId, bool> poster_has_ah;
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) {
    if (!ac.scored(i)) continue;
    auto& flag = poster_has_ah[corpus.comment(i).author];
    flag = flag || ac.is_adhominem(i);
  }
  struct Characteristic {
    const char* name;
    double (*get)(const AuthorProfile&);
  };
  static constexpr Characteristic characteristics[] = {
      {"posts", [](const AuthorProfile& p) { return static_cast<double>(p.posts); }},
      {"reward_points", [](const AuthorProfile& p) { return static_cast<double>(p.reward_points); }},
      {"efficiency", [](const AuthorProfile& p) { return p.efficiency; }},
      {"allies", [](const AuthorProfile& p) { return static_cast<double>(p.allies); }},
      {"enemies", [](const AuthorProfile& p) { return static_cast<double>(p.enemies); }},
      {"hostiles", [](const AuthorProfile& p) { return static_cast<double>(p.hostiles); }},
  };
  std::vector<const AuthorProfile*> c1, c2;
  std::size_t without_profile = poster_has_ah.size();
  for (const auto& p : corpus.profiles()) {
    const auto it = poster_has_ah.find(p.author);
    if (it == poster_has_ah.end()) continue;
    --without_profile;
    (it->second ? c1 : c2).push_back(&p);
  }
  Outcome outcome;
  json rows = json::array();
  detail::Csv csv({"characteristic", "c1_mean", "c1_std", "c2_mean", "c2_std", "u", "p_two_sided", "method"});
  for (const auto& ch : characteristics) {
    std::vector<double> a, b;
    for (const auto* p : c1) a.push_back(ch.get(*p));
    for (const auto* p : c2) b.push_back(ch.get(*p));
    if (a.size() < 2 || b.size() < 2) {
      outcome.failures.push_back(std::string("users ") + ch.name + ": each class needs at least two users (C1=" +
                                 std::to_string(a.size()) + ", C2=" + std::to_string(b.size()) + ")");
      continue;
    }
    const auto r = stats::mann_whitney_u(a, b);
    const double m1 = stats::mean(a), s1 = stats::sample_std(a), m2 = stats::mean(b), s2 = stats::sample_std(b);
    rows.push_back({{"characteristic", ch.name}, {"c1", {{"mean", m1}, {"std", s1}}}, {"c2", {{"mean", m2}, {"std", s2}}},
                    {"mwu", stats::to_json(r)}});
    csv.add({ch.name, detail::num(m1), detail::num(s1), detail::num(m2), detail::num(s2), detail::num(r.u),
             detail::num(r.p_two_sided), std::string(stats::to_string(r.method))});
  }
  detail::write_json(layout.users_dir() / "comparison.json",
                     {{"c1_users", c1.size()}, {"c2_users", c2.size()}, {"posters_without_profile", without_profile},
                      {"characteristics", rows}});
  csv.write(layout.users_dir() / "comparison.csv");
  log << "analyze users: C1 " << c1.size() << " users, C2 " << c2.size() << " users\n";
  return outcome;
}

/// Files of the bundle, relative to its root, excluding the manifest itself.
inline std::vector<std::string> bundle_files(const Layout& layout) {
  std::vector<std::string> files;
  if (!fs::exists(layout.out)) return files;
  for (const auto& e : fs::recursive_directory_iterator(layout.out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), layout.out).generic_string();
    if (rel == "manifest.json" || e.path().extension() == ".tmp") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline Outcome report(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  fallacy::detail::write_file_atomic(layout.config_resolved(), cfg.resolved.dump(2) + "\n");
  json files = json::object();
  for (const auto& rel : bundle_files(layout)) files[rel] = fallacy::detail::sha256_hex(fallacy::detail::read_file(layout.out / rel));
  detail::write_json(layout.manifest(), {{"files", files}, {"algorithm", "sha256"}});
  log << "report: " << files.size() << " files in manifest\n";
  return {};
}

/// Every step in dependency order. Steps whose optional inputs are not configured
/// (labeled data, profiles) are skipped.
inline Outcome run_all(const PipelineConfig& cfg, const Layout& layout, std::ostream& log) {
  Outcome o;
  o.merge(ingest(cfg, layout, log));
  if (cfg.labeled) {
    o.merge(train(cfg, layout, log));
    o.merge(evaluate(cfg, layout, log));
    o.merge(sweep(cfg, layout, log));
  }
  o.merge(score(cfg, layout, log));
  o.merge(explain(cfg, layout, log));
  o.merge(analyze_networks(cfg, layout, log));
  const auto temporal = analyze_temporal(cfg, layout, log);
  o.merge(temporal);
  if (fs::exists(layout.partition())) o.merge(analyze_wordshift(cfg, layout, log));
  if (cfg.corpus.profiles) o.merge(analyze_users(cfg, layout, log));
  o.merge(report(cfg, layout, log));
  return o;
}

}  // namespace fallacy::pipeline
