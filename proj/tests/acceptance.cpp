// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/core.h>

#include "fallacy/classifier.hpp"
#include "fallacy/evaluation.hpp"
#include "fallacy/explain.hpp"
#include "fallacy/networks.hpp"
#include "fallacy/stats.hpp"
#include "fallacy/temporal.hpp"
#include "fallacy/wordshift.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fallacy;
using namespace testing_support;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(std::string_view name, bool ok, const std::string& detail) {
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> normal_series(std::mt19937_64& gen, std::size_t n, double mu, double sigma) {
  std::normal_distribution<double> d(mu, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

void changepoint_exactness() {
  const auto t0 = Clock::now();
  int mismatches = 0, cases = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 gen(seed);
    const std::size_t t = 4 + seed % 9, dim = 1 + seed % 2;
    for (std::size_t k = 1; k <= 2; ++k)
      for (std::size_t min_size = 1; min_size <= 2; ++min_size) {
        if (t < (k + 1) * min_size) continue;
        const auto x = normal_series(gen, t * dim, 0.0, 1.0);
        const KernelCost cost(x, dim);
        const auto seg = detect_changepoints(cost, k, min_size);
        const auto ref = oracle::exhaustive_segmentation(cost, k, min_size);
        mismatches += seg.optimal_cost != ref.cost || seg.change_points != ref.boundaries;
        ++cases;
      }
  }
  const double secs = seconds_since(t0);
  verdict("changepoint-exactness", mismatches == 0 && secs < 5.0,
          fmt::format("{} cases, {} mismatches, {:.2f} s", cases, mismatches, secs));
}

int planted_hits(double shift, double sigma, int trials, double* worst_seconds) {
  int hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 gen(1000 + static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> x(120);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i >= 40) * shift + (i >= 80) * shift + noise(gen);
    const auto t0 = Clock::now();
    const auto seg = detect_changepoints(KernelCost(x, 1), 2, 6);
    if (worst_seconds) *worst_seconds = std::max(*worst_seconds, seconds_since(t0));
    hits += std::abs(static_cast<long>(seg.change_points[0]) - 40) <= 1 &&
            std::abs(static_cast<long>(seg.change_points[1]) - 80) <= 1;
  }
  return hits;
}

void planted_recovery() {
  double worst = 0.0;
  const int hits = planted_hits(3.0, 0.1, 100, &worst);
  verdict("planted-regimes", hits >= 99 && worst < 1.0,
          fmt::format("{}/100 within +-1 at shift 3, sigma 0.1; slowest run {:.4f} s", hits, worst));
  fmt::print("INFO planted-regimes at shift 3, sigma 1: {}/100\n", planted_hits(3.0, 1.0, 100, nullptr));
}

WordDistribution random_distribution(std::mt19937_64& gen) {
  std::map<std::string, std::uint64_t> counts;
  const auto vocab = std::uniform_int_distribution<int>(1, 40)(gen);
  std::uniform_int_distribution<int> c(0, 9);
  for (int i = 0; i < vocab; ++i) counts["w" + std::to_string(i * 3 % 50)] += static_cast<std::uint64_t>(c(gen));
  counts["w0"] += 1;
  return word_distribution_from_counts(counts);
}

void jsd_properties() {
  std::mt19937_64 gen(11);
  double worst_sym = 0, worst_sum = 0, worst_identical = 0;
  int out_of_range = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_distribution(gen), q = random_distribution(gen);
    const double pi1 = trial % 2 ? 0.5 : std::uniform_real_distribution<double>(0.05, 0.95)(gen);
    const double j = jsd(p, q, pi1);
    worst_sym = std::max(worst_sym, std::abs(jsd(p, q) - jsd(q, p)));
    out_of_range += !(j >= 0.0 && j <= 1.0);
    double sum = 0.0;
    for (const auto& e : word_shift(p, q, pi1, kAllWords)) sum += e.contribution;
    worst_sum = std::max(worst_sum, std::abs(sum - j));
    worst_identical = std::max(worst_identical, std::abs(jsd(p, p, pi1)));
  }
  verdict("jsd", worst_sym <= 1e-12 && out_of_range == 0 && worst_sum <= 1e-9 && worst_identical == 0.0,
          fmt::format("asymmetry {:.1e}, out of range {}, contribution error {:.1e}, identical {:.1e}", worst_sym,
                      out_of_range, worst_sum, worst_identical));
}

void reciprocity_checks() {
  std::mt19937 gen(5);
  int graphs = 0, mismatches = 0;
  while (graphs < 100) {
    const int n = std::uniform_int_distribution<int>(2, 8)(gen);
    std::bernoulli_distribution edge(std::uniform_real_distribution<double>(0.1, 0.9)(gen));
    ReplyGraph g;
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v && edge(gen)) {
          g.add_edge(std::to_string(u), std::to_string(v), 1);
          edges.emplace_back(u, v);
        }
    if (edges.empty()) continue;
    mismatches += reciprocity(g) != oracle::reciprocity(edges);
    ++graphs;
  }
  // Nesting of S(lambda, rho) on a random forum.
  std::vector<CommentRecord> comments;
  std::uniform_int_distribution<int> who(0, 24), coin(0, 2);
  for (int i = 0; i < 600; ++i) {
    std::optional<std::string> parent;
    if (i > 0 && coin(gen)) parent = "c" + std::to_string(std::uniform_int_distribution<int>(0, i - 1)(gen));
    comments.push_back(comment("c" + std::to_string(i), "p", parent, "u" + std::to_string(who(gen)), "x"));
  }
  const auto corpus = Corpus::build({post("p", "x")}, comments);
  const auto counts = structural_counts(corpus, "x");
  int violations = 0;
  for (std::size_t l = 0; l < 30; ++l)
    for (std::size_t r = 0; r < 30; ++r) {
      const auto s = activity_set(counts, l, r).members;
      const auto up_l = activity_set(counts, l + 1, r).members, up_r = activity_set(counts, l, r + 1).members;
      violations += !std::includes(s.begin(), s.end(), up_l.begin(), up_l.end());
      violations += !std::includes(s.begin(), s.end(), up_r.begin(), up_r.end());
    }
  verdict("reciprocity", mismatches == 0 && violations == 0,
          fmt::format("{} graphs, {} mismatches; {} nesting violations", graphs, mismatches, violations));
}

void classifier_checks() {
  const auto t0 = Clock::now();
  const auto examples = read_labeled_dataset(fs::path(FALLACY_DATA_DIR) / "synthetic" / "labeled.jsonl");
  const double f1 = kfold_evaluate(examples, 10, 42).macro_f1;

  auto shuffled = examples;
  std::vector<Label> labels;
  for (const auto& e : shuffled) labels.push_back(e.label);
  std::mt19937_64 gen(42);
  std::shuffle(labels.begin(), labels.end(), gen);
  for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
  const double null_f1 = kfold_evaluate(shuffled, 10, 42).macro_f1;

  const std::vector<double> fractions{0.05, 1.0};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto rows = label_fraction_sweep(examples, fractions, 10, seeds);
  const bool sweep_ok = rows[0].mean_macro_f1 && rows[1].mean_macro_f1 && *rows[1].mean_macro_f1 >= *rows[0].mean_macro_f1;
  const double secs = seconds_since(t0);
  verdict("classifier",
          examples.size() == 2000 && f1 >= 0.95 && null_f1 >= 0.40 && null_f1 <= 0.60 && sweep_ok && secs < 60.0,
          fmt::format("{} docs, macro-F1 {:.4f}, shuffled {:.4f}, sweep {:.4f} -> {:.4f}, {:.1f} s", examples.size(), f1,
                      null_f1, rows[0].mean_macro_f1.value_or(NAN), rows[1].mean_macro_f1.value_or(NAN), secs));
}

void trigram_checks() {
  std::mt19937_64 gen(17);
  int bad = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto len = std::uniform_int_distribution<std::size_t>(1, 25)(gen);
    const auto n = std::uniform_int_distribution<std::size_t>(1, 5)(gen);
    std::uniform_int_distribution<int> coarse(-3, 3);
    std::vector<TokenWeight> tokens(len);
    std::vector<double> scores(len);
    std::vector<bool> excluded(len);
    for (std::size_t i = 0; i < len; ++i) {
      scores[i] = trial % 2 ? coarse(gen) : std::normal_distribution<double>()(gen);
      tokens[i] = {"t" + std::to_string(i), scores[i]};
      excluded[i] = std::uniform_int_distribution<int>(0, 9)(gen) == 0;
    }
    const auto spans = select_trigger_trigrams(tokens, n, [&](std::size_t i, std::string_view) { return excluded[i]; });
    std::vector<std::size_t> centers;
    for (const auto& s : spans) centers.push_back(s.center);
    bool ok = spans.size() <= n && centers == oracle::trigram_centers(scores, n, excluded);
    for (std::size_t a = 0; a < spans.size(); ++a) {
      const auto& s = spans[a];
      ok = ok && !excluded[s.center] && s.first == (s.center ? s.center - 1 : 0) && s.last == std::min(s.center + 1, len - 1);
      for (std::size_t b = a + 1; b < spans.size(); ++b) ok = ok && !s.overlaps(spans[b]) && s.score >= spans[b].score;
    }
    bad += !ok;
  }
  verdict("trigram-selection", bad == 0, fmt::format("10000 vectors, {} failures", bad));
}

void mann_whitney_checks() {
  std::mt19937_64 gen(23);
  double worst_exact = 0.0;
  int cases = 0;
  for (std::size_t n1 = 1; n1 <= 8; ++n1)
    for (std::size_t n2 = 1; n2 <= 8; ++n2)
      for (int rep = 0; rep < 3; ++rep) {
        const auto a = normal_series(gen, n1, 0.4 * rep, 1.0), b = normal_series(gen, n2, 0.0, 1.0);
        const auto r = stats::mann_whitney_u(a, b);
        const double diff = std::abs(r.p_two_sided - oracle::mwu_enumeration_p(a, b));
        worst_exact = r.method == stats::MwuMethod::exact ? std::max(worst_exact, diff) : 1.0;
        ++cases;
      }
  double worst_normal = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const auto a = normal_series(gen, 30, 0.25 * rep, 1.0), b = normal_series(gen, 30, 0.0, 1.0);
    const double p = stats::mann_whitney_u(a, b, stats::MwuMode::normal_approx).p_two_sided;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double mu = 450.0, u = stats::mann_whitney_statistic(a, b);
    std::size_t le = 0, ge = 0;
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) {
      std::shuffle(pooled.begin(), pooled.end(), gen);
      const double up = stats::mann_whitney_statistic(std::span(pooled).first(30), std::span(pooled).last(30));
      le += up - mu <= -std::abs(u - mu);
      ge += up - mu >= std::abs(u - mu);
    }
    const double perm = std::min(1.0, static_cast<double>(le + ge) / static_cast<double>(draws));
    worst_normal = std::max(worst_normal, std::abs(p - perm));
  }
  verdict("mann-whitney", worst_exact <= 1e-12 && worst_normal <= 0.02,
          fmt::format("{} exact cases, max error {:.1e}; normal vs permutation max gap {:.4f}", cases, worst_exact,
                      worst_normal));
}

void fleiss_checks() {
  std::mt19937_64 gen(31);
  std::vector<std::vector<std::int64_t>> unanimous(50, std::vector<std::int64_t>(3, 0));
  for (std::size_t i = 0; i < unanimous.size(); ++i) unanimous[i][i % 3] = 4;
  const double k1 = stats::fleiss_kappa(unanimous).kappa;
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 g(static_cast<std::uint64_t>(seed));
    std::uniform_int_distribution<int> pick(0, 1);
    std::vector<std::vector<std::int64_t>> r(200, std::vector<std::int64_t>(2, 0));
    for (auto& row : r)
      for (int rater = 0; rater < 3; ++rater) ++row[static_cast<std::size_t>(pick(g))];
    worst = std::max(worst, std::abs(stats::fleiss_kappa(r).kappa));
  }
  verdict("fleiss-kappa", k1 == 1.0 && worst <= 0.15, fmt::format("unanimous {}, null max |kappa| {:.4f}", k1, worst));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  TempDir a, b;
  const std::string config = std::string(FALLACY_DATA_DIR) + "/synthetic/config.json";
  const auto ra = run_cli({"run", "--config", config, "--out", a.path().string()});
  const auto rb = run_cli({"run", "--config", config, "--out", b.path().string()});
  const auto ma = slurp(a / "manifest.json"), mb = slurp(b / "manifest.json");
  verdict("determinism", ra.exit_code == 0 && rb.exit_code == 0 && !ma.empty() && ma == mb,
          fmt::format("exit codes {} {}, manifests {} ({} bytes)", ra.exit_code, rb.exit_code,
                      ma == mb ? "identical" : "differ", ma.size()));
}

void activity_group_checks() {
  std::mt19937_64 gen(41);
  const std::vector<std::size_t> boundaries{10, 50, 100, 2000};
  double worst_users = 0.0, worst_comments = 0.0;
  std::set<std::size_t> groups_hit;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CommentRecord> comments;
    std::set<std::string> ah;
    std::lognormal_distribution<double> size(3.0, 2.0);
    for (int u = 0; u < 40; ++u) {
      const auto n = std::min<std::size_t>(1 + static_cast<std::size_t>(size(gen)), 3000);
      for (std::size_t k = 0; k < n; ++k) {
        const std::string id = "c" + std::to_string(comments.size());
        comments.push_back(comment(id, "p", std::nullopt, "u" + std::to_string(u), "x"));
        if (std::uniform_int_distribution<int>(0, 9)(gen) == 0) ah.insert(id);
      }
    }
    const auto corpus = Corpus::build({post("p", "x")}, comments);
    const auto rows = activity_groups(annotate(corpus, ah), "x", boundaries);
    double users = 0, pct = 0;
    for (std::size_t g = 0; g < rows.size(); ++g) {
      users += rows[g].pct_users;
      pct += rows[g].pct_comments;
      if (rows[g].users) groups_hit.insert(g);
    }
    worst_users = std::max(worst_users, std::abs(users - 100.0));
    worst_comments = std::max(worst_comments, std::abs(pct - 100.0));
  }
  const auto ranges = group_ranges(boundaries);
  const bool buckets_ok = ranges.size() == 5 && ranges[0] == std::pair<std::size_t, std::optional<std::size_t>>{0, 10} &&
                          ranges[1].first == 11 && ranges[2].first == 51 && ranges[3].first == 101 &&
                          ranges[3].second == 1999u && ranges[4].first == 2000 && !ranges[4].second;
  verdict("activity-groups", worst_users <= 0.1 && worst_comments <= 0.1 && buckets_ok,
          fmt::format("max deviation users {:.1e}, comments {:.1e}; {} of 5 groups populated", worst_users,
                      worst_comments, groups_hit.size()));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)()>> checks{
      {"changepoint-exactness", changepoint_exactness}, {"planted-regimes", planted_recovery},
      {"jsd", jsd_properties},                          {"reciprocity", reciprocity_checks},
      {"classifier", classifier_checks},                {"trigram-selection", trigram_checks},
      {"mann-whitney", mann_whitney_checks},            {"fleiss-kappa", fleiss_checks},
      {"determinism", determinism},                     {"activity-groups", activity_group_checks}};
  for (const auto& [name, fn] : checks) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(name, false, std::string("threw: ") + e.what());
    }
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
