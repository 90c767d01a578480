#pragma once

// Statistical toolkit: Mann-Whitney U, Fleiss' kappa, binary classification
// metrics and uncertainty bands for ad hominem fractions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fallacy/error.hpp"
#include "fallacy/label.hpp"

namespace fallacy::stats {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Mann-Whitney U

enum class MwuMethod { exact, normal_approx };
enum class MwuMode { auto_select, exact, normal_approx };

inline std::string_view to_string(MwuMethod m) { return m == MwuMethod::exact ? "exact" : "normal_approx"; }

struct MwuResult {
  double u = 0.0;  // pairs with a > b, ties counting one half
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double p_two_sided = 1.0;
  MwuMethod method = MwuMethod::exact;
};

/// U = sum over pairs of [a_i > b_j] + 1/2 [a_i == b_j], computed by sorting.
inline double mann_whitney_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sb.begin(), sb.end());
  double u = 0.0;
  for (const double x : a) {
    const auto lo = std::lower_bound(sb.begin(), sb.end(), x);
    const auto hi = std::upper_bound(lo, sb.end(), x);
    u += static_cast<double>(lo - sb.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return u;
}

/// Number of arrangements giving each U value, for tie-free samples of sizes n1, n2.
/// counts[u] for u in [0, n1*n2]; the total is C(n1+n2, n1).
inline std::vector<std::uint64_t> mann_whitney_null_counts(std::size_t n1, std::size_t n2) {
  // f[i][j][u]: arrangements of i a's and j b's with statistic u. Placing the largest
  // element last: an `a` beats all j b's, a `b` beats nobody.
  const std::size_t umax = n1 * n2;
  std::vector<std::vector<std::uint64_t>> prev(n2 + 1), cur(n2 + 1);
  for (std::size_t j = 0; j <= n2; ++j) prev[j].assign(umax + 1, 0), prev[j][0] = 1;  // i = 0
  for (std::size_t i = 1; i <= n1; ++i) {
    for (std::size_t j = 0; j <= n2; ++j) {
      cur[j].assign(umax + 1, 0);
      for (std::size_t u = 0; u <= umax; ++u) {
        std::uint64_t v = 0;
        if (u >= j) v += prev[j][u - j];
        if (j > 0) v += cur[j - 1][u];
        cur[j][u] = v;
      }
    }
    std::swap(prev, cur);
  }
  return prev[n2];
}

namespace detail {

inline double clip_p(double p) {
  if (!(p > 0.0)) return std::numeric_limits<double>::min();
  return std::min(1.0, p);
}

inline bool has_any_ties(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  return std::adjacent_find(all.begin(), all.end()) != all.end();
}

}  // namespace detail

/// Two-sided exact p-value: 2 * min(P(U <= u), P(U >= u)), capped at 1.
inline double mann_whitney_exact_p(double u, std::size_t n1, std::size_t n2) {
  const auto counts = mann_whitney_null_counts(n1, n2);
  std::uint64_t total = 0, le = 0, ge = 0;
  for (std::size_t v = 0; v < counts.size(); ++v) {
    total += counts[v];
    if (static_cast<double>(v) <= u) le += counts[v];
    if (static_cast<double>(v) >= u) ge += counts[v];
  }
  const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  return detail::clip_p(p);
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity correction.
inline double mann_whitney_normal_p(double u, std::span<const double> a, std::span<const double> b) {
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const double mu = 0.5 * n1 * n2;
  double var = n1 * n2 / 12.0 * ((n + 1.0) - (n > 1.0 ? tie_sum / (n * (n - 1.0)) : 0.0));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return detail::clip_p(std::erfc(z / std::sqrt(2.0)));
}

/// Auto mode enumerates the exact null distribution when n1*n2 <= 400 and the pooled
/// sample has no ties; otherwise it falls back to the normal approximation.
inline MwuResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                MwuMode mode = MwuMode::auto_select) {
  if (a.empty() || b.empty()) throw InvalidArgument("mann_whitney_u: both samples must be non-empty");
  MwuResult r;
  r.n1 = a.size();
  r.n2 = b.size();
  r.u = mann_whitney_statistic(a, b);
  bool exact = false;
  switch (mode) {
    case MwuMode::exact:
      if (detail::has_any_ties(a, b)) throw InvalidArgument("mann_whitney_u: exact mode requires tie-free samples");
      if (r.n1 + r.n2 > 60) throw InvalidArgument("mann_whitney_u: exact mode limited to n1 + n2 <= 60");
      exact = true;
      break;
    case MwuMode::normal_approx: exact = false; break;
    case MwuMode::auto_select: exact = r.n1 * r.n2 <= 400 && !detail::has_any_ties(a, b); break;
  }
  r.method = exact ? MwuMethod::exact : MwuMethod::normal_approx;
  r.p_two_sided = exact ? mann_whitney_exact_p(r.u, r.n1, r.n2) : mann_whitney_normal_p(r.u, a, b);
  return r;
}

inline json to_json(const MwuResult& r) {
  return json{{"U", r.u}, {"n1", r.n1}, {"n2", r.n2}, {"p_two_sided", r.p_two_sided}, {"method", to_string(r.method)}};
}

// ---------------------------------------------------------------------------
// Fleiss' kappa

struct AgreementResult {
  double kappa = 0.0;
  double observed_agreement = 0.0;  // P-bar
  double expected_agreement = 0.0;  // P-bar_e
  std::size_t raters_per_item = 0;
  std::size_t items = 0;
  std::size_t categories = 0;
};

/// `ratings[i][j]` = number of raters assigning item i to category j.
inline AgreementResult fleiss_kappa(const std::vector<std::vector<std::int64_t>>& ratings) {
  if (ratings.size() < 2) throw InvalidArgument("fleiss_kappa: need at least two items");
  const std::size_t k = ratings.front().size();
  if (k < 1) throw InvalidArgument("fleiss_kappa: need at least one category");
  std::int64_t n = -1;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    if (ratings[i].size() != k) throw InvalidArgument("fleiss_kappa: ragged ratings matrix");
    std::int64_t row = 0;
    for (const auto v : ratings[i]) {
      if (v < 0) throw InvalidArgument("fleiss_kappa: negative rating count");
      row += v;
    }
    if (n < 0) n = row;
    if (row != n) {
      throw InvalidArgument("fleiss_kappa: unequal rater counts per item (item 0 has " + std::to_string(n) +
                            ", item " + std::to_string(i) + " has " + std::to_string(row) + ")");
    }
  }
  if (n < 2) throw InvalidArgument("fleiss_kappa: need at least two raters per item");

  const double items = static_cast<double>(ratings.size());
  const double raters = static_cast<double>(n);
  std::vector<double> column(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : ratings) {
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v = static_cast<double>(row[j]);
      column[j] += v;
      sq += v * v;
    }
    p_bar += (sq - raters) / (raters * (raters - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (const double c : column) {
    const double pj = c / (items * raters);
    p_e += pj * pj;
  }
  if (p_e >= 1.0) throw InvalidArgument("fleiss_kappa: degenerate marginals (expected agreement is 1)");

  AgreementResult r;
  r.observed_agreement = p_bar;
  r.expected_agreement = p_e;
  r.kappa = (p_bar - p_e) / (1.0 - p_e);
  r.raters_per_item = static_cast<std::size_t>(n);
  r.items = ratings.size();
  r.categories = k;
  return r;
}

// ---------------------------------------------------------------------------
// Binary classification metrics

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;        // true instances of the class
  bool zero_division = false;     // some ratio had a zero denominator and was set to 0
};

struct EvalMetrics {
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class{};  // indexed by Label (none = 0, adhominem = 1)
  double macro_f1 = 0.0;
  std::size_t folds = 0;                    // 0 when not from cross-validation
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true][predicted]
  std::size_t count = 0;

  const ClassMetrics& of(Label l) const { return per_class[static_cast<std::size_t>(l)]; }
};

inline EvalMetrics classification_metrics(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("classification_metrics: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
  }
  if (predicted.empty()) throw InvalidArgument("classification_metrics: empty label sequences");
  EvalMetrics m;
  m.count = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  m.accuracy = static_cast<double>(m.confusion[0][0] + m.confusion[1][1]) / static_cast<double>(m.count);
  for (std::size_t c = 0; c < 2; ++c) {
    auto& cm = m.per_class[c];
    const std::size_t tp = m.confusion[c][c];
    const std::size_t predicted_c = m.confusion[0][c] + m.confusion[1][c];
    const std::size_t actual_c = m.confusion[c][0] + m.confusion[c][1];
    cm.support = actual_c;
    if (predicted_c > 0) {
      cm.precision = static_cast<double>(tp) / static_cast<double>(predicted_c);
    } else {
      cm.zero_division = true;
    }
    if (actual_c > 0) {
      cm.recall = static_cast<double>(tp) / static_cast<double>(actual_c);
    } else {
      cm.zero_division = true;
    }
    if (cm.precision + cm.recall > 0.0) {
      cm.f1 = 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    } else {
      cm.zero_division = true;
    }
  }
  m.macro_f1 = 0.5 * (m.per_class[0].f1 + m.per_class[1].f1);
  return m;
}

inline json to_json(const EvalMetrics& m) {
  json classes = json::object();
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& cm = m.per_class[c];
    classes[std::string(to_string(static_cast<Label>(c)))] = {{"precision", cm.precision}, {"recall", cm.recall},
                                                              {"f1", cm.f1},           {"support", cm.support},
                                                              {"zero_division", cm.zero_division}};
  }
  return json{{"accuracy", m.accuracy},
              {"macro_f1", m.macro_f1},
              {"folds", m.folds},
              {"count", m.count},
              {"per_class", classes},
              {"confusion", {{"true_none", {m.confusion[0][0], m.confusion[0][1]}},
                             {"true_adhominem", {m.confusion[1][0], m.confusion[1][1]}}}}};
}

// ---------------------------------------------------------------------------
// Fraction uncertainty

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FractionBand {
  double point = 0.0;
  Interval wilson95;
  std::optional<Interval> monthly_std_band;  // mean -/+ population std of monthly fractions
  double monthly_mean = 0.0;
  double monthly_std = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

inline Interval wilson_interval(std::int64_t successes, std::int64_t total, double z = kZ95) {
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Interval iv{std::clamp(centre - half, 0.0, 1.0), std::clamp(centre + half, 0.0, 1.0)};
  if (successes == 0) iv.lo = 0.0;
  if (successes == total) iv.hi = 1.0;
  iv.lo = std::min(iv.lo, p);
  iv.hi = std::max(iv.hi, p);
  return iv;
}

/// Pooled point estimate with a Wilson 95% interval, plus the across-month mean +/- std
/// band. Both are reported because the two constructions differ by orders of magnitude
/// on large corpora.
inline FractionBand fraction_band(std::int64_t ah, std::int64_t total, std::span<const double> monthly_fractions) {
  if (total < 1) throw InvalidArgument("fraction_band: total must be >= 1");
  if (ah < 0) throw InvalidArgument("fraction_band: negative count");
  if (ah > total) throw InvalidArgument("fraction_band: ah exceeds total");
  FractionBand b;
  b.point = static_cast<double>(ah) / static_cast<double>(total);
  b.wilson95 = wilson_interval(ah, total);
  if (!monthly_fractions.empty()) {
    const double k = static_cast<double>(monthly_fractions.size());
    const double mean = std::accumulate(monthly_fractions.begin(), monthly_fractions.end(), 0.0) / k;
    double ss = 0.0;
    for (const double f : monthly_fractions) ss += (f - mean) * (f - mean);
    const double sd = std::sqrt(ss / k);
    b.monthly_mean = mean;
    b.monthly_std = sd;
    b.monthly_std_band = Interval{mean - sd, mean + sd};
  }
  return b;
}

inline json to_json(const FractionBand& b) {
  json j{{"point", b.point}, {"wilson95", {{"lo", b.wilson95.lo}, {"hi", b.wilson95.hi}}}};
  if (b.monthly_std_band) {
    j["monthly_std_band"] = {{"mean", b.monthly_mean}, {"std", b.monthly_std},
                             {"lo", b.monthly_std_band->lo}, {"hi", b.monthly_std_band->hi}};
  } else {
    j["monthly_std_band"] = nullptr;
  }
  return j;
}

// Small descriptive helpers shared by report code.
inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample standard deviation (n - 1); 0 for fewer than two values.
inline double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (const double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace fallacy::stats
