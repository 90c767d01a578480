#pragma once

// Month-wise activity series and kernel change-point detection.
//
// Change points are found by exact dynamic programming over an RBF-kernel segment cost
// c(a, b) = sum_t k(x_t, x_t) - (1 / (b - a)) sum_{s,t} k(x_s, x_t), evaluated in O(1)
// from 2-D prefix sums of the Gram matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fallacy/corpus.hpp"
#include "fallacy/detail/time.hpp"
#include "fallacy/error.hpp"
#include "fallacy/scorer.hpp"

namespace fallacy {

struct MonthPoint {
  std::size_t total_comments = 0;
  std::size_t scored_comments = 0;
  std::size_t ah_comments = 0;
  double ah_fraction = 0.0;  // ah_comments / scored_comments
  std::size_t active_users = 0;
  std::size_t ah_users = 0;  // users whose within-month AH share is >= 0.5
  double ah_user_fraction = 0.0;

  bool active() const { return total_comments > 0; }
  bool operator==(const MonthPoint&) const = default;
};

struct MonthlySeries {
  std::string topic;
  std::int64_t first_month = 0;  // absolute month (year * 12 + month - 1)
  std::vector<MonthPoint> months;

  std::int64_t end_month() const { return first_month + static_cast<std::int64_t>(months.size()); }
};

/// Per-month counts for one topic over the corpus's full month range; months without
/// comments are present with zero counts. Unscored comments count towards activity only.
inline MonthlySeries monthly_series(const AnnotatedCorpus& annotated, std::string_view topic) {
  const auto& corpus = annotated.corpus();
  corpus.require_topic(topic);
  MonthlySeries s;
  s.topic = std::string(topic);
  s.first_month = corpus.first_month();
  s.months.resize(corpus.month_count());
  struct UserMonth {
    std::size_t scored = 0;
    std::size_t ah = 0;
  };
  std::vector<std::map<AuthorId, UserMonth>> users(s.months.size());
  for (const auto i : corpus.comments_in_topic(topic)) {
    const auto m = corpus.month_of(i);
    auto& pt = s.months[m];
    auto& um = users[m][corpus.comment(i).author];
    ++pt.total_comments;
    if (annotated.scored(i)) {
      ++pt.scored_comments;
      ++um.scored;
      if (annotated.is_adhominem(i)) {
        ++pt.ah_comments;
        ++um.ah;
      }
    }
  }
  for (std::size_t m = 0; m < s.months.size(); ++m) {
    auto& pt = s.months[m];
    pt.active_users = users[m].size();
    for (const auto& [_, um] : users[m]) pt.ah_users += um.scored > 0 && 2 * um.ah >= um.scored;
    if (pt.scored_comments) pt.ah_fraction = static_cast<double>(pt.ah_comments) / static_cast<double>(pt.scored_comments);
    if (pt.active_users) pt.ah_user_fraction = static_cast<double>(pt.ah_users) / static_cast<double>(pt.active_users);
  }
  return s;
}

/// Trailing mean over the last `window` values; the first entries average the shorter
/// prefix that is available.
inline std::vector<double> moving_average(std::span<const double> values, std::size_t window = 12) {
  if (window < 1) throw InvalidArgument("moving_average: window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(i + 1 - lo);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Signal matrix

enum class Quantity { comments, ah_comments, ah_fraction, active_users, ah_users, ah_user_fraction };

inline std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::comments: return "comments";
    case Quantity::ah_comments: return "ah_comments";
    case Quantity::ah_fraction: return "ah_fraction";
    case Quantity::active_users: return "active_users";
    case Quantity::ah_users: return "ah_users";
    case Quantity::ah_user_fraction: return "ah_user_fraction";
  }
  return "?";
}

inline std::optional<Quantity> parse_quantity(std::string_view s) {
  for (auto q : {Quantity::comments, Quantity::ah_comments, Quantity::ah_fraction, Quantity::active_users,
                 Quantity::ah_users, Quantity::ah_user_fraction}) {
    if (to_string(q) == s) return q;
  }
  return std::nullopt;
}

inline double quantity_value(const MonthPoint& p, Quantity q) {
  switch (q) {
    case Quantity::comments: return static_cast<double>(p.total_comments);
    case Quantity::ah_comments: return static_cast<double>(p.ah_comments);
    case Quantity::ah_fraction: return p.ah_fraction;
    case Quantity::active_users: return static_cast<double>(p.active_users);
    case Quantity::ah_users: return static_cast<double>(p.ah_users);
    case Quantity::ah_user_fraction: return p.ah_user_fraction;
  }
  return 0.0;
}

struct Channel {
  std::string topic;
  Quantity quantity = Quantity::comments;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation of the raw channel
};

struct SignalMatrix {
  std::int64_t first_month = 0;
  std::size_t rows = 0;                 // months
  std::vector<Channel> channels;        // kept, standardized channels
  std::vector<Channel> dropped;         // constant channels
  std::vector<std::string> warnings;
  std::vector<double> values;           // row-major rows x channels.size()

  std::size_t cols() const { return channels.size(); }
  double at(std::size_t t, std::size_t d) const { return values[t * channels.size() + d]; }
  std::span<const double> row(std::size_t t) const { return {values.data() + t * cols(), cols()}; }
};

/// Stacks the selected quantities of every series as channels over the months the
/// series have in common, z-standardizing each channel. Constant channels are dropped.
/// A nonzero `smooth_window` applies the trailing moving average before standardizing.
inline SignalMatrix build_signal_matrix(std::span<const MonthlySeries> series, std::span<const Quantity> quantities,
                                        std::size_t smooth_window = 0) {
  if (series.empty()) throw InvalidArgument("build_signal_matrix: no series given");
  if (quantities.empty()) throw InvalidArgument("build_signal_matrix: no quantities selected");
  std::int64_t lo = std::numeric_limits<std::int64_t>::min(), hi = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : series) {
    lo = std::max(lo, s.first_month);
    hi = std::min(hi, s.end_month());
  }
  SignalMatrix m;
  if (lo >= hi) {
    std::string ranges;
    for (const auto& s : series) {
      if (!ranges.empty()) ranges += ", ";
      ranges += s.topic + " " + (s.months.empty() ? std::string("(empty)")
                                                  : month_label(s.first_month) + ".." + month_label(s.end_month() - 1));
    }
    throw DataError("series month ranges do not intersect: " + ranges);
  }
  for (const auto& s : series) {
    if (s.first_month != lo || s.end_month() != hi) {
      m.warnings.push_back("series '" + s.topic + "' trimmed to common range " + month_label(lo) + ".." +
                           month_label(hi - 1));
    }
  }
  m.first_month = lo;
  m.rows = static_cast<std::size_t>(hi - lo);
  std::vector<std::vector<double>> cols;
  for (const auto& s : series) {
    const auto offset = static_cast<std::size_t>(lo - s.first_month);
    for (const auto q : quantities) {
      std::vector<double> col(m.rows);
      for (std::size_t t = 0; t < m.rows; ++t) col[t] = quantity_value(s.months[offset + t], q);
      if (smooth_window > 0) col = moving_average(col, smooth_window);
      double mean = 0.0;
      for (const double v : col) mean += v;
      mean /= static_cast<double>(m.rows);
      double var = 0.0;
      for (const double v : col) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(m.rows));
      Channel ch{s.topic, q, mean, sd};
      const bool constant = std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
      if (constant || !(sd > 0.0)) {
        m.warnings.push_back("constant channel " + s.topic + "/" + std::string(to_string(q)) + " dropped");
        m.dropped.push_back(ch);
        continue;
      }
      for (auto& v : col) v = (v - mean) / sd;
      m.channels.push_back(ch);
      cols.push_back(std::move(col));
    }
  }
  m.values.resize(m.rows * cols.size());
  for (std::size_t t = 0; t < m.rows; ++t) {
    for (std::size_t d = 0; d < cols.size(); ++d) m.values[t * cols.size() + d] = cols[d][t];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Change points

/// Gram-matrix prefix sums for the RBF segment cost.
class KernelCost {
 public:
  /// `points` is row-major T x dim. A missing gamma selects the median heuristic.
  KernelCost(std::span<const double> points, std::size_t dim, std::optional<double> gamma = std::nullopt) {
    if (dim == 0 ? !points.empty() : points.size() % dim != 0) {
      throw InvalidArgument("KernelCost: point buffer does not match the dimension");
    }
    t_ = dim == 0 ? 0 : points.size() / dim;
    if (gamma && !(std::isfinite(*gamma) && *gamma > 0.0)) throw InvalidArgument("kernel gamma must be positive and finite");
    std::vector<double> sq(t_ * t_, 0.0);
    for (std::size_t s = 0; s < t_; ++s) {
      for (std::size_t t = s + 1; t < t_; ++t) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double diff = points[s * dim + k] - points[t * dim + k];
          d2 += diff * diff;
        }
        sq[s * t_ + t] = sq[t * t_ + s] = d2;
      }
    }
    gamma_ = gamma ? *gamma : median_heuristic(sq, t_);
    const std::size_t n = t_ + 1;
    prefix_.assign(n * n, 0.0);
    diag_.assign(n, 0.0);
    for (std::size_t s = 0; s < t_; ++s) {
      double row = 0.0;
      for (std::size_t t = 0; t < t_; ++t) {
        row += std::exp(-gamma_ * sq[s * t_ + t]);
        prefix_[(s + 1) * n + (t + 1)] = prefix_[s * n + (t + 1)] + row;
      }
      diag_[s + 1] = diag_[s] + 1.0;  // k(x, x) = 1
    }
  }

  std::size_t size() const { return t_; }
  double gamma() const { return gamma_; }

  /// Cost of the segment [a, b); zero for single points, clamped at zero otherwise.
  double operator()(std::size_t a, std::size_t b) const {
    if (b <= a + 1) return 0.0;
    const std::size_t n = t_ + 1;
    const double block = prefix_[b * n + b] - prefix_[a * n + b] - prefix_[b * n + a] + prefix_[a * n + a];
    const double c = (diag_[b] - diag_[a]) - block / static_cast<double>(b - a);
    return c > 0.0 ? c : 0.0;
  }

  /// 1 / median of the nonzero pairwise squared distances, or 1 when there are none.
  static double median_heuristic(const std::vector<double>& sq_full, std::size_t t) {
    std::vector<double> nz;
    for (std::size_t s = 0; s < t; ++s) {
      for (std::size_t u = s + 1; u < t; ++u) {
        if (sq_full[s * t + u] > 0.0) nz.push_back(sq_full[s * t + u]);
      }
    }
    if (nz.empty()) return 1.0;
    std::sort(nz.begin(), nz.end());
    const std::size_t mid = nz.size() / 2;
    const double med = nz.size() % 2 ? nz[mid] : 0.5 * (nz[mid - 1] + nz[mid]);
    return med > 0.0 ? 1.0 / med : 1.0;
  }

 private:
  std::size_t t_ = 0;
  double gamma_ = 1.0;
  std::vector<double> prefix_;  // (T+1) x (T+1)
  std::vector<double> diag_;
};

struct Segmentation {
  std::vector<std::size_t> change_points;  // first index of each new segment
  std::vector<double> segment_costs;
  double total_cost = 0.0;    // sum of segment_costs, accumulated right to left
  double optimal_cost = 0.0;  // DP optimum; equals total_cost up to the tie tolerance
  double gamma = 1.0;
  std::size_t length = 0;
};

/// Relative tolerance under which two segmentation costs count as tied.
inline constexpr double kTieTolerance = 1e-9;

/// Optimal segmentation with exactly `k` change points and segments of at least
/// `min_size`. Among segmentations whose cost is within the tie tolerance of the optimum
/// the lexicographically earliest boundary vector is returned.
inline Segmentation detect_changepoints(const KernelCost& cost, std::size_t k = 2, std::size_t min_size = 6) {
  const std::size_t t = cost.size();
  if (k < 1) throw InvalidArgument("detect_changepoints: K must be >= 1");
  if (min_size < 1) throw InvalidArgument("detect_changepoints: min_size must be >= 1");
  if (t < (k + 1) * min_size) {
    throw InvalidArgument("detect_changepoints: series of length " + std::to_string(t) + " is too short for K=" +
                          std::to_string(k) + " with min_size=" + std::to_string(min_size) + " (needs " +
                          std::to_string((k + 1) * min_size) + ")");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  // best[j][a]: cheapest split of [a, t) into j + 1 segments.
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(t + 1, inf));
  for (std::size_t a = 0; a + min_size <= t; ++a) best[0][a] = cost(a, t);
  for (std::size_t j = 1; j <= k; ++j) {
    for (std::size_t a = 0; a + (j + 1) * min_size <= t; ++a) {
      double m = inf;
      for (std::size_t b = a + min_size; b + j * min_size <= t; ++b) m = std::min(m, cost(a, b) + best[j - 1][b]);
      best[j][a] = m;
    }
  }
  Segmentation seg;
  seg.optimal_cost = best[k][0];
  seg.gamma = cost.gamma();
  seg.length = t;
  const double bound = seg.optimal_cost + kTieTolerance * std::max(1.0, std::abs(seg.optimal_cost));
  double prefix = 0.0;
  std::size_t a = 0;
  for (std::size_t j = k; j >= 1; --j) {
    for (std::size_t b = a + min_size; b + j * min_size <= t; ++b) {
      const double c = cost(a, b);
      if (prefix + c + best[j - 1][b] <= bound) {
        seg.change_points.push_back(b);
        seg.segment_costs.push_back(c);
        prefix += c;
        a = b;
        break;
      }
    }
  }
  seg.segment_costs.push_back(cost(a, t));
  for (auto it = seg.segment_costs.rbegin(); it != seg.segment_costs.rend(); ++it) seg.total_cost = *it + seg.total_cost;
  return seg;
}

inline Segmentation detect_changepoints(const SignalMatrix& signal, std::size_t k = 2, std::size_t min_size = 6,
                                        std::optional<double> gamma = std::nullopt) {
  if (signal.cols() == 0) {
    const std::vector<double> flat(signal.rows, 0.0);
    return detect_changepoints(KernelCost(flat, 1, gamma), k, min_size);
  }
  return detect_changepoints(KernelCost(signal.values, signal.cols(), gamma), k, min_size);
}

// ---------------------------------------------------------------------------
// Partition

struct SubCorpus {
  std::size_t first = 0;  // month index into the corpus range, inclusive
  std::size_t last = 0;   // exclusive
  std::vector<std::size_t> comments;
};

/// Splits the corpus by month index into K + 1 consecutive sub-corpora.
inline std::vector<SubCorpus> partition_corpus(const Corpus& corpus, std::span<const std::size_t> change_points) {
  const std::size_t t = corpus.month_count();
  for (std::size_t i = 0; i < change_points.size(); ++i) {
    const auto cp = change_points[i];
    if (cp == 0 || cp >= t || (i > 0 && cp <= change_points[i - 1])) {
      throw InvalidArgument("change point " + std::to_string(cp) + " is out of range for " + std::to_string(t) +
                            " months (must be ascending within 1.." + std::to_string(t == 0 ? 0 : t - 1) + ")");
    }
  }
  std::vector<SubCorpus> parts;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= change_points.size(); ++i) {
    const std::size_t end = i < change_points.size() ? change_points[i] : t;
    SubCorpus part{begin, end, {}};
    for (std::size_t m = begin; m < end; ++m) {
      const auto in_month = corpus.comments_in_month(m);
      part.comments.insert(part.comments.end(), in_month.begin(), in_month.end());
    }
    std::sort(part.comments.begin(), part.comments.end());
    parts.push_back(std::move(part));
    begin = end;
  }
  return parts;
}

// ---------------------------------------------------------------------------
// Views

inline nlohmann::json to_json(const MonthlySeries& s) {
  nlohmann::json months = nlohmann::json::array();
  for (std::size_t i = 0; i < s.months.size(); ++i) {
    const auto& p = s.months[i];
    months.push_back({{"month", month_label(s.first_month + static_cast<std::int64_t>(i))},
                      {"total_comments", p.total_comments},
                      {"scored_comments", p.scored_comments},
                      {"ah_comments", p.ah_comments},
                      {"ah_fraction", p.ah_fraction},
                      {"active_users", p.active_users},
                      {"ah_users", p.ah_users},
                      {"ah_user_fraction", p.ah_user_fraction},
                      {"active", p.active()}});
  }
  return {{"topic", s.topic}, {"months", std::move(months)}};
}

inline nlohmann::json to_json(const Segmentation& s, std::int64_t first_month) {
  nlohmann::json cps = nlohmann::json::array();
  for (const auto cp : s.change_points) {
    cps.push_back({{"index", cp}, {"month", month_label(first_month + static_cast<std::int64_t>(cp))}});
  }
  return {{"change_points", std::move(cps)}, {"segment_costs", s.segment_costs}, {"total_cost", s.total_cost},
          {"gamma", s.gamma},                 {"length", s.length}};
}

}  // namespace fallacy
