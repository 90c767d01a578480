#pragma once

// Evaluation protocols for the baseline classifier: stratified k-fold cross-validation
// and the label-fraction sweep (retraining on shrinking labeled subsets of each fold).

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fallacy/classifier.hpp"
#include "fallacy/detail/rng.hpp"
#include "fallacy/error.hpp"
#include "fallacy/stats.hpp"

namespace fallacy {

/// Fold index per example. Each class is shuffled with the "folds" substream of `seed`
/// and dealt round-robin, continuing the rotation across classes so fold sizes differ by
/// at most one and per-fold class counts by at most one.
inline std::vector<std::size_t> stratified_folds(std::span<const LabeledExample> examples, std::size_t k,
                                                 std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k must be >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < examples.size(); ++i) by_class[static_cast<std::size_t>(examples[i].label)].push_back(i);
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw InvalidArgument("class '" + std::string(to_string(static_cast<Label>(c))) + "' has " +
                            std::to_string(by_class[c].size()) + " examples, fewer than k = " + std::to_string(k));
    }
  }
  detail::Rng rng(detail::substream_seed(seed, "folds"));
  std::vector<std::size_t> fold(examples.size());
  std::size_t rotation = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span(members));
    for (const std::size_t i : members) fold[i] = rotation++ % k;
  }
  return fold;
}

namespace detail {

/// Per-class subset sizes summing to `total`, proportional to `sizes` (largest remainder,
/// ties to the lower class index).
inline std::vector<std::size_t> proportional_allocation(const std::vector<std::size_t>& sizes, std::size_t total) {
  std::size_t n = 0;
  for (const auto s : sizes) n += s;
  std::vector<std::size_t> alloc(sizes.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(sizes[c]) / static_cast<double>(n);
    alloc[c] = std::min(sizes[c], static_cast<std::size_t>(std::floor(exact)));
    assigned += alloc[c];
    remainders.emplace_back(exact - static_cast<double>(alloc[c]), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r) {
    const auto c = remainders[r].second;
    if (alloc[c] < sizes[c]) ++alloc[c], ++assigned;
  }
  return alloc;
}

struct CvRun {
  std::vector<Label> predicted;
  std::vector<Label> truth;
};

/// Trains one model per fold on (a subset of) the training part and predicts the full
/// held-out fold. `keep` selects the labeled training subset for a fold.
template <typename KeepFn>
CvRun cross_validate(std::span<const LabeledExample> examples, const std::vector<std::size_t>& fold, std::size_t k,
                     const ClassifierConfig& cfg, std::uint64_t seed, KeepFn&& keep) {
  CvRun run;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold[i] != f) train_idx.push_back(i);
    }
    const auto kept = keep(f, train_idx);
    std::vector<LabeledExample> train;
    train.reserve(kept.size());
    for (const auto i : kept) train.push_back(examples[i]);
    const auto model = train_baseline(train, cfg, seed);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold[i] != f) continue;
      run.predicted.push_back(predict(model, examples[i].text).label);
      run.truth.push_back(examples[i].label);
    }
  }
  return run;
}

}  // namespace detail

/// Stratified k-fold cross-validation; predictions are pooled across folds and scored once.
inline stats::EvalMetrics kfold_evaluate(std::span<const LabeledExample> examples, std::size_t k, std::uint64_t seed,
                                         const ClassifierConfig& cfg = {}) {
  const auto fold = stratified_folds(examples, k, seed);
  const auto run = detail::cross_validate(examples, fold, k, cfg, seed,
                                          [](std::size_t, const std::vector<std::size_t>& idx) { return idx; });
  auto m = stats::classification_metrics(run.predicted, run.truth);
  m.folds = k;
  return m;
}

struct SweepRow {
  double fraction = 1.0;
  std::optional<double> mean_macro_f1;  // nullopt: cell failed (a class vanished)
  double std_macro_f1 = 0.0;            // sample std across seeds
  std::vector<double> per_seed;
  std::string error;
};

/// Stratified labeled subset of a training fold: ceil(f * |train|) examples split across
/// classes proportionally. The mask order comes from the "sweep-mask" substream keyed
/// by fold, so subsets are nested as the fraction grows. Returned indices keep the
/// original order, making f = 1 identical to plain cross-validation.
inline std::vector<std::size_t> labeled_subset(std::span<const LabeledExample> examples,
                                               const std::vector<std::size_t>& train_idx, double fraction,
                                               std::uint64_t seed, std::size_t fold) {
  std::vector<std::size_t> by_class[2];
  for (const auto i : train_idx) by_class[static_cast<std::size_t>(examples[i].label)].push_back(i);
  const auto total = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(train_idx.size()) - 1e-9));
  const auto alloc = detail::proportional_allocation({by_class[0].size(), by_class[1].size()}, total);
  for (std::size_t c = 0; c < 2; ++c) {
    if (alloc[c] == 0) {
      throw InvalidArgument("fraction " + std::to_string(fraction) + " leaves no labeled '" +
                            std::string(to_string(static_cast<Label>(c))) + "' examples in fold " +
                            std::to_string(fold));
    }
  }
  detail::Rng rng(detail::substream_seed(seed, "sweep-mask", fold));
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < 2; ++c) {
    auto members = by_class[c];
    rng.shuffle(std::span(members));
    kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(alloc[c]));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Macro-F1 as a function of the labeled fraction of each training fold, averaged over
/// seeds. Evaluation always uses the complete held-out fold.
inline std::vector<SweepRow> label_fraction_sweep(std::span<const LabeledExample> examples,
                                                  std::span<const double> fractions, std::size_t k,
                                                  std::span<const std::uint64_t> seeds,
                                                  const ClassifierConfig& cfg = {}) {
  if (seeds.empty()) throw InvalidArgument("label_fraction_sweep: empty seed set");
  for (const double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("label_fraction_sweep: fractions must lie in (0, 1]");
  }
  stratified_folds(examples, k, seeds.front());  // surface k / class-size violations up front
  std::vector<SweepRow> rows;
  for (const double f : fractions) {
    SweepRow row;
    row.fraction = f;
    try {
      for (const auto seed : seeds) {
        const auto fold = stratified_folds(examples, k, seed);
        const auto run = detail::cross_validate(
            examples, fold, k, cfg, seed,
            [&](std::size_t fi, const std::vector<std::size_t>& idx) { return labeled_subset(examples, idx, f, seed, fi); });
        row.per_seed.push_back(stats::classification_metrics(run.predicted, run.truth).macro_f1);
      }
      row.mean_macro_f1 = stats::mean(row.per_seed);
      row.std_macro_f1 = stats::sample_std(row.per_seed);
    } catch (const InvalidArgument& e) {
      row.per_seed.clear();
      row.mean_macro_f1.reset();
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json to_json(const SweepRow& r) {
  nlohmann::json j{{"fraction", r.fraction}, {"per_seed", r.per_seed}};
  if (r.mean_macro_f1) {
    j["mean_macro_f1"] = *r.mean_macro_f1;
    j["std_macro_f1"] = r.std_macro_f1;
  } else {
    j["mean_macro_f1"] = nullptr;
    j["std_macro_f1"] = nullptr;
    j["error"] = r.error;
  }
  return j;
}

}  // namespace fallacy
