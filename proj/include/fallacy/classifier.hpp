#pragma once

// Desk-scale ad hominem classifier: unigram + bigram features with signed feature
// hashing, L2-regularised logistic loss minimised by deterministic full-batch
// accelerated gradient descent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fallacy/detail/io.hpp"
#include "fallacy/detail/rng.hpp"
#include "fallacy/error.hpp"
#include "fallacy/label.hpp"
#include "fallacy/tokenize.hpp"

namespace fallacy {

using nlohmann::json;

struct LabeledExample {
  std::string id;
  std::string text;
  Label label = Label::none;
};

struct ClassifierConfig {
  unsigned hash_bits = 18;  // 2^18 buckets
  unsigned max_order = 2;   // 1: unigrams only, 2: unigrams + bigrams
  double l2 = 1e-4;
  unsigned max_epochs = 500;
  double tolerance = 1e-6;  // stop once max |gradient| falls below this

  std::size_t buckets() const { return std::size_t{1} << hash_bits; }
  bool operator==(const ClassifierConfig&) const = default;
};

/// Hashed feature: bucket index plus a +/-1 sign that decorrelates collisions.
struct HashedFeature {
  std::uint32_t bucket = 0;
  double sign = 1.0;
};

namespace detail {

inline HashedFeature hash_feature(std::string_view kind, std::string_view a, std::string_view b, unsigned bits) {
  std::uint64_t h = fnv1a64(kind);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(a, h);
  if (!b.empty()) {
    h = fnv1a64("\x1f", h);
    h = fnv1a64(b, h);
  }
  h = splitmix64(h);
  return {static_cast<std::uint32_t>(h & ((std::uint64_t{1} << bits) - 1)), (h >> 63) ? -1.0 : 1.0};
}

}  // namespace detail

inline HashedFeature unigram_feature(std::string_view token, const ClassifierConfig& cfg) {
  return detail::hash_feature("u", token, {}, cfg.hash_bits);
}

inline HashedFeature bigram_feature(std::string_view first, std::string_view second, const ClassifierConfig& cfg) {
  return detail::hash_feature("b", first, second, cfg.hash_bits);
}

/// Sparse feature vector sorted by bucket; values are summed signs.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

inline SparseVector featurize(const std::vector<Token>& tokens, const ClassifierConfig& cfg) {
  SparseVector raw;
  raw.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto u = unigram_feature(tokens[i].text, cfg);
    raw.emplace_back(u.bucket, u.sign);
    if (cfg.max_order >= 2 && i + 1 < tokens.size()) {
      const auto b = bigram_feature(tokens[i].text, tokens[i + 1].text, cfg);
      raw.emplace_back(b.bucket, b.sign);
    }
  }
  std::sort(raw.begin(), raw.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  SparseVector out;
  for (const auto& [bucket, v] : raw) {
    if (!out.empty() && out.back().first == bucket) {
      out.back().second += v;
    } else {
      out.emplace_back(bucket, v);
    }
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0.0; });
  return out;
}

class BaselineModel {
 public:
  BaselineModel() = default;
  BaselineModel(ClassifierConfig cfg, std::uint64_t seed)
      : config_(cfg), seed_(seed), weights_(cfg.buckets(), 0.0) {}

  const ClassifierConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }
  double weight(std::uint32_t bucket) const { return weights_[bucket]; }
  void set_weight(std::uint32_t bucket, double w) { weights_.at(bucket) = w; }
  const std::vector<double>& weights() const { return weights_; }

  /// Sets the bucket so that the unigram `token` contributes exactly `w` to the logit.
  void set_unigram_weight(std::string_view token, double w) {
    const auto f = unigram_feature(token, config_);
    weights_.at(f.bucket) = f.sign * w;
  }

  double logit(const SparseVector& x) const {
    double z = bias_;
    for (const auto& [bucket, v] : x) z += v * weights_[bucket];
    return z;
  }

  bool operator==(const BaselineModel&) const = default;

 private:
  ClassifierConfig config_;
  std::uint64_t seed_ = 0;
  double bias_ = 0.0;
  std::vector<double> weights_;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow.
inline double log1p_exp_neg(double m) {
  if (m > 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

struct TrainingReport {
  unsigned epochs = 0;
  double final_gradient_max = 0.0;
  double final_loss = 0.0;
  bool converged = false;
};

/// Minimises mean logistic loss + (l2/2)||w||^2 (bias unregularised) from a zero start.
/// Untouched buckets keep weight 0 at the optimum, so optimisation runs over the
/// compacted set of active buckets. Nesterov momentum with gradient-based restart and a
/// fixed step 1/L, where L bounds the loss curvature via power iteration.
inline BaselineModel train_baseline(std::span<const LabeledExample> examples, const ClassifierConfig& cfg,
                                    std::uint64_t seed, TrainingReport* report = nullptr) {
  if (cfg.hash_bits < 1 || cfg.hash_bits > 30) throw InvalidArgument("train_baseline: hash_bits must be in [1,30]");
  if (cfg.max_order < 1 || cfg.max_order > 2) throw InvalidArgument("train_baseline: max_order must be 1 or 2");
  if (!(cfg.l2 >= 0.0)) throw InvalidArgument("train_baseline: l2 must be >= 0");
  std::size_t positives = 0;
  for (const auto& e : examples) positives += e.label == Label::adhominem;
  if (examples.size() < 2 || positives == 0 || positives == examples.size()) {
    throw InvalidArgument("degenerate training set: need at least one example of each class");
  }

  const std::size_t n = examples.size();
  std::vector<SparseVector> docs;
  docs.reserve(n);
  std::vector<std::uint32_t> active;
  for (const auto& e : examples) {
    docs.push_back(featurize(tokenize(e.text), cfg));
    for (const auto& [bucket, _] : docs.back()) active.push_back(bucket);
  }
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  const std::size_t m = active.size();

  // CSR over compact indices.
  std::vector<std::size_t> row_start(n + 1, 0);
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [bucket, v] : docs[i]) {
      cols.push_back(static_cast<std::uint32_t>(std::lower_bound(active.begin(), active.end(), bucket) - active.begin()));
      vals.push_back(v);
    }
    row_start[i + 1] = cols.size();
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = examples[i].label == Label::adhominem ? 1.0 : 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Largest eigenvalue of (1/n) [X 1]^T [X 1] by power iteration from the all-ones vector.
  double lambda_max = 0.0;
  {
    std::vector<double> v(m + 1, 1.0), av(m + 1), xv(n);
    double norm = std::sqrt(static_cast<double>(m + 1));
    for (auto& x : v) x /= norm;
    for (int it = 0; it < 100; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = v[m];
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) s += vals[k] * v[cols[k]];
        xv[i] = s;
      }
      std::fill(av.begin(), av.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) av[cols[k]] += vals[k] * xv[i] * inv_n;
        av[m] += xv[i] * inv_n;
      }
      norm = std::sqrt(std::inner_product(av.begin(), av.end(), av.begin(), 0.0));
      lambda_max = norm;
      if (norm == 0.0) break;
      for (std::size_t j = 0; j <= m; ++j) v[j] = av[j] / norm;
    }
  }
  const double lipschitz = 0.25 * lambda_max * 1.05 + cfg.l2;
  const double step = 1.0 / lipschitz;

  // Parameters: [0, m) weights, m bias.
  std::vector<double> w(m + 1, 0.0), w_prev(m + 1, 0.0), look(m + 1, 0.0), grad(m + 1, 0.0);
  std::vector<double> z(n);
  auto gradient_at = [&](const std::vector<double>& p) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = p[m];
      for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) s += vals[k] * p[cols[k]];
      z[i] = s;
      const double r = (sigmoid(s) - y[i]) * inv_n;
      loss += log1p_exp_neg(y[i] > 0.5 ? s : -s) * inv_n;
      for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) grad[cols[k]] += r * vals[k];
      grad[m] += r;
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      grad[j] += cfg.l2 * p[j];
      reg += p[j] * p[j];
    }
    loss += 0.5 * cfg.l2 * reg;
    double gmax = 0.0;
    for (const double g : grad) gmax = std::max(gmax, std::abs(g));
    return std::pair{loss, gmax};
  };

  TrainingReport rep;
  double momentum_k = 0.0;
  unsigned epoch = 0;
  for (; epoch < cfg.max_epochs; ++epoch) {
    const double beta = momentum_k / (momentum_k + 3.0);
    for (std::size_t j = 0; j <= m; ++j) look[j] = w[j] + beta * (w[j] - w_prev[j]);
    const auto [loss, gmax] = gradient_at(look);
    rep.final_loss = loss;
    rep.final_gradient_max = gmax;
    if (gmax < cfg.tolerance) {
      w = look;
      rep.converged = true;
      break;
    }
    w_prev = w;
    double restart = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      w[j] = look[j] - step * grad[j];
      restart += grad[j] * (w[j] - w_prev[j]);
    }
    momentum_k = restart > 0.0 ? 0.0 : momentum_k + 1.0;
  }
  rep.epochs = epoch;
  if (report) *report = rep;

  BaselineModel model(cfg, seed);
  for (std::size_t j = 0; j < m; ++j) model.set_weight(active[j], w[j]);
  model.set_bias(w[m]);
  return model;
}

struct TokenScore {
  std::string token;
  CharSpan span;
  double score = 0.0;
};

struct Prediction {
  double logit = 0.0;
  double p_adhominem = 0.5;
  Label label = Label::adhominem;
  std::vector<TokenScore> token_scores;
};

/// Scores a text. Each token's score is the contribution of its unigram feature plus
/// half of each bigram it takes part in, so the scores plus the bias sum to the logit.
inline Prediction predict(const BaselineModel& model, std::string_view text, double threshold = 0.5) {
  const auto& cfg = model.config();
  const auto tokens = tokenize(text);
  Prediction out;
  out.token_scores.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto u = unigram_feature(t.text, cfg);
    out.token_scores.push_back({t.text, t.span, u.sign * model.weight(u.bucket)});
  }
  if (cfg.max_order >= 2) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      const auto b = bigram_feature(tokens[i].text, tokens[i + 1].text, cfg);
      const double half = 0.5 * b.sign * model.weight(b.bucket);
      out.token_scores[i].score += half;
      out.token_scores[i + 1].score += half;
    }
  }
  out.logit = model.logit(featurize(tokens, cfg));
  out.p_adhominem = sigmoid(out.logit);
  out.label = out.p_adhominem >= threshold ? Label::adhominem : Label::none;
  return out;
}

// ---------------------------------------------------------------------------
// Artifacts

inline constexpr std::string_view kModelFormat = "fallacy-forensics/baseline-model";
inline constexpr int kModelVersion = 1;

inline json model_to_json(const BaselineModel& model) {
  json weights = json::array();
  const auto& w = model.weights();
  for (std::size_t b = 0; b < w.size(); ++b) {
    if (w[b] != 0.0) weights.push_back(json::array({b, w[b]}));
  }
  const auto& c = model.config();
  return json{{"format", kModelFormat},
              {"version", kModelVersion},
              {"config",
               {{"hash_bits", c.hash_bits},
                {"max_order", c.max_order},
                {"l2", c.l2},
                {"max_epochs", c.max_epochs},
                {"tolerance", c.tolerance}}},
              {"seed", model.seed()},
              {"bias", model.bias()},
              {"weights", std::move(weights)}};
}

inline BaselineModel model_from_json(const json& j) {
  try {
    if (j.value("format", "") != kModelFormat) throw DataError("not a baseline model artifact");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion) {
      throw DataError("model artifact version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelVersion) + ")");
    }
    ClassifierConfig cfg;
    const auto& c = j.at("config");
    cfg.hash_bits = c.at("hash_bits").get<unsigned>();
    cfg.max_order = c.at("max_order").get<unsigned>();
    cfg.l2 = c.at("l2").get<double>();
    cfg.max_epochs = c.at("max_epochs").get<unsigned>();
    cfg.tolerance = c.at("tolerance").get<double>();
    if (cfg.hash_bits < 1 || cfg.hash_bits > 30) throw DataError("model artifact: hash_bits out of range");
    BaselineModel model(cfg, j.at("seed").get<std::uint64_t>());
    model.set_bias(j.at("bias").get<double>());
    for (const auto& e : j.at("weights")) {
      const auto bucket = e.at(0).get<std::uint64_t>();
      const double w = e.at(1).get<double>();
      if (bucket >= cfg.buckets()) throw DataError("model artifact: bucket out of range");
      if (!std::isfinite(w)) throw DataError("model artifact: non-finite weight");
      model.set_weight(static_cast<std::uint32_t>(bucket), w);
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model artifact: ") + e.what());
  }
}

inline void save_model(const BaselineModel& model, const std::filesystem::path& path) {
  detail::write_file_atomic(path, model_to_json(model).dump() + "\n");
}

inline BaselineModel load_model(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed JSON: " + e.what());
  }
  return model_from_json(j);
}

/// Labeled dataset: JSON Lines {"id","text","label"} with label "adhominem" | "none".
inline std::vector<LabeledExample> read_labeled_dataset(const std::filesystem::path& path) {
  std::vector<LabeledExample> out;
  const auto name = path.filename().string();
  detail::for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto where = name + ":" + std::to_string(line_no) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + "malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError(where + "expected a JSON object");
    LabeledExample ex;
    for (const char* key : {"id", "text", "label"}) {
      if (!obj.contains(key) || !obj[key].is_string()) throw DataError(where + "field '" + key + "': missing or not a string");
    }
    ex.id = obj["id"].get<std::string>();
    ex.text = obj["text"].get<std::string>();
    const auto label = parse_label(obj["label"].get<std::string>());
    if (!label) throw DataError(where + "field 'label': expected \"adhominem\" or \"none\"");
    ex.label = *label;
    out.push_back(std::move(ex));
  });
  return out;
}

inline std::string labeled_dataset_to_jsonl(std::span<const LabeledExample> examples) {
  std::string out;
  for (const auto& e : examples) {
    out += json{{"id", e.id}, {"text", e.text}, {"label", to_string(e.label)}}.dump() + "\n";
  }
  return out;
}

}  // namespace fallacy
