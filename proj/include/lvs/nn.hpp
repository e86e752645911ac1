#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lvs/channel.hpp"
#include "lvs/metrics.hpp"
#include "lvs/rng.hpp"

namespace lvs {

/// Feed-forward verifier: n_inputs -> n_hidden tanh units -> 1 linear output,
/// scored against the {0,1} label coding. Features are standardized with the
/// statistics frozen at training time.
struct MlpModel {
  int n_inputs = 0;
  int n_hidden = 10;
  std::vector<double> w1;            // n_hidden x n_inputs, row-major
  std::vector<double> b1;            // n_hidden
  std::vector<double> w2;            // n_hidden (single output row)
  double b2 = 0.0;
  std::vector<double> feature_mean;  // n_inputs
  std::vector<double> feature_std;   // n_inputs, entries > 0
  double decision_threshold = 0.5;
  bool residual_features = false;    // trained on Y-U instead of [U;Y]
  int n_bs = 0;
};

struct TrainConfig {
  int max_epochs = 1000;
  int max_validation_failures = 6;
  double validation_fraction = 0.15;
  /// Initial Levenberg-Marquardt damping; adapts by 10x either way.
  double learning_rate = 0.01;
  double init_scale = 0.5;
  std::uint64_t seed = 0;
  bool residual_features = false;

  void validate() const {
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (max_validation_failures < 1) {
      throw std::invalid_argument("max_validation_failures must be >= 1");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
      throw std::invalid_argument("validation_fraction must lie in [0,1)");
    }
    if (!(learning_rate > 0.0)) {
      throw std::invalid_argument("learning_rate must be > 0");
    }
    if (!(init_scale > 0.0)) {
      throw std::invalid_argument("init_scale must be > 0");
    }
  }
};

/// Per-epoch record kept when the caller asks for a trace; val_mse is NaN
/// when no validation split was in use.
struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
  std::vector<EpochStats> epochs;
  bool used_validation = false;
  int best_epoch = 0;  // 0 = the initial weights
  double best_val_mse = std::numeric_limits<double>::quiet_NaN();
};

/// Raw feature vector [U; Y]: claimed ToA first, observed ToA second.
inline std::vector<double> featurize(const LabeledSample& s) {
  std::vector<double> f;
  f.reserve(s.claimed_toa.size() + s.observed_toa.size());
  f.insert(f.end(), s.claimed_toa.begin(), s.claimed_toa.end());
  f.insert(f.end(), s.observed_toa.begin(), s.observed_toa.end());
  return f;
}

/// Variant feature vector Y - U (one residual per BS).
inline std::vector<double> featurize_residual(const LabeledSample& s) {
  if (s.claimed_toa.size() != s.observed_toa.size()) {
    throw std::invalid_argument("sample vectors mismatched");
  }
  std::vector<double> f(s.claimed_toa.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = s.observed_toa[i] - s.claimed_toa[i];
  }
  return f;
}

inline std::vector<double> model_features(const MlpModel& m,
                                          const LabeledSample& s) {
  return m.residual_features ? featurize_residual(s) : featurize(s);
}

namespace detail {

/// Forward pass on an already-standardized feature row; fills the hidden
/// activations and returns the linear output.
inline double mlp_forward_std(const MlpModel& m, const double* z,
                              double* hidden) {
  const int h = m.n_hidden;
  const int d = m.n_inputs;
  for (int j = 0; j < h; ++j) {
    const double* row = m.w1.data() + static_cast<std::size_t>(j) * d;
    double acc = m.b1[j];
    for (int k = 0; k < d; ++k) acc += row[k] * z[k];
    hidden[j] = std::tanh(acc);
  }
  double score = m.b2;
  for (int j = 0; j < h; ++j) score += m.w2[j] * hidden[j];
  return score;
}

/// Mean squared error of the model over a flat row-major standardized batch.
inline double mlp_batch_mse(const MlpModel& m, const std::vector<double>& z,
                            const std::vector<double>& targets) {
  const std::size_t n = targets.size();
  std::vector<double> hidden(m.n_hidden);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e =
        mlp_forward_std(m, z.data() + i * m.n_inputs, hidden.data()) -
        targets[i];
    sse += e * e;
  }
  return sse / static_cast<double>(n);
}

// Parameters flatten in the fixed order [w1 row-major, b1, w2, b2]; the
// weight init and the optimizer agree on it.

inline std::size_t mlp_param_count(const MlpModel& m) {
  return m.w1.size() + m.b1.size() + m.w2.size() + 1;
}

inline std::vector<double> mlp_get_params(const MlpModel& m) {
  std::vector<double> p;
  p.reserve(mlp_param_count(m));
  p.insert(p.end(), m.w1.begin(), m.w1.end());
  p.insert(p.end(), m.b1.begin(), m.b1.end());
  p.insert(p.end(), m.w2.begin(), m.w2.end());
  p.push_back(m.b2);
  return p;
}

inline void mlp_set_params(MlpModel& m, const std::vector<double>& p) {
  if (p.size() != mlp_param_count(m)) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  std::size_t off = 0;
  std::copy_n(p.begin() + off, m.w1.size(), m.w1.begin());
  off += m.w1.size();
  std::copy_n(p.begin() + off, m.b1.size(), m.b1.begin());
  off += m.b1.size();
  std::copy_n(p.begin() + off, m.w2.size(), m.w2.begin());
  off += m.w2.size();
  m.b2 = p[off];
}

/// Backpropagation sweep over a standardized batch. Returns the sum of
/// squared residuals S = sum_i (score_i - target_i)^2 and optionally fills
///   grad         J^T r, the gradient of S/2 (size P),
///   gauss_newton J^T J, row-major P x P,
/// where J is the Jacobian of the residuals in the flat parameter order.
/// The batch-MSE gradient used by gradient checks is (2/n) * grad.
inline double mlp_residual_pass(const MlpModel& m, const std::vector<double>& z,
                                const std::vector<double>& targets,
                                std::vector<double>* grad,
                                std::vector<double>* gauss_newton) {
  const std::size_t n = targets.size();
  const int h = m.n_hidden;
  const int d = m.n_inputs;
  const std::size_t p = mlp_param_count(m);
  if (grad) grad->assign(p, 0.0);
  if (gauss_newton) gauss_newton->assign(p * p, 0.0);

  std::vector<double> hidden(h);
  std::vector<double> row(p);  // per-sample residual Jacobian
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* zi = z.data() + i * d;
    const double r = mlp_forward_std(m, zi, hidden.data()) - targets[i];
    sse += r * r;
    if (!grad && !gauss_newton) continue;

    for (int j = 0; j < h; ++j) {
      const double hj = hidden[j];
      const double dpre = m.w2[j] * (1.0 - hj * hj);
      double* wrow = row.data() + static_cast<std::size_t>(j) * d;
      for (int k = 0; k < d; ++k) wrow[k] = dpre * zi[k];
      row[static_cast<std::size_t>(h) * d + j] = dpre;        // b1
      row[static_cast<std::size_t>(h) * d + h + j] = hj;      // w2
    }
    row[p - 1] = 1.0;  // b2

    if (grad) {
      for (std::size_t a = 0; a < p; ++a) (*grad)[a] += r * row[a];
    }
    if (gauss_newton) {
      // upper triangle of the rank-1 update; mirrored once at the end
      for (std::size_t a = 0; a < p; ++a) {
        const double ra = row[a];
        if (ra == 0.0) continue;
        double* out = gauss_newton->data() + a * p;
        for (std::size_t b = a; b < p; ++b) out[b] += ra * row[b];
      }
    }
  }
  if (gauss_newton) {
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a + 1; b < p; ++b) {
        (*gauss_newton)[b * p + a] = (*gauss_newton)[a * p + b];
      }
    }
  }
  return sse;
}

/// In-place Cholesky solve of A x = b for symmetric positive definite A
/// (row-major p x p). Returns false when A is not positive definite.
inline bool solve_spd(std::vector<double> a, std::vector<double> b,
                      std::size_t p, std::vector<double>& x) {
  for (std::size_t j = 0; j < p; ++j) {
    double diag = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
    if (!(diag > 0.0)) return false;
    diag = std::sqrt(diag);
    a[j * p + j] = diag;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = v / diag;
    }
  }
  // forward then back substitution
  for (std::size_t i = 0; i < p; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * p + k] * b[k];
    b[i] = v / a[i * p + i];
  }
  x.assign(p, 0.0);
  for (std::size_t ii = p; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t k = ii + 1; k < p; ++k) v -= a[k * p + ii] * x[k];
    x[ii] = v / a[ii * p + ii];
  }
  return true;
}

struct WeightSnapshot {
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;

  void capture(const MlpModel& m) {
    w1 = m.w1;
    b1 = m.b1;
    w2 = m.w2;
    b2 = m.b2;
  }
  void restore(MlpModel& m) const {
    m.w1 = w1;
    m.b1 = b1;
    m.w2 = w2;
    m.b2 = b2;
  }
};

}  // namespace detail

/// Standardized forward pass on a raw feature vector; the linear output is
/// unbounded.
inline double forward(const MlpModel& m, const std::vector<double>& features) {
  if (static_cast<int>(features.size()) != m.n_inputs) {
    throw std::invalid_argument("feature vector length does not match model");
  }
  std::vector<double> z(m.n_inputs);
  for (int k = 0; k < m.n_inputs; ++k) {
    z[k] = (features[k] - m.feature_mean[k]) / m.feature_std[k];
  }
  std::vector<double> hidden(m.n_hidden);
  return detail::mlp_forward_std(m, z.data(), hidden.data());
}

/// Trains by full-batch backpropagation on the mean squared error against
/// {0,1} targets, stepped by Levenberg-Marquardt: each epoch solves
/// (J^T J + mu I) delta = -J^T r and adapts the damping mu (down 10x on an
/// accepted step, up 10x until one is found). cfg.learning_rate sets the
/// initial damping.
///
/// Standardization statistics come from the full pool. The pool is split
/// train/validation by cfg.validation_fraction (seeded shuffle); pools of
/// fewer than 7 samples skip validation and run a fixed 200 epochs (capped
/// by max_epochs, and ended early if the damping overflows, i.e. no
/// descending step exists). Weights initialize uniformly in
/// [-init_scale, init_scale]. Training stops at max_epochs or once
/// validation MSE has failed to improve for max_validation_failures
/// consecutive epochs, and the weights from the best-validation epoch are
/// returned.
///
/// Throws on an empty pool, and a training-diverged error naming the epoch
/// if the loss leaves the finite range.
inline MlpModel train(const Dataset& ds, const TrainConfig& cfg,
                      TrainTrace* trace = nullptr) {
  cfg.validate();
  const std::size_t n = ds.samples.size();
  if (n == 0) throw std::invalid_argument("cannot train on an empty dataset");

  // Featurize the pool.
  const std::vector<double> probe = cfg.residual_features
                                        ? featurize_residual(ds.samples[0])
                                        : featurize(ds.samples[0]);
  const int d = static_cast<int>(probe.size());
  std::vector<double> features(n * static_cast<std::size_t>(d));
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> f = cfg.residual_features
                                      ? featurize_residual(ds.samples[i])
                                      : featurize(ds.samples[i]);
    if (static_cast<int>(f.size()) != d) {
      throw std::invalid_argument("inconsistent feature dimensions in pool");
    }
    std::copy(f.begin(), f.end(), features.begin() + i * d);
    targets[i] = ds.samples[i].label == Verdict::Malicious ? 1.0 : 0.0;
  }

  // Standardization statistics over the full pool (population std;
  // zero-variance dimensions fall back to 1).
  std::vector<double> mean(d, 0.0), stddev(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) mean[k] += features[i * d + k];
  }
  for (int k = 0; k < d; ++k) mean[k] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double dev = features[i * d + k] - mean[k];
      stddev[k] += dev * dev;
    }
  }
  for (int k = 0; k < d; ++k) {
    stddev[k] = std::sqrt(stddev[k] / static_cast<double>(n));
    if (stddev[k] == 0.0) stddev[k] = 1.0;
  }
  std::vector<double> z(features.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      z[i * d + k] = (features[i * d + k] - mean[k]) / stddev[k];
    }
  }

  Rng rng(cfg.seed);

  // Validation split: seeded shuffle, first n_val indices validate.
  const std::size_t n_val_raw =
      static_cast<std::size_t>(static_cast<double>(n) * cfg.validation_fraction);
  const bool use_validation = n >= 7 && n_val_raw >= 1;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (use_validation) {
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j =
          static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
      std::swap(order[i], order[j]);
    }
  }
  const std::size_t n_val = use_validation ? n_val_raw : 0;
  const std::size_t n_train = n - n_val;

  std::vector<double> z_train(n_train * static_cast<std::size_t>(d));
  std::vector<double> t_train(n_train);
  std::vector<double> z_val(n_val * static_cast<std::size_t>(d));
  std::vector<double> t_val(n_val);
  for (std::size_t i = 0; i < n_val; ++i) {
    const std::size_t src = order[i];
    std::copy_n(z.begin() + src * d, d, z_val.begin() + i * d);
    t_val[i] = targets[src];
  }
  for (std::size_t i = 0; i < n_train; ++i) {
    const std::size_t src = order[n_val + i];
    std::copy_n(z.begin() + src * d, d, z_train.begin() + i * d);
    t_train[i] = targets[src];
  }

  // Weight init: uniform in [-init_scale, init_scale], consumed in the order
  // w1 row-major, b1, w2, b2.
  MlpModel m;
  m.n_inputs = d;
  m.n_hidden = 10;
  m.w1.resize(static_cast<std::size_t>(m.n_hidden) * d);
  m.b1.resize(m.n_hidden);
  m.w2.resize(m.n_hidden);
  for (double& w : m.w1) w = rng.uniform_in(-cfg.init_scale, cfg.init_scale);
  for (double& w : m.b1) w = rng.uniform_in(-cfg.init_scale, cfg.init_scale);
  for (double& w : m.w2) w = rng.uniform_in(-cfg.init_scale, cfg.init_scale);
  m.b2 = rng.uniform_in(-cfg.init_scale, cfg.init_scale);
  m.feature_mean = mean;
  m.feature_std = stddev;
  m.decision_threshold = 0.5;
  m.residual_features = cfg.residual_features;
  m.n_bs = static_cast<int>(ds.samples.front().claimed_toa.size());

  if (trace) {
    *trace = TrainTrace{};
    trace->used_validation = use_validation;
  }

  constexpr double kMuMin = 1e-20;
  constexpr double kMuMax = 1e10;
  const std::size_t n_params = detail::mlp_param_count(m);
  const double inv_n_train = 1.0 / static_cast<double>(n_train);

  detail::WeightSnapshot best;
  best.capture(m);
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int failures = 0;
  double mu = cfg.learning_rate;

  std::vector<double> grad, gauss_newton, damped, neg_grad, delta, params;
  double sse =
      detail::mlp_residual_pass(m, z_train, t_train, nullptr, nullptr);

  const int epoch_cap =
      use_validation ? cfg.max_epochs : std::min(cfg.max_epochs, 200);
  for (int epoch = 1; epoch <= epoch_cap; ++epoch) {
    if (!std::isfinite(sse)) {
      throw std::runtime_error("training diverged at epoch " +
                               std::to_string(epoch));
    }
    detail::mlp_residual_pass(m, z_train, t_train, &grad, &gauss_newton);
    params = detail::mlp_get_params(m);
    neg_grad.resize(n_params);
    for (std::size_t i = 0; i < n_params; ++i) neg_grad[i] = -grad[i];

    // Raise the damping until a step decreases the training error.
    bool accepted = false;
    double sse_new = sse;
    while (!accepted && mu <= kMuMax) {
      damped = gauss_newton;
      for (std::size_t i = 0; i < n_params; ++i) damped[i * n_params + i] += mu;
      if (detail::solve_spd(damped, neg_grad, n_params, delta)) {
        std::vector<double> trial = params;
        for (std::size_t i = 0; i < n_params; ++i) trial[i] += delta[i];
        detail::mlp_set_params(m, trial);
        sse_new =
            detail::mlp_residual_pass(m, z_train, t_train, nullptr, nullptr);
        if (std::isfinite(sse_new) && sse_new < sse) {
          accepted = true;
          mu = std::max(mu * 0.1, kMuMin);
          break;
        }
      }
      mu *= 10.0;
    }
    if (!accepted) {
      detail::mlp_set_params(m, params);  // no descending step: converged
      break;
    }
    sse = sse_new;
    const double train_mse = sse * inv_n_train;

    double val_mse = std::numeric_limits<double>::quiet_NaN();
    if (use_validation) {
      val_mse = detail::mlp_batch_mse(m, z_val, t_val);
      if (!std::isfinite(val_mse)) {
        throw std::runtime_error("training diverged at epoch " +
                                 std::to_string(epoch));
      }
      if (val_mse < best_val) {  // first executed epoch always qualifies
        best_val = val_mse;
        best.capture(m);
        best_epoch = epoch;
        failures = 0;
      } else {
        ++failures;
      }
    }
    if (trace) trace->epochs.push_back({epoch, train_mse, val_mse});
    if (use_validation && failures >= cfg.max_validation_failures) break;
  }

  if (use_validation) best.restore(m);

  if (trace) {
    trace->best_epoch = best_epoch;
    trace->best_val_mse = use_validation
                              ? best_val
                              : std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

/// Malicious iff the score reaches the decision threshold; ties go malicious.
inline Verdict classify(const MlpModel& m, const LabeledSample& s) {
  return forward(m, model_features(m, s)) >= m.decision_threshold
             ? Verdict::Malicious
             : Verdict::Legitimate;
}

struct CurvePoint {
  int second = 0;
  double total_error = 0.0;
  std::optional<double> alpha;
  std::optional<double> beta;
};

/// One (second, total_error, alpha, beta) row per training second, seconds
/// strictly increasing from 1.
using LearningCurve = std::vector<CurvePoint>;

/// Incremental one-vehicle-per-second protocol, evaluated against several
/// test sets at once. The model retrained at second t depends only on the
/// stream prefix and on cfg, so the curves are identical to running each
/// test set separately; sharing the retraining just avoids repeating it.
///
/// At second t the verifier trains from scratch on the first t stream
/// samples with seed derive_seed(cfg.seed, {t}), then classifies every test
/// set; rates aggregate with priors equal to each test set's empirical label
/// proportions.
inline std::vector<LearningCurve> incremental_training_run_multi(
    const Dataset& train_stream, const std::vector<const Dataset*>& test_sets,
    const TrainConfig& cfg, int max_seconds) {
  cfg.validate();
  if (max_seconds < 1) {
    throw std::invalid_argument("max_seconds must be >= 1");
  }
  if (train_stream.samples.size() < static_cast<std::size_t>(max_seconds)) {
    throw std::invalid_argument("train stream exhausted: has " +
                                std::to_string(train_stream.samples.size()) +
                                " samples, needs " +
                                std::to_string(max_seconds));
  }
  if (test_sets.empty()) {
    throw std::invalid_argument("need at least one test set");
  }
  for (const Dataset* t : test_sets) {
    if (t == nullptr || t->samples.empty()) {
      throw std::invalid_argument("test sets must be nonempty");
    }
  }

  // Raw test features are model-independent; compute them once.
  struct TestCache {
    std::vector<std::vector<double>> plain;
    std::vector<std::vector<double>> residual;
    std::vector<Verdict> labels;
  };
  std::vector<TestCache> caches(test_sets.size());
  for (std::size_t k = 0; k < test_sets.size(); ++k) {
    const Dataset& t = *test_sets[k];
    caches[k].labels = t.labels();
    caches[k].plain.reserve(t.samples.size());
    for (const auto& s : t.samples) caches[k].plain.push_back(featurize(s));
    if (cfg.residual_features) {
      caches[k].residual.reserve(t.samples.size());
      for (const auto& s : t.samples) {
        caches[k].residual.push_back(featurize_residual(s));
      }
    }
  }

  std::vector<LearningCurve> curves(test_sets.size());
  Dataset prefix;
  prefix.params = train_stream.params;
  prefix.scenario = train_stream.scenario;
  prefix.samples.reserve(max_seconds);

  for (int t = 1; t <= max_seconds; ++t) {
    prefix.samples.push_back(train_stream.samples[t - 1]);
    TrainConfig cfg_t = cfg;
    cfg_t.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(t)});
    const MlpModel m = train(prefix, cfg_t);

    for (std::size_t k = 0; k < test_sets.size(); ++k) {
      const auto& rows =
          cfg.residual_features ? caches[k].residual : caches[k].plain;
      std::vector<Verdict> decisions;
      decisions.reserve(rows.size());
      for (const auto& f : rows) {
        decisions.push_back(forward(m, f) >= m.decision_threshold
                                ? Verdict::Malicious
                                : Verdict::Legitimate);
      }
      const MetricsReport r =
          compute_metrics_empirical(decisions, caches[k].labels);
      curves[k].push_back({t, *r.total_error, r.alpha, r.beta});
    }
  }
  return curves;
}

inline LearningCurve incremental_training_run(const Dataset& train_stream,
                                              const Dataset& test_set,
                                              const TrainConfig& cfg,
                                              int max_seconds) {
  return incremental_training_run_multi(train_stream, {&test_set}, cfg,
                                        max_seconds)[0];
}

// --- model serialization ------------------------------------------------
// Flat JSON with row-major arrays w1,b1,w2 plus scalars; numbers printed at
// 17 significant digits so reading the file back reproduces every weight
// exactly.

namespace detail {

inline void append_g17(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

inline void append_array_g17(std::string& out, const std::string& key,
                             const std::vector<double>& values) {
  out += "  \"" + key + "\": [";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    append_g17(out, values[i]);
  }
  out += "]";
}

}  // namespace detail

inline std::string model_to_json_string(const MlpModel& m) {
  std::string out = "{\n";
  out += "  \"n_bs\": " + std::to_string(m.n_bs) + ",\n";
  out += "  \"decision_threshold\": ";
  detail::append_g17(out, m.decision_threshold);
  out += ",\n";
  out += std::string("  \"residual_features\": ") +
         (m.residual_features ? "true" : "false") + ",\n";
  detail::append_array_g17(out, "feature_mean", m.feature_mean);
  out += ",\n";
  detail::append_array_g17(out, "feature_std", m.feature_std);
  out += ",\n";
  detail::append_array_g17(out, "w1", m.w1);
  out += ",\n";
  detail::append_array_g17(out, "b1", m.b1);
  out += ",\n";
  detail::append_array_g17(out, "w2", m.w2);
  out += ",\n";
  out += "  \"b2\": ";
  detail::append_g17(out, m.b2);
  out += "\n}\n";
  return out;
}

inline void save_model(const MlpModel& m, const std::string& path) {
  detail::atomic_write_file(path, model_to_json_string(m));
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);

  MlpModel m;
  m.n_bs = j.at("n_bs").get<int>();
  m.decision_threshold = j.at("decision_threshold").get<double>();
  m.residual_features = j.value("residual_features", false);
  m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
  m.feature_std = j.at("feature_std").get<std::vector<double>>();
  m.w1 = j.at("w1").get<std::vector<double>>();
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = j.at("w2").get<std::vector<double>>();
  m.b2 = j.at("b2").get<double>();

  m.n_hidden = static_cast<int>(m.b1.size());
  if (m.n_hidden == 0 || m.w1.size() % m.b1.size() != 0) {
    throw std::runtime_error("model file has inconsistent layer sizes: " + path);
  }
  m.n_inputs = static_cast<int>(m.w1.size() / m.b1.size());
  if (m.w2.size() != m.b1.size() ||
      m.feature_mean.size() != static_cast<std::size_t>(m.n_inputs) ||
      m.feature_std.size() != static_cast<std::size_t>(m.n_inputs)) {
    throw std::runtime_error("model file has inconsistent layer sizes: " + path);
  }
  for (double s : m.feature_std) {
    if (!(s > 0.0)) {
      throw std::runtime_error("model feature_std entries must be > 0: " + path);
    }
  }
  return m;
}

}  // namespace lvs
