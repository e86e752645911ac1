#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lvs/channel.hpp"
#include "lvs/metrics.hpp"

namespace lvs {

/// Likelihood-ratio verifier under the Gaussian observation model with
/// covariance sigma^2 * I. The detector deliberately models thermal noise
/// only; an NLoS bias in the data is unmodeled mismatch.
///
/// thermal_noise_std is the detector's assumed sigma and may differ from the
/// channel's true value. threshold is the decision threshold lambda; the
/// default 1 is the Bayes choice for equal priors and unit costs.
struct LrtDetector {
  double thermal_noise_std = 300.0;
  double threshold = 1.0;

  void validate() const {
    if (!(thermal_noise_std > 0.0)) {
      throw std::invalid_argument("detector thermal_noise_std must be > 0");
    }
    if (!(threshold > 0.0)) {
      throw std::invalid_argument("detector threshold must be > 0");
    }
  }
};

/// log Lambda(y) = -(||y-v||^2 - ||y-u||^2) / (2 sigma^2), the log ratio of
/// the malicious-hypothesis density (mean v) to the legitimate one (mean u).
/// Kept in the log domain throughout; the quadratic terms make it exactly
/// antisymmetric under u <-> v and exactly invariant under a common shift of
/// y, u and v.
inline double log_likelihood_ratio(const LrtDetector& det,
                                   const std::vector<double>& y,
                                   const std::vector<double>& u,
                                   const std::vector<double>& v) {
  if (y.size() != u.size() || y.size() != v.size()) {
    throw std::invalid_argument("y, u, v must have equal length");
  }
  det.validate();
  double diff = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dv = y[i] - v[i];
    const double du = y[i] - u[i];
    diff += dv * dv - du * du;
  }
  const double sigma = det.thermal_noise_std;
  return -diff / (2.0 * sigma * sigma);
}

/// Decides malicious iff log Lambda >= ln(lambda); ties go to malicious.
inline Verdict decide(const LrtDetector& det, const std::vector<double>& y,
                      const std::vector<double>& u,
                      const std::vector<double>& v) {
  return log_likelihood_ratio(det, y, u, v) >= std::log(det.threshold)
             ? Verdict::Malicious
             : Verdict::Legitimate;
}

struct LrtDecision {
  Verdict verdict = Verdict::Legitimate;
  double log_lr = 0.0;
  /// True when U equals the attacker mean vector exactly (claim at a
  /// geometry-symmetric point), so the two hypotheses coincide and the
  /// tie rule alone picks the verdict.
  bool undecidable_geometry = false;
};

/// Runs the detector on one sample: u is the stored claimed-ToA vector and
/// v is the far-field attacker mean (the constant mean(u) vector).
inline LrtDecision decide_sample(const LrtDetector& det,
                                 const LabeledSample& s) {
  if (s.claimed_toa.empty() || s.claimed_toa.size() != s.observed_toa.size()) {
    throw std::invalid_argument("sample vectors empty or mismatched");
  }
  const std::vector<double> v = constant_mean_vector(s.claimed_toa);
  LrtDecision d;
  d.log_lr = log_likelihood_ratio(det, s.observed_toa, s.claimed_toa, v);
  d.verdict = d.log_lr >= std::log(det.threshold) ? Verdict::Malicious
                                                  : Verdict::Legitimate;
  d.undecidable_geometry = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (s.claimed_toa[i] != v[i]) {
      d.undecidable_geometry = false;
      break;
    }
  }
  return d;
}

inline std::vector<LrtDecision> decide_dataset(const LrtDetector& det,
                                               const Dataset& ds) {
  if (ds.samples.empty()) {
    throw std::invalid_argument("cannot run LRT on an empty dataset");
  }
  det.validate();
  std::vector<LrtDecision> out;
  out.reserve(ds.samples.size());
  for (const auto& s : ds.samples) out.push_back(decide_sample(det, s));
  return out;
}

/// Decides every sample and aggregates with equal priors p(H0)=p(H1)=0.5,
/// the prior the likelihood-ratio design assumes.
inline MetricsReport evaluate_lrt(const LrtDetector& det, const Dataset& ds) {
  const std::vector<LrtDecision> decisions = decide_dataset(det, ds);
  std::vector<Verdict> verdicts;
  verdicts.reserve(decisions.size());
  for (const auto& d : decisions) verdicts.push_back(d.verdict);
  return compute_metrics(verdicts, ds.labels(), 0.5);
}

struct RocPoint {
  double lambda = 1.0;
  std::optional<double> alpha;
  std::optional<double> beta;
};

/// Sweeps the decision threshold over the given ascending positive lambdas.
/// Both rates are non-increasing in lambda by construction.
inline std::vector<RocPoint> roc_sweep(const LrtDetector& det,
                                       const Dataset& ds,
                                       const std::vector<double>& thresholds) {
  if (thresholds.empty()) {
    throw std::invalid_argument("threshold list must be nonempty");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0)) {
      throw std::invalid_argument("thresholds must be positive");
    }
    if (i > 0 && thresholds[i] < thresholds[i - 1]) {
      throw std::invalid_argument("thresholds must be sorted ascending");
    }
  }
  const std::vector<LrtDecision> base = decide_dataset(det, ds);
  const std::vector<Verdict> labels = ds.labels();

  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double lambda : thresholds) {
    const double log_lambda = std::log(lambda);
    std::size_t n0 = 0, n1 = 0, fp = 0, tp = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const bool mal = base[i].log_lr >= log_lambda;
      if (labels[i] == Verdict::Legitimate) {
        ++n0;
        fp += mal ? 1 : 0;
      } else {
        ++n1;
        tp += mal ? 1 : 0;
      }
    }
    RocPoint p;
    p.lambda = lambda;
    if (n0 > 0) p.alpha = static_cast<double>(fp) / static_cast<double>(n0);
    if (n1 > 0) p.beta = static_cast<double>(tp) / static_cast<double>(n1);
    out.push_back(p);
  }
  return out;
}

}  // namespace lvs
