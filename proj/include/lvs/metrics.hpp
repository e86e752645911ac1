#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvs {

/// Binary outcome of a verification decision, also used as the ground-truth
/// label of a synthesized sample.
enum class Verdict : int { Legitimate = 0, Malicious = 1 };

/// Standard Gaussian upper-tail probability Q(x) = P(Z > x), computed from
/// the complementary error function.
inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

/// Detection-theoretic summary of a batch of decisions.
///
/// alpha = false positive rate (legitimate decided malicious),
/// beta  = detection rate (malicious decided malicious),
/// total_error = prior_h0 * alpha + prior_h1 * (1 - beta).
///
/// A rate is absent when its class has no samples. total_error is absent
/// when an absent rate carries nonzero prior weight.
struct MetricsReport {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> total_error;
  double prior_h0 = 0.5;
  double prior_h1 = 0.5;
  std::size_t n_legit = 0;
  std::size_t n_malicious = 0;

  std::size_t n_total() const { return n_legit + n_malicious; }

  std::vector<std::string> undefined_flags() const {
    std::vector<std::string> flags;
    if (!alpha) flags.push_back("alpha");
    if (!beta) flags.push_back("beta");
    if (!total_error) flags.push_back("total_error");
    return flags;
  }
};

namespace detail {

inline MetricsReport aggregate_metrics(const std::vector<Verdict>& decisions,
                                       const std::vector<Verdict>& labels,
                                       std::optional<double> fixed_prior_h1) {
  if (decisions.size() != labels.size()) {
    throw std::invalid_argument("decisions and labels differ in length");
  }
  if (decisions.empty()) {
    throw std::invalid_argument("cannot compute metrics on empty input");
  }

  std::size_t n0 = 0, n1 = 0, false_pos = 0, true_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool decided_malicious = decisions[i] == Verdict::Malicious;
    if (labels[i] == Verdict::Legitimate) {
      ++n0;
      if (decided_malicious) ++false_pos;
    } else {
      ++n1;
      if (decided_malicious) ++true_pos;
    }
  }

  MetricsReport r;
  r.n_legit = n0;
  r.n_malicious = n1;
  r.prior_h1 = fixed_prior_h1
                   ? *fixed_prior_h1
                   : static_cast<double>(n1) / static_cast<double>(n0 + n1);
  r.prior_h0 = 1.0 - r.prior_h1;
  if (n0 > 0) r.alpha = static_cast<double>(false_pos) / static_cast<double>(n0);
  if (n1 > 0) r.beta = static_cast<double>(true_pos) / static_cast<double>(n1);

  // Total Error needs each rate only when its prior weight is nonzero; an
  // absent rate with prior 0 contributes nothing.
  const bool need_alpha = r.prior_h0 != 0.0;
  const bool need_beta = r.prior_h1 != 0.0;
  if ((!need_alpha || r.alpha) && (!need_beta || r.beta)) {
    const double a = r.alpha ? *r.alpha : 0.0;
    const double one_minus_b = r.beta ? 1.0 - *r.beta : 0.0;
    r.total_error = r.prior_h0 * a + r.prior_h1 * one_minus_b;
  }
  return r;
}

}  // namespace detail

/// Rates and Total Error under fixed priors p(H1) = prior_h1.
inline MetricsReport compute_metrics(const std::vector<Verdict>& decisions,
                                     const std::vector<Verdict>& labels,
                                     double prior_h1) {
  if (!(prior_h1 >= 0.0 && prior_h1 <= 1.0)) {
    throw std::invalid_argument("prior_h1 must lie in [0,1]");
  }
  return detail::aggregate_metrics(decisions, labels, prior_h1);
}

/// Rates and Total Error with priors set to the empirical label proportions,
/// which makes Total Error the plain misclassification rate.
inline MetricsReport compute_metrics_empirical(
    const std::vector<Verdict>& decisions, const std::vector<Verdict>& labels) {
  return detail::aggregate_metrics(decisions, labels, std::nullopt);
}

/// Exact Total Error of the lambda=1 likelihood-ratio test under equal priors
/// with Gaussian noise only (no NLoS bias): Q(||v-u|| / (2*sigma)). Exact
/// because the log-likelihood ratio is linear in the observation, hence
/// Gaussian under both hypotheses.
inline double analytic_lrt_error(const std::vector<double>& u,
                                 const std::vector<double>& v, double sigma) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("u and v differ in length");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be > 0");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = v[i] - u[i];
    sq += d * d;
  }
  return q_function(std::sqrt(sq) / (2.0 * sigma));
}

// --- summary CSV row ------------------------------------------------------
// Schema: method,n_bs,sigma_ns,nlos_ns,po_test,alpha,beta,total_error,n

struct SummaryRow {
  std::string method;
  int n_bs = 0;
  double sigma_ns = 0.0;
  double nlos_ns = 0.0;
  double po_test = 0.0;
  MetricsReport report;
};

inline std::string summary_csv_header() {
  return "method,n_bs,sigma_ns,nlos_ns,po_test,alpha,beta,total_error,n";
}

namespace detail {

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string format_opt6(const std::optional<double>& v) {
  return v ? format_fixed6(*v) : "nan";
}

}  // namespace detail

inline std::string summary_csv_row(const SummaryRow& row) {
  std::string s = row.method;
  s += ',' + std::to_string(row.n_bs);
  s += ',' + detail::format_fixed6(row.sigma_ns);
  s += ',' + detail::format_fixed6(row.nlos_ns);
  s += ',' + detail::format_fixed6(row.po_test);
  s += ',' + detail::format_opt6(row.report.alpha);
  s += ',' + detail::format_opt6(row.report.beta);
  s += ',' + detail::format_opt6(row.report.total_error);
  s += ',' + std::to_string(row.report.n_total());
  return s;
}

}  // namespace lvs
