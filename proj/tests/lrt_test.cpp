#include <cmath>

#include <doctest.h>

#include "lvs/lrt.hpp"
#include "lvs/metrics.hpp"

using namespace lvs;

namespace {

double norm_sq_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return s;
}

// fixed-location dataset: the sampler draws claims; these tests pin them
Dataset fixed_claim_dataset(const Scenario& sc, const ChannelParams& params,
                            const Location& claimed, std::size_t n,
                            double malicious_fraction, std::uint64_t seed) {
  Dataset ds;
  ds.params = params;
  ds.scenario = sc;
  ds.seed = seed;
  ds.malicious_fraction = malicious_fraction;
  Rng rng(seed);
  const std::vector<double> u = claimed_toa_vector(sc, claimed);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    s.claimed = claimed;
    s.claimed_toa = u;
    s.label = rng.uniform() < malicious_fraction ? Verdict::Malicious
                                                 : Verdict::Legitimate;
    s.observed_toa = s.label == Verdict::Malicious
                         ? observe_malicious(sc, params, claimed, rng)
                         : observe_legitimate(sc, params, claimed, rng);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

TEST_CASE("log likelihood ratio closed form") {
  const Scenario sc = Scenario::corners4();
  const Location claimed{250.0, 125.0};
  const std::vector<double> u = claimed_toa_vector(sc, claimed);
  const std::vector<double> v = attacker_mean_vector(sc, claimed);
  const LrtDetector det{300.0, 1.0};

  SUBCASE("observation at the claimed mean favors H0") {
    const double expected = -norm_sq_diff(u, v) / (2.0 * 300.0 * 300.0);
    CHECK(log_likelihood_ratio(det, u, u, v) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(log_likelihood_ratio(det, u, u, v) < 0.0);
  }
  SUBCASE("observation at the attacker mean favors H1") {
    const double expected = norm_sq_diff(u, v) / (2.0 * 300.0 * 300.0);
    CHECK(log_likelihood_ratio(det, v, u, v) ==
          doctest::Approx(expected).epsilon(1e-12));
    // hand-computed: ||u-v||^2 ~ 2.296e6 ns^2 over 2*300^2
    CHECK(log_likelihood_ratio(det, v, u, v) ==
          doctest::Approx(12.7555).epsilon(1e-4));
  }
  SUBCASE("length mismatch") {
    std::vector<double> short_y{1.0, 2.0};
    CHECK_THROWS_AS(log_likelihood_ratio(det, short_y, u, v),
                    std::invalid_argument);
  }
}

TEST_CASE("log likelihood ratio exact symmetries") {
  const LrtDetector det{300.0, 1.0};
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(4), u(4), v(4);
    for (int k = 0; k < 4; ++k) {
      y[k] = rng.uniform_in(0.0, 3000.0);
      u[k] = rng.uniform_in(0.0, 3000.0);
      v[k] = rng.uniform_in(0.0, 3000.0);
    }
    const double base = log_likelihood_ratio(det, y, u, v);

    // antisymmetry under hypothesis swap
    REQUIRE(std::abs(base + log_likelihood_ratio(det, y, v, u)) < 1e-9);

    // invariance under a common shift of y, u and v
    const double c = rng.uniform_in(-500.0, 500.0);
    std::vector<double> ys = y, us = u, vs = v;
    for (int k = 0; k < 4; ++k) {
      ys[k] += c;
      us[k] += c;
      vs[k] += c;
    }
    REQUIRE(std::abs(base - log_likelihood_ratio(det, ys, us, vs)) < 1e-9);
  }
}

TEST_CASE("decision rule and tie handling") {
  const Scenario sc = Scenario::corners4();
  const Location claimed{250.0, 125.0};
  const std::vector<double> u = claimed_toa_vector(sc, claimed);
  const std::vector<double> v = attacker_mean_vector(sc, claimed);

  SUBCASE("lambda 1 splits on the sign of the log ratio") {
    const LrtDetector det{300.0, 1.0};
    CHECK(decide(det, u, u, v) == Verdict::Legitimate);
    CHECK(decide(det, v, u, v) == Verdict::Malicious);
  }
  SUBCASE("coincident hypotheses resolve malicious by the tie rule") {
    const LrtDetector det{300.0, 1.0};
    CHECK(decide(det, u, u, u) == Verdict::Malicious);
  }
  SUBCASE("a huge threshold decides legitimate everywhere") {
    const LrtDetector det{300.0, 1e300};
    CHECK(decide(det, v, u, v) == Verdict::Legitimate);
  }
  SUBCASE("detector validation") {
    CHECK_THROWS_AS(decide(LrtDetector{0.0, 1.0}, u, u, v),
                    std::invalid_argument);
    CHECK_THROWS_AS(decide(LrtDetector{300.0, 0.0}, u, u, v),
                    std::invalid_argument);
  }
}

TEST_CASE("per-sample decision flags degenerate geometry") {
  const Scenario sc = Scenario::corners4();
  const ChannelParams params{300.0, 0.0, 0.0};
  const LrtDetector det{300.0, 1.0};

  SUBCASE("symmetric center claim") {
    const Dataset ds =
        fixed_claim_dataset(sc, params, {500.0, 250.0}, 5, 0.0, 31u);
    for (const auto& s : ds.samples) {
      const LrtDecision d = decide_sample(det, s);
      CHECK(d.undecidable_geometry);
      CHECK(d.verdict == Verdict::Malicious);  // log LR is exactly 0
      CHECK(d.log_lr == 0.0);
    }
  }
  SUBCASE("generic claim") {
    const Dataset ds =
        fixed_claim_dataset(sc, params, {250.0, 125.0}, 5, 0.0, 32u);
    for (const auto& s : ds.samples) {
      CHECK_FALSE(decide_sample(det, s).undecidable_geometry);
    }
  }
}

TEST_CASE("dataset evaluation") {
  const Scenario sc = Scenario::corners4();
  const LrtDetector det{300.0, 1.0};

  SUBCASE("empty dataset") {
    Dataset empty;
    CHECK_THROWS_AS(evaluate_lrt(det, empty), std::invalid_argument);
  }
  SUBCASE("noiseless asymmetric datasets separate perfectly") {
    const ChannelParams params{1e-9, 0.0, 0.0};
    const LrtDetector tight{1e-9, 1.0};
    const Dataset ds = generate_dataset(sc, params, 2000, 0.5, 41u);
    const MetricsReport r = evaluate_lrt(tight, ds);
    CHECK(*r.total_error == 0.0);
    CHECK(*r.alpha == 0.0);
    CHECK(*r.beta == 1.0);
  }
  SUBCASE("Monte Carlo agrees with the analytic oracle without NLoS") {
    const ChannelParams params{300.0, 0.0, 0.0};
    const Location claimed{250.0, 125.0};
    const std::size_t n = 100000;
    const Dataset ds = fixed_claim_dataset(sc, params, claimed, n, 0.5, 42u);
    const MetricsReport r = evaluate_lrt(det, ds);
    const double expected = analytic_lrt_error(
        claimed_toa_vector(sc, claimed), attacker_mean_vector(sc, claimed),
        300.0);
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(*r.total_error - expected) <= 3.0 * se);
  }
  SUBCASE("mismatch against NLoS grows with the bias level") {
    double prev = 0.0;
    for (double nlos : {300.0, 700.0}) {
      const ChannelParams params{300.0, nlos, 0.0};
      const Dataset ds = generate_dataset(sc, params, 20000, 0.5, 43u);
      const double xi = *evaluate_lrt(det, ds).total_error;
      CHECK(xi > prev);
      prev = xi;
    }
  }
}

TEST_CASE("ROC sweep") {
  const Scenario sc = Scenario::corners4();
  const ChannelParams params{300.0, 300.0, 0.0};
  const Dataset ds = generate_dataset(sc, params, 5000, 0.5, 51u);
  const LrtDetector det{300.0, 1.0};

  SUBCASE("threshold list validation") {
    CHECK_THROWS_AS(roc_sweep(det, ds, {}), std::invalid_argument);
    CHECK_THROWS_AS(roc_sweep(det, ds, {-1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(roc_sweep(det, ds, {2.0, 1.0}), std::invalid_argument);
  }
  SUBCASE("endpoints and monotonicity") {
    const std::vector<double> lambdas{1e-200, 0.01, 0.1, 1.0, 10.0, 100.0, 1e200};
    const auto points = roc_sweep(det, ds, lambdas);
    REQUIRE(points.size() == lambdas.size());
    CHECK(*points.front().alpha == 1.0);
    CHECK(*points.front().beta == 1.0);
    CHECK(*points.back().alpha == 0.0);
    CHECK(*points.back().beta == 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
      CHECK(*points[i].alpha <= *points[i - 1].alpha);
      CHECK(*points[i].beta <= *points[i - 1].beta);
    }
  }
  SUBCASE("lambda 1 point matches evaluate_lrt") {
    const auto points = roc_sweep(det, ds, {1.0});
    const MetricsReport r = evaluate_lrt(det, ds);
    CHECK(*points[0].alpha == *r.alpha);
    CHECK(*points[0].beta == *r.beta);
  }
}
