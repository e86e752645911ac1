#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "lvs/metrics.hpp"
#include "lvs/rng.hpp"

using namespace lvs;

namespace {

// decisions/labels with exact rates: 5 legit (1 flagged), 10 malicious (7 caught)
void alpha02_beta07(std::vector<Verdict>& decisions, std::vector<Verdict>& labels) {
  decisions.clear();
  labels.clear();
  for (int i = 0; i < 5; ++i) {
    labels.push_back(Verdict::Legitimate);
    decisions.push_back(i == 0 ? Verdict::Malicious : Verdict::Legitimate);
  }
  for (int i = 0; i < 10; ++i) {
    labels.push_back(Verdict::Malicious);
    decisions.push_back(i < 7 ? Verdict::Malicious : Verdict::Legitimate);
  }
}

}  // namespace

TEST_CASE("total error arithmetic under equal priors") {
  std::vector<Verdict> d, l;
  alpha02_beta07(d, l);
  const MetricsReport r = compute_metrics(d, l, 0.5);
  CHECK(*r.alpha == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(*r.beta == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(*r.total_error == 0.5 * 0.2 + 0.5 * 0.3);
  CHECK(*r.total_error == r.prior_h0 * *r.alpha + r.prior_h1 * (1.0 - *r.beta));
  CHECK(r.undefined_flags().empty());
}

TEST_CASE("perfect and constant detectors") {
  std::vector<Verdict> labels{Verdict::Legitimate, Verdict::Malicious,
                              Verdict::Legitimate, Verdict::Malicious};
  const MetricsReport perfect = compute_metrics(labels, labels, 0.5);
  CHECK(*perfect.total_error == 0.0);

  std::vector<Verdict> all_legit(labels.size(), Verdict::Legitimate);
  const MetricsReport lazy = compute_metrics(all_legit, labels, 0.5);
  CHECK(*lazy.alpha == 0.0);
  CHECK(*lazy.beta == 0.0);
  CHECK(*lazy.total_error == 0.5);
}

TEST_CASE("empirical priors turn total error into the misclassification rate") {
  Rng rng(5);
  std::vector<Verdict> d, l;
  std::size_t wrong = 0;
  for (int i = 0; i < 5000; ++i) {
    const Verdict label =
        rng.uniform() < 0.2 ? Verdict::Malicious : Verdict::Legitimate;
    const Verdict dec =
        rng.uniform() < 0.3 ? Verdict::Malicious : Verdict::Legitimate;
    l.push_back(label);
    d.push_back(dec);
    wrong += dec != label ? 1 : 0;
  }
  const MetricsReport r = compute_metrics_empirical(d, l);
  CHECK(r.prior_h1 ==
        doctest::Approx(static_cast<double>(r.n_malicious) / r.n_total())
            .epsilon(1e-15));
  CHECK(*r.total_error ==
        doctest::Approx(static_cast<double>(wrong) / l.size()).epsilon(1e-12));
}

TEST_CASE("metrics are invariant under a joint permutation") {
  std::vector<Verdict> d, l;
  alpha02_beta07(d, l);
  std::vector<std::size_t> idx(d.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(3);
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
  }
  std::vector<Verdict> dp, lp;
  for (std::size_t i : idx) {
    dp.push_back(d[i]);
    lp.push_back(l[i]);
  }
  const MetricsReport a = compute_metrics(d, l, 0.5);
  const MetricsReport b = compute_metrics(dp, lp, 0.5);
  CHECK(*a.alpha == *b.alpha);
  CHECK(*a.beta == *b.beta);
  CHECK(*a.total_error == *b.total_error);
}

TEST_CASE("absent classes leave rates undefined") {
  std::vector<Verdict> labels(8, Verdict::Legitimate);
  std::vector<Verdict> decisions(8, Verdict::Legitimate);
  decisions[2] = Verdict::Malicious;

  SUBCASE("fixed nonzero prior on the absent class blocks total error") {
    const MetricsReport r = compute_metrics(decisions, labels, 0.5);
    CHECK(r.alpha.has_value());
    CHECK_FALSE(r.beta.has_value());
    CHECK_FALSE(r.total_error.has_value());
    const auto flags = r.undefined_flags();
    CHECK(std::find(flags.begin(), flags.end(), "beta") != flags.end());
    CHECK(std::find(flags.begin(), flags.end(), "total_error") != flags.end());
  }
  SUBCASE("empirical priors give the absent class weight zero") {
    const MetricsReport r = compute_metrics_empirical(decisions, labels);
    CHECK(r.prior_h1 == 0.0);
    CHECK(*r.total_error == *r.alpha);
  }
}

TEST_CASE("metrics input validation") {
  std::vector<Verdict> d{Verdict::Legitimate};
  std::vector<Verdict> l{Verdict::Legitimate, Verdict::Malicious};
  CHECK_THROWS_AS(compute_metrics(d, l, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics({}, {}, 0.5), std::invalid_argument);
  std::vector<Verdict> one{Verdict::Legitimate};
  CHECK_THROWS_AS(compute_metrics(one, one, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics(one, one, -0.1), std::invalid_argument);
}

TEST_CASE("q_function basics") {
  CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q_function(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-9));
  for (double x : {0.3, 1.1, 2.7}) {
    CHECK(q_function(-x) + q_function(x) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("analytic LRT error") {
  SUBCASE("coincident hypothesis means") {
    std::vector<double> u{100.0, 200.0};
    CHECK(analytic_lrt_error(u, u, 300.0) == 0.5);
  }
  SUBCASE("hand-computed separation") {
    // ||v-u|| = 1515.2 ns at sigma 300 -> Q(2.5253...) ~ 0.0058
    std::vector<double> u{0.0, 1515.2};
    std::vector<double> v{0.0, 0.0};
    CHECK(analytic_lrt_error(u, v, 300.0) ==
          doctest::Approx(0.00578).epsilon(0.01));
    CHECK(analytic_lrt_error(u, v, 300.0) ==
          doctest::Approx(q_function(1515.2 / 600.0)).epsilon(1e-15));
  }
  SUBCASE("separation blowing up kills the error") {
    std::vector<double> u{0.0, 1.0e9};
    std::vector<double> v{0.0, 0.0};
    CHECK(analytic_lrt_error(u, v, 300.0) == 0.0);
  }
  SUBCASE("validation") {
    std::vector<double> u{1.0, 2.0}, v{1.0};
    CHECK_THROWS_AS(analytic_lrt_error(u, v, 300.0), std::invalid_argument);
    std::vector<double> w{1.0, 2.0};
    CHECK_THROWS_AS(analytic_lrt_error(u, w, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(analytic_lrt_error(u, w, -3.0), std::invalid_argument);
  }
}

TEST_CASE("summary CSV row formatting") {
  SummaryRow row;
  row.method = "lrt";
  row.n_bs = 4;
  row.sigma_ns = 300.0;
  row.nlos_ns = 500.0;
  row.po_test = 0.0005;
  std::vector<Verdict> d, l;
  alpha02_beta07(d, l);
  row.report = compute_metrics(d, l, 0.5);
  CHECK(summary_csv_header() ==
        "method,n_bs,sigma_ns,nlos_ns,po_test,alpha,beta,total_error,n");
  CHECK(summary_csv_row(row) ==
        "lrt,4,300.000000,500.000000,0.000500,0.200000,0.700000,0.250000,15");
}
