#include <doctest.h>

#include <random>

#include "gtdesign/rng.hpp"
#include "gtdesign/rounding.hpp"
#include "gtdesign/simulation.hpp"
#include "gtdesign/solver.hpp"

using namespace gtdesign;

namespace {

const Params kChlamydia(0.07, 0.93, 0.96);
const Bounds kBounds(1, 61);

ExactDesign chlamydia_d(int n = 3000) {
  return round_design(d_optimal_design(kChlamydia, kBounds), kChlamydia, n, Criterion::D);
}

Eigen::VectorXd expected_positives(const ExactDesign& d, const Params& t) {
  Eigen::VectorXd y(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    y(i) = d.counts()(i) * evaluate_model(static_cast<double>(d.sizes()(i)), t).pi;
  return y;
}

}  // namespace

TEST_CASE("stream generator basics") {
  StreamRng a(stream_key(1, 2, 3)), b(stream_key(1, 2, 3)), c(stream_key(1, 2, 4));
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differs = differs || x != z;
  }
  CHECK(differs);
  CHECK(stream_key(1, 0, 0) != stream_key(2, 0, 0));
  CHECK(stream_key(1, 1, 0) != stream_key(1, 0, 1));

  StreamRng u(99);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0);
    CHECK(v < 1);
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}

TEST_CASE("binomial sampler moments on both branches") {
  struct Case {
    int n;
    double p;
  };
  for (const Case& cs : {Case{10, 0.3}, Case{1000, 0.02}, Case{1000, 0.5}, Case{3000, 0.9},
                         Case{3000, 0.995}, Case{50, 0.999}}) {
    StreamRng rng(stream_key(5, static_cast<std::uint64_t>(cs.n), static_cast<std::uint64_t>(cs.p * 1e6)));
    const int draws = 20000;
    double sum = 0, sq = 0;
    for (int i = 0; i < draws; ++i) {
      const int k = sample_binomial(cs.n, cs.p, rng);
      REQUIRE(k >= 0);
      REQUIRE(k <= cs.n);
      sum += k;
      sq += static_cast<double>(k) * k;
    }
    const double mean = sum / draws;
    const double var = sq / draws - mean * mean;
    const double true_var = cs.n * cs.p * (1 - cs.p);
    CHECK(std::abs(mean - cs.n * cs.p) < 4 * std::sqrt(true_var / draws));
    CHECK(std::abs(var / true_var - 1) < 0.06);
  }
  StreamRng rng(1);
  CHECK(sample_binomial(10, 0.0, rng) == 0);
  CHECK(sample_binomial(10, 1.0, rng) == 10);
  CHECK(sample_binomial(0, 0.5, rng) == 0);
}

TEST_CASE("sample_outcomes") {
  const ExactDesign tiny(Eigen::Vector3i(1, 2, 3), Eigen::Vector3i(10, 10, 10));
  const Params rare(1e-12, 1, 1);
  long total = 0;
  for (int rep = 0; rep < 1000; ++rep) total += sample_outcomes(tiny, rare, 3, rep).positives.sum();
  CHECK(total <= 1);

  const ExactDesign d = chlamydia_d();
  const auto a = sample_outcomes(d, kChlamydia, 42, 7);
  const auto b = sample_outcomes(d, kChlamydia, 42, 7);
  CHECK(a.positives == b.positives);
  CHECK(a.trials == d.counts());
  CHECK(a.sizes == d.sizes());

  const int reps = 10000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int rep = 0; rep < reps; ++rep)
    mean += sample_outcomes(d, kChlamydia, 12, rep).positives.cast<double>().cwiseQuotient(
        d.counts().cast<double>());
  mean /= reps;
  for (int i = 0; i < 3; ++i) {
    const double pi = evaluate_model(static_cast<double>(d.sizes()(i)), kChlamydia).pi;
    const double se = std::sqrt(pi * (1 - pi) / d.counts()(i) / reps);
    CHECK(std::abs(mean(i) - pi) < 3 * se);
  }
}

TEST_CASE("standardized sample means are N(0,1) across seeds") {
  const ExactDesign d = chlamydia_d();
  const int seeds = 200, reps = 500;
  for (int i = 0; i < 3; ++i) {
    const double pi = evaluate_model(static_cast<double>(d.sizes()(i)), kChlamydia).pi;
    const double se = std::sqrt(pi * (1 - pi) / d.counts()(i) / reps);
    double sum = 0, sq = 0;
    for (int seed = 0; seed < seeds; ++seed) {
      double mean = 0;
      for (int rep = 0; rep < reps; ++rep)
        mean += static_cast<double>(sample_outcomes(d, kChlamydia, 1000 + seed, rep).positives(i)) /
                d.counts()(i);
      const double z = (mean / reps - pi) / se;
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / seeds) < 0.25);
    CHECK(sq / seeds > 0.75);
    CHECK(sq / seeds < 1.3);
  }
}

TEST_CASE("MLE inverts noiseless data exactly") {
  const ExactDesign d(Eigen::Vector3i(1, 17, 61), Eigen::Vector3i(1000, 1000, 1000));
  const auto fit = mle_fit(d, expected_positives(d, kChlamydia));
  CHECK(fit.path == MlePath::Saturated);
  CHECK_FALSE(fit.boundary);
  CHECK((fit.estimate.vector() - kChlamydia.vector()).cwiseAbs().maxCoeff() < 1e-8);

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> p0(0.01, 0.15), p(0.8, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const Params t(p0(rng), p(rng), p(rng));
    const auto f = mle_fit(d, expected_positives(d, t));
    CHECK((f.estimate.vector() - t.vector()).cwiseAbs().maxCoeff() < 1e-8);
  }

  // Four points: no saturated solution, scoring must find the truth.
  const ExactDesign four(Eigen::Vector4i(1, 10, 25, 61), Eigen::Vector4i(750, 750, 750, 750));
  const auto f4 = mle_fit(four, expected_positives(four, kChlamydia));
  CHECK(f4.path == MlePath::Scoring);
  CHECK((f4.estimate.vector() - kChlamydia.vector()).cwiseAbs().maxCoeff() < 1e-6);

  // The saturated point is also where forced scoring lands.
  const auto forced = mle_fit(d, expected_positives(d, kChlamydia), MleOptions{true});
  CHECK(forced.path == MlePath::Scoring);
  CHECK((forced.estimate.vector() - kChlamydia.vector()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("MLE on degenerate samples returns a flagged boundary estimate") {
  const ExactDesign d(Eigen::Vector3i(1, 17, 61), Eigen::Vector3i(1000, 1000, 1000));
  const auto zero = mle_fit(d, Eigen::VectorXd(Eigen::Vector3d(0, 0, 0)));
  CHECK(zero.boundary);
  const auto full = mle_fit(d, Eigen::VectorXd(Eigen::Vector3d(1000, 1000, 1000)));
  CHECK(full.boundary);
  // Decreasing response: inverted data cannot come from the model interior.
  const auto inverted = mle_fit(d, Eigen::VectorXd(Eigen::Vector3d(900, 500, 100)));
  CHECK(inverted.boundary);
  CHECK_THROWS_AS(mle_fit(d, Eigen::VectorXd(Eigen::Vector2d(1, 2))), InvalidArgument);
  CHECK_THROWS_AS(mle_fit(d, Eigen::VectorXd(Eigen::Vector3d(1, 2, 1001))), InvalidArgument);
}

TEST_CASE("saturated and scoring paths agree on simulated data") {
  const ExactDesign d = chlamydia_d();
  int compared = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto data = sample_outcomes(d, kChlamydia, 2024, rep);
    const auto fast = mle_fit(d, data);
    if (fast.path != MlePath::Saturated || fast.boundary) continue;
    const auto slow = mle_fit(d, data, MleOptions{true});
    CHECK((fast.estimate.vector() - slow.estimate.vector()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(slow.log_likelihood <= fast.log_likelihood + 1e-9);
    ++compared;
  }
  CHECK(compared > 150);
}

TEST_CASE("the MLE beats nearby parameter values") {
  const ExactDesign d = chlamydia_d();
  std::mt19937_64 rng(43);
  std::normal_distribution<double> z(0, 1e-3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto data = sample_outcomes(d, kChlamydia, 77, rep);
    const auto fit = mle_fit(d, data);
    const Eigen::VectorXd x = d.sizes().cast<double>();
    const Eigen::VectorXd n = d.counts().cast<double>();
    const Eigen::VectorXd y = data.positives.cast<double>();
    CHECK(fit.log_likelihood == doctest::Approx(log_likelihood(fit.estimate.vector(), x, n, y)));
    for (int j = 0; j < 20; ++j) {
      Eigen::Vector3d other = fit.estimate.vector() + Eigen::Vector3d(z(rng), z(rng), z(rng));
      other = other.cwiseMax(Eigen::Vector3d(1e-8, 0.5 + 1e-8, 0.5 + 1e-8))
                  .cwiseMin(Eigen::Vector3d(1 - 1e-8, 1, 1));
      CHECK(log_likelihood(other, x, n, y) <= fit.log_likelihood + 1e-9);
    }
  }
}

TEST_CASE("simulate_mse is bit-identical across thread counts") {
  const ExactDesign d = round_design(ds_optimal_design(kChlamydia, kBounds), kChlamydia, 3000, Criterion::Ds);
  const auto one = simulate_mse(d, kChlamydia, 600, 9, 1);
  for (unsigned threads : {2u, 3u, 7u, 0u}) {
    const auto many = simulate_mse(d, kChlamydia, 600, 9, threads);
    CHECK(many.m == one.m);
    CHECK(many.failures == one.failures);
  }
  CHECK(simulate_mse(d, kChlamydia, 600, 10, 1).m != one.m);
  CHECK_THROWS_AS(simulate_mse(d, kChlamydia, 0, 9), InvalidArgument);
}

TEST_CASE("MSE matrix properties and convergence") {
  const ExactDesign d = chlamydia_d();
  const Eigen::Matrix3d inverse = information_matrix(d.to_approximate(), kChlamydia).inverse();

  const auto small = simulate_mse(d, kChlamydia, 2500, 1);
  const auto large = simulate_mse(d, kChlamydia, 40000, 2);
  CHECK((large.m - large.m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * large.m.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(large.m);
  CHECK(es.eigenvalues().minCoeff() > 0);
  CHECK(large.replications == 40000);
  CHECK((large.m - inverse).norm() < (small.m - inverse).norm());

  // Boundary-flagged replications are rare at this sample size.
  CHECK(static_cast<double>(large.failures) / large.replications < 0.01);

  // Noiseless replication: zero error.
  const auto fit = mle_fit(d, expected_positives(d, kChlamydia));
  const Eigen::Vector3d e = fit.estimate.vector() - kChlamydia.vector();
  CHECK((e * e.transpose()).norm() < 1e-15);
}

TEST_CASE("scaled MSE approaches the inverse information as n grows") {
  const ExactDesign d3 = chlamydia_d(3000);
  const ExactDesign d30 = chlamydia_d(30000);
  const Eigen::Matrix3d inverse = information_matrix(d3.to_approximate(), kChlamydia).inverse();
  const auto m3 = simulate_mse(d3, kChlamydia, 5000, 5);
  const auto m30 = simulate_mse(d30, kChlamydia, 5000, 5);
  CHECK((m30.m - inverse).norm() < (m3.m - inverse).norm());
}

TEST_CASE("efficiencies") {
  const ExactDesign d = chlamydia_d();
  const auto report = efficiencies(d, kChlamydia, 4000, 8, kBounds);
  CHECK(report.eff_d > 0.9);
  CHECK(report.eff_d < 1.1);
  CHECK(report.eff_s > 0.6);
  CHECK(report.eff_s < 0.8);
  CHECK(report.reference_d.sizes()(1) == doctest::Approx(16.79).epsilon(1e-3));
  CHECK(report.reference_s.sizes()(1) == doctest::Approx(15.68).epsilon(1e-3));

  MseMatrix zero;
  zero.replications = 1;
  CHECK_THROWS_AS(efficiencies_from_mse(zero, kChlamydia, kBounds), EfficiencyUndefined);

  // Efficiencies computed from the asymptotic MSE are the analytic ones.
  MseMatrix asymptotic;
  asymptotic.m = information_matrix(d.to_approximate(), kChlamydia).inverse();
  const auto exact = efficiencies_from_mse(asymptotic, kChlamydia, kBounds);
  CHECK(exact.eff_d == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(exact.eff_d <= 1.0);
}
