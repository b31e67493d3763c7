#include "gtdesign/simulation.hpp"

#include <cmath>
#include <vector>

#include "gtdesign/rng.hpp"
#include "gtdesign/solver.hpp"
#include "parallel.hpp"

namespace gtdesign {

SampleData sample_outcomes(const ExactDesign& design, const Params& theta, std::uint64_t seed,
                           std::uint64_t replication) {
  SampleData data{design.sizes(), design.counts(), Eigen::VectorXi(design.size())};
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    StreamRng rng(stream_key(seed, replication, static_cast<std::uint64_t>(i)));
    const double pi = evaluate_model(static_cast<double>(design.sizes()(i)), theta).pi;
    data.positives(i) = sample_binomial(design.counts()(i), pi, rng);
  }
  return data;
}

MseMatrix simulate_mse(const ExactDesign& design, const Params& theta, long replications,
                       std::uint64_t seed, unsigned threads) {
  if (replications < 1) throw InvalidArgument("at least one replication is required");
  const auto count = static_cast<std::size_t>(replications);
  std::vector<Eigen::Vector3d> errors(count);
  std::vector<char> flagged(count, 0);
  const Eigen::Vector3d truth = theta.vector();

  detail::parallel_for(count, threads, [&](std::size_t t) {
    const auto data = sample_outcomes(design, theta, seed, t);
    const auto fit = mle_fit(design, data);
    errors[t] = fit.estimate.vector() - truth;
    flagged[t] = fit.boundary ? 1 : 0;
  });

  MseMatrix out;
  out.replications = replications;
  for (std::size_t t = 0; t < count; ++t) {
    out.m.noalias() += errors[t] * errors[t].transpose();
    out.failures += flagged[t];
  }
  out.m *= static_cast<double>(design.total_trials()) / static_cast<double>(replications);
  return out;
}

EfficiencyReport efficiencies_from_mse(const MseMatrix& mse, const Params& theta,
                                       const Bounds& bounds) {
  Design reference_d = d_optimal_design(theta, bounds);
  Design reference_s = ds_optimal_design(theta, bounds);

  const double det_mse = mse.m.determinant();
  if (!(det_mse > 0.0) || !(mse.m(0, 0) > 0.0))
    throw EfficiencyUndefined("simulated MSE matrix is singular");

  // |M(xi_D)^{-1}| = exp(-log|M(xi_D)|);  (M(xi_s)^{-1})_11 = exp(-Phi_s)
  const double log_det_inv_d = -d_criterion(information_matrix(reference_d, theta));
  const double inv11_s = std::exp(-ds_criterion(reference_s, theta));

  const double eff_d = std::exp((log_det_inv_d - std::log(det_mse)) / 3.0);
  const double eff_s = inv11_s / mse.m(0, 0);
  return EfficiencyReport{eff_d, eff_s, std::move(reference_d), std::move(reference_s), mse};
}

EfficiencyReport efficiencies(const ExactDesign& design, const Params& theta, long replications,
                              std::uint64_t seed, const Bounds& bounds, unsigned threads) {
  return efficiencies_from_mse(simulate_mse(design, theta, replications, seed, threads), theta,
                               bounds);
}

}  // namespace gtdesign
