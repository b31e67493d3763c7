#pragma once

#include <cstdint>

#include "gtdesign/model.hpp"

namespace gtdesign {

/// Observed positives per support point of an exact design.
struct SampleData {
  Eigen::VectorXi sizes;
  Eigen::VectorXi trials;
  Eigen::VectorXi positives;
};

/// Draws positives_i ~ Binomial(n_i, pi(x_i | theta)) independently across support
/// points. The draw at point i depends only on (seed, replication, i).
SampleData sample_outcomes(const ExactDesign& design, const Params& theta, std::uint64_t seed,
                           std::uint64_t replication);

// Closed box searched by the MLE.
inline constexpr double kPrevalenceMargin = 1e-8;
inline constexpr double kAccuracyMargin = 1e-8;
/// An estimate within this distance of the box boundary is flagged.
inline constexpr double kBoundaryFlagDistance = 1e-6;
/// Convergence threshold on the norm of the score in the logit parameterization.
inline constexpr double kScoreTolerance = 1e-9;

enum class MlePath { Saturated, Scoring };

struct MleOptions {
  /// Skip the saturated inversion and always run multi-start Fisher scoring.
  bool force_fallback = false;
};

struct MleResult {
  Params estimate;
  bool boundary = false;
  MlePath path = MlePath::Scoring;
  double log_likelihood = 0;
};

/// Binomial log-likelihood (without the additive constant) at an arbitrary
/// parameter vector; -inf where a response probability hits 0 or 1 with data
/// on that side.
double log_likelihood(const Eigen::Vector3d& theta, const Eigen::VectorXd& sizes,
                      const Eigen::VectorXd& trials, const Eigen::VectorXd& positives);

/// Maximum-likelihood fit over p0 in [1e-8, 1-1e-8], p1, p2 in [0.5+1e-8, 1].
///
/// Three-point designs first try the saturated solution pi(x_i) = y_i / n_i; when
/// it lies in the box it is the global maximizer. Otherwise (and for designs with
/// more points) the fit runs Fisher scoring from 8 lattice starts in a logit
/// parameterization of the box and keeps the best.
MleResult mle_fit(const ExactDesign& design, const SampleData& data, MleOptions options = {});

/// Same, with real-valued positives (e.g. expected counts n_i pi_i).
MleResult mle_fit(const ExactDesign& design, const Eigen::VectorXd& positives,
                  MleOptions options = {});

/// n-scaled Monte Carlo mean squared error matrix of the MLE.
struct MseMatrix {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  long replications = 0;
  long failures = 0;  ///< replications whose estimate was boundary-flagged
};

/// Runs `replications` independent experiments. Results are bit-identical for
/// any thread count (0 picks the hardware concurrency): replication t uses
/// streams keyed by (seed, t) and the reduction runs in index order.
MseMatrix simulate_mse(const ExactDesign& design, const Params& theta, long replications,
                       std::uint64_t seed, unsigned threads = 0);

struct EfficiencyReport {
  double eff_d;
  double eff_s;
  Design reference_d;
  Design reference_s;
  MseMatrix mse;
};

/// eff_D = (|M(xi_D)^{-1}| / |MSE|)^{1/3}, eff_s = (M(xi_s)^{-1})_11 / MSE_11 with
/// xi_D, xi_s the optimal approximate designs under theta and bounds.
EfficiencyReport efficiencies_from_mse(const MseMatrix& mse, const Params& theta,
                                       const Bounds& bounds);

EfficiencyReport efficiencies(const ExactDesign& design, const Params& theta, long replications,
                              std::uint64_t seed, const Bounds& bounds, unsigned threads = 0);

}  // namespace gtdesign
