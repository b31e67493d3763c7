#pragma once

#include <vector>

#include "gtdesign/model.hpp"

namespace gtdesign {

/// Constants that parameterize the root equations for the intermediate size.
///   c      = p1 / {(p1+p2-1)(1-p0)^{x_L}}  (> 1)
///   delta  = (1-p1)/p1                     (in [0,1))
///   r      = (1-p0)^{x_U-x_L}              (in (0,1))
///   delta0 = r log r / (1-r)               (< 0)
struct DerivedConstants {
  double c = 0;
  double delta = 0;
  double r = 0;
  double delta0 = 0;
};

DerivedConstants derived_constants(const Params& theta, const Bounds& bounds);

/// Left-minus-right side of the D-optimality root equation at a in (r, 1).
double d_equation(double a, const DerivedConstants& k);
/// Left-minus-right side of the Ds-optimality root equation at a in (r, 1).
double ds_equation(double a, const DerivedConstants& k);
double ds_delta1(double a, const DerivedConstants& k);
double ds_delta2(double a, const DerivedConstants& k);

struct RootSolution {
  double a = 0;
  double residual = 0;
  int bracket_count = 0;  ///< sign changes seen by the scan
};

inline constexpr int kRootScanPoints = 10000;
inline constexpr double kRootEndpointOffset = 1e-12;

RootSolution solve_d_equation(const DerivedConstants& k);
RootSolution solve_ds_equation(const DerivedConstants& k);

/// Maps a root a = (1-p0)^{x - x_L} back to the group size x.
double size_from_root(double a, const Params& theta, const Bounds& bounds);

/// Equal weights on {x_L, x2*, x_U}.
Design d_optimal_design(const Params& theta, const Bounds& bounds);

struct WeightSolution {
  Vector3<double> q_values;
  Vector3<double> weights;
  double max_criterion = 0;  ///< log|M_f|^2 - 2 log sum sqrt(Q_i)
};

/// Ds-optimal weights on three fixed sizes x_1 < x_2 < x_3.
WeightSolution ds_weights(const Vector3<double>& sizes, const Params& theta);

/// {x_L, x2^s, x_U} with weights from ds_weights.
Design ds_optimal_design(const Params& theta, const Bounds& bounds);

Design optimal_design(const Params& theta, const Bounds& bounds, Criterion criterion);

/// Criterion value of a design: log|M| for D, -log (M^-)_{11} for Ds.
double criterion_value(const Design& design, const Params& theta, Criterion criterion);

inline constexpr double kDefaultGridStep = 0.01;
inline constexpr double kCertificationTolerance = 1e-6;

struct OptimalityReport {
  Criterion criterion = Criterion::D;
  double max_violation = 0;      ///< D: max d(x) - 3; Ds: max -phi_s(x)
  double argmax_size = 0;
  double grid_step = kDefaultGridStep;
  std::vector<double> support_sizes;
  std::vector<double> support_gaps;  ///< D: d(x_i) - 3; Ds: phi_s(x_i)

  bool certified(double tolerance = kCertificationTolerance) const {
    return max_violation < tolerance;
  }
};

/// Equivalence-theorem check of a design over a grid on [x_L, x_U].
OptimalityReport verify_optimality(const Design& design, const Params& theta,
                                   const Bounds& bounds, Criterion criterion,
                                   double grid_step = kDefaultGridStep);

}  // namespace gtdesign
