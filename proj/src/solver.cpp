#include "gtdesign/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gtdesign {

namespace {

// 2/a * (1 + (1 + delta0/a) / (log a - delta0 (1/a - 1))), shared by both equations.
double boundary_term(double a, const DerivedConstants& k) {
  const double denom = std::log(a) - k.delta0 * (1.0 / a - 1.0);
  return 2.0 / a * (1.0 + (1.0 + k.delta0 / a) / denom);
}

double curvature_term(double a, const DerivedConstants& k) {
  return 1.0 / (k.delta * k.c + a) - 1.0 / (k.c - a);
}

template <typename F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

// Dense sign scan on (r, 1) followed by bisection inside the unique bracket.
template <typename F>
RootSolution solve_scanned(F&& f, const DerivedConstants& k, const char* name) {
  const double lo = k.r + kRootEndpointOffset;
  const double hi = 1.0 - kRootEndpointOffset;
  const double step = (hi - lo) / (kRootScanPoints - 1);

  int brackets = 0;
  double bracket_lo = 0, bracket_hi = 0;
  double prev_x = lo;
  double prev_f = f(lo);
  for (int i = 1; i < kRootScanPoints; ++i) {
    const double x = i == kRootScanPoints - 1 ? hi : lo + i * step;
    const double fx = f(x);
    if (!std::isfinite(fx) || !std::isfinite(prev_f))
      throw RootBracketError(std::string(name) + ": non-finite value during root scan");
    if (std::signbit(fx) != std::signbit(prev_f)) {
      if (++brackets == 1) {
        bracket_lo = prev_x;
        bracket_hi = x;
      }
    }
    prev_x = x;
    prev_f = fx;
  }
  if (brackets == 0)
    throw RootBracketError(std::string(name) + ": no sign change on (r, 1)");
  if (brackets > 1)
    throw RootAmbiguityError(std::string(name) + ": " + std::to_string(brackets) +
                             " sign changes on (r, 1), expected exactly one");

  RootSolution sol;
  sol.a = bisect(f, bracket_lo, bracket_hi);
  sol.residual = f(sol.a);
  sol.bracket_count = brackets;
  return sol;
}

}  // namespace

DerivedConstants derived_constants(const Params& theta, const Bounds& bounds) {
  DerivedConstants k;
  k.c = theta.sensitivity() / (theta.discrimination() * theta.survival(bounds.lower()));
  k.delta = (1.0 - theta.sensitivity()) / theta.sensitivity();
  k.r = theta.survival(bounds.width());
  k.delta0 = k.r * std::log(k.r) / (1.0 - k.r);
  return k;
}

double d_equation(double a, const DerivedConstants& k) {
  return boundary_term(a, k) - curvature_term(a, k);
}

double ds_delta1(double a, const DerivedConstants& k) {
  const double at_one = std::sqrt((k.c - 1.0) * (k.delta * k.c + 1.0));
  const double at_r = std::sqrt((k.c - k.r) * (k.delta * k.c + k.r));
  const double at_a = std::sqrt((k.c - a) * (k.delta * k.c + a));
  return ((a - k.r) * at_one + (1.0 - a) * at_r) / ((1.0 - k.r) * at_a);
}

double ds_delta2(double a, const DerivedConstants& k) {
  const double at_one = std::sqrt((k.c - 1.0) * (k.delta * k.c + 1.0));
  const double at_r = std::sqrt((k.c - k.r) * (k.delta * k.c + k.r));
  const double at_a = std::sqrt((k.c - a) * (k.delta * k.c + a));
  return (at_one - at_r) / ((1.0 - k.r) * at_a);
}

double ds_equation(double a, const DerivedConstants& k) {
  return (1.0 + ds_delta1(a, k)) * boundary_term(a, k) - curvature_term(a, k) -
         2.0 * ds_delta2(a, k);
}

RootSolution solve_d_equation(const DerivedConstants& k) {
  return solve_scanned([&k](double a) { return d_equation(a, k); }, k, "D equation");
}

RootSolution solve_ds_equation(const DerivedConstants& k) {
  return solve_scanned([&k](double a) { return ds_equation(a, k); }, k, "Ds equation");
}

double size_from_root(double a, const Params& theta, const Bounds& bounds) {
  return bounds.lower() + std::log(a) / theta.log_survival();
}

Design d_optimal_design(const Params& theta, const Bounds& bounds) {
  const auto root = solve_d_equation(derived_constants(theta, bounds));
  Eigen::Vector3d sizes(bounds.lower(), size_from_root(root.a, theta, bounds), bounds.upper());
  return Design::equally_weighted(sizes);
}

WeightSolution ds_weights(const Vector3<double>& sizes, const Params& theta) {
  if (!(sizes(0) < sizes(1) && sizes(1) < sizes(2)))
    throw InvalidSupport("Ds weights need three distinct increasing group sizes");
  WeightSolution out;
  out.q_values = ds_q_values(sizes, theta);
  const Eigen::Vector3d root_q = out.q_values.cwiseSqrt();
  const double total = root_q.sum();
  out.weights = root_q / total;
  const double det_f = gradient_matrix<double>(sizes, theta).determinant();
  out.max_criterion = std::log(det_f * det_f) - 2.0 * std::log(total);
  return out;
}

Design ds_optimal_design(const Params& theta, const Bounds& bounds) {
  const auto root = solve_ds_equation(derived_constants(theta, bounds));
  Eigen::Vector3d sizes(bounds.lower(), size_from_root(root.a, theta, bounds), bounds.upper());
  const auto w = ds_weights(sizes, theta);
  return Design(sizes, w.weights);
}

Design optimal_design(const Params& theta, const Bounds& bounds, Criterion criterion) {
  return criterion == Criterion::D ? d_optimal_design(theta, bounds)
                                   : ds_optimal_design(theta, bounds);
}

double criterion_value(const Design& design, const Params& theta, Criterion criterion) {
  return criterion == Criterion::D ? d_criterion(information_matrix(design, theta))
                                   : ds_criterion(design, theta);
}

OptimalityReport verify_optimality(const Design& design, const Params& theta,
                                   const Bounds& bounds, Criterion criterion, double grid_step) {
  if (!(grid_step > 0)) throw InvalidArgument("grid step must be positive");
  const Eigen::Matrix3d m = information_matrix(design, theta);

  Eigen::Matrix3d m_inv;
  Eigen::Matrix2d ms_inv;
  if (criterion == Criterion::D) {
    d_criterion(m);  // throws when singular
    m_inv = m.inverse();
  } else {
    if (!estimability(m).prevalence)
      throw CriterionUndefined("p0 is not estimable under this design");
    m_inv = symmetric_pseudo_inverse(m);
    ms_inv = symmetric_pseudo_inverse(m.bottomRightCorner<2, 2>());
  }

  // D: d(x) - 3.  Ds: -phi_s(x).  Nonpositive everywhere for an optimal design.
  auto violation = [&](double x) {
    const auto e = evaluate_model(x, theta);
    const double full = e.lambda * e.grad.dot(m_inv * e.grad);
    if (criterion == Criterion::D) return full - 3.0;
    const Eigen::Vector2d fs = e.grad.tail<2>();
    const double nuisance = e.lambda * fs.dot(ms_inv * fs);
    return -(1.0 - full + nuisance);
  };

  OptimalityReport report;
  report.criterion = criterion;
  report.grid_step = grid_step;
  report.max_violation = -std::numeric_limits<double>::infinity();

  auto consider = [&](double x) {
    const double v = violation(x);
    if (v > report.max_violation) {
      report.max_violation = v;
      report.argmax_size = x;
    }
  };

  const auto steps = static_cast<long>(std::floor(bounds.width() / grid_step + 1e-9));
  for (long i = 0; i <= steps; ++i) consider(bounds.lower() + static_cast<double>(i) * grid_step);
  if (bounds.lower() + static_cast<double>(steps) * grid_step < bounds.upper() - 1e-9)
    consider(bounds.upper());

  for (Eigen::Index i = 0; i < design.size(); ++i) {
    const double x = design.sizes()(i);
    const double v = violation(x);
    report.support_sizes.push_back(x);
    report.support_gaps.push_back(criterion == Criterion::D ? v : -v);
    consider(x);
  }
  return report;
}

}  // namespace gtdesign
