#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gtdesign/simulation.hpp"

namespace gtdesign {

namespace {

const Eigen::Vector3d kLower(kPrevalenceMargin, 0.5 + kAccuracyMargin, 0.5 + kAccuracyMargin);
const Eigen::Vector3d kUpper(1.0 - kPrevalenceMargin, 1.0, 1.0);

constexpr int kMaxScoringIterations = 500;
constexpr int kMaxHalvings = 60;
constexpr double kMaxLogitStep = 20.0;

struct Observations {
  Eigen::VectorXd x;
  Eigen::VectorXd n;
  Eigen::VectorXd y;
};

bool in_box(const Eigen::Vector3d& t) {
  return (t.array() >= kLower.array()).all() && (t.array() <= kUpper.array()).all();
}

bool near_boundary(const Eigen::Vector3d& t) {
  return ((t - kLower).array() < kBoundaryFlagDistance).any() ||
         ((kUpper - t).array() < kBoundaryFlagDistance).any();
}

double response(const Eigen::Vector3d& t, double x) {
  return t(1) - (t(1) + t(2) - 1.0) * std::exp(x * std::log1p(-t(0)));
}

// Solve pi(x_i) = y_i / n_i exactly. Returns nothing if the solution leaves the box.
std::optional<Eigen::Vector3d> saturated_solution(const Observations& obs) {
  const Eigen::VectorXd p = obs.y.cwiseQuotient(obs.n);
  const double d21 = p(1) - p(0);
  const double d31 = p(2) - p(0);
  if (!(d21 > 0.0 && d31 > d21)) return std::nullopt;
  const double ratio = d21 / d31;
  const double gap2 = obs.x(1) - obs.x(0);
  const double gap3 = obs.x(2) - obs.x(0);

  // (b^{x1} - b^{x2}) / (b^{x1} - b^{x3}) decreases from 1 (b -> 0) to gap2/gap3 (b -> 1).
  auto excess = [&](double b) {
    const double lb = std::log(b);
    return std::expm1(gap2 * lb) / std::expm1(gap3 * lb) - ratio;
  };
  double lo = 1.0 - kUpper(0);
  double hi = 1.0 - kLower(0);
  if (excess(lo) < 0.0 || excess(hi) > 0.0) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) >= 0.0 ? lo : hi) = mid;
  }
  const double b = 0.5 * (lo + hi);

  const double b1 = std::exp(obs.x(0) * std::log(b));
  const double b2 = std::exp(obs.x(1) * std::log(b));
  const double s = d21 / (b1 - b2);
  const double p1 = p(0) + s * b1;
  const double p2 = 1.0 + s - p1;
  Eigen::Vector3d t(1.0 - b, p1, p2);
  if (!in_box(t)) return std::nullopt;
  return t;
}

struct ScoreInfo {
  Eigen::Vector3d score;
  Eigen::Matrix3d info;
};

ScoreInfo score_and_information(const Eigen::Vector3d& t, const Observations& obs) {
  ScoreInfo out{Eigen::Vector3d::Zero(), Eigen::Matrix3d::Zero()};
  const double s = t(1) + t(2) - 1.0;
  const double log_b = std::log1p(-t(0));
  for (Eigen::Index i = 0; i < obs.x.size(); ++i) {
    const double x = obs.x(i);
    const double bx = std::exp(x * log_b);
    const double pi = t(1) - s * bx;
    const Eigen::Vector3d f(x * s * std::exp((x - 1.0) * log_b), 1.0 - bx, -bx);
    const double y = obs.y(i);
    const double miss = obs.n(i) - y;
    double w = 0.0;
    if (y > 0.0) w += y / pi;
    if (miss > 0.0) w -= miss / (1.0 - pi);
    out.score += w * f;
    const double pc = std::clamp(pi, 1e-12, 1.0 - 1e-12);
    out.info.noalias() += (obs.n(i) / (pc * (1.0 - pc))) * f * f.transpose();
  }
  return out;
}

// theta = lower + (upper - lower) * sigmoid(eta)
Eigen::Vector3d to_theta(const Eigen::Vector3d& eta) {
  const Eigen::Array3d sig = 1.0 / (1.0 + (-eta.array()).exp());
  return kLower.array() + (kUpper - kLower).array() * sig;
}

Eigen::Vector3d to_eta(const Eigen::Vector3d& t) {
  const Eigen::Array3d u = (t - kLower).array() / (kUpper - kLower).array();
  return (u / (1.0 - u)).log();
}

Eigen::Vector3d jacobian_diagonal(const Eigen::Vector3d& eta) {
  const Eigen::Array3d sig = 1.0 / (1.0 + (-eta.array()).exp());
  return (kUpper - kLower).array() * sig * (1.0 - sig);
}

struct ScoringResult {
  Eigen::Vector3d theta;
  double log_likelihood;
};

ScoringResult fisher_scoring(const Eigen::Vector3d& start, const Observations& obs) {
  Eigen::Vector3d eta = to_eta(start);
  Eigen::Vector3d theta = to_theta(eta);
  double ll = log_likelihood(theta, obs.x, obs.n, obs.y);

  for (int it = 0; it < kMaxScoringIterations; ++it) {
    const auto si = score_and_information(theta, obs);
    const Eigen::Vector3d jac = jacobian_diagonal(eta);
    const Eigen::Vector3d grad = jac.cwiseProduct(si.score);
    if (grad.norm() < kScoreTolerance) break;

    // The scoring step in eta is J^{-1} I_theta^{-1} score_theta.
    Eigen::Vector3d step = si.info.ldlt().solve(si.score);
    for (int j = 0; j < 3; ++j) {
      step(j) = jac(j) > 0.0 ? step(j) / jac(j) : 0.0;
      if (!std::isfinite(step(j))) step(j) = grad(j) > 0.0 ? kMaxLogitStep : -kMaxLogitStep;
      step(j) = std::clamp(step(j), -kMaxLogitStep, kMaxLogitStep);
    }

    double scale = 1.0;
    bool accepted = false;
    Eigen::Vector3d next_eta;
    double next_ll = ll;
    for (int h = 0; h < kMaxHalvings; ++h, scale *= 0.5) {
      next_eta = eta + scale * step;
      next_ll = log_likelihood(to_theta(next_eta), obs.x, obs.n, obs.y);
      if (next_ll >= ll) {
        accepted = true;
        break;
      }
    }
    if (!accepted || next_eta == eta) break;
    eta = next_eta;
    theta = to_theta(eta);
    ll = next_ll;
  }
  return {theta, ll};
}

MleResult fit(const Observations& obs, MleOptions options) {
  if (obs.x.size() < 3) throw InvalidSupport("the MLE needs at least three support points");

  if (obs.x.size() == 3 && !options.force_fallback) {
    if (const auto t = saturated_solution(obs)) {
      return MleResult{Params(*t), near_boundary(*t), MlePath::Saturated,
                       log_likelihood(*t, obs.x, obs.n, obs.y)};
    }
  }

  std::optional<ScoringResult> best;
  for (double p0 : {0.02, 0.08})
    for (double p1 : {0.7, 0.95})
      for (double p2 : {0.7, 0.95}) {
        auto r = fisher_scoring(Eigen::Vector3d(p0, p1, p2), obs);
        if (!best || r.log_likelihood > best->log_likelihood) best = r;
      }
  // to_theta can round onto the closed box edge; keep the estimate admissible.
  const Eigen::Vector3d t = best->theta.cwiseMax(kLower).cwiseMin(kUpper);
  return MleResult{Params(t), near_boundary(t), MlePath::Scoring, best->log_likelihood};
}

Observations observations(const ExactDesign& design, Eigen::VectorXd positives) {
  if (positives.size() != design.size())
    throw InvalidArgument("sample data does not match the design");
  for (Eigen::Index i = 0; i < positives.size(); ++i)
    if (!(positives(i) >= 0.0 && positives(i) <= design.counts()(i)))
      throw InvalidArgument("positives must lie in [0, trials]");
  return {design.sizes().cast<double>(), design.counts().cast<double>(), std::move(positives)};
}

}  // namespace

double log_likelihood(const Eigen::Vector3d& theta, const Eigen::VectorXd& sizes,
                      const Eigen::VectorXd& trials, const Eigen::VectorXd& positives) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < sizes.size(); ++i) {
    const double pi = response(theta, sizes(i));
    const double y = positives(i);
    const double miss = trials(i) - y;
    if (y > 0.0) {
      if (!(pi > 0.0)) return kNegInf;
      ll += y * std::log(pi);
    }
    if (miss > 0.0) {
      if (!(pi < 1.0)) return kNegInf;
      ll += miss * std::log1p(-pi);
    }
  }
  return ll;
}

MleResult mle_fit(const ExactDesign& design, const SampleData& data, MleOptions options) {
  return fit(observations(design, data.positives.cast<double>()), options);
}

MleResult mle_fit(const ExactDesign& design, const Eigen::VectorXd& positives,
                  MleOptions options) {
  return fit(observations(design, positives), options);
}

}  // namespace gtdesign
