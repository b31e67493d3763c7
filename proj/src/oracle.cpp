#include "gtdesign/oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace gtdesign {

namespace {

struct WeightTriple {
  double w[3];
  double inv[3];
  double log_sum;
};

std::vector<WeightTriple> weight_grid(double step) {
  const long units = std::lround(1.0 / step);
  if (units < 3 || std::abs(units * step - 1.0) > 1e-9)
    throw InvalidArgument("weight step must divide 1 into at least three parts");
  std::vector<WeightTriple> grid;
  for (long a = 1; a <= units - 2; ++a)
    for (long b = 1; a + b <= units - 1; ++b) {
      const long c = units - a - b;
      WeightTriple t{};
      t.w[0] = static_cast<double>(a) / static_cast<double>(units);
      t.w[1] = static_cast<double>(b) / static_cast<double>(units);
      t.w[2] = static_cast<double>(c) / static_cast<double>(units);
      for (int i = 0; i < 3; ++i) t.inv[i] = 1.0 / t.w[i];
      t.log_sum = std::log(t.w[0]) + std::log(t.w[1]) + std::log(t.w[2]);
      grid.push_back(t);
    }
  return grid;
}

}  // namespace

OracleResult oracle_search(const Params& theta, const Bounds& bounds, Criterion criterion,
                           double size_step, double weight_step) {
  if (!(size_step > 0) || !(weight_step > 0)) throw InvalidArgument("grid steps must be positive");

  std::vector<double> sizes;
  const auto steps = static_cast<long>(std::floor(bounds.width() / size_step + 1e-9));
  for (long i = 0; i <= steps; ++i) sizes.push_back(bounds.lower() + static_cast<double>(i) * size_step);
  if (sizes.back() < bounds.upper() - 1e-9) sizes.push_back(bounds.upper());

  const auto n = sizes.size();
  std::vector<Eigen::Vector3d> grads(n);
  std::vector<double> lambdas(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = evaluate_model(sizes[i], theta);
    grads[i] = e.grad;
    lambdas[i] = e.lambda;
  }
  const auto weights = weight_grid(weight_step);

  // For M = F diag(w lambda) F^T with square F:
  //   |M| = |F|^2 prod(w_i lambda_i)
  //   (M^{-1})_11 = sum_i (F^{-1} e1)_i^2 / (w_i lambda_i)
  std::size_t best_d_weight = 0;
  for (std::size_t j = 1; j < weights.size(); ++j)
    if (weights[j].log_sum > weights[best_d_weight].log_sum) best_d_weight = j;

  double best = -std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 0, bk = 0, bw = 0;
  Eigen::Matrix3d f;
  for (std::size_t i = 0; i < n; ++i) {
    f.col(0) = grads[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      f.col(1) = grads[j];
      for (std::size_t k = j + 1; k < n; ++k) {
        f.col(2) = grads[k];
        const double det = f.determinant();
        if (det == 0.0) continue;
        if (criterion == Criterion::D) {
          const double value = std::log(det * det) + std::log(lambdas[i]) + std::log(lambdas[j]) +
                               std::log(lambdas[k]) + weights[best_d_weight].log_sum;
          if (value > best) {
            best = value;
            bi = i, bj = j, bk = k, bw = best_d_weight;
          }
        } else {
          const Eigen::Vector3d v = f.inverse().col(0);
          const double a0 = v(0) * v(0) / lambdas[i];
          const double a1 = v(1) * v(1) / lambdas[j];
          const double a2 = v(2) * v(2) / lambdas[k];
          double best_sum = std::numeric_limits<double>::infinity();
          std::size_t best_w = 0;
          for (std::size_t w = 0; w < weights.size(); ++w) {
            const auto& t = weights[w];
            const double s = a0 * t.inv[0] + a1 * t.inv[1] + a2 * t.inv[2];
            if (s < best_sum) {
              best_sum = s;
              best_w = w;
            }
          }
          const double value = -std::log(best_sum);
          if (value > best) {
            best = value;
            bi = i, bj = j, bk = k, bw = best_w;
          }
        }
      }
    }
  }
  if (!std::isfinite(best)) throw CriterionUndefined("oracle grid holds no estimable design");

  const auto& t = weights[bw];
  Design design(Eigen::Vector3d(sizes[bi], sizes[bj], sizes[bk]),
                Eigen::Vector3d(t.w[0], t.w[1], t.w[2]));
  return {std::move(design), best};
}

}  // namespace gtdesign
