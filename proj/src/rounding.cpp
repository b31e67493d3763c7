#include "gtdesign/rounding.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gtdesign/solver.hpp"

namespace gtdesign {

ApportionmentResult efficient_round(const std::vector<double>& weights, int n) {
  const auto k = static_cast<int>(weights.size());
  if (k == 0) throw InvalidArgument("apportionment needs at least one weight");
  for (double w : weights)
    if (!(w > 0)) throw InvalidArgument("apportionment weights must be positive");
  if (n < k)
    throw InfeasibleApportionment("cannot apportion " + std::to_string(n) + " trials over " +
                                  std::to_string(k) + " support points");

  ApportionmentResult out;
  out.input_weights = weights;
  out.n = n;
  out.counts.resize(k);
  const double scaled = static_cast<double>(n) - 0.5 * k;
  for (int i = 0; i < k; ++i) out.counts[i] = static_cast<int>(std::ceil(scaled * weights[i]));

  long total = std::accumulate(out.counts.begin(), out.counts.end(), 0L);
  while (total != n) {
    int pick = 0;
    if (total < n) {
      for (int i = 1; i < k; ++i)
        if (out.counts[i] / weights[i] < out.counts[pick] / weights[pick]) pick = i;
      ++out.counts[pick];
      ++total;
    } else {
      for (int i = 1; i < k; ++i)
        if ((out.counts[i] - 1) / weights[i] > (out.counts[pick] - 1) / weights[pick]) pick = i;
      --out.counts[pick];
      --total;
    }
  }
  return out;
}

int round_size(double x) { return static_cast<int>(std::floor(x + 0.5)); }

ExactDesign round_design(const Design& design, const Params& theta, int n, Criterion criterion) {
  const auto k = design.size();
  Eigen::VectorXi sizes(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sizes(i) = round_size(design.sizes()(i));
    if (i > 0 && sizes(i) == sizes(i - 1))
      throw SizeCollision("support points " + std::to_string(design.sizes()(i - 1)) + " and " +
                          std::to_string(design.sizes()(i)) + " both round to " +
                          std::to_string(sizes(i)));
  }

  std::vector<double> weights(design.weights().data(), design.weights().data() + k);
  if (criterion == Criterion::Ds) {
    if (k != 3) throw InvalidSupport("Ds rounding needs a three-point design");
    const auto w = ds_weights(sizes.cast<double>(), theta);
    weights.assign(w.weights.data(), w.weights.data() + 3);
  }

  const auto apportioned = efficient_round(weights, n);
  return ExactDesign(sizes, Eigen::Map<const Eigen::VectorXi>(apportioned.counts.data(), k));
}

}  // namespace gtdesign
