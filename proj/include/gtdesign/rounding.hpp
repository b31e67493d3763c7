#pragma once

#include <vector>

#include "gtdesign/model.hpp"

namespace gtdesign {

struct ApportionmentResult {
  std::vector<int> counts;
  std::vector<double> input_weights;
  int n = 0;
};

/// Efficient rounding apportionment of n trials over weights w_1..w_k.
///
/// Starts from ceil((n - k/2) w_i) and then, while the total is off, adds a
/// trial to the index minimizing counts_i / w_i or removes one from the index
/// maximizing (counts_i - 1) / w_i. Ties go to the smallest index.
ApportionmentResult efficient_round(const std::vector<double>& weights, int n);

/// Nearest integer, halves rounded up.
int round_size(double x);

/// Integer sizes by round_size, then trial counts by efficient_round. For Ds the
/// weights are recomputed by ds_weights at the rounded sizes; for D the
/// design's own weights are kept.
ExactDesign round_design(const Design& design, const Params& theta, int n, Criterion criterion);

}  // namespace gtdesign
