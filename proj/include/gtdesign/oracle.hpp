#pragma once

#include "gtdesign/model.hpp"

namespace gtdesign {

struct OracleResult {
  Design design;
  double value;  ///< criterion value of the best grid design
};

/// Exhaustive search over three-point designs whose sizes lie on a grid of
/// spacing size_step over [x_L, x_U] (x_1 free, x_U always included) and whose
/// weights are positive multiples of weight_step. Used as an independent check
/// of the closed-form optimal designs; it does not assume the support contains
/// x_L or x_U, nor that D weights are equal.
///
/// Ties resolve to the lexicographically smallest (size, weight) grid index.
OracleResult oracle_search(const Params& theta, const Bounds& bounds, Criterion criterion,
                           double size_step, double weight_step);

}  // namespace gtdesign
