#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gtdesign/model.hpp"

namespace gtdesign {

/// Lattice of prespecified (possibly misspecified) parameter vectors.
struct MisspecGrid {
  std::vector<double> p0_values;
  std::vector<double> p1_values;
  std::vector<double> p2_values;

  /// Throws InvalidArgument if any lattice point is not a valid parameter vector.
  void validate() const;
  std::size_t size() const { return p0_values.size() * p1_values.size() * p2_values.size(); }
  /// Lattice points in (p0, p1, p2) lexicographic order.
  std::vector<Params> points() const;
};

/// p0 in {0.01, 0.04, 0.07, 0.10}; p1, p2 in {0.90, 0.91, ..., 1.00}.
MisspecGrid intermediate_size_grid();
/// p0 in {0.01, 0.04, 0.07, 0.10}; p1, p2 in {0.90, 0.93, 0.96, 0.99, 1.00}.
MisspecGrid ds_efficiency_grid();

struct SweepRow {
  Params theta_tilde;
  int intermediate_size = 0;
  Vector3<double> weights = Vector3<double>::Zero();  ///< counts / n of the rounded design
  ExactDesign design;
  double efficiency = std::numeric_limits<double>::quiet_NaN();
};

/// Rounded optimal design under every lattice point; efficiency left as NaN.
std::vector<SweepRow> sweep_designs(const MisspecGrid& grid, const Bounds& bounds, int n,
                                    Criterion criterion);

/// sweep_designs, then the simulated efficiency (eff_D or eff_s by criterion) of
/// each rounded design under true_theta. Row r simulates with seed stream_key(seed, r).
std::vector<SweepRow> sweep(const MisspecGrid& grid, const Params& true_theta,
                            const Bounds& bounds, int n, long replications, std::uint64_t seed,
                            Criterion criterion, unsigned threads = 0);

struct MonotonicityViolation {
  Params from;
  Params to;
  int from_size;
  int to_size;
  std::string axis;  ///< "p0", "p1" or "p2"
};

struct MonotonicityReport {
  std::size_t checked_pairs = 0;
  std::vector<MonotonicityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Between lattice neighbours the intermediate size must be nonincreasing in p0,
/// nondecreasing in p1 and nonincreasing in p2.
MonotonicityReport monotonicity_report(const std::vector<SweepRow>& rows);

}  // namespace gtdesign
