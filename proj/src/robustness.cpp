#include "gtdesign/robustness.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "gtdesign/rng.hpp"
#include "gtdesign/rounding.hpp"
#include "gtdesign/simulation.hpp"
#include "gtdesign/solver.hpp"

namespace gtdesign {

namespace {

std::vector<double> lattice(double first, double step, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(std::round((first + i * step) * 1e6) / 1e6);
  return v;
}

}  // namespace

void MisspecGrid::validate() const {
  if (p0_values.empty() || p1_values.empty() || p2_values.empty())
    throw InvalidArgument("misspecification grid has an empty axis");
  for (double p0 : p0_values)
    for (double p1 : p1_values)
      for (double p2 : p2_values) Params(p0, p1, p2);
}

std::vector<Params> MisspecGrid::points() const {
  std::vector<Params> out;
  out.reserve(size());
  for (double p0 : p0_values)
    for (double p1 : p1_values)
      for (double p2 : p2_values) out.emplace_back(p0, p1, p2);
  return out;
}

MisspecGrid intermediate_size_grid() {
  return {{0.01, 0.04, 0.07, 0.10}, lattice(0.90, 0.01, 11), lattice(0.90, 0.01, 11)};
}

MisspecGrid ds_efficiency_grid() {
  const std::vector<double> axis{0.90, 0.93, 0.96, 0.99, 1.00};
  return {{0.01, 0.04, 0.07, 0.10}, axis, axis};
}

std::vector<SweepRow> sweep_designs(const MisspecGrid& grid, const Bounds& bounds, int n,
                                    Criterion criterion) {
  grid.validate();
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto& theta_tilde : grid.points()) {
    const Design design = optimal_design(theta_tilde, bounds, criterion);
    ExactDesign exact = round_design(design, theta_tilde, n, criterion);
    if (exact.size() != 3) throw InvalidSupport("optimal designs have three support points");
    const Vector3<double> weights =
        exact.counts().cast<double>() / static_cast<double>(exact.total_trials());
    const int middle = exact.sizes()(1);
    rows.push_back(SweepRow{theta_tilde, middle, weights, std::move(exact)});
  }
  return rows;
}

std::vector<SweepRow> sweep(const MisspecGrid& grid, const Params& true_theta,
                            const Bounds& bounds, int n, long replications, std::uint64_t seed,
                            Criterion criterion, unsigned threads) {
  auto rows = sweep_designs(grid, bounds, n, criterion);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto mse = simulate_mse(rows[r].design, true_theta, replications,
                                  stream_key(seed, r), threads);
    const auto eff = efficiencies_from_mse(mse, true_theta, bounds);
    rows[r].efficiency = criterion == Criterion::D ? eff.eff_d : eff.eff_s;
  }
  return rows;
}

MonotonicityReport monotonicity_report(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<double, double, double>;
  std::map<Key, const SweepRow*> index;
  std::vector<double> axes[3];
  for (const auto& row : rows) {
    const auto& t = row.theta_tilde;
    index[{t.prevalence(), t.sensitivity(), t.specificity()}] = &row;
    axes[0].push_back(t.prevalence());
    axes[1].push_back(t.sensitivity());
    axes[2].push_back(t.specificity());
  }
  for (auto& a : axes) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  // +1: size may only grow along the axis, -1: size may only shrink.
  constexpr int direction[3] = {-1, +1, -1};
  const char* names[3] = {"p0", "p1", "p2"};

  MonotonicityReport report;
  for (const auto& [key, row] : index) {
    const double coords[3] = {std::get<0>(key), std::get<1>(key), std::get<2>(key)};
    for (int axis = 0; axis < 3; ++axis) {
      const auto it = std::upper_bound(axes[axis].begin(), axes[axis].end(), coords[axis]);
      if (it == axes[axis].end()) continue;
      double next[3] = {coords[0], coords[1], coords[2]};
      next[axis] = *it;
      const auto found = index.find({next[0], next[1], next[2]});
      if (found == index.end()) continue;
      ++report.checked_pairs;
      const int delta = found->second->intermediate_size - row->intermediate_size;
      if (delta * direction[axis] < 0) {
        report.violations.push_back({row->theta_tilde, found->second->theta_tilde,
                                     row->intermediate_size, found->second->intermediate_size,
                                     names[axis]});
      }
    }
  }
  return report;
}

}  // namespace gtdesign
