#include <doctest.h>

#include "gtdesign/oracle.hpp"
#include "gtdesign/solver.hpp"

using namespace gtdesign;

namespace {

const Params kChlamydia(0.07, 0.93, 0.96);
const Bounds kBounds(1, 61);

}  // namespace

TEST_CASE("grid oracle recovers the D-optimal design") {
  const double size_step = 0.25, weight_step = 0.02;
  const auto best = oracle_search(kChlamydia, kBounds, Criterion::D, size_step, weight_step);
  const Design theorem = d_optimal_design(kChlamydia, kBounds);
  REQUIRE(best.design.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(best.design.sizes()(i) - theorem.sizes()(i)) <= size_step);
    CHECK(std::abs(best.design.weights()(i) - 1.0 / 3) <= weight_step);
  }
  const double exact = criterion_value(theorem, kChlamydia, Criterion::D);
  CHECK(best.value == doctest::Approx(criterion_value(best.design, kChlamydia, Criterion::D)).epsilon(1e-10));
  CHECK(best.value <= exact + 1e-12);
  // Equal weights are off the 0.02 grid: 3 log(1/3) vs log(0.34^2 0.32).
  CHECK(exact - best.value < 2e-3);
}

TEST_CASE("grid oracle recovers the Ds-optimal design") {
  const double size_step = 0.25, weight_step = 0.02;
  const auto best = oracle_search(kChlamydia, kBounds, Criterion::Ds, size_step, weight_step);
  const Design theorem = ds_optimal_design(kChlamydia, kBounds);
  REQUIRE(best.design.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(best.design.sizes()(i) - theorem.sizes()(i)) <= size_step);
  const double exact = criterion_value(theorem, kChlamydia, Criterion::Ds);
  CHECK(best.value == doctest::Approx(criterion_value(best.design, kChlamydia, Criterion::Ds)).epsilon(1e-10));
  CHECK(best.value <= exact + 1e-12);
  CHECK(exact - best.value < 1e-3);
}

TEST_CASE("grid oracle argument checks") {
  CHECK_THROWS_AS(oracle_search(kChlamydia, kBounds, Criterion::D, 0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(oracle_search(kChlamydia, kBounds, Criterion::D, 1, -0.1), InvalidArgument);
}
