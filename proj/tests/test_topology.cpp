#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mcdist/topology.hpp"
#include "test_util.hpp"

using namespace mcdist;
using test::kMlPerMin;
using test::make_topology;

TEST_CASE("mean_speed converts volumetric rate to cross-section mean") {
  // 10 ml/min through a 1.5 mm bore.
  CHECK(mean_speed(1.6667e-7, 1.5e-3) == doctest::Approx(0.09431).epsilon(1e-4));
  // 20 ml/min, same bore.
  CHECK(mean_speed(3.3333e-7, 1.5e-3) == doctest::Approx(0.18863).epsilon(1e-4));
}

TEST_CASE("mean_speed scale invariance: (Q, D) vs (4Q, 2D)") {
  const double v = mean_speed(2.5e-7, 1.2e-3);
  CHECK(mean_speed(1e-6, 2.4e-3) == doctest::Approx(v).epsilon(1e-14));
}

TEST_CASE("mean_speed rejects non-positive inputs") {
  CHECK_THROWS_AS(mean_speed(0.0, 1.5e-3), std::domain_error);
  CHECK_THROWS_AS(mean_speed(1e-7, -1.0), std::domain_error);
}

TEST_CASE("tx_rx_distance sums tx offset and main length") {
  const auto topo = make_topology({0.06, 0.18});
  CHECK(tx_rx_distance(topo, 0) == doctest::Approx(0.12).epsilon(1e-14));
  CHECK(tx_rx_distance(topo, 1) == doctest::Approx(0.24).epsilon(1e-14));
  CHECK_THROWS_AS(tx_rx_distance(topo, 2), std::out_of_range);
}

TEST_CASE("tx_rx_distance is symmetric for equal offsets and additive in the offset") {
  const auto equal = make_topology({0.1, 0.1});
  CHECK(tx_rx_distance(equal, 0) == tx_rx_distance(equal, 1));

  const double delta = 0.013;
  const auto base = make_topology({0.1});
  const auto shifted = make_topology({0.1 + delta});
  CHECK(tx_rx_distance(shifted, 0) - tx_rx_distance(base, 0) ==
        doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("reynolds number of branch and main segments") {
  const auto topo = make_topology({0.06});
  // v = 0.09431 m/s, D = 1.5 mm, nu = 1e-6 m^2/s.
  CHECK(reynolds(topo, Segment::branch(0)) ==
        doctest::Approx(141.5).epsilon(1e-3));

  // nu -> infinity drives Re to zero.
  BranchTopology thick({{0.25, 0.06, 10.0 * kMlPerMin, 1.5e-3}}, 0.06, 1.5e-3,
                       0.01, 1e6);
  CHECK(reynolds(thick, Segment::branch(0)) < 1e-9);
}

TEST_CASE("laminar invariant rejects fast flows at construction") {
  // v = 2 m/s in a 1.5 mm bore at nu = 1e-6 gives Re = 3000.
  const double area = kPi * 0.75e-3 * 0.75e-3;
  CHECK_THROWS_AS(BranchTopology({{0.25, 0.06, 2.0 * area, 1.5e-3}}, 0.06,
                                 1.5e-3, 0.01, 1e-6),
                  std::domain_error);
}

TEST_CASE("junction flow conservation is exact") {
  const auto topo = make_topology({0.06, 0.18, 0.1});
  double sum = 0.0;
  for (const BranchSpec& b : topo.branches()) sum += b.flow_m3_per_s;
  CHECK(std::abs(topo.main_flow_m3_per_s() - sum) <= 1e-12 * sum);
}

TEST_CASE("geometric invariants are enforced") {
  // tx_offset beyond the branch length.
  CHECK_THROWS_AS(BranchTopology({{0.05, 0.06, 10.0 * kMlPerMin, 1.5e-3}}, 0.06,
                                 1.5e-3, 0.01, 1e-6),
                  std::domain_error);
  // Receiver longer than the main tube allows.
  CHECK_THROWS_AS(make_topology({0.06}, 0.005, 1.5e-3, 0.02),
                  std::domain_error);
  // No branches at all.
  CHECK_THROWS_AS(BranchTopology({}, 0.06, 1.5e-3, 0.01, 1e-6),
                  std::domain_error);
}

TEST_CASE("with_distances rebuilds offsets against the same main tube") {
  const auto topo = make_topology({0.06, 0.18});
  const auto moved = topo.with_distances({0.10, 0.20});
  CHECK(tx_rx_distance(moved, 0) == doctest::Approx(0.10).epsilon(1e-14));
  CHECK(tx_rx_distance(moved, 1) == doctest::Approx(0.20).epsilon(1e-14));
  // A distance below the main length would need a negative offset.
  CHECK_THROWS_AS(topo.with_distances({0.05, 0.20}), std::domain_error);
}
