#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mcdist/channel.hpp"
#include "mcdist/sim.hpp"
#include "test_util.hpp"

using namespace mcdist;
using test::kMlPerMin;
using test::make_topology;

namespace {

SimConfig make_config(const BranchTopology& topo, int n_tx = 1000) {
  SimConfig cfg{topo};
  cfg.n_tx = n_tx;
  cfg.t_s = 1.0;
  cfg.n_symbols = 20;
  cfg.horizon_s = 25.0;
  cfg.dt_sample = 0.005;
  return cfg;
}

}  // namespace

TEST_CASE("sample_radius is the square root of a uniform draw") {
  SplitMix64 a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK(sample_radius(b) == doctest::Approx(std::sqrt(u)).epsilon(1e-15));
  }
}

TEST_CASE("sample_radius is area-uniform: mean of rho^2 is 1/2") {
  SplitMix64 rng(123);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double rho = sample_radius(rng);
    sum += rho * rho;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("axial_position advects at the centerline speed within one segment") {
  // Branch mean speed 0.1 m/s, offset long enough to stay in the branch.
  const double area = kPi * 0.75e-3 * 0.75e-3;
  BranchTopology topo({{0.25, 0.2, 0.1 * area, 1.5e-3}}, 0.06, 1.5e-3, 0.01,
                      1e-6);
  const Particle p{0.0, 0.0, 0};
  CHECK(axial_position(p, topo, 0.5) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("axial_position pins wall particles at the release point") {
  const auto topo = make_topology({0.06});
  const Particle p{0.999999999, 0.0, 0};
  CHECK(axial_position(p, topo, 1000.0) < 1e-5);
}

TEST_CASE("axial_position crosses the junction piecewise") {
  // Branch 0.06 m at mean 0.05 m/s, then main at mean 0.10 m/s.
  const double area = kPi * 0.75e-3 * 0.75e-3;
  BranchTopology topo({{0.25, 0.06, 0.05 * area, 1.5e-3}}, 0.2,
                      1.5e-3 / std::sqrt(2.0), 0.01, 1e-6);
  const Particle p{0.0, 0.0, 0};
  // Centerline speeds are twice the means: 0.1 then 0.2.
  CHECK(axial_position(p, topo, 0.6) == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(axial_position(p, topo, 0.9) == doctest::Approx(0.12).epsilon(1e-12));
}

TEST_CASE("axial_position is nondecreasing in t") {
  const auto topo = make_topology({0.06});
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Particle p{sample_radius(rng), rng.uniform(0.0, 2.0), 0};
    double prev = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double t = p.release_time_s + i * 0.25;
      const double x = axial_position(p, topo, t);
      CHECK(x >= prev);
      prev = x;
    }
  }
  CHECK_THROWS_AS(axial_position(Particle{0.5, 1.0, 0}, topo, 0.5),
                  std::invalid_argument);
}

TEST_CASE("run_iteration: zero sequences give a zero trace") {
  const auto topo = make_topology({0.06, 0.18});
  const SimConfig cfg = make_config(topo);
  std::vector<SymbolSequence> seqs{{std::vector<int>(20, 0), 1.0},
                                   {std::vector<int>(20, 0), 1.0}};
  const auto trace = run_iteration(cfg, seqs, 9);
  CHECK(trace.counts.size() == 5000);
  CHECK(trace.counts.maxCoeff() == 0.0);
}

TEST_CASE("run_iteration is deterministic bit for bit") {
  const auto topo = make_topology({0.06, 0.18});
  const SimConfig cfg = make_config(topo, 500);
  const auto seqs = draw_sequences(cfg, 77);
  const auto t1 = run_iteration(cfg, seqs, 77);
  const auto t2 = run_iteration(cfg, seqs, 77);
  REQUIRE(t1.counts.size() == t2.counts.size());
  for (Eigen::Index i = 0; i < t1.counts.size(); ++i) {
    CHECK(t1.counts[i] == t2.counts[i]);
  }
}

TEST_CASE("run_iteration rejects mismatched sequences") {
  const auto topo = make_topology({0.06, 0.18});
  const SimConfig cfg = make_config(topo);
  std::vector<SymbolSequence> seqs{{std::vector<int>(20, 1), 1.0}};
  CHECK_THROWS_AS(run_iteration(cfg, seqs, 1), std::invalid_argument);

  std::vector<SymbolSequence> long_seqs{{std::vector<int>(30, 1), 1.0},
                                        {std::vector<int>(30, 1), 1.0}};
  CHECK_THROWS_AS(run_iteration(cfg, long_seqs, 1), std::invalid_argument);
}

TEST_CASE("run_iteration matches a brute-force recount via axial_position") {
  const auto topo = make_topology({0.06, 0.1}, 0.04);
  SimConfig cfg = make_config(topo, 200);
  cfg.horizon_s = 10.0;
  std::vector<SymbolSequence> seqs{{{1, 0, 1}, 1.0}, {{0, 1, 0}, 1.0}};
  const std::uint64_t seed = 4242;

  const auto trace = run_iteration(cfg, seqs, seed);
  const auto particles = release_particles(cfg, seqs, seed);
  CHECK(particles.size() == 3u * 200u);  // total released = sum(bits) * n_tx

  const double l_half = topo.rx_length_m() / 2.0;
  for (Eigen::Index i = 0; i < trace.counts.size(); i += 37) {
    const double t = trace.time_at(i);
    int count = 0;
    for (const Particle& p : particles) {
      if (t < p.release_time_s) continue;
      const double x = axial_position(p, topo, t);
      const double d = tx_rx_distance(topo, static_cast<std::size_t>(p.branch_index));
      if (x >= d - l_half && x <= d + l_half) ++count;
    }
    CHECK(trace.counts[i] == static_cast<double>(count));
  }
}

TEST_CASE("single pulse observation fraction tracks p_ob") {
  const auto topo = make_topology({0.06});  // equal bores: uniform speed
  SimConfig cfg = make_config(topo, 10000);
  std::vector<SymbolSequence> seqs{{{1}, 1.0}};
  const auto trace = run_iteration(cfg, seqs, 2024);

  ChannelParams p;
  p.d_tx_rx_m = tx_rx_distance(topo, 0);
  p.l_rx_m = topo.rx_length_m();
  p.v_eff = effective_velocity(topo, 0);
  p.n_tx = 1.0;
  p.t_s = 1.0;

  double sup = 0.0;
  for (Eigen::Index i = 0; i < trace.counts.size(); ++i) {
    const double dev = std::abs(trace.counts[i] / cfg.n_tx - p_ob(p, trace.time_at(i)));
    sup = std::max(sup, dev);
  }
  CHECK(sup < 0.015);  // 3 sigma-ish at 1e4 particles
}

TEST_CASE("branch-disjoint releases add up to the full trace") {
  const auto topo = make_topology({0.06, 0.18});
  const SimConfig cfg = make_config(topo, 300);
  std::vector<SymbolSequence> both{{{1, 0, 1, 1}, 1.0}, {{0, 1, 1, 0}, 1.0}};
  std::vector<SymbolSequence> only_a{{{1, 0, 1, 1}, 1.0},
                                     {std::vector<int>(4, 0), 1.0}};
  std::vector<SymbolSequence> only_b{{std::vector<int>(4, 0), 1.0},
                                     {{0, 1, 1, 0}, 1.0}};
  const std::uint64_t seed = 31337;
  const auto full = run_iteration(cfg, both, seed);
  const auto part_a = run_iteration(cfg, only_a, seed);
  const auto part_b = run_iteration(cfg, only_b, seed);
  for (Eigen::Index i = 0; i < full.counts.size(); ++i) {
    CHECK(full.counts[i] == part_a.counts[i] + part_b.counts[i]);
  }
}

TEST_CASE("run_batch determinism and singleton equivalence") {
  const auto topo = make_topology({0.06, 0.18});
  SimConfig cfg = make_config(topo, 200);
  cfg.n_iterations = 3;

  const auto batch1 = run_batch(cfg, {0.12, 0.24}, 99);
  const auto batch2 = run_batch(cfg, {0.12, 0.24}, 99);
  REQUIRE(batch1.size() == 3);
  for (std::size_t i = 0; i < batch1.size(); ++i) {
    for (Eigen::Index j = 0; j < batch1[i].counts.size(); ++j) {
      CHECK(batch1[i].counts[j] == batch2[i].counts[j]);
    }
  }

  SimConfig single = cfg;
  single.n_iterations = 1;
  const auto lone = run_batch(single, {0.12, 0.24}, 99);
  REQUIRE(lone.size() == 1);
  const SimConfig run_cfg{topo.with_distances({0.12, 0.24}), 200, 1.0, 20, 25.0,
                          0.005, 0, 1};
  const std::uint64_t iter_seed = derive_seed(99, 0);
  const auto expected = run_iteration(run_cfg, draw_sequences(run_cfg, iter_seed),
                                      iter_seed);
  for (Eigen::Index j = 0; j < expected.counts.size(); ++j) {
    CHECK(lone[0].counts[j] == expected.counts[j]);
  }
}

TEST_CASE("batch mean stays inside the binomial band of the analytic trace") {
  // Main bore sqrt(2) wider than the branches: the mean speed is the same in
  // every segment, where Eq.-style superposition is exact and the only
  // deviation left is binomial counting noise.
  const auto topo =
      make_topology({0.06, 0.18}, 0.06, 1.5e-3 * std::sqrt(2.0));
  SimConfig cfg = make_config(topo, 400);
  cfg.n_iterations = 64;
  const std::uint64_t seed = 7;
  const auto batch = run_batch(cfg, {0.12, 0.24}, seed);

  const auto run_topo = topo.with_distances({0.12, 0.24});
  const auto params = channel_params_for(run_topo, 1.0, cfg.t_s);
  const auto grid = make_time_grid(cfg.dt_sample, cfg.horizon_s);

  // Compare the per-iteration mean of counts/n_tx against the analytic
  // expectation, pooling all iterations (each has its own sequences).
  for (Eigen::Index i = 500; i < grid.size(); i += 611) {
    double mean = 0.0;
    double expectation = 0.0;
    for (std::size_t it = 0; it < batch.size(); ++it) {
      mean += batch[it].counts[i] / cfg.n_tx;
      std::vector<SymbolSequence> seqs;
      for (const std::string& bits : batch[it].meta.sequences) {
        SymbolSequence s;
        s.t_s = cfg.t_s;
        for (char c : bits) s.bits.push_back(c == '1');
        seqs.push_back(std::move(s));
      }
      expectation += expected_count_multi(params, seqs, grid[i]);
    }
    mean /= static_cast<double>(batch.size());
    expectation /= static_cast<double>(batch.size());
    // Loose 3-sigma band: each iteration sums >= 2 near-independent pulses.
    const double sigma = std::sqrt(std::max(expectation, 0.02) /
                                   (cfg.n_tx * static_cast<double>(batch.size())));
    CHECK(std::abs(mean - expectation) <= 3.5 * sigma + 1e-9);
  }
}
