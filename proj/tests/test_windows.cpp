#include <doctest.h>

#include <stdexcept>

#include "mcdist/nn/windows.hpp"

using namespace mcdist;

namespace {

CountTrace ramp_trace(Eigen::Index n, double dt = 0.005) {
  CountTrace trace;
  trace.dt_sample = dt;
  trace.counts.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) trace.counts[i] = static_cast<double>(i);
  trace.meta.distances_m = {0.24, 0.12};  // deliberately unsorted
  return trace;
}

}  // namespace

TEST_CASE("a 25 s trace yields 16 symbol-strided windows") {
  const auto trace = ramp_trace(5000);
  const auto batch = make_windows(trace, WindowConfig{});
  CHECK(batch.inputs.rows() == 16);
  CHECK(batch.inputs.cols() == 200);

  // Window w starts at undersampled index 20*w, i.e. raw index 200*w.
  for (Eigen::Index w = 0; w < batch.inputs.rows(); ++w) {
    for (Eigen::Index i = 0; i < 200; i += 41) {
      CHECK(batch.inputs(w, i) == static_cast<double>((20 * w + i) * 10));
    }
  }
}

TEST_CASE("exactly one full window") {
  const auto trace = ramp_trace(2000);
  const auto batch = make_windows(trace, WindowConfig{});
  CHECK(batch.inputs.rows() == 1);
  CHECK(batch.inputs(0, 199) == 1990.0);
}

TEST_CASE("short traces are rejected") {
  const auto trace = ramp_trace(1999);
  CHECK_THROWS_AS(make_windows(trace, WindowConfig{}), std::invalid_argument);
}

TEST_CASE("zero traces give zero windows") {
  CountTrace trace;
  trace.dt_sample = 0.005;
  trace.counts = Eigen::VectorXd::Zero(5000);
  trace.meta.distances_m = {0.12};
  const auto batch = make_windows(trace, WindowConfig{});
  CHECK(batch.inputs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("targets are the sorted distances, repeated per window") {
  const auto trace = ramp_trace(5000);
  const auto batch = make_windows(trace, WindowConfig{});
  REQUIRE(batch.targets.cols() == 2);
  for (Eigen::Index w = 0; w < batch.targets.rows(); ++w) {
    CHECK(batch.targets(w, 0) == 0.12);
    CHECK(batch.targets(w, 1) == 0.24);
  }
}

TEST_CASE("input scaling divides the window values") {
  const auto trace = ramp_trace(2000);
  WindowConfig cfg;
  cfg.input_scale = 10.0;
  const auto batch = make_windows(trace, cfg);
  CHECK(batch.inputs(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("window config validation") {
  WindowConfig bad;
  bad.stride = 0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = WindowConfig{};
  bad.input_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
