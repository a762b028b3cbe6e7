#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "mcdist/metrics.hpp"
#include "mcdist/rng.hpp"
#include "test_util.hpp"

using namespace mcdist;
using test::make_topology;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mcdist_metrics_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// In-memory dataset with empty traces; only metadata matters for these tests.
LoadedDataset synthetic_dataset() {
  ExperimentPlan plan;
  plan.sources = 2;
  plan.distance_configs_m = {{0.06, 0.12}, {0.12, 0.24}};
  plan.iterations_per_config = 3;
  plan.seed = 1;

  LoadedDataset dataset{plan, SimConfig{make_topology({0.1, 0.1}, 0.04)}, {}};
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      LoadedTrace lt;
      lt.config_id = c;
      lt.iteration = i;
      lt.split = Split::test;
      lt.trace.dt_sample = 0.005;
      lt.trace.counts = Eigen::VectorXd::Zero(16);
      lt.trace.meta.distances_m = plan.distance_configs_m[static_cast<std::size_t>(c)];
      lt.trace.meta.t_s = 1.0;
      lt.trace.meta.n_tx = 100.0;
      dataset.traces.push_back(std::move(lt));
    }
  }
  return dataset;
}

TraceEstimate scaled_truth(const LoadedTrace& lt, double factor) {
  std::vector<double> gt = lt.trace.meta.distances_m;
  std::sort(gt.begin(), gt.end());
  TraceEstimate est;
  est.aggregate.resize(static_cast<Eigen::Index>(gt.size()));
  for (std::size_t b = 0; b < gt.size(); ++b) {
    est.aggregate[static_cast<Eigen::Index>(b)] = gt[b] * factor;
  }
  est.per_window.resize(0, static_cast<Eigen::Index>(gt.size()));
  return est;
}

}  // namespace

TEST_CASE("relative_error arithmetic") {
  CHECK(relative_error(0.21, 0.20) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(relative_error(0.17, 0.17) == 0.0);
  CHECK(relative_error(0.24, 0.12) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(relative_error(0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(relative_error(0.1, -0.2), std::domain_error);
}

TEST_CASE("a perfect predictor scores 100% everywhere with zero spread") {
  const LoadedDataset dataset = synthetic_dataset();
  const MetricsReport report =
      evaluate(dataset, Split::test, "perfect",
               [](const LoadedTrace& lt) { return scaled_truth(lt, 1.0); });

  CHECK(report.iteration_level.lt_5 == 100.0);
  CHECK(report.iteration_level.lt_10 == 100.0);
  CHECK(report.iteration_level.lt_20 == 100.0);
  for (const ConfigStat& s : report.per_config) {
    CHECK(s.std_pred_m == 0.0);
    CHECK(s.mean_pred_m == doctest::Approx(s.gt_m).epsilon(1e-12));
  }
}

TEST_CASE("a 7% overshoot fails the 5% bar and clears the 10% bar") {
  const LoadedDataset dataset = synthetic_dataset();
  const MetricsReport report =
      evaluate(dataset, Split::test, "overshoot",
               [](const LoadedTrace& lt) { return scaled_truth(lt, 1.07); });
  CHECK(report.iteration_level.lt_5 == 0.0);
  CHECK(report.iteration_level.lt_10 == 100.0);
  CHECK(report.iteration_level.lt_20 == 100.0);
}

TEST_CASE("fractions are nondecreasing in the threshold") {
  const LoadedDataset dataset = synthetic_dataset();
  SplitMix64 rng(33);
  const MetricsReport report =
      evaluate(dataset, Split::test, "noisy", [&](const LoadedTrace& lt) {
        return scaled_truth(lt, rng.uniform(0.85, 1.15));
      });
  CHECK(report.iteration_level.lt_5 <= report.iteration_level.lt_10);
  CHECK(report.iteration_level.lt_10 <= report.iteration_level.lt_20);
}

TEST_CASE("evaluating an empty split fails") {
  const LoadedDataset dataset = synthetic_dataset();
  CHECK_THROWS_AS(
      evaluate(dataset, Split::train, "none",
               [](const LoadedTrace& lt) { return scaled_truth(lt, 1.0); }),
      std::runtime_error);
}

TEST_CASE("report CSVs round-trip the in-memory report exactly") {
  TempDir tmp("roundtrip");
  const LoadedDataset dataset = synthetic_dataset();
  SplitMix64 rng(17);
  MetricsReport report =
      evaluate(dataset, Split::test, "sbrnn", [&](const LoadedTrace& lt) {
        TraceEstimate est = scaled_truth(lt, rng.uniform(0.9, 1.1));
        // Attach fake per-window rows to exercise the window granularity.
        est.per_window.resize(2, est.aggregate.size());
        est.per_window.row(0) = est.aggregate.transpose() * 0.99;
        est.per_window.row(1) = est.aggregate.transpose() * 1.01;
        return est;
      });

  const auto report_csv = tmp.path / "report.csv";
  const auto summary_csv = tmp.path / "summary.csv";
  const auto scatter_csv = tmp.path / "scatter.csv";
  write_report_csv(report_csv, report);
  write_summary_csv(summary_csv, report);
  write_scatter_csv(scatter_csv, report);

  const MetricsReport back = read_metrics(report_csv, summary_csv, scatter_csv);
  CHECK(back == report);
}

TEST_CASE("report_tables lays out thresholds by estimator") {
  MetricsReport a;
  a.estimator = "sbrnn";
  a.iteration_level = {67.7, 79.84, 89.52};
  MetricsReport b;
  b.estimator = "mle";
  b.iteration_level = {74.55, 79.25, 86.4};

  const CsvTable table = report_tables({a, b});
  REQUIRE(table.header.size() == 3);
  CHECK(table.header[1] == "sbrnn");
  CHECK(table.header[2] == "mle");
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0][0] == "re_lt_5");
  CHECK(table.rows[0][1] == "67.70");
  CHECK(table.rows[0][2] == "74.55");
  CHECK(table.rows[2][1] == "89.52");
  CHECK(table.rows[2][2] == "86.40");

  const CsvTable single = report_tables({a});
  CHECK(single.header.size() == 2);
  CHECK(single.rows.size() == 3);
}
