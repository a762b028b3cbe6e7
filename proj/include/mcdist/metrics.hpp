#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mcdist/dataset.hpp"
#include "mcdist/io.hpp"
#include "mcdist/mle.hpp"
#include "mcdist/nn/train.hpp"

namespace mcdist {

// |predicted - ground_truth| / ground_truth * 100.
// Throws std::domain_error for non-positive ground truth.
double relative_error(double predicted_m, double ground_truth_m);

struct ConfigStat {
  int config_id = 0;
  int branch = 0;
  double gt_m = 0.0;
  double mean_pred_m = 0.0;
  double std_pred_m = 0.0;  // population standard deviation

  bool operator==(const ConfigStat&) const = default;
};

// window = -1 marks the per-iteration aggregate.
struct ScatterPoint {
  int config_id = 0;
  int iteration = 0;
  int window = -1;
  int branch = 0;
  double gt_m = 0.0;
  double pred_m = 0.0;
  double re_pct = 0.0;

  bool operator==(const ScatterPoint&) const = default;
};

// Percent of cases below each relative-error threshold; nested by
// construction: lt_5 <= lt_10 <= lt_20.
struct ReFractions {
  double lt_5 = 0.0;
  double lt_10 = 0.0;
  double lt_20 = 0.0;

  bool operator==(const ReFractions&) const = default;
};

struct MetricsReport {
  std::string estimator;
  std::vector<ConfigStat> per_config;
  ReFractions iteration_level;  // per-iteration aggregated predictions
  ReFractions window_level;     // per-window predictions (equal to
                                // iteration_level for window-less estimators)
  std::vector<ScatterPoint> scatter;

  bool operator==(const MetricsReport&) const = default;
};

// Per-trace estimate: sorted per-window rows (may be empty for estimators
// without window granularity) plus the per-iteration aggregate.
struct TraceEstimate {
  MatrixXd per_window;        // W x K
  Eigen::VectorXd aggregate;  // K
};

using TraceEstimator = std::function<TraceEstimate(const LoadedTrace&)>;

// Runs the estimator over every trace of the chosen split and aggregates
// component-wise relative errors of sorted predictions vs sorted ground
// truth. Throws std::runtime_error if the split is empty.
MetricsReport evaluate(const LoadedDataset& dataset, Split split,
                       const std::string& estimator_name,
                       const TraceEstimator& estimator);

MetricsReport evaluate_model(const LoadedDataset& dataset, Split split,
                             const ModelParams& model,
                             const WindowConfig& window_cfg);

MetricsReport evaluate_mle(const LoadedDataset& dataset, Split split,
                           const MleConfig& cfg);

// Report CSV (`config_id,branch,gt_m,mean_pred_m,std_pred_m`), summary CSV
// (`estimator,re_lt_5,re_lt_10,re_lt_20`; rows `<name>` and `<name>:window`)
// and scatter CSV (`config_id,iteration,window,branch,gt_m,pred_m,re_pct`).
void write_report_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_summary_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_scatter_csv(const std::filesystem::path& path, const MetricsReport& report);

// Rebuilds the in-memory report from the three CSVs, exactly.
MetricsReport read_metrics(const std::filesystem::path& report_csv,
                           const std::filesystem::path& summary_csv,
                           const std::filesystem::path& scatter_csv);

// Paper-style table: one row per RE threshold, one column per estimator,
// values in percent with two decimals.
CsvTable report_tables(const std::vector<MetricsReport>& reports);

}  // namespace mcdist
