#include "mcdist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "mcdist/io.hpp"

namespace mcdist {

double relative_error(double predicted_m, double ground_truth_m) {
  if (!(ground_truth_m > 0.0)) {
    throw std::domain_error("relative_error: ground truth must be positive");
  }
  return std::abs(predicted_m - ground_truth_m) / ground_truth_m * 100.0;
}

namespace {

struct FractionCounter {
  long n = 0;
  long lt_5 = 0, lt_10 = 0, lt_20 = 0;

  void add(double re_pct) {
    ++n;
    if (re_pct < 5.0) ++lt_5;
    if (re_pct < 10.0) ++lt_10;
    if (re_pct < 20.0) ++lt_20;
  }

  ReFractions fractions() const {
    if (n == 0) return {};
    const double denom = static_cast<double>(n);
    return {100.0 * lt_5 / denom, 100.0 * lt_10 / denom, 100.0 * lt_20 / denom};
  }
};

std::vector<double> sorted_ground_truth(const LoadedTrace& lt) {
  std::vector<double> gt = lt.trace.meta.distances_m;
  std::sort(gt.begin(), gt.end());
  return gt;
}

}  // namespace

MetricsReport evaluate(const LoadedDataset& dataset, Split split,
                       const std::string& estimator_name,
                       const TraceEstimator& estimator) {
  MetricsReport report;
  report.estimator = estimator_name;

  FractionCounter iteration_counter, window_counter;
  bool any_windows = false;
  // (config, branch) -> aggregate predictions, for mean/std.
  std::map<std::pair<int, int>, std::vector<double>> per_config_preds;
  std::map<std::pair<int, int>, double> per_config_gt;

  long used = 0;
  for (const LoadedTrace& lt : dataset.traces) {
    if (lt.split != split) continue;
    ++used;

    const std::vector<double> gt = sorted_ground_truth(lt);
    const TraceEstimate est = estimator(lt);
    const auto k = static_cast<int>(gt.size());
    if (est.aggregate.size() != k) {
      throw std::runtime_error("evaluate: estimator returned wrong branch count");
    }

    for (int b = 0; b < k; ++b) {
      const double re = relative_error(est.aggregate[b], gt[static_cast<std::size_t>(b)]);
      iteration_counter.add(re);
      report.scatter.push_back({lt.config_id, lt.iteration, -1, b,
                                gt[static_cast<std::size_t>(b)],
                                est.aggregate[b], re});
      per_config_preds[{lt.config_id, b}].push_back(est.aggregate[b]);
      per_config_gt[{lt.config_id, b}] = gt[static_cast<std::size_t>(b)];
    }
    for (Eigen::Index w = 0; w < est.per_window.rows(); ++w) {
      any_windows = true;
      for (int b = 0; b < k; ++b) {
        const double re =
            relative_error(est.per_window(w, b), gt[static_cast<std::size_t>(b)]);
        window_counter.add(re);
        report.scatter.push_back({lt.config_id, lt.iteration,
                                  static_cast<int>(w), b,
                                  gt[static_cast<std::size_t>(b)],
                                  est.per_window(w, b), re});
      }
    }
  }
  if (used == 0) {
    throw std::runtime_error("evaluate: split '" + to_string(split) + "' is empty");
  }

  report.iteration_level = iteration_counter.fractions();
  report.window_level =
      any_windows ? window_counter.fractions() : report.iteration_level;

  for (const auto& [key, preds] : per_config_preds) {
    ConfigStat stat;
    stat.config_id = key.first;
    stat.branch = key.second;
    stat.gt_m = per_config_gt[key];
    double mean = 0.0;
    for (double p : preds) mean += p;
    mean /= static_cast<double>(preds.size());
    double var = 0.0;
    for (double p : preds) var += (p - mean) * (p - mean);
    var /= static_cast<double>(preds.size());
    stat.mean_pred_m = mean;
    stat.std_pred_m = std::sqrt(var);
    report.per_config.push_back(stat);
  }
  return report;
}

MetricsReport evaluate_model(const LoadedDataset& dataset, Split split,
                             const ModelParams& model,
                             const WindowConfig& window_cfg) {
  return evaluate(dataset, split, "sbrnn", [&](const LoadedTrace& lt) {
    const TracePrediction pred = predict_trace(model, lt.trace, window_cfg);
    return TraceEstimate{pred.per_window, pred.aggregate};
  });
}

MetricsReport evaluate_mle(const LoadedDataset& dataset, Split split,
                           const MleConfig& cfg) {
  return evaluate(dataset, split, "mle", [&](const LoadedTrace& lt) {
    KnownChannel known{
        dataset.base.topology.with_distances(lt.trace.meta.distances_m),
        {},
        {}};
    for (const std::string& bits : lt.trace.meta.sequences) {
      SymbolSequence seq;
      seq.t_s = lt.trace.meta.t_s;
      for (char ch : bits) seq.bits.push_back(ch == '1' ? 1 : 0);
      known.sequences.push_back(std::move(seq));
      known.n_tx.push_back(lt.trace.meta.n_tx);
    }
    const MleEstimate est = estimate(lt.trace, known, cfg);
    std::vector<double> sorted = est.distances_m;
    std::sort(sorted.begin(), sorted.end());
    TraceEstimate out;
    out.per_window.resize(0, static_cast<Eigen::Index>(sorted.size()));
    out.aggregate = Eigen::Map<const Eigen::VectorXd>(
        sorted.data(), static_cast<Eigen::Index>(sorted.size()));
    return out;
  });
}

void write_report_csv(const std::filesystem::path& path,
                      const MetricsReport& report) {
  CsvTable table;
  table.header = {"config_id", "branch", "gt_m", "mean_pred_m", "std_pred_m"};
  for (const ConfigStat& s : report.per_config) {
    table.rows.push_back({std::to_string(s.config_id), std::to_string(s.branch),
                          format_double(s.gt_m), format_double(s.mean_pred_m),
                          format_double(s.std_pred_m)});
  }
  write_csv(path, table);
}

void write_summary_csv(const std::filesystem::path& path,
                       const MetricsReport& report) {
  CsvTable table;
  table.header = {"estimator", "re_lt_5", "re_lt_10", "re_lt_20"};
  table.rows.push_back({report.estimator,
                        format_double(report.iteration_level.lt_5),
                        format_double(report.iteration_level.lt_10),
                        format_double(report.iteration_level.lt_20)});
  table.rows.push_back({report.estimator + ":window",
                        format_double(report.window_level.lt_5),
                        format_double(report.window_level.lt_10),
                        format_double(report.window_level.lt_20)});
  write_csv(path, table);
}

void write_scatter_csv(const std::filesystem::path& path,
                       const MetricsReport& report) {
  CsvTable table;
  table.header = {"config_id", "iteration", "window",
                  "branch",    "gt_m",      "pred_m",
                  "re_pct"};
  for (const ScatterPoint& p : report.scatter) {
    table.rows.push_back({std::to_string(p.config_id), std::to_string(p.iteration),
                          std::to_string(p.window), std::to_string(p.branch),
                          format_double(p.gt_m), format_double(p.pred_m),
                          format_double(p.re_pct)});
  }
  write_csv(path, table);
}

MetricsReport read_metrics(const std::filesystem::path& report_csv,
                           const std::filesystem::path& summary_csv,
                           const std::filesystem::path& scatter_csv) {
  MetricsReport report;

  const CsvTable summary = read_csv(summary_csv);
  if (summary.rows.size() != 2) {
    throw std::runtime_error("read_metrics: summary must have two rows");
  }
  report.estimator = summary.rows[0][0];
  report.iteration_level = {parse_double(summary.rows[0][1]),
                            parse_double(summary.rows[0][2]),
                            parse_double(summary.rows[0][3])};
  report.window_level = {parse_double(summary.rows[1][1]),
                         parse_double(summary.rows[1][2]),
                         parse_double(summary.rows[1][3])};

  for (const auto& row : read_csv(report_csv).rows) {
    report.per_config.push_back({std::stoi(row[0]), std::stoi(row[1]),
                                 parse_double(row[2]), parse_double(row[3]),
                                 parse_double(row[4])});
  }
  for (const auto& row : read_csv(scatter_csv).rows) {
    report.scatter.push_back({std::stoi(row[0]), std::stoi(row[1]),
                              std::stoi(row[2]), std::stoi(row[3]),
                              parse_double(row[4]), parse_double(row[5]),
                              parse_double(row[6])});
  }
  return report;
}

CsvTable report_tables(const std::vector<MetricsReport>& reports) {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  CsvTable table;
  table.header = {"metric"};
  for (const MetricsReport& r : reports) table.header.push_back(r.estimator);
  table.rows = {{"re_lt_5"}, {"re_lt_10"}, {"re_lt_20"}};
  for (const MetricsReport& r : reports) {
    table.rows[0].push_back(pct(r.iteration_level.lt_5));
    table.rows[1].push_back(pct(r.iteration_level.lt_10));
    table.rows[2].push_back(pct(r.iteration_level.lt_20));
  }
  return table;
}

}  // namespace mcdist
