// mcdist: desk-scale lab for distance estimation in branched
// molecular-communication channels. Subcommands cover simulation, the
// analytic channel model, MLE and SBRNN estimation, and report generation.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mcdist/channel.hpp"
#include "mcdist/dataset.hpp"
#include "mcdist/io.hpp"
#include "mcdist/metrics.hpp"
#include "mcdist/mle.hpp"
#include "mcdist/nn/train.hpp"
#include "mcdist/pipeline.hpp"
#include "mcdist/sim.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mcdist;

std::vector<double> parse_cm_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    const std::size_t comma = csv.find(',', begin);
    const std::string field =
        csv.substr(begin, comma == std::string::npos ? std::string::npos
                                                     : comma - begin);
    if (field.empty()) throw std::runtime_error("empty entry in cm list");
    out.push_back(parse_double(field) * 1e-2);
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (out.empty()) throw std::runtime_error("empty cm list");
  return out;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    const std::size_t comma = csv.find(',', begin);
    out.push_back(csv.substr(begin, comma == std::string::npos
                                        ? std::string::npos
                                        : comma - begin));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

// "min:max:step" in meters.
void parse_grid(const std::string& spec, MleConfig& cfg) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (begin <= spec.size()) {
    const std::size_t colon = spec.find(':', begin);
    fields.push_back(spec.substr(begin, colon == std::string::npos
                                            ? std::string::npos
                                            : colon - begin));
    if (colon == std::string::npos) break;
    begin = colon + 1;
  }
  if (fields.size() != 3) {
    throw std::runtime_error("grid must be min:max:step (meters)");
  }
  cfg.grid_min_m = parse_double(fields[0]);
  cfg.grid_max_m = parse_double(fields[1]);
  cfg.grid_step_m = parse_double(fields[2]);
}

VEffMode parse_veff(const std::string& mode) {
  if (mode == "harmonic") return VEffMode::harmonic;
  if (mode == "arithmetic") return VEffMode::arithmetic;
  throw std::runtime_error("v-eff mode must be harmonic or arithmetic");
}

std::vector<SymbolSequence> sequences_from_bits(
    const std::vector<std::string>& bit_strings, double t_s) {
  std::vector<SymbolSequence> seqs;
  for (const std::string& bits : bit_strings) {
    SymbolSequence s;
    s.t_s = t_s;
    for (char ch : bits) {
      if (ch != '0' && ch != '1') {
        throw std::runtime_error("bit strings may contain only 0 and 1");
      }
      s.bits.push_back(ch == '1');
    }
    seqs.push_back(std::move(s));
  }
  return seqs;
}

struct SimOptions {
  std::string topology_path;
  std::string plan_path;
  std::string distances_cm;
  std::string out_dir;
  int iterations = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int n_tx = 1000;
  double t_s = 1.0;
  int symbols = 20;
  double horizon = 25.0;
  double dt = 0.005;
};

int run_simulate(const SimOptions& opt) {
  SimConfig base{load_topology(opt.topology_path)};
  base.n_tx = opt.n_tx;
  base.t_s = opt.t_s;
  base.n_symbols = opt.symbols;
  base.horizon_s = opt.horizon;
  base.dt_sample = opt.dt;

  ExperimentPlan plan;
  if (!opt.plan_path.empty()) {
    plan = plan_from_json(load_json(opt.plan_path));
    if (opt.seed_given) plan.seed = opt.seed;  // CLI seed wins when given
  } else {
    if (opt.distances_cm.empty()) {
      throw std::runtime_error("simulate needs --distances or --plan");
    }
    const auto distances = parse_cm_list(opt.distances_cm);
    plan.sources = static_cast<int>(distances.size());
    plan.distance_configs_m = {distances};
    plan.iterations_per_config = opt.iterations;
    plan.seed = opt.seed;
  }
  build_dataset(plan, base, opt.out_dir);
  std::cout << "dataset written to " << opt.out_dir << "\n";
  return 0;
}

struct AnalyticOptions {
  std::string topology_path;
  std::string distances_cm;
  std::string bits;
  std::string out_csv;
  std::string v_eff = "harmonic";
  double n_tx = 1000.0;
  double t_s = 1.0;
  double horizon = 25.0;
  double dt = 0.005;
};

int run_analytic(const AnalyticOptions& opt) {
  const auto base = load_topology(opt.topology_path);
  const auto distances = parse_cm_list(opt.distances_cm);
  const auto topo = base.with_distances(distances);
  const auto seqs = sequences_from_bits(split_csv(opt.bits), opt.t_s);
  if (seqs.size() != topo.branch_count()) {
    throw std::runtime_error("need one bit string per branch");
  }
  const auto params =
      channel_params_for(topo, opt.n_tx, opt.t_s, parse_veff(opt.v_eff));
  const auto trace =
      expected_trace(params, seqs, make_time_grid(opt.dt, opt.horizon));
  write_trace_csv(opt.out_csv, trace, "expected_count");
  std::cout << "trace written to " << opt.out_csv << "\n";
  return 0;
}

struct MleOptions {
  std::string trace_csv;
  std::string manifest_path;
  std::string grid = "0.02:0.26:0.01";
  std::string noise = "poisson";
  std::string v_eff = "harmonic";
  std::string search = "auto";
  double refine_tol = 1e-4;
  int restarts = 8;
  std::uint64_t seed = 0;
};

int run_mle(const MleOptions& opt) {
  const IterationManifest manifest = load_manifest(opt.manifest_path);
  CountTrace trace = read_trace_csv(opt.trace_csv);
  trace.meta = manifest.meta;
  trace.dt_sample = manifest.dt_sample;

  KnownChannel known{topology_from_json(manifest.topology), {}, {}};
  for (const std::string& bits : manifest.meta.sequences) {
    SymbolSequence s;
    s.t_s = manifest.meta.t_s;
    for (char ch : bits) s.bits.push_back(ch == '1');
    known.sequences.push_back(std::move(s));
    known.n_tx.push_back(manifest.meta.n_tx);
  }

  MleConfig cfg;
  parse_grid(opt.grid, cfg);
  cfg.refine_tolerance_m = opt.refine_tol;
  cfg.noise = opt.noise == "gaussian" ? NoiseModel::gaussian : NoiseModel::poisson;
  cfg.v_eff_mode = parse_veff(opt.v_eff);
  cfg.restarts = opt.restarts;
  cfg.seed = opt.seed;
  if (opt.search == "exhaustive") cfg.search = MleSearch::exhaustive;
  else if (opt.search == "cd") cfg.search = MleSearch::coordinate_descent;

  const MleEstimate est = estimate(trace, known, cfg);
  nlohmann::json out = {
      {"distances_m", est.distances_m},
      {"log_likelihood", est.log_likelihood},
      {"iterations_evaluated", est.iterations_evaluated},
  };
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct TrainOptions {
  std::string data_dir;
  std::string config_path;
  std::string out_model;
  std::string log_csv;
  std::uint64_t seed = 1;
};

TrainConfig train_config_from_json(const nlohmann::json& j, int outputs) {
  TrainConfig cfg;
  cfg.model.outputs = outputs;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.contains("window_len")) cfg.model.window_len = m.at("window_len").get<int>();
    if (m.contains("lstm_layers")) cfg.model.lstm_layers = m.at("lstm_layers").get<int>();
    if (m.contains("hidden")) cfg.model.hidden = m.at("hidden").get<int>();
    if (m.contains("dense_layers")) cfg.model.dense_layers = m.at("dense_layers").get<int>();
    if (m.contains("dense_width")) cfg.model.dense_width = m.at("dense_width").get<int>();
  }
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    if (a.contains("lr")) cfg.adam.lr = a.at("lr").get<double>();
    if (a.contains("beta1")) cfg.adam.beta1 = a.at("beta1").get<double>();
    if (a.contains("beta2")) cfg.adam.beta2 = a.at("beta2").get<double>();
    if (a.contains("eps")) cfg.adam.eps = a.at("eps").get<double>();
  }
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<int>();
  if (j.contains("patience")) cfg.patience = j.at("patience").get<int>();
  if (j.contains("grad_chunk")) cfg.grad_chunk = j.at("grad_chunk").get<int>();
  if (j.contains("target_val_mse")) cfg.target_val_mse = j.at("target_val_mse").get<double>();
  return cfg;
}

WindowConfig window_config_from_json(const nlohmann::json& j) {
  WindowConfig cfg;
  if (j.contains("window")) {
    const auto& w = j.at("window");
    if (w.contains("undersample")) cfg.undersample = w.at("undersample").get<int>();
    if (w.contains("stride")) cfg.stride = w.at("stride").get<int>();
  }
  return cfg;
}

int run_train(const TrainOptions& opt) {
  const LoadedDataset dataset = load_dataset(opt.data_dir);
  nlohmann::json config_json = nlohmann::json::object();
  if (!opt.config_path.empty()) config_json = load_json(opt.config_path);

  TrainConfig cfg = train_config_from_json(config_json, dataset.plan.sources);
  cfg.seed = opt.seed;
  WindowConfig wcfg = window_config_from_json(config_json);
  wcfg.window_len = cfg.model.window_len;

  const SplitWindows sets = build_window_sets(dataset, wcfg);
  const TrainResult result = train(sets.train, sets.val, cfg, sets.input_scale);
  save_model(opt.out_model, result.model);

  if (!opt.log_csv.empty()) {
    CsvTable log;
    log.header = {"epoch", "train_mse", "val_mse"};
    for (const EpochLog& e : result.log) {
      log.rows.push_back({std::to_string(e.epoch), format_double(e.train_mse),
                          format_double(e.val_mse)});
    }
    write_csv(opt.log_csv, log);
  }
  std::cout << "model written to " << opt.out_model << " (best val MSE "
            << format_double(result.best_val_mse) << " at epoch "
            << result.best_epoch << ")\n";
  return 0;
}

struct EvalOptions {
  std::string data_dir;
  std::string model_path;
  bool use_mle = false;
  std::string grid = "0.02:0.26:0.01";
  std::string noise = "poisson";
  std::string split = "test";
  std::string report_csv;
  std::string summary_csv;
  std::string scatter_csv;
  std::string config_path;
  std::uint64_t seed = 0;
};

int run_eval(const EvalOptions& opt) {
  const LoadedDataset dataset = load_dataset(opt.data_dir);
  const Split split = split_from_string(opt.split);

  MetricsReport report;
  if (opt.use_mle) {
    MleConfig cfg;
    parse_grid(opt.grid, cfg);
    cfg.noise = opt.noise == "gaussian" ? NoiseModel::gaussian : NoiseModel::poisson;
    cfg.seed = opt.seed;
    report = evaluate_mle(dataset, split, cfg);
  } else {
    if (opt.model_path.empty()) {
      throw std::runtime_error("eval needs --model or --mle");
    }
    const ModelParams model = load_model(opt.model_path);
    nlohmann::json config_json = nlohmann::json::object();
    if (!opt.config_path.empty()) config_json = load_json(opt.config_path);
    report = evaluate_model(dataset, split, model,
                            window_config_from_json(config_json));
  }

  const fs::path report_path(opt.report_csv);
  const fs::path summary_path =
      opt.summary_csv.empty()
          ? report_path.parent_path() / (report_path.stem().string() + "_summary.csv")
          : fs::path(opt.summary_csv);
  const fs::path scatter_path =
      opt.scatter_csv.empty()
          ? report_path.parent_path() / (report_path.stem().string() + "_scatter.csv")
          : fs::path(opt.scatter_csv);

  write_report_csv(report_path, report);
  write_summary_csv(summary_path, report);
  write_scatter_csv(scatter_path, report);
  std::cout << "RE<5%: " << format_double(report.iteration_level.lt_5)
            << "  RE<10%: " << format_double(report.iteration_level.lt_10)
            << "  RE<20%: " << format_double(report.iteration_level.lt_20)
            << "\n";
  return 0;
}

struct ReportOptions {
  std::vector<std::string> summaries;
  std::string out_csv;
};

int run_report(const ReportOptions& opt) {
  std::vector<MetricsReport> reports;
  for (const std::string& path : opt.summaries) {
    const CsvTable summary = read_csv(path);
    if (summary.rows.empty()) {
      throw std::runtime_error("empty summary: " + path);
    }
    MetricsReport r;
    r.estimator = summary.rows[0][0];
    r.iteration_level = {parse_double(summary.rows[0][1]),
                         parse_double(summary.rows[0][2]),
                         parse_double(summary.rows[0][3])};
    reports.push_back(std::move(r));
  }
  write_csv(opt.out_csv, report_tables(reports));
  std::cout << "table written to " << opt.out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance estimation lab for branched molecular-communication channels"};
  app.require_subcommand(1);

  SimOptions sim_opt;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo particle simulation");
  sim->add_option("--topology", sim_opt.topology_path, "topology JSON")->required();
  sim->add_option("--plan", sim_opt.plan_path, "experiment plan JSON (dataset mode)");
  sim->add_option("--distances", sim_opt.distances_cm, "per-branch Tx-Rx distances (cm, comma separated)");
  sim->add_option("--iterations", sim_opt.iterations, "iterations (single-config mode)");
  sim->add_option("--seed", sim_opt.seed, "RNG seed");
  sim->add_option("--out", sim_opt.out_dir, "output directory")->required();
  sim->add_option("--n-tx", sim_opt.n_tx, "molecules per '1' symbol");
  sim->add_option("--t-s", sim_opt.t_s, "symbol duration (s)");
  sim->add_option("--symbols", sim_opt.symbols, "OOK symbols per iteration");
  sim->add_option("--horizon", sim_opt.horizon, "simulated duration (s)");
  sim->add_option("--dt", sim_opt.dt, "sampling interval (s)");

  AnalyticOptions ana_opt;
  auto* ana = app.add_subcommand("analytic", "closed-form expected trace");
  ana->add_option("--topology", ana_opt.topology_path, "topology JSON")->required();
  ana->add_option("--distances", ana_opt.distances_cm, "per-branch distances (cm)")->required();
  ana->add_option("--bits", ana_opt.bits, "per-branch bit strings, comma separated")->required();
  ana->add_option("--out", ana_opt.out_csv, "output trace CSV")->required();
  ana->add_option("--n-tx", ana_opt.n_tx, "molecules per '1' symbol");
  ana->add_option("--t-s", ana_opt.t_s, "symbol duration (s)");
  ana->add_option("--horizon", ana_opt.horizon, "trace duration (s)");
  ana->add_option("--dt", ana_opt.dt, "sampling interval (s)");
  ana->add_option("--v-eff", ana_opt.v_eff, "harmonic|arithmetic");
  std::uint64_t ana_seed = 0;
  ana->add_option("--seed", ana_seed, "unused; accepted for symmetry");

  MleOptions mle_opt;
  auto* mle = app.add_subcommand("mle", "maximum-likelihood distance estimate");
  mle->add_option("--trace", mle_opt.trace_csv, "trace CSV")->required();
  mle->add_option("--manifest", mle_opt.manifest_path, "iteration manifest JSON")->required();
  mle->add_option("--grid", mle_opt.grid, "min:max:step (m)");
  mle->add_option("--noise", mle_opt.noise, "poisson|gaussian");
  mle->add_option("--v-eff", mle_opt.v_eff, "harmonic|arithmetic");
  mle->add_option("--search", mle_opt.search, "auto|exhaustive|cd");
  mle->add_option("--refine-tol", mle_opt.refine_tol, "refinement tolerance (m)");
  mle->add_option("--restarts", mle_opt.restarts, "coordinate-descent restarts");
  mle->add_option("--seed", mle_opt.seed, "RNG seed (restarts)");

  TrainOptions train_opt;
  auto* tr = app.add_subcommand("train", "train the SBRNN regressor");
  tr->add_option("--data", train_opt.data_dir, "dataset directory")->required();
  tr->add_option("--config", train_opt.config_path, "training config JSON");
  tr->add_option("--out", train_opt.out_model, "output model file")->required();
  tr->add_option("--log", train_opt.log_csv, "training log CSV");
  tr->add_option("--seed", train_opt.seed, "RNG seed");

  EvalOptions eval_opt;
  auto* ev = app.add_subcommand("eval", "evaluate an estimator on a split");
  ev->add_option("--data", eval_opt.data_dir, "dataset directory")->required();
  ev->add_option("--model", eval_opt.model_path, "SBRNN model file");
  ev->add_flag("--mle", eval_opt.use_mle, "evaluate the MLE baseline instead");
  ev->add_option("--grid", eval_opt.grid, "MLE grid min:max:step (m)");
  ev->add_option("--noise", eval_opt.noise, "MLE noise model");
  ev->add_option("--split", eval_opt.split, "train|val|test");
  ev->add_option("--report", eval_opt.report_csv, "report CSV path")->required();
  ev->add_option("--summary", eval_opt.summary_csv, "summary CSV path");
  ev->add_option("--scatter", eval_opt.scatter_csv, "scatter CSV path");
  ev->add_option("--config", eval_opt.config_path, "window config JSON");
  ev->add_option("--seed", eval_opt.seed, "RNG seed");

  ReportOptions report_opt;
  auto* rep = app.add_subcommand("report", "merge summaries into a table");
  rep->add_option("--summary", report_opt.summaries, "summary CSV (repeatable)")->required();
  rep->add_option("--out", report_opt.out_csv, "output table CSV")->required();
  std::uint64_t rep_seed = 0;
  rep->add_option("--seed", rep_seed, "unused; accepted for symmetry");

  CLI11_PARSE(app, argc, argv);
  sim_opt.seed_given = sim->count("--seed") > 0;

  try {
    if (sim->parsed()) return run_simulate(sim_opt);
    if (ana->parsed()) return run_analytic(ana_opt);
    if (mle->parsed()) return run_mle(mle_opt);
    if (tr->parsed()) return run_train(train_opt);
    if (ev->parsed()) return run_eval(eval_opt);
    if (rep->parsed()) return run_report(report_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
