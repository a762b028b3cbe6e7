#include "mcdist/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "mcdist/io.hpp"
#include "mcdist/rng.hpp"

namespace mcdist {

namespace {

constexpr std::uint64_t kTagSplit = 21;
constexpr std::uint64_t kTagSim = 22;

std::string config_dir_name(int config_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "config_%03d", config_id);
  return buf;
}

std::string iter_base_name(int iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%03d", iteration);
  return buf;
}

nlohmann::json sim_to_json(const SimConfig& cfg) {
  return {
      {"n_tx", cfg.n_tx},
      {"t_s", cfg.t_s},
      {"n_symbols", cfg.n_symbols},
      {"horizon_s", cfg.horizon_s},
      {"dt_sample", cfg.dt_sample},
  };
}

void sim_from_json(const nlohmann::json& j, SimConfig& cfg) {
  cfg.n_tx = j.at("n_tx").get<int>();
  cfg.t_s = j.at("t_s").get<double>();
  cfg.n_symbols = j.at("n_symbols").get<int>();
  cfg.horizon_s = j.at("horizon_s").get<double>();
  cfg.dt_sample = j.at("dt_sample").get<double>();
}

}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  throw std::logic_error("to_string: bad split");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::runtime_error("split_from_string: bad split '" + s + "'");
}

void ExperimentPlan::validate() const {
  if (sources < 1) throw std::domain_error("ExperimentPlan: need at least one source");
  if (iterations_per_config < 1) {
    throw std::domain_error("ExperimentPlan: need at least one iteration per config");
  }
  if (distance_configs_m.empty()) {
    throw std::domain_error("ExperimentPlan: no distance configurations");
  }
  for (const auto& config : distance_configs_m) {
    if (static_cast<int>(config.size()) != sources) {
      throw std::domain_error("ExperimentPlan: every distance config needs one entry per source");
    }
    for (double d : config) {
      if (!(d > 0.0)) throw std::domain_error("ExperimentPlan: distances must be positive");
    }
  }
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan plan;
  plan.sources = j.at("sources").get<int>();
  for (const auto& jc : j.at("distance_configs_cm")) {
    std::vector<double> config;
    for (const auto& v : jc) config.push_back(v.get<double>() * 1e-2);
    plan.distance_configs_m.push_back(std::move(config));
  }
  plan.iterations_per_config = j.at("iterations").get<int>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.validate();
  return plan;
}

nlohmann::json plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& config : plan.distance_configs_m) {
    nlohmann::json jc = nlohmann::json::array();
    for (double d : config) jc.push_back(d * 1e2);
    configs.push_back(std::move(jc));
  }
  return {
      {"sources", plan.sources},
      {"distance_configs_cm", configs},
      {"iterations", plan.iterations_per_config},
      {"seed", plan.seed},
  };
}

std::vector<std::vector<Split>> make_split(const ExperimentPlan& plan) {
  plan.validate();
  const int n = plan.iterations_per_config;
  const int n_train = static_cast<int>(0.7 * n);
  const int n_val = static_cast<int>(0.2 * n);

  std::vector<std::vector<Split>> split;
  for (std::size_t c = 0; c < plan.distance_configs_m.size(); ++c) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(derive_seed(plan.seed, kTagSplit, c));
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<Split> assignment(static_cast<std::size_t>(n), Split::test);
    for (int i = 0; i < n_train; ++i) {
      assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = Split::train;
    }
    for (int i = n_train; i < n_train + n_val; ++i) {
      assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = Split::val;
    }
    split.push_back(std::move(assignment));
  }
  return split;
}

void build_dataset(const ExperimentPlan& plan, const SimConfig& base,
                   const std::filesystem::path& out_dir) {
  plan.validate();
  base.validate();
  if (static_cast<int>(base.topology.branch_count()) != plan.sources) {
    throw std::invalid_argument("build_dataset: topology branch count must match plan.sources");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("build_dataset: cannot create " + out_dir.string());
  }

  const auto split = make_split(plan);
  SimConfig run_cfg = base;
  run_cfg.n_iterations = plan.iterations_per_config;
  run_cfg.seed = plan.seed;

  for (std::size_t c = 0; c < plan.distance_configs_m.size(); ++c) {
    const auto& distances = plan.distance_configs_m[c];
    const auto config_dir = out_dir / config_dir_name(static_cast<int>(c));
    std::filesystem::create_directories(config_dir, ec);
    if (ec) {
      throw std::runtime_error("build_dataset: cannot create " + config_dir.string());
    }

    const std::uint64_t config_seed = derive_seed(plan.seed, kTagSim, c);
    const auto traces = run_batch(run_cfg, distances, config_seed);
    const BranchTopology run_topology = base.topology.with_distances(distances);

    for (int i = 0; i < plan.iterations_per_config; ++i) {
      const auto& trace = traces[static_cast<std::size_t>(i)];
      const std::string stem = iter_base_name(i);
      write_trace_csv(config_dir / (stem + ".csv"), trace);

      IterationManifest manifest;
      manifest.meta = trace.meta;
      manifest.dt_sample = trace.dt_sample;
      manifest.horizon_s = base.horizon_s;
      manifest.topology = topology_to_json(run_topology);
      save_manifest(config_dir / (stem + ".json"), manifest);
    }
  }

  nlohmann::json dataset_json = {
      {"plan", plan_to_json(plan)},
      {"sim", sim_to_json(base)},
      {"topology", topology_to_json(base.topology)},
  };
  save_json(out_dir / "dataset.json", dataset_json);

  nlohmann::json assignments = nlohmann::json::array();
  for (std::size_t c = 0; c < split.size(); ++c) {
    for (std::size_t i = 0; i < split[c].size(); ++i) {
      assignments.push_back({{"config", c},
                             {"iteration", i},
                             {"split", to_string(split[c][i])}});
    }
  }
  save_json(out_dir / "split.json",
            nlohmann::json{{"seed", plan.seed}, {"assignments", assignments}});
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  const nlohmann::json dataset_json = load_json(dir / "dataset.json");
  SimConfig base{topology_from_json(dataset_json.at("topology"))};
  sim_from_json(dataset_json.at("sim"), base);
  LoadedDataset out{plan_from_json(dataset_json.at("plan")), std::move(base), {}};
  out.base.seed = out.plan.seed;
  out.base.n_iterations = out.plan.iterations_per_config;

  const nlohmann::json split_json = load_json(dir / "split.json");
  std::vector<std::vector<Split>> split(
      out.plan.distance_configs_m.size(),
      std::vector<Split>(static_cast<std::size_t>(out.plan.iterations_per_config),
                         Split::test));
  for (const auto& a : split_json.at("assignments")) {
    split.at(a.at("config").get<std::size_t>())
        .at(a.at("iteration").get<std::size_t>()) =
        split_from_string(a.at("split").get<std::string>());
  }

  for (std::size_t c = 0; c < out.plan.distance_configs_m.size(); ++c) {
    const auto config_dir = dir / config_dir_name(static_cast<int>(c));
    for (int i = 0; i < out.plan.iterations_per_config; ++i) {
      const std::string stem = iter_base_name(i);
      const IterationManifest manifest = load_manifest(config_dir / (stem + ".json"));
      LoadedTrace lt;
      lt.trace = read_trace_csv(config_dir / (stem + ".csv"));
      lt.trace.meta = manifest.meta;
      lt.trace.dt_sample = manifest.dt_sample;
      lt.config_id = static_cast<int>(c);
      lt.iteration = i;
      lt.split = split[c][static_cast<std::size_t>(i)];
      out.traces.push_back(std::move(lt));
    }
  }
  return out;
}

}  // namespace mcdist
