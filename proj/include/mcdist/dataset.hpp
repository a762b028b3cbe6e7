#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdist/sim.hpp"
#include "mcdist/trace.hpp"

namespace mcdist {

enum class Split { train, val, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

// Distance sweep: which configurations to simulate and how often.
struct ExperimentPlan {
  int sources = 2;
  std::vector<std::vector<double>> distance_configs_m;  // one K-vector per config
  int iterations_per_config = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Plan file uses cm for distances, matching the CLI convention.
ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json plan_to_json(const ExperimentPlan& plan);

// 70/20/10 train/val/test assignment of iterations, stratified inside each
// config (every trace's windows share its iteration's split); deterministic
// in plan.seed.
std::vector<std::vector<Split>> make_split(const ExperimentPlan& plan);

// Simulates the whole plan. Writes under out_dir:
//   config_XXX/iter_YYY.csv    trace (`time_s,count`)
//   config_XXX/iter_YYY.json   manifest
//   dataset.json               plan + simulation settings + base topology
//   split.json                 the make_split assignment
void build_dataset(const ExperimentPlan& plan, const SimConfig& base,
                   const std::filesystem::path& out_dir);

struct LoadedTrace {
  CountTrace trace;
  int config_id = 0;
  int iteration = 0;
  Split split = Split::train;
};

struct LoadedDataset {
  ExperimentPlan plan;
  SimConfig base;  // topology carries the base geometry
  std::vector<LoadedTrace> traces;
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace mcdist
