#include <doctest.h>

#include <filesystem>
#include <set>

#include "mcdist/dataset.hpp"
#include "mcdist/io.hpp"
#include "mcdist/pipeline.hpp"
#include "test_util.hpp"

using namespace mcdist;
using test::make_topology;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mcdist_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.sources = 2;
  plan.distance_configs_m = {{0.06, 0.12}, {0.12, 0.24}};
  plan.iterations_per_config = 2;
  plan.seed = 11;
  return plan;
}

SimConfig small_sim() {
  SimConfig cfg{make_topology({0.1, 0.1}, 0.04)};
  cfg.n_tx = 50;
  cfg.n_symbols = 20;
  return cfg;
}

}  // namespace

TEST_CASE("plan json round-trips with cm units") {
  const ExperimentPlan plan = small_plan();
  const ExperimentPlan back = plan_from_json(plan_to_json(plan));
  CHECK(back.sources == plan.sources);
  CHECK(back.iterations_per_config == plan.iterations_per_config);
  CHECK(back.seed == plan.seed);
  REQUIRE(back.distance_configs_m.size() == plan.distance_configs_m.size());
  for (std::size_t c = 0; c < plan.distance_configs_m.size(); ++c) {
    for (std::size_t b = 0; b < plan.distance_configs_m[c].size(); ++b) {
      CHECK(back.distance_configs_m[c][b] ==
            doctest::Approx(plan.distance_configs_m[c][b]).epsilon(1e-12));
    }
  }
}

TEST_CASE("split assignment is deterministic, stratified and 70/20/10") {
  ExperimentPlan plan = small_plan();
  plan.iterations_per_config = 20;
  const auto s1 = make_split(plan);
  const auto s2 = make_split(plan);
  CHECK(s1 == s2);

  for (const auto& config : s1) {
    int train = 0, val = 0, test = 0;
    for (Split s : config) {
      if (s == Split::train) ++train;
      if (s == Split::val) ++val;
      if (s == Split::test) ++test;
    }
    CHECK(train == 14);
    CHECK(val == 4);
    CHECK(test == 2);
  }

  ExperimentPlan other = plan;
  other.seed = 12;
  CHECK(make_split(other) != s1);
}

TEST_CASE("build_dataset writes traces, manifests, dataset and split files") {
  TempDir tmp("dataset_files");
  ExperimentPlan plan = small_plan();
  plan.distance_configs_m = {{0.06, 0.12}};
  plan.iterations_per_config = 1;
  build_dataset(plan, small_sim(), tmp.path);

  CHECK(fs::exists(tmp.path / "dataset.json"));
  CHECK(fs::exists(tmp.path / "split.json"));
  CHECK(fs::exists(tmp.path / "config_000" / "iter_000.csv"));
  CHECK(fs::exists(tmp.path / "config_000" / "iter_000.json"));

  const auto manifest = load_manifest(tmp.path / "config_000" / "iter_000.json");
  REQUIRE(manifest.meta.distances_m.size() == 2);
  CHECK(manifest.meta.distances_m[0] == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(manifest.meta.distances_m[1] == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(manifest.meta.sequences.size() == 2);
  CHECK(manifest.meta.sequences[0].size() == 20);
  CHECK(manifest.meta.n_tx == 50.0);
  CHECK(manifest.dt_sample == doctest::Approx(0.005).epsilon(1e-15));
}

TEST_CASE("load_dataset round-trips the build output") {
  TempDir tmp_a("dataset_roundtrip_a");
  TempDir tmp_b("dataset_roundtrip_b");
  const ExperimentPlan plan = small_plan();
  build_dataset(plan, small_sim(), tmp_a.path);
  build_dataset(plan, small_sim(), tmp_b.path);

  const LoadedDataset loaded = load_dataset(tmp_a.path);
  CHECK(loaded.plan.sources == 2);
  CHECK(loaded.traces.size() == 4);  // 2 configs x 2 iterations
  CHECK(loaded.base.n_tx == 50);
  for (const LoadedTrace& lt : loaded.traces) {
    CHECK(lt.trace.counts.size() == 5000);
    CHECK(lt.trace.counts.minCoeff() >= 0.0);
    CHECK(lt.trace.meta.sequences.size() == 2);
  }

  // Rebuilding under the same plan is byte-identical.
  const LoadedDataset other = load_dataset(tmp_b.path);
  for (std::size_t t = 0; t < loaded.traces.size(); ++t) {
    REQUIRE(other.traces[t].trace.counts.size() ==
            loaded.traces[t].trace.counts.size());
    for (Eigen::Index i = 0; i < loaded.traces[t].trace.counts.size(); i += 97) {
      CHECK(other.traces[t].trace.counts[i] == loaded.traces[t].trace.counts[i]);
    }
  }
}

TEST_CASE("every window of an iteration stays in one split") {
  TempDir tmp("dataset_split");
  ExperimentPlan plan = small_plan();
  plan.iterations_per_config = 5;
  build_dataset(plan, small_sim(), tmp.path);
  const LoadedDataset loaded = load_dataset(tmp.path);

  const auto split_json = load_json(tmp.path / "split.json");
  std::set<std::pair<int, int>> seen;
  for (const auto& a : split_json.at("assignments")) {
    seen.insert({a.at("config").get<int>(), a.at("iteration").get<int>()});
  }
  CHECK(seen.size() == 10);  // one assignment per iteration, none duplicated

  // Window counts per split add up to 16 windows per trace.
  const SplitWindows sets = build_window_sets(loaded, WindowConfig{});
  CHECK(sets.train.inputs.rows() + sets.val.inputs.rows() +
            sets.test.inputs.rows() ==
        16 * 10);
  CHECK(sets.input_scale > 0.0);
  // Inputs are scaled so the training maximum is exactly 1.
  CHECK(sets.train.inputs.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("four-source plans produce iterations x configs traces") {
  TempDir tmp("dataset_four");
  ExperimentPlan plan;
  plan.sources = 4;
  plan.seed = 3;
  plan.iterations_per_config = 2;
  plan.distance_configs_m = {{0.07, 0.1, 0.14, 0.2},
                             {0.06, 0.08, 0.16, 0.22},
                             {0.09, 0.12, 0.18, 0.24}};
  SimConfig cfg{make_topology({0.1, 0.1, 0.1, 0.1}, 0.04)};
  cfg.n_tx = 20;
  build_dataset(plan, cfg, tmp.path);
  const LoadedDataset loaded = load_dataset(tmp.path);
  CHECK(loaded.traces.size() == 6);
  for (const LoadedTrace& lt : loaded.traces) {
    CHECK(lt.trace.meta.distances_m.size() == 4);
  }
}

TEST_CASE("build_dataset validates the plan against the topology") {
  TempDir tmp("dataset_bad");
  ExperimentPlan plan = small_plan();  // two sources
  SimConfig cfg{make_topology({0.1}, 0.04)};  // one branch
  CHECK_THROWS_AS(build_dataset(plan, cfg, tmp.path), std::invalid_argument);
}
