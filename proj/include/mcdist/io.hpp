#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdist/topology.hpp"
#include "mcdist/trace.hpp"

namespace mcdist {

// Shortest round-trip decimal representation. All CSV/JSON number output
// goes through this so identical runs produce byte-identical files.
std::string format_double(double v);
double parse_double(const std::string& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Trace CSV: `time_s,<value_column>` rows on the trace's sample grid.
void write_trace_csv(const std::filesystem::path& path, const CountTrace& trace,
                     const std::string& value_column = "count");
// Reads counts back; metadata comes from the side-car manifest, not the CSV.
CountTrace read_trace_csv(const std::filesystem::path& path);

// Topology config codec. File units: flow in ml/min, diameters in mm,
// lengths in m (stored internally all-SI).
nlohmann::json topology_to_json(const BranchTopology& topology);
BranchTopology topology_from_json(const nlohmann::json& j);
BranchTopology load_topology(const std::filesystem::path& path);
void save_topology(const std::filesystem::path& path, const BranchTopology& topology);

// Per-iteration manifest: everything needed to interpret one trace CSV.
struct IterationManifest {
  TraceMeta meta;
  double dt_sample = 0.0;
  double horizon_s = 0.0;
  nlohmann::json topology;  // same schema as the topology config file
};

void save_manifest(const std::filesystem::path& path, const IterationManifest& m);
IterationManifest load_manifest(const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mcdist
