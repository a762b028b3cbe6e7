#include "mcdist/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mcdist {

namespace {

constexpr double kMlPerMinToM3PerS = 1e-6 / 60.0;

[[noreturn]] void io_fail(const std::filesystem::path& path,
                          const std::string& what) {
  throw std::runtime_error(what + ": " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("parse_double: bad number '" + s + "'");
  }
  return v;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  if (!out) io_fail(path, "write failed");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!s.empty() && s.back() == ',') fields.emplace_back();
    return fields;
  };
  if (!std::getline(in, line)) io_fail(path, "empty CSV");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

void write_trace_csv(const std::filesystem::path& path, const CountTrace& trace,
                     const std::string& value_column) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << "time_s," << value_column << '\n';
  for (Eigen::Index i = 0; i < trace.counts.size(); ++i) {
    out << format_double(trace.time_at(i)) << ','
        << format_double(trace.counts[i]) << '\n';
  }
  if (!out) io_fail(path, "write failed");
}

CountTrace read_trace_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 2 || table.header[0] != "time_s") {
    io_fail(path, "not a trace CSV (expected header time_s,<value>)");
  }
  CountTrace trace;
  trace.counts.resize(static_cast<Eigen::Index>(table.rows.size()));
  double first_t = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != 2) io_fail(path, "malformed trace row");
    const double t = parse_double(table.rows[i][0]);
    if (i == 0) first_t = t;
    trace.counts[static_cast<Eigen::Index>(i)] = parse_double(table.rows[i][1]);
  }
  trace.dt_sample = first_t;
  return trace;
}

nlohmann::json topology_to_json(const BranchTopology& topology) {
  nlohmann::json j;
  j["branches"] = nlohmann::json::array();
  for (const BranchSpec& b : topology.branches()) {
    j["branches"].push_back({
        {"branch_length_m", b.branch_length_m},
        {"tx_offset_m", b.tx_offset_m},
        {"flow_ml_per_min", b.flow_m3_per_s / kMlPerMinToM3PerS},
        {"diameter_mm", b.diameter_m * 1e3},
    });
  }
  j["main"] = {
      {"length_m", topology.main_length_m()},
      {"diameter_mm", topology.main_diameter_m() * 1e3},
      {"rx_length_m", topology.rx_length_m()},
  };
  j["nu_m2_per_s"] = topology.kinematic_viscosity();
  return j;
}

BranchTopology topology_from_json(const nlohmann::json& j) {
  std::vector<BranchSpec> branches;
  for (const auto& jb : j.at("branches")) {
    BranchSpec b;
    b.branch_length_m = jb.at("branch_length_m").get<double>();
    b.tx_offset_m = jb.at("tx_offset_m").get<double>();
    b.flow_m3_per_s = jb.at("flow_ml_per_min").get<double>() * kMlPerMinToM3PerS;
    b.diameter_m = jb.at("diameter_mm").get<double>() * 1e-3;
    branches.push_back(b);
  }
  const auto& jm = j.at("main");
  return BranchTopology(std::move(branches), jm.at("length_m").get<double>(),
                        jm.at("diameter_mm").get<double>() * 1e-3,
                        jm.at("rx_length_m").get<double>(),
                        j.at("nu_m2_per_s").get<double>());
}

BranchTopology load_topology(const std::filesystem::path& path) {
  return topology_from_json(load_json(path));
}

void save_topology(const std::filesystem::path& path,
                   const BranchTopology& topology) {
  save_json(path, topology_to_json(topology));
}

void save_manifest(const std::filesystem::path& path,
                   const IterationManifest& m) {
  nlohmann::json j;
  j["distances_m"] = m.meta.distances_m;
  j["sequences"] = m.meta.sequences;
  j["seed"] = m.meta.seed;
  j["n_tx"] = m.meta.n_tx;
  j["t_s"] = m.meta.t_s;
  j["dt_sample"] = m.dt_sample;
  j["horizon_s"] = m.horizon_s;
  j["topology"] = m.topology;
  save_json(path, j);
}

IterationManifest load_manifest(const std::filesystem::path& path) {
  const nlohmann::json j = load_json(path);
  IterationManifest m;
  m.meta.distances_m = j.at("distances_m").get<std::vector<double>>();
  m.meta.sequences = j.at("sequences").get<std::vector<std::string>>();
  m.meta.seed = j.at("seed").get<std::uint64_t>();
  m.meta.n_tx = j.at("n_tx").get<double>();
  m.meta.t_s = j.at("t_s").get<double>();
  m.dt_sample = j.at("dt_sample").get<double>();
  m.horizon_s = j.at("horizon_s").get<double>();
  m.topology = j.at("topology");
  return m;
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    io_fail(path, std::string("JSON parse error (") + e.what() + ")");
  }
  return j;
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) io_fail(path, "write failed");
}

}  // namespace mcdist
