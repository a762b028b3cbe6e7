#include "mcdist/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mcdist {

namespace {

// Substream tags; keep sequence draws and particle draws independent.
constexpr std::uint64_t kTagSequences = 1;
constexpr std::uint64_t kTagParticles = 2;

}  // namespace

void SimConfig::validate() const {
  if (n_tx < 0) throw std::domain_error("SimConfig: n_tx must be nonnegative");
  if (!(t_s > 0.0)) throw std::domain_error("SimConfig: t_s must be positive");
  if (n_symbols < 1) throw std::domain_error("SimConfig: need at least one symbol");
  if (n_iterations < 1) throw std::domain_error("SimConfig: need at least one iteration");
  if (!(dt_sample > 0.0)) throw std::domain_error("SimConfig: dt_sample must be positive");
  const double ratio = horizon_s / dt_sample;
  const double rounded = std::round(ratio);
  if (!(horizon_s > 0.0) || rounded < 1.0 ||
      std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw std::domain_error("SimConfig: horizon must be a positive multiple of dt_sample");
  }
}

double sample_radius(SplitMix64& rng) { return std::sqrt(rng.uniform01()); }

double axial_position(const Particle& p, const BranchTopology& topology,
                      double t) {
  if (t < p.release_time_s) {
    throw std::invalid_argument("axial_position: t precedes the release time");
  }
  const auto b = static_cast<std::size_t>(p.branch_index);
  if (b >= topology.branch_count()) {
    throw std::out_of_range("axial_position: branch index out of range");
  }
  const double profile = 1.0 - p.rho * p.rho;
  const double v_branch = 2.0 * topology.branch_mean_speed(b) * profile;
  const double v_main = 2.0 * topology.main_mean_speed() * profile;
  const double offset = topology.branches()[b].tx_offset_m;
  const double elapsed = t - p.release_time_s;

  if (profile <= 0.0) return 0.0;  // wall particles do not move
  const double t_junction = offset / v_branch;
  if (elapsed <= t_junction) return v_branch * elapsed;
  return offset + v_main * (elapsed - t_junction);
}

std::vector<Particle> release_particles(const SimConfig& cfg,
                                        const std::vector<SymbolSequence>& seqs,
                                        std::uint64_t seed) {
  cfg.validate();
  const BranchTopology& topo = cfg.topology;
  if (seqs.size() != topo.branch_count()) {
    throw std::invalid_argument("release_particles: one sequence per branch required");
  }
  for (const SymbolSequence& s : seqs) {
    s.validate();
    if (static_cast<double>(s.bits.size()) * s.t_s > cfg.horizon_s) {
      throw std::invalid_argument("release_particles: sequence extends past the horizon");
    }
  }

  std::vector<Particle> particles;
  for (std::size_t b = 0; b < topo.branch_count(); ++b) {
    for (std::size_t k = 0; k < seqs[b].bits.size(); ++k) {
      if (seqs[b].bits[k] == 0) continue;
      const double release = static_cast<double>(k) * seqs[b].t_s;
      SplitMix64 stream(derive_seed(seed, kTagParticles, b, k));
      for (int n = 0; n < cfg.n_tx; ++n) {
        particles.push_back(
            {sample_radius(stream), release, static_cast<int>(b)});
      }
    }
  }
  return particles;
}

CountTrace run_iteration(const SimConfig& cfg,
                         const std::vector<SymbolSequence>& seqs,
                         std::uint64_t seed) {
  const std::vector<Particle> particles = release_particles(cfg, seqs, seed);
  const BranchTopology& topo = cfg.topology;

  const auto n_samples =
      static_cast<Eigen::Index>(std::llround(cfg.horizon_s / cfg.dt_sample));
  const double dt = cfg.dt_sample;
  const double l_rx_half = topo.rx_length_m() / 2.0;

  // Per-branch travel time to the receiver edges for profile factor 1
  // (rho = 0 would be twice as fast as the mean): scaled by 1/(1 - rho^2)
  // per particle. The receiver lies in the main tube by construction.
  std::vector<double> base_enter(topo.branch_count()), base_exit(topo.branch_count());
  for (std::size_t b = 0; b < topo.branch_count(); ++b) {
    const double offset = topo.branches()[b].tx_offset_m;
    const double d = tx_rx_distance(topo, b);
    const double v_branch2 = 2.0 * topo.branch_mean_speed(b);
    const double v_main2 = 2.0 * topo.main_mean_speed();
    base_enter[b] = offset / v_branch2 + (d - l_rx_half - offset) / v_main2;
    base_exit[b] = offset / v_branch2 + (d + l_rx_half - offset) / v_main2;
  }

  // Difference array over sample indices; each particle contributes one
  // +1/-1 pair for its stay inside the receiver. Sample i is at (i+1)*dt.
  std::vector<std::int64_t> diff(static_cast<std::size_t>(n_samples) + 1, 0);
  for (const Particle& p : particles) {
    const auto b = static_cast<std::size_t>(p.branch_index);
    const double profile = 1.0 - p.rho * p.rho;
    const double t_enter = p.release_time_s + base_enter[b] / profile;
    if (t_enter > cfg.horizon_s) continue;
    const double t_exit = p.release_time_s + base_exit[b] / profile;
    // First/last sample index with t_enter <= (i+1)*dt <= t_exit.
    auto i0 = static_cast<Eigen::Index>(std::ceil(t_enter / dt - 1.0));
    auto i1 = static_cast<Eigen::Index>(std::floor(t_exit / dt - 1.0));
    i0 = std::max<Eigen::Index>(i0, 0);
    i1 = std::min<Eigen::Index>(i1, n_samples - 1);
    if (i0 > i1) continue;
    ++diff[static_cast<std::size_t>(i0)];
    --diff[static_cast<std::size_t>(i1) + 1];
  }

  CountTrace trace;
  trace.dt_sample = dt;
  trace.counts.resize(n_samples);
  std::int64_t running = 0;
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    running += diff[static_cast<std::size_t>(i)];
    trace.counts[i] = static_cast<double>(running);
  }

  trace.meta.seed = seed;
  trace.meta.n_tx = static_cast<double>(cfg.n_tx);
  trace.meta.t_s = cfg.t_s;
  for (std::size_t b = 0; b < topo.branch_count(); ++b) {
    trace.meta.distances_m.push_back(tx_rx_distance(topo, b));
    std::string bits;
    for (int v : seqs[b].bits) bits.push_back(v ? '1' : '0');
    trace.meta.sequences.push_back(std::move(bits));
  }
  return trace;
}

std::vector<SymbolSequence> draw_sequences(const SimConfig& cfg,
                                           std::uint64_t iteration_seed) {
  std::vector<SymbolSequence> seqs;
  seqs.reserve(cfg.topology.branch_count());
  for (std::size_t b = 0; b < cfg.topology.branch_count(); ++b) {
    SplitMix64 stream(derive_seed(iteration_seed, kTagSequences, b));
    SymbolSequence s;
    s.t_s = cfg.t_s;
    s.bits.resize(static_cast<std::size_t>(cfg.n_symbols));
    for (int& bit : s.bits) bit = stream.coin() ? 1 : 0;
    seqs.push_back(std::move(s));
  }
  return seqs;
}

std::vector<CountTrace> run_batch(const SimConfig& cfg,
                                  const std::vector<double>& distances_m,
                                  std::uint64_t seed) {
  cfg.validate();
  SimConfig run_cfg = cfg;
  run_cfg.topology = cfg.topology.with_distances(distances_m);

  std::vector<CountTrace> traces(static_cast<std::size_t>(cfg.n_iterations));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.n_iterations; ++i) {
    const std::uint64_t iter_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const auto seqs = draw_sequences(run_cfg, iter_seed);
    traces[static_cast<std::size_t>(i)] = run_iteration(run_cfg, seqs, iter_seed);
  }
  return traces;
}

}  // namespace mcdist
