#pragma once

#include <cstdint>
#include <vector>

#include "mcdist/channel.hpp"
#include "mcdist/rng.hpp"
#include "mcdist/topology.hpp"
#include "mcdist/trace.hpp"

namespace mcdist {

// One advected molecule. rho = r/R is preserved along the whole path,
// including across the junction (no mixing, no diffusion).
struct Particle {
  double rho = 0.0;            // dimensionless radial coordinate in [0, 1)
  double release_time_s = 0.0;
  int branch_index = 0;
};

// Everything a simulation run needs besides the per-branch bit sequences.
struct SimConfig {
  BranchTopology topology;
  int n_tx = 1000;         // particles released per '1' symbol
  double t_s = 1.0;        // symbol duration (s)
  int n_symbols = 20;      // OOK sequence length drawn per iteration
  double horizon_s = 25.0;
  double dt_sample = 0.005;
  std::uint64_t seed = 0;
  int n_iterations = 1;

  void validate() const;
};

// Area-uniform radial coordinate: rho = sqrt(u), u ~ Uniform[0,1).
double sample_radius(SplitMix64& rng);

// Path length traveled from the release cross-section by time t, advected at
// the Poiseuille profile speed v(rho) = 2 v_mean (1 - rho^2) of the segment
// currently occupied. rho is preserved across the junction.
double axial_position(const Particle& p, const BranchTopology& topology,
                      double t);

// All particles an iteration releases: cfg.n_tx per '1' bit per branch, at
// the bit's start time, radii drawn from per-(branch, bit) substreams of the
// seed. The enumeration order is fixed.
std::vector<Particle> release_particles(const SimConfig& cfg,
                                        const std::vector<SymbolSequence>& seqs,
                                        std::uint64_t seed);

// Simulates one iteration: releases release_particles() and counts, at each
// sample time, the particles inside [x_Rx - L/2, x_Rx + L/2] (transparent
// receiver, both boundaries inclusive). Deterministic given the seed.
CountTrace run_iteration(const SimConfig& cfg,
                         const std::vector<SymbolSequence>& seqs,
                         std::uint64_t seed);

// cfg.n_iterations independent traces at the given per-branch distances.
// Iteration i runs under derive_seed(seed, i) and draws fresh random OOK
// sequences of cfg.n_symbols bits, so traces are reproducible regardless of
// scheduling.
std::vector<CountTrace> run_batch(const SimConfig& cfg,
                                  const std::vector<double>& distances_m,
                                  std::uint64_t seed);

// Random OOK sequences for every branch of an iteration (fair coin per bit).
std::vector<SymbolSequence> draw_sequences(const SimConfig& cfg,
                                           std::uint64_t iteration_seed);

}  // namespace mcdist
