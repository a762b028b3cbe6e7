#pragma once

#include <cstdint>
#include <vector>

#include "mcdist/channel.hpp"
#include "mcdist/topology.hpp"
#include "mcdist/trace.hpp"

namespace mcdist {

enum class NoiseModel { poisson, gaussian };
enum class MleSearch { automatic, exhaustive, coordinate_descent };

struct MleConfig {
  double grid_min_m = 0.02;
  double grid_max_m = 0.26;
  double grid_step_m = 0.01;
  double refine_tolerance_m = 1e-4;
  NoiseModel noise = NoiseModel::poisson;
  MleSearch search = MleSearch::automatic;
  int restarts = 8;        // coordinate-descent restarts (K > 2)
  std::uint64_t seed = 0;  // restart draws
  VEffMode v_eff_mode = VEffMode::harmonic;

  void validate() const;
};

// Everything the estimator is told about the channel except the distances.
struct KnownChannel {
  BranchTopology topology;
  std::vector<SymbolSequence> sequences;  // one per branch
  std::vector<double> n_tx;               // molecules per '1' symbol, per branch
};

struct MleEstimate {
  std::vector<double> distances_m;
  double log_likelihood = 0.0;
  long iterations_evaluated = 0;  // likelihood evaluations performed
};

// Log-likelihood of the trace under candidate per-branch distances.
// poisson:  sum_t [ n_t ln(lambda_t) - lambda_t - ln(n_t!) ],
//           lambda_t = max(expected_count_multi(t), 1e-9);
// gaussian: negative sum of squared residuals (least-squares surrogate).
double log_likelihood(const CountTrace& trace,
                      const std::vector<double>& candidate_distances_m,
                      const KnownChannel& known, NoiseModel noise);

// Maximum-likelihood distances. K <= 2 runs an exhaustive grid followed by
// per-coordinate golden-section refinement; larger K uses coordinate descent
// from cfg.restarts seeded starting points. Forcing exhaustive search with
// K > 2 throws std::runtime_error suggesting coordinate-descent mode.
// Ties on the grid resolve to the lexicographically smallest vector.
MleEstimate estimate(const CountTrace& trace, const KnownChannel& known,
                     const MleConfig& cfg);

}  // namespace mcdist
