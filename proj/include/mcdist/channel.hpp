#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "mcdist/topology.hpp"
#include "mcdist/trace.hpp"

namespace mcdist {

// Channel description for one branch, as seen from the receiver.
struct ChannelParams {
  double d_tx_rx_m = 0.0;  // Tx center to Rx center distance
  double l_rx_m = 0.0;     // receiver extent along the tube axis
  double v_eff = 0.0;      // effective transport speed (m/s)
  double n_tx = 0.0;       // molecules released per '1' symbol
  double t_s = 0.0;        // symbol duration (s)

  // Throws std::domain_error if any invariant is violated.
  void validate() const;
};

// OOK bit sequence for one transmitter.
struct SymbolSequence {
  std::vector<int> bits;  // entries in {0, 1}
  double t_s = 0.0;

  void validate() const;
};

struct ArrivalWindow {
  double t1 = 0.0;  // earliest possible arrival at the receiver front edge
  double t2 = 0.0;  // time after which a molecule may have fully passed the receiver
};

// t1 = (d - L/2) / (2 v_eff), t2 = (d + L/2) / (2 v_eff).
ArrivalWindow arrival_window(const ChannelParams& params);

// Probability that a molecule released at t = 0 occupies the receiver at
// time t, for uniform cross-sectional release under a Poiseuille profile:
//
//             { 0                         t <= t1
//   P_ob(t) = { 1 - (d - L/2)/(2 v t)     t1 < t < t2
//             { L / (2 v t)               t >= t2
//
// Defined as 0 for t <= 0 so shifted sums need no special casing.
double p_ob(const ChannelParams& params, double t);

// P_ob evaluated over a grid.
Eigen::ArrayXd p_ob(const ChannelParams& params, const Eigen::ArrayXd& t);

enum class VEffMode { harmonic, arithmetic };

// Single-scalar transport speed across branch + main tube for one branch.
// harmonic preserves total travel time: v_eff = d / (l_b/v_b + l_m/v_m);
// arithmetic is the length-weighted mean: v_eff = (l_b v_b + l_m v_m) / d.
double effective_velocity(const BranchTopology& topology,
                          std::size_t branch_index,
                          VEffMode mode = VEffMode::harmonic);

// Same weighting for a hypothetical Tx-Rx distance d on the given branch.
// For d <= main_length the whole path lies in the main tube and both modes
// return the main-tube speed, which keeps the function continuous; used by
// the MLE when scanning candidate distances.
double effective_velocity_for_distance(const BranchTopology& topology,
                                       std::size_t branch_index, double d_m,
                                       VEffMode mode = VEffMode::harmonic);

// Expected receiver count for one branch under OOK superposition:
// N_Tx * sum_k a[k] P_ob(t - k T_s).
double expected_count(const ChannelParams& params, const SymbolSequence& seq,
                      double t);

// Multi-branch superposition: the branch contributions simply add.
double expected_count_multi(std::span<const ChannelParams> branch_params,
                            std::span<const SymbolSequence> seqs, double t);

// expected_count_multi over a grid, as a bare curve.
Eigen::ArrayXd expected_curve(std::span<const ChannelParams> branch_params,
                              std::span<const SymbolSequence> seqs,
                              const Eigen::ArrayXd& t_grid);

// Same, packaged as a CountTrace. The grid must be uniform of the form
// t_i = (i + 1) * dt (see make_time_grid); throws std::invalid_argument
// otherwise or when the grid is empty.
CountTrace expected_trace(std::span<const ChannelParams> branch_params,
                          std::span<const SymbolSequence> seqs,
                          const Eigen::ArrayXd& t_grid);

// Convenience: channel parameters for every branch of a topology.
std::vector<ChannelParams> channel_params_for(const BranchTopology& topology,
                                              double n_tx, double t_s,
                                              VEffMode mode = VEffMode::harmonic);

}  // namespace mcdist
