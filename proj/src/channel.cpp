#include "mcdist/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcdist {

void ChannelParams::validate() const {
  if (!(d_tx_rx_m > 0.0) || !(l_rx_m > 0.0)) {
    throw std::domain_error("ChannelParams: distances must be positive");
  }
  if (!(d_tx_rx_m > l_rx_m / 2.0)) {
    throw std::domain_error("ChannelParams: Tx must lie outside the receiver (d > L/2)");
  }
  if (!(v_eff > 0.0) || !(n_tx >= 0.0) || !(t_s > 0.0)) {
    throw std::domain_error("ChannelParams: v_eff and t_s must be positive, n_tx nonnegative");
  }
}

void SymbolSequence::validate() const {
  if (!(t_s > 0.0)) {
    throw std::domain_error("SymbolSequence: symbol duration must be positive");
  }
  for (int b : bits) {
    if (b != 0 && b != 1) {
      throw std::domain_error("SymbolSequence: bits must be 0 or 1");
    }
  }
}

ArrivalWindow arrival_window(const ChannelParams& params) {
  params.validate();
  const double half = params.l_rx_m / 2.0;
  return ArrivalWindow{(params.d_tx_rx_m - half) / (2.0 * params.v_eff),
                       (params.d_tx_rx_m + half) / (2.0 * params.v_eff)};
}

namespace {

// Core piecewise law; assumes validated params.
inline double p_ob_unchecked(const ChannelParams& p, double t) {
  if (t <= 0.0) return 0.0;
  const double half = p.l_rx_m / 2.0;
  const double t1 = (p.d_tx_rx_m - half) / (2.0 * p.v_eff);
  const double t2 = (p.d_tx_rx_m + half) / (2.0 * p.v_eff);
  if (t <= t1) return 0.0;
  if (t < t2) return 1.0 - (p.d_tx_rx_m - half) / (2.0 * p.v_eff * t);
  return p.l_rx_m / (2.0 * p.v_eff * t);
}

inline double expected_count_unchecked(const ChannelParams& p,
                                       const SymbolSequence& seq, double t) {
  double sum = 0.0;
  for (std::size_t k = 0; k < seq.bits.size(); ++k) {
    if (seq.bits[k] == 0) continue;
    sum += p_ob_unchecked(p, t - static_cast<double>(k) * seq.t_s);
  }
  return p.n_tx * sum;
}

}  // namespace

double p_ob(const ChannelParams& params, double t) {
  params.validate();
  return p_ob_unchecked(params, t);
}

Eigen::ArrayXd p_ob(const ChannelParams& params, const Eigen::ArrayXd& t) {
  params.validate();
  Eigen::ArrayXd out(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    out[i] = p_ob_unchecked(params, t[i]);
  }
  return out;
}

namespace {

// Splits a Tx-Rx distance into (branch length, main length) along the path.
struct PathSplit {
  double l_branch;
  double l_main;
};

PathSplit split_path(const BranchTopology& topology, double d_m) {
  const double l_main = std::min(d_m, topology.main_length_m());
  return PathSplit{d_m - l_main, l_main};
}

}  // namespace

double effective_velocity_for_distance(const BranchTopology& topology,
                                       std::size_t branch_index, double d_m,
                                       VEffMode mode) {
  if (branch_index >= topology.branch_count()) {
    throw std::out_of_range("effective_velocity: branch index out of range");
  }
  if (!(d_m > 0.0)) {
    throw std::domain_error("effective_velocity: distance must be positive");
  }
  const auto [l_branch, l_main] = split_path(topology, d_m);
  const double v_branch = topology.branch_mean_speed(branch_index);
  const double v_main = topology.main_mean_speed();
  if (mode == VEffMode::harmonic) {
    return d_m / (l_branch / v_branch + l_main / v_main);
  }
  return (l_branch * v_branch + l_main * v_main) / d_m;
}

double effective_velocity(const BranchTopology& topology,
                          std::size_t branch_index, VEffMode mode) {
  return effective_velocity_for_distance(
      topology, branch_index, tx_rx_distance(topology, branch_index), mode);
}

double expected_count(const ChannelParams& params, const SymbolSequence& seq,
                      double t) {
  params.validate();
  seq.validate();
  return expected_count_unchecked(params, seq, t);
}

double expected_count_multi(std::span<const ChannelParams> branch_params,
                            std::span<const SymbolSequence> seqs, double t) {
  if (branch_params.size() != seqs.size()) {
    throw std::invalid_argument("expected_count_multi: one sequence per branch required");
  }
  double total = 0.0;
  for (std::size_t b = 0; b < branch_params.size(); ++b) {
    total += expected_count(branch_params[b], seqs[b], t);
  }
  return total;
}

Eigen::ArrayXd expected_curve(std::span<const ChannelParams> branch_params,
                              std::span<const SymbolSequence> seqs,
                              const Eigen::ArrayXd& t_grid) {
  if (branch_params.size() != seqs.size()) {
    throw std::invalid_argument("expected_curve: one sequence per branch required");
  }
  if (t_grid.size() == 0) {
    throw std::invalid_argument("expected_curve: empty time grid");
  }
  for (Eigen::Index i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw std::invalid_argument("expected_curve: grid must be strictly increasing");
    }
  }
  for (const ChannelParams& p : branch_params) p.validate();
  for (const SymbolSequence& s : seqs) s.validate();

  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(t_grid.size());
  for (std::size_t b = 0; b < branch_params.size(); ++b) {
    for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
      out[i] += expected_count_unchecked(branch_params[b], seqs[b], t_grid[i]);
    }
  }
  return out;
}

CountTrace expected_trace(std::span<const ChannelParams> branch_params,
                          std::span<const SymbolSequence> seqs,
                          const Eigen::ArrayXd& t_grid) {
  Eigen::ArrayXd curve = expected_curve(branch_params, seqs, t_grid);

  const double dt = t_grid[0];
  for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
    const double expected = static_cast<double>(i + 1) * dt;
    if (std::abs(t_grid[i] - expected) > 1e-9 * std::max(1.0, expected)) {
      throw std::invalid_argument("expected_trace: grid must be uniform with t_i = (i+1)*dt");
    }
  }

  CountTrace trace;
  trace.dt_sample = dt;
  trace.counts = curve.matrix();
  trace.meta.n_tx = branch_params.empty() ? 0.0 : branch_params[0].n_tx;
  trace.meta.t_s = branch_params.empty() ? 0.0 : branch_params[0].t_s;
  for (const ChannelParams& p : branch_params) {
    trace.meta.distances_m.push_back(p.d_tx_rx_m);
  }
  for (const SymbolSequence& s : seqs) {
    std::string bits;
    for (int b : s.bits) bits.push_back(b ? '1' : '0');
    trace.meta.sequences.push_back(std::move(bits));
  }
  return trace;
}

std::vector<ChannelParams> channel_params_for(const BranchTopology& topology,
                                              double n_tx, double t_s,
                                              VEffMode mode) {
  std::vector<ChannelParams> out;
  out.reserve(topology.branch_count());
  for (std::size_t b = 0; b < topology.branch_count(); ++b) {
    ChannelParams p;
    p.d_tx_rx_m = tx_rx_distance(topology, b);
    p.l_rx_m = topology.rx_length_m();
    p.v_eff = effective_velocity(topology, b, mode);
    p.n_tx = n_tx;
    p.t_s = t_s;
    p.validate();
    out.push_back(p);
  }
  return out;
}

}  // namespace mcdist
