#include "mcdist/topology.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcdist {

double mean_speed(double flow_m3_per_s, double diameter_m) {
  if (!(flow_m3_per_s > 0.0) || !(diameter_m > 0.0)) {
    throw std::domain_error("mean_speed: flow rate and diameter must be positive");
  }
  const double radius = diameter_m / 2.0;
  return flow_m3_per_s / (kPi * radius * radius);
}

BranchTopology::BranchTopology(std::vector<BranchSpec> branches,
                               double main_length_m, double main_diameter_m,
                               double rx_length_m,
                               double kinematic_viscosity_m2_per_s)
    : branches_(std::move(branches)),
      main_length_m_(main_length_m),
      main_diameter_m_(main_diameter_m),
      rx_length_m_(rx_length_m),
      nu_m2_per_s_(kinematic_viscosity_m2_per_s) {
  if (branches_.empty()) {
    throw std::domain_error("BranchTopology: need at least one branch");
  }
  if (!(main_length_m_ > 0.0) || !(main_diameter_m_ > 0.0) ||
      !(rx_length_m_ > 0.0) || !(nu_m2_per_s_ > 0.0)) {
    throw std::domain_error("BranchTopology: main tube and viscosity parameters must be positive");
  }
  if (!(rx_length_m_ < 2.0 * main_length_m_)) {
    throw std::domain_error("BranchTopology: receiver must lie fully inside the main tube (rx_length < 2*main_length)");
  }

  double total_flow = 0.0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const BranchSpec& b = branches_[i];
    if (!(b.branch_length_m > 0.0) || !(b.tx_offset_m > 0.0) ||
        !(b.flow_m3_per_s > 0.0) || !(b.diameter_m > 0.0)) {
      throw std::domain_error("BranchTopology: branch " + std::to_string(i) +
                              " has a non-positive field");
    }
    if (b.tx_offset_m > b.branch_length_m) {
      throw std::domain_error("BranchTopology: branch " + std::to_string(i) +
                              " tx_offset exceeds branch length");
    }
    total_flow += b.flow_m3_per_s;
  }
  main_flow_m3_per_s_ = total_flow;

  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const double re = reynolds(*this, Segment::branch(static_cast<int>(i)));
    if (!(re < kLaminarReynoldsLimit)) {
      throw std::domain_error("BranchTopology: branch " + std::to_string(i) +
                              " violates the laminar regime (Re = " +
                              std::to_string(re) + ")");
    }
  }
  const double re_main = reynolds(*this, Segment::main());
  if (!(re_main < kLaminarReynoldsLimit)) {
    throw std::domain_error("BranchTopology: main tube violates the laminar regime (Re = " +
                            std::to_string(re_main) + ")");
  }
}

double BranchTopology::branch_mean_speed(std::size_t i) const {
  if (i >= branches_.size()) {
    throw std::out_of_range("branch_mean_speed: branch index out of range");
  }
  return mean_speed(branches_[i].flow_m3_per_s, branches_[i].diameter_m);
}

double BranchTopology::main_mean_speed() const {
  return mean_speed(main_flow_m3_per_s_, main_diameter_m_);
}

BranchTopology BranchTopology::with_distances(
    const std::vector<double>& distances_m) const {
  if (distances_m.size() != branches_.size()) {
    throw std::invalid_argument("with_distances: one distance per branch required");
  }
  std::vector<BranchSpec> adjusted = branches_;
  for (std::size_t i = 0; i < adjusted.size(); ++i) {
    adjusted[i].tx_offset_m = distances_m[i] - main_length_m_;
  }
  return BranchTopology(std::move(adjusted), main_length_m_, main_diameter_m_,
                        rx_length_m_, nu_m2_per_s_);
}

double tx_rx_distance(const BranchTopology& topology, std::size_t branch_index) {
  if (branch_index >= topology.branch_count()) {
    throw std::out_of_range("tx_rx_distance: branch index out of range");
  }
  return topology.branches()[branch_index].tx_offset_m + topology.main_length_m();
}

double reynolds(const BranchTopology& topology, Segment segment) {
  if (segment.index == Segment::kMain) {
    return topology.main_mean_speed() * topology.main_diameter_m() /
           topology.kinematic_viscosity();
  }
  const auto i = static_cast<std::size_t>(segment.index);
  return topology.branch_mean_speed(i) * topology.branches()[i].diameter_m /
         topology.kinematic_viscosity();
}

}  // namespace mcdist
