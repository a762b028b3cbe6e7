#pragma once

#include <cstddef>
#include <vector>

namespace mcdist {

inline constexpr double kPi = 3.14159265358979323846;

// Laminar threshold for pipe flow; topologies above this are rejected.
inline constexpr double kLaminarReynoldsLimit = 2300.0;

// One feeding branch of the Y-network. All quantities SI.
struct BranchSpec {
  double branch_length_m = 0.0;  // physical tube length of the branch
  double tx_offset_m = 0.0;      // release cross-section -> junction, along the branch
  double flow_m3_per_s = 0.0;    // volumetric flow rate
  double diameter_m = 0.0;       // inner diameter
};

// Identifies a tube segment: one of the branches or the main tube.
struct Segment {
  static constexpr int kMain = -1;
  int index = kMain;

  static Segment main() { return Segment{kMain}; }
  static Segment branch(int i) { return Segment{i}; }
};

// Cross-section mean speed of a volumetric flow in a circular tube (m/s).
// Throws std::domain_error on non-positive input.
double mean_speed(double flow_m3_per_s, double diameter_m);

// K branches merging at one junction into a main tube that carries the
// receiver. Immutable after construction; the constructor enforces the
// geometric and laminar-flow invariants.
class BranchTopology {
 public:
  BranchTopology(std::vector<BranchSpec> branches, double main_length_m,
                 double main_diameter_m, double rx_length_m,
                 double kinematic_viscosity_m2_per_s);

  const std::vector<BranchSpec>& branches() const { return branches_; }
  std::size_t branch_count() const { return branches_.size(); }
  double main_length_m() const { return main_length_m_; }
  double main_diameter_m() const { return main_diameter_m_; }
  double rx_length_m() const { return rx_length_m_; }
  double kinematic_viscosity() const { return nu_m2_per_s_; }

  // Conservation at the junction: the main tube carries the sum of the
  // branch flows.
  double main_flow_m3_per_s() const { return main_flow_m3_per_s_; }

  double branch_mean_speed(std::size_t i) const;
  double main_mean_speed() const;

  // Returns a copy with each branch's tx_offset set so that the Tx-Rx
  // distance equals distances_m[i]. Used to sweep distance configurations
  // over one base geometry.
  BranchTopology with_distances(const std::vector<double>& distances_m) const;

 private:
  std::vector<BranchSpec> branches_;
  double main_length_m_ = 0.0;
  double main_diameter_m_ = 0.0;
  double rx_length_m_ = 0.0;
  double nu_m2_per_s_ = 0.0;
  double main_flow_m3_per_s_ = 0.0;
};

// Center-of-Tx to center-of-Rx path length for one branch (m).
// Throws std::out_of_range for a bad index.
double tx_rx_distance(const BranchTopology& topology, std::size_t branch_index);

// Reynolds number v_mean * D / nu of a segment.
double reynolds(const BranchTopology& topology, Segment segment);

}  // namespace mcdist
