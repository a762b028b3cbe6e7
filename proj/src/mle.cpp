#include "mcdist/mle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

#include "mcdist/rng.hpp"

namespace mcdist {

void MleConfig::validate() const {
  if (!(grid_min_m < grid_max_m)) {
    throw std::domain_error("MleConfig: grid_min must be below grid_max");
  }
  if (!(grid_step_m > 0.0)) {
    throw std::domain_error("MleConfig: grid_step must be positive");
  }
  if (!(refine_tolerance_m > 0.0) || !(refine_tolerance_m < grid_step_m)) {
    throw std::domain_error("MleConfig: refine_tolerance must lie in (0, grid_step)");
  }
  if (restarts < 1) {
    throw std::domain_error("MleConfig: need at least one restart");
  }
}

namespace {

constexpr double kLambdaFloor = 1e-9;

// Lexicographic order; used for deterministic tie-breaking.
bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Candidate likelihood machinery shared by grid search and refinement.
// Counts every likelihood evaluation it performs.
class Evaluator {
 public:
  Evaluator(const CountTrace& trace, const KnownChannel& known,
            NoiseModel noise, VEffMode mode)
      : trace_(trace), known_(known), noise_(noise), mode_(mode),
        t_grid_(trace.time_grid()) {
    lgamma_term_ = 0.0;
    if (noise_ == NoiseModel::poisson) {
      for (Eigen::Index i = 0; i < trace_.counts.size(); ++i) {
        lgamma_term_ += std::lgamma(trace_.counts[i] + 1.0);
      }
    }
  }

  // Unit-release expected curve of one branch at candidate distance d.
  Eigen::ArrayXd unit_curve(std::size_t branch, double d) const {
    ChannelParams p;
    p.d_tx_rx_m = d;
    p.l_rx_m = known_.topology.rx_length_m();
    p.v_eff = effective_velocity_for_distance(known_.topology, branch, d, mode_);
    p.n_tx = 1.0;
    p.t_s = known_.sequences[branch].t_s;
    const SymbolSequence& seq = known_.sequences[branch];
    Eigen::ArrayXd curve = Eigen::ArrayXd::Zero(t_grid_.size());
    for (std::size_t k = 0; k < seq.bits.size(); ++k) {
      if (seq.bits[k] == 0) continue;
      const double shift = static_cast<double>(k) * seq.t_s;
      curve += p_ob(p, Eigen::ArrayXd(t_grid_ - shift));
    }
    return curve;
  }

  double ll_from_lambda(const Eigen::ArrayXd& lambda) const {
    const Eigen::VectorXd& n = trace_.counts;
    double ll = 0.0;
    if (noise_ == NoiseModel::poisson) {
      for (Eigen::Index i = 0; i < n.size(); ++i) {
        const double lam = std::max(lambda[i], kLambdaFloor);
        ll += n[i] * std::log(lam) - lam;
      }
      ll -= lgamma_term_;
    } else {
      for (Eigen::Index i = 0; i < n.size(); ++i) {
        const double r = n[i] - lambda[i];
        ll -= r * r;
      }
    }
    return ll;
  }

  double operator()(const std::vector<double>& distances) {
    Eigen::ArrayXd lambda = Eigen::ArrayXd::Zero(t_grid_.size());
    for (std::size_t b = 0; b < distances.size(); ++b) {
      lambda += known_.n_tx[b] * unit_curve(b, distances[b]);
    }
    ++evals_;
    return ll_from_lambda(lambda);
  }

  void add_evals(long n) { evals_ += n; }
  long evals() const { return evals_; }
  Eigen::Index samples() const { return t_grid_.size(); }

 private:
  const CountTrace& trace_;
  const KnownChannel& known_;
  NoiseModel noise_;
  VEffMode mode_;
  Eigen::ArrayXd t_grid_;
  double lgamma_term_ = 0.0;
  long evals_ = 0;
};

struct Best {
  std::vector<double> distances;
  double ll = -std::numeric_limits<double>::infinity();

  void consider(const std::vector<double>& d, double value) {
    if (value > ll || (value == ll && (distances.empty() || lex_less(d, distances)))) {
      distances = d;
      ll = value;
    }
  }
};

// Golden-section maximization of f on [lo, hi] down to bracket width tol.
// Updates best with every point it evaluates, so the result can only improve
// on the incumbent.
void golden_refine(const std::function<double(double)>& f, double lo, double hi,
                   double tol, double& best_x, double& best_f) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  auto track = [&](double x, double v) {
    if (v > best_f) { best_f = v; best_x = x; }
  };
  track(x1, f1);
  track(x2, f2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
      track(x2, f2);
    } else {
      b = x2;
      x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
      track(x1, f1);
    }
  }
}

std::vector<double> grid_points(const MleConfig& cfg) {
  std::vector<double> g;
  for (double d = cfg.grid_min_m; d <= cfg.grid_max_m + 1e-12; d += cfg.grid_step_m) {
    g.push_back(std::min(d, cfg.grid_max_m));
  }
  return g;
}

Best exhaustive_search(Evaluator& eval, const KnownChannel& known,
                       const MleConfig& cfg, std::size_t k) {
  const std::vector<double> grid = grid_points(cfg);
  Best best;
  if (k == 1) {
    for (double d : grid) best.consider({d}, eval({d}));
    return best;
  }

  // K = 2: each branch's unit curve depends on its own distance only, so the
  // per-grid-point curves can be shared across all pairs.
  std::vector<Eigen::ArrayXd> c0(grid.size()), c1(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    c0[j] = known.n_tx[0] * eval.unit_curve(0, grid[j]);
    c1[j] = known.n_tx[1] * eval.unit_curve(1, grid[j]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double ll = eval.ll_from_lambda(Eigen::ArrayXd(c0[i] + c1[j]));
      best.consider({grid[i], grid[j]}, ll);
    }
  }
  eval.add_evals(static_cast<long>(grid.size() * grid.size()));
  return best;
}

// One golden-section pass over every coordinate, bracketing around the
// current point. Never decreases the likelihood.
void refine_coordinates(Evaluator& eval, const MleConfig& cfg, Best& best,
                        double bracket_halfwidth) {
  for (std::size_t k = 0; k < best.distances.size(); ++k) {
    const double lo = std::max(cfg.grid_min_m, best.distances[k] - bracket_halfwidth);
    const double hi = std::min(cfg.grid_max_m, best.distances[k] + bracket_halfwidth);
    std::vector<double> probe = best.distances;
    auto f = [&](double x) {
      probe[k] = x;
      return eval(probe);
    };
    double best_x = best.distances[k];
    double best_f = best.ll;
    golden_refine(f, lo, hi, cfg.refine_tolerance_m, best_x, best_f);
    probe[k] = best_x;
    best.consider(probe, best_f);
  }
}

Best coordinate_descent(Evaluator& eval, const MleConfig& cfg, std::size_t k) {
  const std::vector<double> grid = grid_points(cfg);
  Best overall;
  for (int r = 0; r < cfg.restarts; ++r) {
    SplitMix64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    std::vector<double> point(k);
    for (double& d : point) d = rng.uniform(cfg.grid_min_m, cfg.grid_max_m);

    Best current;
    current.consider(point, eval(point));
    constexpr int kMaxPasses = 15;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      const double before = current.ll;
      // Coarse scan per coordinate to escape local basins, then refine.
      for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> probe = current.distances;
        for (double g : grid) {
          probe[c] = g;
          current.consider(probe, eval(probe));
        }
      }
      refine_coordinates(eval, cfg, current, cfg.grid_step_m);
      if (current.ll - before < 1e-9) break;
    }
    overall.consider(current.distances, current.ll);
  }
  return overall;
}

}  // namespace

double log_likelihood(const CountTrace& trace,
                      const std::vector<double>& candidate_distances_m,
                      const KnownChannel& known, NoiseModel noise) {
  if (trace.counts.size() == 0) {
    throw std::invalid_argument("log_likelihood: empty trace");
  }
  const std::size_t k = known.topology.branch_count();
  if (candidate_distances_m.size() != k || known.sequences.size() != k ||
      known.n_tx.size() != k) {
    throw std::invalid_argument("log_likelihood: candidate/sequence/n_tx sizes must match the branch count");
  }
  Evaluator eval(trace, known, noise, VEffMode::harmonic);
  return eval(candidate_distances_m);
}

MleEstimate estimate(const CountTrace& trace, const KnownChannel& known,
                     const MleConfig& cfg) {
  cfg.validate();
  const std::size_t k = known.topology.branch_count();
  if (known.sequences.size() != k || known.n_tx.size() != k) {
    throw std::invalid_argument("estimate: sequence/n_tx sizes must match the branch count");
  }
  if (trace.counts.size() == 0) {
    throw std::invalid_argument("estimate: empty trace");
  }

  MleSearch search = cfg.search;
  if (search == MleSearch::automatic) {
    search = (k <= 2) ? MleSearch::exhaustive : MleSearch::coordinate_descent;
  }
  if (search == MleSearch::exhaustive && k > 2) {
    throw std::runtime_error(
        "estimate: exhaustive grid search supports at most 2 branches; "
        "use coordinate-descent mode for larger source counts");
  }

  Evaluator eval(trace, known, cfg.noise, cfg.v_eff_mode);
  Best best = (search == MleSearch::exhaustive)
                  ? exhaustive_search(eval, known, cfg, k)
                  : coordinate_descent(eval, cfg, k);
  if (search == MleSearch::exhaustive) {
    refine_coordinates(eval, cfg, best, cfg.grid_step_m);
  }

  MleEstimate out;
  out.distances_m = best.distances;
  out.log_likelihood = best.ll;
  out.iterations_evaluated = eval.evals();
  return out;
}

}  // namespace mcdist
