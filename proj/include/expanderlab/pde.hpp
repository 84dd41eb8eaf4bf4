#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "expanderlab/profile.hpp"
#include "expanderlab/variation.hpp"

namespace xlab {

// --------------------------------------------------------------------------
// Grids and fields
// --------------------------------------------------------------------------

struct RadialGrid {
  enum class Spacing { Uniform, Graded };

  std::vector<double> r;  // r[0] = 0 < ... < r[M] = R_dom
  Spacing spacing = Spacing::Uniform;

  static RadialGrid uniform(double R, int cells);
  // Spacings grow geometrically from r1 by `ratio` up to `cap`.
  static RadialGrid graded(double R, double r1, double cap,
                           double ratio = 1.05);
  // Midpoint insertion; the coarse nodes stay a subset of the fine ones.
  RadialGrid refined() const;

  std::size_t nodes() const { return r.size(); }
  double extent() const { return r.back(); }
};

enum class OriginBc { DirichletZero, DirichletPi, FreeSingular };

enum class OuterBc {
  Frozen,         // Dirichlet at the initial boundary value
  NeumannZero,    // zero gradient
  ExpanderExact,  // Dirichlet at psi(r_M / sqrt(t)), needs a profile
  DecayingPerturbation,  // self-similar: base + pert0 e^{-rate (s - s0)}
};

struct RadialField {
  double time = 0.0;
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;
  OriginBc origin_bc = OriginBc::DirichletZero;
};

enum class Frame { Physical, SelfSimilar };
enum class Nonlinearity { FullSine, LinearizedValpha };

struct SimConfig {
  double dt = 1e-3;
  double theta = 0.5;  // 0.5 = Crank-Nicolson, 1 = implicit Euler
  double t_begin = 0.0;
  double t_end = 1.0;
  Nonlinearity nonlinearity = Nonlinearity::FullSine;
  double delta_start = 1e-3;
  int snapshot_count = 11;
  Frame frame = Frame::Physical;
  OuterBc outer_bc = OuterBc::Frozen;
  // Self-similar runs may evolve the perturbation u = v - psi instead of v.
  bool perturbation_form = false;
  double outer_decay_rate = 0.5;
  std::shared_ptr<const Profile> profile;  // reference expander, if any
};

// --------------------------------------------------------------------------
// Time stepping
// --------------------------------------------------------------------------

// One theta step: diffusion in divergence form (weight r^{d-1}, times
// e^{rho^2/4} in the self-similar frame) solved implicitly on the
// tridiagonal, the sine term by one Newton-linearized implicit sweep.
RadialField pde_step(const RadialField& state, int d, const SimConfig& config);

struct SnapshotDiag {
  double time = 0.0;
  double sup_abs = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double newton_residual = 0.0;
  double tracking_error = -1.0;  // sup |h - psi(r/sqrt t)| when a profile is set
  double weighted_norm = -1.0;
};

struct Evolution {
  std::vector<RadialField> snapshots;
  std::vector<SnapshotDiag> diag;
  int d = 0;
  SimConfig config;

  const RadialField& back() const { return snapshots.back(); }
};

Evolution evolve(const RadialField& initial, int d, const SimConfig& config,
                 const VariationSolution* weight = nullptr);

// --------------------------------------------------------------------------
// Singular-data construction and the two-solutions experiment
// --------------------------------------------------------------------------

using DataFn = std::function<double(double)>;

// Initial condition at time delta: psi_branch(r/sqrt(delta)) plus the
// far-field perturbation (h0 - ell) brought in by a fixed cutoff that
// vanishes near 0 and equals 1 for r >= 1.
RadialField make_branch_data(const Profile& branch_profile, double ell,
                             const DataFn& h0, double delta,
                             std::shared_ptr<const RadialGrid> grid);

// Convenience overload that shoots the requested branch first.
RadialField make_branch_data(int d, double ell, Pole branch, const DataFn& h0,
                             double delta, std::shared_ptr<const RadialGrid> grid,
                             Profile* profile_out = nullptr);

double branch_cutoff(double r);  // the chi above

struct PairResult {
  Evolution north;
  Evolution south;
  std::shared_ptr<const Profile> north_profile;
  std::shared_ptr<const Profile> south_profile;
  std::vector<double> sup_diff;  // per snapshot
  double min_sup_diff = 0.0;
  double zeta_north = 0.0;  // closeness radius at the requested epsilon
  double zeta_south = 0.0;
  double zeta_epsilon = 0.1;
};

// Two evolutions from the same data at t = delta, north and south.
PairResult nonuniqueness_pair(int d, double ell, const DataFn& h0,
                              const SimConfig& config,
                              std::shared_ptr<const RadialGrid> grid,
                              double zeta_epsilon = 0.1);

// Largest zeta such that |h - psi(r/sqrt t)| < eps whenever t + r < zeta,
// over the sampled snapshots.
double closeness_zeta(const Evolution& run, const Profile& profile,
                      double eps);

// --------------------------------------------------------------------------
// Self-similar frame
// --------------------------------------------------------------------------

// Evolve v (or the perturbation u = v - psi) in self-similar variables;
// diagnostics track sup |v - psi| and, when `weight` is given, the
// weighted norm sup |(v - psi)/w|.
Evolution evolve_selfsimilar(const RadialField& initial, double s_begin,
                             double s_end, std::shared_ptr<const Profile> profile,
                             SimConfig config,
                             const VariationSolution* weight = nullptr);

struct DecayExperiment {
  Evolution perturbed;
  Evolution reference;
  std::vector<double> s;
  std::vector<double> sup_diff;  // sup |v_pert - v_ref| per snapshot
  double fitted_rate = 0.0;      // from log sup_diff ~ -rate * s
};

// Perturbs the expander by g, evolves alongside an unperturbed reference
// run, and fits the decay rate of the difference on [fit_lo, fit_hi]
// (relative to s_begin).
DecayExperiment selfsim_decay_experiment(std::shared_ptr<const Profile> profile,
                                         const DataFn& g,
                                         const SimConfig& config,
                                         std::shared_ptr<const RadialGrid> grid,
                                         double fit_lo, double fit_hi);

}  // namespace xlab
