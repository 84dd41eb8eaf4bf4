#pragma once

#include <memory>
#include <vector>

#include "expanderlab/pde.hpp"

namespace xlab {

// (v, w) components of the corotational Ginzburg-Landau state,
// u = (v, w x/|x|).
struct EquivariantPair {
  double time = 0.0;
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> v, w;
  double epsilon = 0.0;
};

struct GLConfig {
  std::vector<double> epsilon_sequence;  // strictly decreasing
  double dt = 2e-5;
  double t_end = 0.05;
  int snapshot_count = 26;
  double reference_delta = 1e-4;  // launch time of the reference run
};

// One Strang step: implicit diffusion halves around an exact-direction
// penalization solve (scalar cubic Newton per node).
EquivariantPair gl_step(const EquivariantPair& state, double dt, int d);

double gl_energy(const EquivariantPair& state, int d);

struct GLEvolution {
  std::vector<EquivariantPair> snapshots;
  std::vector<double> energy;
  double max_modulus_excess = 0.0;  // max over run of |u|^2 - 1
};

GLEvolution gl_evolve(const EquivariantPair& initial, int d, double dt,
                      double t_end, int snapshot_count);

// Build (cos h0, sin h0) data with the origin mollified at scale epsilon.
EquivariantPair gl_data(const DataFn& h0, double epsilon,
                        std::shared_ptr<const RadialGrid> grid);

double gl_reconstruct_h(double v, double w);  // atan2(w, v)

struct GLSelectReport {
  std::vector<double> epsilons;
  std::vector<double> distance;      // sup |h^eps - h_ref| at t_end
  std::vector<double> min_v_origin;  // min of v over t, r <= 0.5
  std::vector<double> modulus_excess;
  std::vector<double> dt_h_l2;       // discrete space-time sum of |dt h|^2
  std::vector<GLEvolution> runs;
  Evolution reference;               // the north run used as the limit
  bool monotone = false;
};

// For each epsilon, evolve from (cos h0, sin h0) and report the distance
// of the reconstructed angle to the north reference run at t_end.
GLSelectReport gl_select(int d, double ell, const DataFn& h0,
                         const GLConfig& config,
                         std::shared_ptr<const RadialGrid> grid);

}  // namespace xlab
