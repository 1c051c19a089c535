#pragma once

#include <functional>
#include <string>
#include <vector>

#include "irkns/assemble.hpp"
#include "irkns/mesh.hpp"
#include "irkns/sparse.hpp"
#include "irkns/tableau.hpp"

namespace irkns {

// Coefficient state at a time level. The scheme maintains discrete
// solenoidality: ||B u_n|| stays below div_tol at every accepted step.
struct TimeState {
  Vec u, p;
  double t = 0.0;
  int n = 0;
  static constexpr double div_tol = 1e-8;
};

// Stacked stage derivatives, full dof layout: yu holds s blocks of n_u, yp
// holds s blocks of n_p. Boundary entries of yu carry the time derivative of
// the Dirichlet data and are not Newton unknowns.
struct StageVector {
  int s = 0;
  Vec yu, yp;
};

// w_i = u_n + dt sum_j a_ij Y_j, same stacked layout.
struct StageAuxiliary {
  Vec wu, wp;
};

struct NewtonConfig {
  double rel_tol = 1e-5;
  double abs_tol = 1e-12;
  int max_iters = 20;
};

struct ProblemSpec {
  Rect domain;
  double nu = 0.02;
  VectorField f;     // volume forcing; null means zero
  VectorField g;     // Dirichlet velocity data
  VectorField gdot;  // time derivative of g, used for stage boundary values
  double T = 2.0;
  int n_t = 1;
  bool lps_enabled = false;
  double dt() const { return T / n_t; }
};

// Mesh-level operators shared by every step: full-dof Gram and differential
// matrices plus their interior restrictions for the stage systems.
struct SpatialOperators {
  StructuredMesh mesh;
  FESpaces spaces;
  SparseMat Mu, Ku, B, Mp, Kp;  // full dofs
  SparseMat Mu_int;             // interior x interior velocity mass
  SparseMat B_int;              // n_p x n_ui
  SparseMat Bt_int;             // n_ui x n_p
  Vec W;                        // diag(Mp)
  int n_ui = 0;

  Vec restrict_u(const Vec& full) const;
  Vec prolong_u(const Vec& interior) const;  // zero on boundary dofs
};

SpatialOperators build_operators(const StructuredMesh& mesh, const FESpaces& spaces);

// Linearized stage system at a Newton iterate. Unknowns are the interior
// velocity corrections (s blocks of n_ui) followed by the pressure
// corrections (s blocks of n_p). Block (i,j) of the velocity grid is
// delta_ij M + dt a_ij L_i with L_i the convection-diffusion(-stabilization)
// operator linearized at w_i; the coupling blocks are dt (A kron B^T) and
// dt (A kron B). rhs is the negated true residual of the nonlinear stage
// equations, so converged stages solve the unaugmented problem no matter how
// the linear systems are preconditioned.
struct StageSystem {
  int s = 0;
  int n_ui = 0, n_p = 0;
  double dt = 0.0;
  Eigen::MatrixXd A;
  const SpatialOperators* ops = nullptr;
  std::vector<SparseMat> L;  // interior, one per stage
  Vec ru, rp;                // rhs = -residual, stacked
  double residual_norm = 0.0;

  int size() const { return s * (n_ui + n_p); }
  Vec apply(const Vec& x) const;  // [Phi Psi1; Psi2 0] x
};

// Consistent initial pressure: solves K_p p0 = B v with v the discrete
// acceleration at t0 (mass solve of the momentum functional on interior
// dofs, prescribed time-derivative values vb on boundary dofs), then pins
// and zero-mean normalizes. Throws NotSolenoidal unless ||B u0|| < 1e-8.
Vec consistent_pressure(const SpatialOperators& ops, const Vec& u0,
                        const VectorField& f, double t0, double nu,
                        const Vec* vb = nullptr);

// Boundary values of the stage derivatives: gdot at t_n + c_i dt, nodal.
Vec stage_boundary_values(const SpatialOperators& ops, const ButcherTableau& tab,
                          const ProblemSpec& prob, double tn, int stage);

// Builds the Newton system at the given iterate. Qlps, when non-null, is the
// stabilization matrix frozen for the current step and enters both residual
// and Jacobian.
StageSystem assemble_newton_system(const SpatialOperators& ops, const TimeState& state,
                                   const StageVector& iterate, const ButcherTableau& tab,
                                   const ProblemSpec& prob, const SparseMat* Qlps = nullptr);

StageAuxiliary recompute_auxiliary(const SpatialOperators& ops, const TimeState& state,
                                   const StageVector& iterate, const ButcherTableau& tab,
                                   double dt);

// Linear stage solver: takes the assembled system, returns the stacked
// correction and iteration/cpu statistics.
struct StageSolveReport {
  Vec delta;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};
using StageLinearSolver = std::function<StageSolveReport(const StageSystem&)>;

struct NewtonReport {
  StageVector stages;
  int newton_iters = 0;
  int linear_iters_total = 0;
  int linear_solves = 0;
  double linear_seconds = 0.0;
  bool all_linear_converged = true;
  std::vector<double> residual_history;
};

// Delta-form Newton on the stage equations; initial guess Y = 0 on interior
// dofs, gdot on boundary dofs. Converges when the residual drops below
// max(rel_tol * initial, abs_tol). Throws NewtonDiverged after max_iters.
NewtonReport newton_solve(const SpatialOperators& ops, const TimeState& state,
                          const ButcherTableau& tab, const ProblemSpec& prob,
                          const NewtonConfig& cfg, const StageLinearSolver& solve,
                          const SparseMat* Qlps = nullptr);

// u_{n+1} = u_n + dt sum_i b_i Y_i, p likewise, t_{n+1} = t_n + dt.
TimeState rk_update(const TimeState& state, const StageVector& stages,
                    const ButcherTableau& tab, double dt);

struct RunStats {
  int steps = 0;
  long newton_total = 0;
  long linear_iters_total = 0;
  long linear_solves = 0;
  double linear_seconds = 0.0;
  bool all_converged = true;
  double avg_fgmres() const {
    return linear_solves ? double(linear_iters_total) / double(linear_solves) : 0.0;
  }
  double avg_newton() const { return steps ? double(newton_total) / double(steps) : 0.0; }
  double cpu_per_linear_iter() const {
    return linear_iters_total ? linear_seconds / double(linear_iters_total) : 0.0;
  }
  double cpu_per_step() const { return steps ? linear_seconds / double(steps) : 0.0; }
};

struct TimeLoopResult {
  TimeState state;
  RunStats stats;
  std::vector<TimeState> snapshots;  // includes the initial state when stored
};

// Advances n_t steps from the given initial state. LPS (when enabled) is
// reassembled once per step at the old velocity and frozen across Newton
// iterations. NewtonDiverged is rethrown with the step index attached.
TimeLoopResult time_loop(const SpatialOperators& ops, const ButcherTableau& tab,
                         const ProblemSpec& prob, const TimeState& initial,
                         const NewtonConfig& newton_cfg, const StageLinearSolver& solve,
                         bool store_snapshots = false);

// Text snapshot with a "level field time" header line, one coefficient per line.
void dump_snapshot(const std::string& path, int level, const std::string& field,
                   double time, const Vec& v);

}  // namespace irkns
