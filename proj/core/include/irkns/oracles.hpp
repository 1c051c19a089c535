#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "irkns/al_precond.hpp"
#include "irkns/stage_system.hpp"

namespace irkns {

// Dense materialization of a linear operator by columns.
Eigen::MatrixXd materialize(const LinOp& op, int n);

Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R);

// Small Stokes-limit stage system (zero state, zero boundary data, so the
// convection terms vanish and the blocks are linear). The struct owns every
// piece the assembled system points into; create through the factory and do
// not copy.
struct StokesInstance {
  StructuredMesh mesh;
  FESpaces spaces;
  SpatialOperators ops;
  ButcherTableau tab;
  ProblemSpec prob;
  TimeState state;
  StageVector iterate;
  StageSystem sys;
};

std::unique_ptr<StokesInstance> make_stokes_instance(int level, int s,
                                                     RKFamily family = RKFamily::RadauIIA,
                                                     double dt = 0.1, double nu = 1.0);

// Dense blocks of a stage system (unaugmented velocity grid and couplings)
// for oracle comparisons on small instances.
struct DenseBlocks {
  Eigen::MatrixXd Phi;     // s n_ui x s n_ui
  Eigen::MatrixXd Psi1;    // s n_ui x s n_p
  Eigen::MatrixXd Psi2;    // s n_p  x s n_ui
  Eigen::MatrixXd W_kron;  // dt A kron diag(Mp)
};

DenseBlocks materialize_blocks(const StageSystem& sys);

// Same blocks with one pressure dof removed per stage (constant-mode pin).
DenseBlocks pin_pressure_dof(const DenseBlocks& blocks, int s, int n_p, int dof = 0);

struct IdentityReport {
  std::string name;
  double error = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// The dense-oracle identity suite: Kronecker collapse of the augmentation
// term (l=2, s=1..3), the factorization identity for Psi2 Phi^{-1} Psi1
// (l=2, s=2), the Sherman-Morrison-Woodbury identity on random toy blocks
// and on pinned Stokes instances (l=2, s=1..2).
std::vector<IdentityReport> run_identity_suite(unsigned seed = 42);

}  // namespace irkns
