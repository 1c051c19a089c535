#pragma once

#include <memory>
#include <vector>

#include "irkns/lu.hpp"
#include "irkns/mesh.hpp"
#include "irkns/sparse.hpp"

namespace irkns {

// Geometric multigrid for the pressure Laplacian on the Q1 grid hierarchy.
// The operator is singular on a closed domain, so dof 0 (the corner node) is
// pinned to an identity row/column on every level; prolongation already maps
// the pinned coarse dof onto the pinned fine dof with weight one, which keeps
// the Galerkin identity P^T K_f P = K_c exact for the pinned operators too.
//
// apply() runs a fixed number of V(1,1) cycles (damped Jacobi, omega = 2/3)
// from x = 0 with the pinned value copied from the right-hand side, and is
// therefore a fixed linear operator.
class PressurePoisson {
 public:
  PressurePoisson(const Rect& domain, int level, int cycles = 2);

  Vec apply(const Vec& b) const;

  // Pinned stiffness matrix on the finest level.
  const SparseMat& pinned_matrix() const { return levels_.back().K; }
  int pinned_dof() const { return 0; }
  int cycles() const { return cycles_; }

 private:
  struct Level {
    SparseMat K;   // pinned stiffness
    Vec diag;
    SparseMat P;   // prolongation from the next coarser level (empty on the coarsest)
  };

  void vcycle(int lev, const Vec& b, Vec& x) const;

  std::vector<Level> levels_;  // levels_[0] is the coarsest (mesh level 1)
  std::unique_ptr<LUSolver> coarse_;
  int cycles_;
};

}  // namespace irkns
