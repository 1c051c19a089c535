#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "irkns/sparse.hpp"

namespace irkns {

using LinOp = std::function<Vec(const Vec&)>;

struct KrylovConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-10;
  int max_iters = 200;
  int restart = 0;          // 0 = run without restarting
  bool capture_basis = false;  // store V and H for diagnostics
};

enum class KrylovStatus { Converged, MaxIterations, Breakdown, Stagnation };

std::string to_string(KrylovStatus s);

struct KrylovResult {
  Vec x;
  KrylovStatus status = KrylovStatus::MaxIterations;
  int iterations = 0;
  // Residual norms ||b - A x_k||, k = 0..iterations. With right (flexible)
  // preconditioning the Arnoldi estimate equals the true residual norm.
  std::vector<double> history;
  Eigen::MatrixXd V;  // only when capture_basis: n x (k+1) Arnoldi basis
  Eigen::MatrixXd H;  // only when capture_basis: (k+1) x k Hessenberg
  bool converged() const { return status == KrylovStatus::Converged; }
};

// Flexible GMRES (right preconditioning, modified Gram-Schmidt with one
// conditional reorthogonalization pass). The preconditioner is an arbitrary
// vector-to-vector map and may differ between iterations; the solution is
// reconstructed from the stored preconditioned basis. Pass a null precond for
// plain GMRES. x0, when given, seeds the initial guess (default zero).
KrylovResult fgmres(const LinOp& A, const Vec& b, const LinOp& precond,
                    const KrylovConfig& cfg = {}, const Vec* x0 = nullptr);

}  // namespace irkns
