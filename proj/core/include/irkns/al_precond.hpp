#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "irkns/chebyshev.hpp"
#include "irkns/fgmres.hpp"
#include "irkns/ilu0.hpp"
#include "irkns/lu.hpp"
#include "irkns/poisson_mg.hpp"
#include "irkns/stage_system.hpp"

namespace irkns {

enum class WMode { DiagMp, FullMp };

std::string to_string(WMode m);

struct AugmentationParams {
  double gamma = 1.0;
  WMode w_mode = WMode::DiagMp;
};

enum class DiagSolve { ExactLU, InexactILUGmres };

std::string to_string(DiagSolve m);

struct GSConfig {
  int sweeps = 1;
  DiagSolve mode = DiagSolve::ExactLU;
  int inner_iters = 10;  // GMRES steps per diagonal solve in inexact mode
};

// Augmented form of a stage system: the velocity block picks up
// gamma * dt * a_ij * B^T W^{-1} B and the velocity rhs picks up
// gamma * B^T W^{-1} b^p per stage; the constraint rows are unchanged, so
// the solution set is the same as the unaugmented system's.
struct AugmentedSystem {
  const StageSystem* sys = nullptr;
  AugmentationParams params;
  SparseMat G;              // B^T W^{-1} B on interior dofs (DiagMp)
  Eigen::MatrixXd G_dense;  // FullMp variant (small meshes only)
  Vec bu, bp;               // augmented rhs

  int size() const { return sys->size(); }
  Vec rhs() const;
  Vec gmul(const Vec& x) const;              // G x, either storage
  Vec apply(const Vec& x) const;             // [Phi_gamma Psi1; Psi2 0] x
  Vec apply_phi_gamma(const Vec& xu) const;  // velocity block grid only
  Vec psi1(const Vec& xp) const;             // dt (A kron B^T) xp
  Vec psi2(const Vec& xu) const;             // dt (A kron B) xu
  SparseMat diag_block(int i) const;         // Phi_gamma_ii assembled (DiagMp)
  Eigen::MatrixXd diag_block_dense(int i) const;
};

// G may be passed precomputed (it only depends on the mesh and W mode);
// FullMp throws FullMpTooLarge above ~1200 interior velocity dofs.
AugmentedSystem build_augmented(const StageSystem& sys, const AugmentationParams& params,
                                const SparseMat* G_cached = nullptr,
                                const Eigen::MatrixXd* G_dense_cached = nullptr);

SparseMat assemble_g_matrix(const SpatialOperators& ops);            // diag(Mp) weight
Eigen::MatrixXd assemble_g_matrix_dense(const SpatialOperators& ops);  // full Mp weight

// Forward block Gauss-Seidel on the augmented velocity block grid, stage
// index ascending; diagonal blocks solved exactly (sparse LU) or by
// ILU(0)-preconditioned GMRES with a fixed step budget.
class GaussSeidel11 {
 public:
  GaussSeidel11(const AugmentedSystem& sys, GSConfig cfg);
  Vec apply(const Vec& r) const;

 private:
  const AugmentedSystem* sys_;
  GSConfig cfg_;
  std::vector<std::unique_ptr<LUSolver>> lu_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu_;
  std::vector<ILU0> ilu_;
  std::vector<SparseMat> diag_;  // kept for the inexact inner solves
};

Vec apply_gauss_seidel_11(const AugmentedSystem& sys, const GSConfig& cfg, const Vec& r);

// Approximate inverse of the augmented Schur complement:
//   z = (gamma/dt) (A^{-1} kron W^{-1}) r
//     + dt^{-2} (A^{-1} kron I) [ I kron Kp^{-1} + nu dt (A kron Mp^{-1}) ] (A^{-1} kron I) r
// with Kp^{-1} and Mp^{-1} given as fixed linear appliers (multigrid cycles
// and Chebyshev steps in production, LU in the dense oracles).
class SchurApprox {
 public:
  SchurApprox(Eigen::MatrixXd A_rk, double dt, double nu, double gamma,
              LinOp w_inv, LinOp kp_inv, LinOp mp_inv, int n_p);

  Vec apply(const Vec& r) const;

  double gamma() const { return gamma_; }

 private:
  Eigen::MatrixXd A_, Ainv_;
  double dt_, nu_, gamma_;
  LinOp w_inv_, kp_inv_, mp_inv_;
  int n_p_;

  Vec mix(const Eigen::MatrixXd& C, const Vec& x) const;  // (C kron I) x
};

Vec apply_schur_inverse(const SchurApprox& S, const Vec& r);

// Block-triangular preconditioner. Upper (default):
//   z_p = -S~^{-1} r_p;  z_u = GS(r_u - Psi1 z_p).
// Lower variant: z_u = GS(r_u);  z_p = -S~^{-1} (r_p - Psi2 z_u).
class BlockPreconditioner {
 public:
  BlockPreconditioner(const AugmentedSystem& sys, const GSConfig& gs_cfg,
                      const SchurApprox& schur, bool lower_triangular = false);

  Vec apply(const Vec& r) const;

 private:
  const AugmentedSystem* sys_;
  GaussSeidel11 gs_;
  const SchurApprox* schur_;
  bool lower_;
};

// Dense check of the Sherman-Morrison-Woodbury identity
//   S_gamma^{-1} = gamma W_kron^{-1} + (Psi2 Phi^{-1} Psi1)^{-1}
// with S_gamma = Psi2 (Phi + gamma Psi1 W_kron^{-1} Psi2)^{-1} Psi1.
// Returns the relative Frobenius error; throws SingularInner when
// Psi2 Phi^{-1} Psi1 is numerically singular.
double verify_smw_identity(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Psi1,
                           const Eigen::MatrixXd& Psi2, const Eigen::MatrixXd& W_kron,
                           double gamma);

// Diagnostic: eigenvalues of the right-preconditioned operator, materialized
// densely (guarded to small instances) and written as a "re,im" CSV.
void dump_preconditioned_eigenvalues(const std::string& path, const AugmentedSystem& sys,
                                     const BlockPreconditioner& prec);

struct LinearConfig {
  AugmentationParams aug;
  GSConfig gs;
  KrylovConfig krylov;
  bool lower_triangular = false;
  int mg_cycles = 2;
  int cheb_steps = 20;
};

// Per-run linear solver: owns the mesh-level pieces (G, multigrid hierarchy,
// Chebyshev brackets, Schur applier) and solves each Newton system with
// FGMRES under the block preconditioner. Zero initial guess per solve.
class StageSolver {
 public:
  StageSolver(const SpatialOperators& ops, const ButcherTableau& tab, double dt,
              double nu, LinearConfig cfg);

  StageSolveReport operator()(const StageSystem& sys) const;

  const LinearConfig& config() const { return cfg_; }
  const SchurApprox& schur() const { return *schur_; }
  const SparseMat& g_matrix() const { return G_; }

 private:
  const SpatialOperators* ops_;
  LinearConfig cfg_;
  SparseMat G_;
  Eigen::MatrixXd G_dense_;
  std::unique_ptr<PressurePoisson> mg_;
  std::unique_ptr<ChebyshevMass> cheb_;
  std::unique_ptr<LUSolver> mp_lu_;  // FullMp weight solves
  std::unique_ptr<SchurApprox> schur_;
};

}  // namespace irkns
