#include "irkns/al_precond.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "irkns/errors.hpp"

namespace irkns {

std::string to_string(WMode m) { return m == WMode::DiagMp ? "diag" : "full"; }

std::string to_string(DiagSolve m) {
  return m == DiagSolve::ExactLU ? "exact" : "inexact";
}

SparseMat assemble_g_matrix(const SpatialOperators& ops) {
  SparseMat scaled = ops.B_int;
  const Vec winv = ops.W.cwiseInverse();
  for (int i = 0; i < scaled.outerSize(); ++i)
    for (SparseMat::InnerIterator it(scaled, i); it; ++it)
      it.valueRef() *= winv[it.row()];
  return SparseMat(ops.Bt_int * scaled);
}

Eigen::MatrixXd assemble_g_matrix_dense(const SpatialOperators& ops) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseMatrix<double> Mp(ops.Mp);
  lu.compute(Mp);
  if (lu.info() != Eigen::Success) throw SingularPivot("pressure mass factorization failed");
  Eigen::MatrixXd Bd = to_dense(ops.B_int);
  Eigen::MatrixXd Z = lu.solve(Bd);
  return Bd.transpose() * Z;
}

AugmentedSystem build_augmented(const StageSystem& sys, const AugmentationParams& params,
                                const SparseMat* G_cached, const Eigen::MatrixXd* G_dense_cached) {
  AugmentedSystem aug;
  aug.sys = &sys;
  aug.params = params;
  if (params.w_mode == WMode::DiagMp) {
    aug.G = G_cached ? *G_cached : assemble_g_matrix(*sys.ops);
  } else {
    if (sys.n_ui > 1200)
      throw FullMpTooLarge("full pressure-mass weight limited to small meshes (n_ui = " +
                           std::to_string(sys.n_ui) + ")");
    aug.G_dense = G_dense_cached ? *G_dense_cached : assemble_g_matrix_dense(*sys.ops);
  }

  aug.bp = sys.rp;
  aug.bu = sys.ru;
  if (params.gamma != 0.0) {
    const Eigen::Index np = sys.n_p;
    std::unique_ptr<LUSolver> mp_lu;
    if (params.w_mode == WMode::FullMp) mp_lu = std::make_unique<LUSolver>(sys.ops->Mp);
    for (int i = 0; i < sys.s; ++i) {
      const Vec rp_i = sys.rp.segment(i * np, np);
      const Vec wrp = params.w_mode == WMode::DiagMp
                          ? Vec(rp_i.cwiseQuotient(sys.ops->W))
                          : mp_lu->solve(rp_i);
      aug.bu.segment(static_cast<Eigen::Index>(i) * sys.n_ui, sys.n_ui) +=
          params.gamma * (sys.ops->Bt_int * wrp);
    }
  }
  return aug;
}

Vec AugmentedSystem::rhs() const {
  Vec r(size());
  r.head(bu.size()) = bu;
  r.tail(bp.size()) = bp;
  return r;
}

Vec AugmentedSystem::gmul(const Vec& x) const {
  if (params.w_mode == WMode::DiagMp) return G * x;
  return G_dense * x;
}

Vec AugmentedSystem::apply_phi_gamma(const Vec& xu) const {
  const int s = sys->s;
  const Eigen::Index nu = sys->n_ui;
  Eigen::MatrixXd Xu(nu, s);
  for (int j = 0; j < s; ++j) Xu.col(j) = xu.segment(j * nu, nu);
  const Eigen::MatrixXd V = Xu * sys->A.transpose();
  Vec y(xu.size());
  const double gdt = params.gamma * sys->dt;
  for (int i = 0; i < s; ++i) {
    Vec yi = sys->ops->Mu_int * Xu.col(i) +
             sys->dt * (sys->L[static_cast<std::size_t>(i)] * V.col(i));
    if (params.gamma != 0.0) yi += gdt * gmul(V.col(i));
    y.segment(i * nu, nu) = yi;
  }
  return y;
}

Vec AugmentedSystem::psi1(const Vec& xp) const {
  const int s = sys->s;
  const Eigen::Index np = sys->n_p, nu = sys->n_ui;
  Vec y(static_cast<Eigen::Index>(s) * nu);
  for (int i = 0; i < s; ++i) {
    Vec ap = Vec::Zero(np);
    for (int j = 0; j < s; ++j) ap += sys->A(i, j) * xp.segment(j * np, np);
    y.segment(i * nu, nu) = sys->dt * (sys->ops->Bt_int * ap);
  }
  return y;
}

Vec AugmentedSystem::psi2(const Vec& xu) const {
  const int s = sys->s;
  const Eigen::Index np = sys->n_p, nu = sys->n_ui;
  Eigen::MatrixXd Xu(nu, s);
  for (int j = 0; j < s; ++j) Xu.col(j) = xu.segment(j * nu, nu);
  const Eigen::MatrixXd V = Xu * sys->A.transpose();
  Vec y(static_cast<Eigen::Index>(s) * np);
  for (int i = 0; i < s; ++i) y.segment(i * np, np) = sys->dt * (sys->ops->B_int * V.col(i));
  return y;
}

Vec AugmentedSystem::apply(const Vec& x) const {
  if (x.size() != size()) throw DimensionMismatch("augmented apply: bad vector length");
  const int s = sys->s;
  const Eigen::Index nu = sys->n_ui, np = sys->n_p;
  const Eigen::Index usize = static_cast<Eigen::Index>(s) * nu;
  Vec y(x.size());
  Eigen::MatrixXd Xu(nu, s);
  for (int j = 0; j < s; ++j) Xu.col(j) = x.segment(j * nu, nu);
  const Eigen::MatrixXd V = Xu * sys->A.transpose();
  const double gdt = params.gamma * sys->dt;
  for (int i = 0; i < s; ++i) {
    Vec ap = Vec::Zero(np);
    for (int j = 0; j < s; ++j) ap += sys->A(i, j) * x.segment(usize + j * np, np);
    Vec yi = sys->ops->Mu_int * Xu.col(i) +
             sys->dt * (sys->L[static_cast<std::size_t>(i)] * V.col(i)) +
             sys->dt * (sys->ops->Bt_int * ap);
    if (params.gamma != 0.0) yi += gdt * gmul(V.col(i));
    y.segment(i * nu, nu) = yi;
    y.segment(usize + i * np, np) = sys->dt * (sys->ops->B_int * V.col(i));
  }
  return y;
}

SparseMat AugmentedSystem::diag_block(int i) const {
  if (params.w_mode != WMode::DiagMp)
    throw DimensionMismatch("sparse diagonal block requires the diagonal weight mode");
  const double a = sys->dt * sys->A(i, i);
  SparseMat D = sys->ops->Mu_int + a * sys->L[static_cast<std::size_t>(i)];
  if (params.gamma != 0.0) D = D + (params.gamma * a) * G;
  return D;
}

Eigen::MatrixXd AugmentedSystem::diag_block_dense(int i) const {
  const double a = sys->dt * sys->A(i, i);
  Eigen::MatrixXd D =
      to_dense(sys->ops->Mu_int) + a * to_dense(sys->L[static_cast<std::size_t>(i)]);
  if (params.gamma != 0.0) {
    if (params.w_mode == WMode::DiagMp)
      D += (params.gamma * a) * to_dense(G);
    else
      D += (params.gamma * a) * G_dense;
  }
  return D;
}

GaussSeidel11::GaussSeidel11(const AugmentedSystem& sys, GSConfig cfg)
    : sys_(&sys), cfg_(cfg) {
  if (cfg_.sweeps < 1) throw DimensionMismatch("gauss-seidel needs sweeps >= 1");
  for (int i = 0; i < sys.sys->s; ++i) {
    if (sys.params.w_mode == WMode::FullMp) {
      dense_lu_.emplace_back(sys.diag_block_dense(i));
    } else if (cfg_.mode == DiagSolve::ExactLU) {
      lu_.push_back(std::make_unique<LUSolver>(sys.diag_block(i)));
    } else {
      diag_.push_back(sys.diag_block(i));
      ilu_.push_back(factor_ilu0(diag_.back()));
    }
  }
}

Vec GaussSeidel11::apply(const Vec& r) const {
  const int s = sys_->sys->s;
  const Eigen::Index nu = sys_->sys->n_ui;
  const Eigen::MatrixXd& A = sys_->sys->A;
  const double dt = sys_->sys->dt;
  const double gamma = sys_->params.gamma;

  auto solve_block = [&](int i, const Vec& b) -> Vec {
    if (!dense_lu_.empty()) return dense_lu_[static_cast<std::size_t>(i)].solve(b);
    if (cfg_.mode == DiagSolve::ExactLU) return lu_[static_cast<std::size_t>(i)]->solve(b);
    const SparseMat& D = diag_[static_cast<std::size_t>(i)];
    const ILU0& F = ilu_[static_cast<std::size_t>(i)];
    KrylovConfig kc;
    kc.rel_tol = 1e-12;
    kc.abs_tol = 0.0;
    kc.max_iters = cfg_.inner_iters;
    auto res = fgmres([&](const Vec& x) { return Vec(D * x); }, b,
                      [&](const Vec& x) { return F.apply(x); }, kc);
    return res.x;
  };

  Vec z = Vec::Zero(r.size());
  for (int sweep = 0; sweep < cfg_.sweeps; ++sweep) {
    for (int i = 0; i < s; ++i) {
      Vec acc = Vec::Zero(nu);
      for (int j = 0; j < s; ++j) {
        if (j == i) continue;
        if (sweep == 0 && j > i) continue;  // old values are still zero
        acc += A(i, j) * z.segment(j * nu, nu);
      }
      Vec ri = r.segment(i * nu, nu);
      if (acc.squaredNorm() > 0.0) {
        ri -= dt * (sys_->sys->L[static_cast<std::size_t>(i)] * acc);
        if (gamma != 0.0) ri -= gamma * dt * sys_->gmul(acc);
      }
      z.segment(i * nu, nu) = solve_block(i, ri);
    }
  }
  return z;
}

Vec apply_gauss_seidel_11(const AugmentedSystem& sys, const GSConfig& cfg, const Vec& r) {
  return GaussSeidel11(sys, cfg).apply(r);
}

SchurApprox::SchurApprox(Eigen::MatrixXd A_rk, double dt, double nu, double gamma,
                         LinOp w_inv, LinOp kp_inv, LinOp mp_inv, int n_p)
    : A_(std::move(A_rk)),
      dt_(dt),
      nu_(nu),
      gamma_(gamma),
      w_inv_(std::move(w_inv)),
      kp_inv_(std::move(kp_inv)),
      mp_inv_(std::move(mp_inv)),
      n_p_(n_p) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A_);
  if (!lu.isInvertible()) throw SingularTableau("schur approximation needs invertible A");
  Ainv_ = lu.inverse();
}

Vec SchurApprox::mix(const Eigen::MatrixXd& C, const Vec& x) const {
  const int s = static_cast<int>(C.rows());
  Eigen::MatrixXd X(n_p_, s);
  for (int j = 0; j < s; ++j) X.col(j) = x.segment(static_cast<Eigen::Index>(j) * n_p_, n_p_);
  const Eigen::MatrixXd Y = X * C.transpose();
  Vec y(x.size());
  for (int i = 0; i < s; ++i) y.segment(static_cast<Eigen::Index>(i) * n_p_, n_p_) = Y.col(i);
  return y;
}

Vec SchurApprox::apply(const Vec& r) const {
  const int s = static_cast<int>(A_.rows());
  const Eigen::Index np = n_p_;

  Vec winv_blocks(r.size());
  for (int i = 0; i < s; ++i)
    winv_blocks.segment(i * np, np) = w_inv_(r.segment(i * np, np));
  Vec z = (gamma_ / dt_) * mix(Ainv_, winv_blocks);

  const Vec y = mix(Ainv_, r);
  Vec inner(r.size());
  Vec mp_blocks(r.size());
  for (int i = 0; i < s; ++i) {
    inner.segment(i * np, np) = kp_inv_(y.segment(i * np, np));
    mp_blocks.segment(i * np, np) = mp_inv_(y.segment(i * np, np));
  }
  inner += nu_ * dt_ * mix(A_, mp_blocks);
  z += mix(Ainv_, inner) / (dt_ * dt_);
  return z;
}

Vec apply_schur_inverse(const SchurApprox& S, const Vec& r) { return S.apply(r); }

BlockPreconditioner::BlockPreconditioner(const AugmentedSystem& sys, const GSConfig& gs_cfg,
                                         const SchurApprox& schur, bool lower_triangular)
    : sys_(&sys), gs_(sys, gs_cfg), schur_(&schur), lower_(lower_triangular) {}

Vec BlockPreconditioner::apply(const Vec& r) const {
  const Eigen::Index usize = static_cast<Eigen::Index>(sys_->sys->s) * sys_->sys->n_ui;
  const Vec ru = r.head(usize);
  const Vec rp = r.tail(r.size() - usize);
  Vec z(r.size());
  if (!lower_) {
    const Vec zp = -schur_->apply(rp);
    z.head(usize) = gs_.apply(ru - sys_->psi1(zp));
    z.tail(rp.size()) = zp;
  } else {
    const Vec zu = gs_.apply(ru);
    z.head(usize) = zu;
    z.tail(rp.size()) = -schur_->apply(rp - sys_->psi2(zu));
  }
  return z;
}

double verify_smw_identity(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Psi1,
                           const Eigen::MatrixXd& Psi2, const Eigen::MatrixXd& W_kron,
                           double gamma) {
  Eigen::FullPivLU<Eigen::MatrixXd> phi_lu(Phi);
  if (!phi_lu.isInvertible()) throw SingularInner("Phi is numerically singular");
  const Eigen::MatrixXd X = Psi2 * phi_lu.solve(Psi1);
  Eigen::FullPivLU<Eigen::MatrixXd> x_lu(X);
  if (!x_lu.isInvertible()) throw SingularInner("Psi2 Phi^{-1} Psi1 is numerically singular");

  Eigen::PartialPivLU<Eigen::MatrixXd> w_lu(W_kron);
  const Eigen::MatrixXd Phi_g = Phi + gamma * Psi1 * w_lu.solve(Psi2);
  Eigen::FullPivLU<Eigen::MatrixXd> phig_lu(Phi_g);
  if (!phig_lu.isInvertible()) throw SingularInner("augmented Phi is numerically singular");
  const Eigen::MatrixXd S_g = Psi2 * phig_lu.solve(Psi1);
  Eigen::FullPivLU<Eigen::MatrixXd> sg_lu(S_g);
  if (!sg_lu.isInvertible()) throw SingularInner("S_gamma is numerically singular");

  const Eigen::MatrixXd lhs = sg_lu.inverse();
  const Eigen::MatrixXd rhs =
      gamma * w_lu.inverse() + x_lu.inverse();
  return (lhs - rhs).norm() / lhs.norm();
}

void dump_preconditioned_eigenvalues(const std::string& path, const AugmentedSystem& sys,
                                     const BlockPreconditioner& prec) {
  const int n = sys.size();
  if (n > 600)
    throw DimensionMismatch("eigenvalue dump limited to small instances (n <= 600)");
  Eigen::MatrixXd M(n, n);
  Vec e = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    e[k] = 1.0;
    M.col(k) = sys.apply(prec.apply(e));
    e[k] = 0.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  std::vector<std::pair<double, double>> ev;
  ev.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    ev.emplace_back(es.eigenvalues()[k].real(), es.eigenvalues()[k].imag());
  std::sort(ev.begin(), ev.end());

  std::ofstream os(path);
  if (!os) throw IoError("cannot open eigenvalue dump " + path);
  os.precision(16);
  os << "re,im\n";
  for (const auto& [re, im] : ev) os << re << "," << im << "\n";
  if (!os) throw IoError("failed writing eigenvalue dump " + path);
}

StageSolver::StageSolver(const SpatialOperators& ops, const ButcherTableau& tab, double dt,
                         double nu, LinearConfig cfg)
    : ops_(&ops), cfg_(cfg) {
  LinOp w_inv;
  if (cfg_.aug.w_mode == WMode::DiagMp) {
    G_ = assemble_g_matrix(ops);
    const Vec winv = ops.W.cwiseInverse();
    w_inv = [winv](const Vec& x) { return Vec(x.cwiseProduct(winv)); };
  } else {
    G_dense_ = assemble_g_matrix_dense(ops);
    mp_lu_ = std::make_unique<LUSolver>(ops.Mp);
    LUSolver* lu = mp_lu_.get();
    w_inv = [lu](const Vec& x) { return lu->solve(x); };
  }

  mg_ = std::make_unique<PressurePoisson>(ops.mesh.domain, ops.mesh.level, cfg_.mg_cycles);
  cheb_ = std::make_unique<ChebyshevMass>(ops.Mp, cfg_.cheb_steps);
  PressurePoisson* mg = mg_.get();
  ChebyshevMass* cheb = cheb_.get();
  schur_ = std::make_unique<SchurApprox>(
      tab.A, dt, nu, cfg_.aug.gamma, std::move(w_inv),
      [mg](const Vec& x) { return mg->apply(x); },
      [cheb](const Vec& x) { return cheb->apply(x); }, ops.spaces.n_p);
}

StageSolveReport StageSolver::operator()(const StageSystem& sys) const {
  const auto start = std::chrono::steady_clock::now();

  AugmentedSystem aug =
      build_augmented(sys, cfg_.aug, cfg_.aug.w_mode == WMode::DiagMp ? &G_ : nullptr,
                      cfg_.aug.w_mode == WMode::FullMp ? &G_dense_ : nullptr);
  BlockPreconditioner prec(aug, cfg_.gs, *schur_, cfg_.lower_triangular);

  auto res = fgmres([&aug](const Vec& x) { return aug.apply(x); }, aug.rhs(),
                    [&prec](const Vec& x) { return prec.apply(x); }, cfg_.krylov);

  const auto stop = std::chrono::steady_clock::now();
  StageSolveReport rep;
  rep.delta = std::move(res.x);
  rep.iterations = res.iterations;
  rep.converged = res.converged();
  rep.seconds = std::chrono::duration<double>(stop - start).count();
  return rep;
}

}  // namespace irkns
