#include "irkns/oracles.hpp"

#include <random>

#include "irkns/errors.hpp"

namespace irkns {

Eigen::MatrixXd materialize(const LinOp& op, int n) {
  Eigen::MatrixXd M(n, n);
  Vec e = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    e[k] = 1.0;
    M.col(k) = op(e);
    e[k] = 0.0;
  }
  return M;
}

Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R) {
  Eigen::MatrixXd K(L.rows() * R.rows(), L.cols() * R.cols());
  for (Eigen::Index i = 0; i < L.rows(); ++i)
    for (Eigen::Index j = 0; j < L.cols(); ++j)
      K.block(i * R.rows(), j * R.cols(), R.rows(), R.cols()) = L(i, j) * R;
  return K;
}

std::unique_ptr<StokesInstance> make_stokes_instance(int level, int s, RKFamily family,
                                                     double dt, double nu) {
  auto inst = std::make_unique<StokesInstance>();
  auto [mesh, spaces] = build_mesh(Rect{0.0, 0.0, 1.0, 1.0}, level);
  inst->mesh = mesh;
  inst->spaces = spaces;
  inst->ops = build_operators(mesh, spaces);
  inst->tab = make_tableau(family, s);

  inst->prob.domain = mesh.domain;
  inst->prob.nu = nu;
  inst->prob.T = dt;
  inst->prob.n_t = 1;
  inst->prob.g = nullptr;
  inst->prob.gdot = nullptr;
  inst->prob.f = nullptr;

  inst->state.u = Vec::Zero(spaces.n_u);
  inst->state.p = Vec::Zero(spaces.n_p);

  inst->iterate.s = s;
  inst->iterate.yu = Vec::Zero(static_cast<Eigen::Index>(s) * spaces.n_u);
  inst->iterate.yp = Vec::Zero(static_cast<Eigen::Index>(s) * spaces.n_p);

  inst->sys = assemble_newton_system(inst->ops, inst->state, inst->iterate, inst->tab,
                                     inst->prob);
  return inst;
}

DenseBlocks materialize_blocks(const StageSystem& sys) {
  const int nu = sys.s * sys.n_ui;
  const int np = sys.s * sys.n_p;
  AugmentationParams plain;
  plain.gamma = 0.0;
  const AugmentedSystem aug = build_augmented(sys, plain);

  DenseBlocks blocks;
  blocks.Phi = materialize([&aug](const Vec& x) { return aug.apply_phi_gamma(x); }, nu);
  {
    Eigen::MatrixXd P1(nu, np);
    Vec e = Vec::Zero(np);
    for (int k = 0; k < np; ++k) {
      e[k] = 1.0;
      P1.col(k) = aug.psi1(e);
      e[k] = 0.0;
    }
    blocks.Psi1 = std::move(P1);
  }
  {
    Eigen::MatrixXd P2(np, nu);
    Vec e = Vec::Zero(nu);
    for (int k = 0; k < nu; ++k) {
      e[k] = 1.0;
      P2.col(k) = aug.psi2(e);
      e[k] = 0.0;
    }
    blocks.Psi2 = std::move(P2);
  }
  blocks.W_kron = dense_kron(sys.dt * sys.A,
                             Eigen::MatrixXd(sys.ops->W.asDiagonal()));
  return blocks;
}

DenseBlocks pin_pressure_dof(const DenseBlocks& blocks, int s, int n_p, int dof) {
  std::vector<int> keep;
  keep.reserve(static_cast<std::size_t>(s) * (n_p - 1));
  for (int i = 0; i < s; ++i)
    for (int k = 0; k < n_p; ++k)
      if (k != dof) keep.push_back(i * n_p + k);

  const auto nk = static_cast<Eigen::Index>(keep.size());
  DenseBlocks out;
  out.Phi = blocks.Phi;
  out.Psi1.resize(blocks.Psi1.rows(), nk);
  out.Psi2.resize(nk, blocks.Psi2.cols());
  out.W_kron.resize(nk, nk);
  for (Eigen::Index a = 0; a < nk; ++a) {
    out.Psi1.col(a) = blocks.Psi1.col(keep[static_cast<std::size_t>(a)]);
    out.Psi2.row(a) = blocks.Psi2.row(keep[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < nk; ++b)
      out.W_kron(a, b) = blocks.W_kron(keep[static_cast<std::size_t>(a)],
                                       keep[static_cast<std::size_t>(b)]);
  }
  return out;
}

std::vector<IdentityReport> run_identity_suite(unsigned seed) {
  std::vector<IdentityReport> out;
  auto push = [&out](const std::string& name, double err, double tol) {
    out.push_back({name, err, tol, err < tol});
  };

  // Kronecker collapse of the augmentation term, l=2, s = 1..3.
  for (int s = 1; s <= 3; ++s) {
    auto inst = make_stokes_instance(2, s);
    const DenseBlocks b = materialize_blocks(inst->sys);
    const double gamma = 3.0;
    const Eigen::MatrixXd lhs =
        gamma * b.Psi1 * b.W_kron.partialPivLu().solve(b.Psi2);
    const Eigen::MatrixXd G = to_dense(assemble_g_matrix(inst->ops));
    const Eigen::MatrixXd rhs = gamma * inst->sys.dt * dense_kron(inst->sys.A, G);
    push("kron_collapse_s" + std::to_string(s), (lhs - rhs).norm() / rhs.norm(), 1e-11);
  }

  // Factorization of Psi2 Phi^{-1} Psi1 through the stage mixing matrices.
  {
    auto inst = make_stokes_instance(2, 2);
    const DenseBlocks b = materialize_blocks(inst->sys);
    const int n_p = inst->sys.n_p, n_ui = inst->sys.n_ui, s = inst->sys.s;
    const double dt = inst->sys.dt;
    const Eigen::MatrixXd lhs = b.Psi2 * b.Phi.partialPivLu().solve(b.Psi1);

    const Eigen::MatrixXd Bd = to_dense(inst->ops.B_int);
    const Eigen::MatrixXd IB = dense_kron(Eigen::MatrixXd::Identity(s, s), Bd);
    const Eigen::MatrixXd AIp =
        dense_kron(inst->sys.A, Eigen::MatrixXd::Identity(n_p, n_p));
    const Eigen::MatrixXd rhs =
        dt * dt * AIp * IB * b.Phi.partialPivLu().solve(IB.transpose()) * AIp;
    (void)n_ui;
    push("factorization_identity_s2", (lhs - rhs).norm() / lhs.norm(), 1e-11);
  }

  // SMW identity on random toy blocks.
  {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    auto rnd = [&](int r, int c) {
      Eigen::MatrixXd M(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = dist(rng);
      return M;
    };
    const int n = 8, m = 3;
    const Eigen::MatrixXd R = rnd(n, n);
    const Eigen::MatrixXd Phi = R.transpose() * R + double(n) * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd Psi1 = rnd(n, m);
    const Eigen::MatrixXd Psi2 = rnd(m, n);
    const Eigen::MatrixXd Q = rnd(m, m);
    const Eigen::MatrixXd W = Q.transpose() * Q + double(m) * Eigen::MatrixXd::Identity(m, m);
    push("smw_toy", verify_smw_identity(Phi, Psi1, Psi2, W, 2.5), 1e-10);
  }

  // SMW identity on pinned Stokes instances.
  for (int s = 1; s <= 2; ++s) {
    auto inst = make_stokes_instance(2, s);
    const DenseBlocks b =
        pin_pressure_dof(materialize_blocks(inst->sys), s, inst->sys.n_p);
    push("smw_stokes_s" + std::to_string(s),
         verify_smw_identity(b.Phi, b.Psi1, b.Psi2, b.W_kron, 1.0), 1e-9);
  }

  return out;
}

}  // namespace irkns
