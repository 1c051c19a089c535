#include "irkns/stage_system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "irkns/errors.hpp"
#include "irkns/lu.hpp"

namespace irkns {

Vec SpatialOperators::restrict_u(const Vec& full) const {
  const auto& idx = spaces.interior_dofs;
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[idx[k]];
  return out;
}

Vec SpatialOperators::prolong_u(const Vec& interior) const {
  Vec out = Vec::Zero(spaces.n_u);
  const auto& idx = spaces.interior_dofs;
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = interior[static_cast<Eigen::Index>(k)];
  return out;
}

SpatialOperators build_operators(const StructuredMesh& mesh, const FESpaces& spaces) {
  SpatialOperators ops;
  ops.mesh = mesh;
  ops.spaces = spaces;
  ops.Mu = assemble_mass_u(mesh, spaces);
  ops.Ku = assemble_stiffness_u(mesh, spaces);
  ops.B = assemble_divergence(mesh, spaces);
  ops.Mp = assemble_mass_p(mesh, spaces);
  ops.Kp = assemble_stiffness_p(mesh, spaces);
  ops.W = ops.Mp.diagonal();

  std::vector<int> all_p(static_cast<std::size_t>(spaces.n_p));
  for (int i = 0; i < spaces.n_p; ++i) all_p[static_cast<std::size_t>(i)] = i;
  ops.Mu_int = submatrix(ops.Mu, spaces.interior_dofs, spaces.interior_dofs);
  ops.B_int = submatrix(ops.B, all_p, spaces.interior_dofs);
  ops.Bt_int = SparseMat(ops.B_int.transpose());
  ops.n_ui = static_cast<int>(spaces.interior_dofs.size());
  return ops;
}

Vec StageSystem::apply(const Vec& x) const {
  if (x.size() != size()) throw DimensionMismatch("stage system apply: bad vector length");
  const Eigen::Index nu = n_ui, np = n_p;
  Vec y(x.size());
  // v = (A kron I) xu, reused by the momentum and constraint rows.
  Eigen::MatrixXd Xu(nu, s), V(nu, s);
  for (int j = 0; j < s; ++j) Xu.col(j) = x.segment(j * nu, nu);
  V = Xu * A.transpose();
  for (int i = 0; i < s; ++i) {
    Vec ap = Vec::Zero(np);
    for (int j = 0; j < s; ++j) ap += A(i, j) * x.segment(s * nu + j * np, np);
    y.segment(i * nu, nu) =
        ops->Mu_int * Xu.col(i) + dt * (L[static_cast<std::size_t>(i)] * V.col(i)) +
        dt * (ops->Bt_int * ap);
    y.segment(s * nu + i * np, np) = dt * (ops->B_int * V.col(i));
  }
  return y;
}

Vec consistent_pressure(const SpatialOperators& ops, const Vec& u0, const VectorField& f,
                        double t0, double nu, const Vec* vb) {
  const double div_norm = (ops.B * u0).norm();
  if (div_norm >= 1e-8)
    throw NotSolenoidal("initial velocity has ||B u0|| = " + std::to_string(div_norm));

  // Momentum functional at t0 (pressure omitted), tested on interior dofs.
  Vec r = -nu * (ops.Ku * u0);
  if (f) r += assemble_forcing(ops.mesh, ops.spaces, f, t0);
  if (u0.norm() > 0.0) r -= assemble_convection(ops.mesh, ops.spaces, u0) * u0;

  // Discrete acceleration: mass solve on the interior, prescribed boundary
  // time-derivative values (zero when not supplied).
  Vec v = Vec::Zero(ops.spaces.n_u);
  if (vb) {
    for (int d : ops.spaces.boundary_dofs) v[d] = (*vb)[d];
  }
  Vec rhs_int = ops.restrict_u(r - ops.Mu * v);
  LUSolver mass(ops.Mu_int);
  Vec v_int = mass.solve(rhs_int);
  for (std::size_t k = 0; k < ops.spaces.interior_dofs.size(); ++k)
    v[ops.spaces.interior_dofs[k]] = v_int[static_cast<Eigen::Index>(k)];

  // Weak form of -div(v), then the pinned Poisson solve.
  Vec rhs = ops.B * v;
  SparseMat Kpin = ops.Kp;
  pin_dof(Kpin, 0);
  rhs[0] = 0.0;
  LUSolver poisson(Kpin);
  Vec p0 = poisson.solve(rhs);

  const Vec ones = Vec::Ones(p0.size());
  const double area = ones.dot(ops.Mp * ones);
  p0.array() -= ones.dot(ops.Mp * p0) / area;
  return p0;
}

Vec stage_boundary_values(const SpatialOperators& ops, const ButcherTableau& tab,
                          const ProblemSpec& prob, double tn, int stage) {
  Vec out = Vec::Zero(ops.spaces.n_u);
  if (!prob.gdot) return out;
  // Clamp the node into the open step interval so one-sided derivatives are
  // picked up correctly when the data has a kink at a step boundary.
  const double eps = 1e-9;
  const double c = std::min(std::max(tab.c[stage], eps), 1.0 - eps);
  const double t = tn + c * prob.dt();
  const auto& sp = ops.spaces;
  for (int nid : sp.boundary_nodes) {
    const auto gv = prob.gdot(sp.vx[static_cast<std::size_t>(nid)],
                              sp.vy[static_cast<std::size_t>(nid)], t);
    out[sp.dof_x(nid)] = gv[0];
    out[sp.dof_y(nid)] = gv[1];
  }
  return out;
}

StageAuxiliary recompute_auxiliary(const SpatialOperators& ops, const TimeState& state,
                                   const StageVector& iterate, const ButcherTableau& tab,
                                   double dt) {
  const int s = iterate.s;
  const Eigen::Index nu = ops.spaces.n_u, np = ops.spaces.n_p;
  StageAuxiliary aux;
  aux.wu.resize(s * nu);
  aux.wp.resize(s * np);
  for (int i = 0; i < s; ++i) {
    Vec wu = state.u, wp = state.p;
    for (int j = 0; j < s; ++j) {
      wu += dt * tab.A(i, j) * iterate.yu.segment(j * nu, nu);
      wp += dt * tab.A(i, j) * iterate.yp.segment(j * np, np);
    }
    aux.wu.segment(i * nu, nu) = wu;
    aux.wp.segment(i * np, np) = wp;
  }
  return aux;
}

StageSystem assemble_newton_system(const SpatialOperators& ops, const TimeState& state,
                                   const StageVector& iterate, const ButcherTableau& tab,
                                   const ProblemSpec& prob, const SparseMat* Qlps) {
  const int s = tab.s;
  const Eigen::Index nu = ops.spaces.n_u, np = ops.spaces.n_p;
  if (iterate.yu.size() != s * nu || iterate.yp.size() != s * np)
    throw DimensionMismatch("stage iterate does not match tableau/mesh sizes");

  StageSystem sys;
  sys.s = s;
  sys.n_ui = ops.n_ui;
  sys.n_p = static_cast<int>(np);
  sys.dt = prob.dt();
  sys.A = tab.A;
  sys.ops = &ops;
  sys.L.resize(static_cast<std::size_t>(s));
  sys.ru.resize(static_cast<Eigen::Index>(s) * ops.n_ui);
  sys.rp.resize(static_cast<Eigen::Index>(s) * np);

  const StageAuxiliary aux = recompute_auxiliary(ops, state, iterate, tab, sys.dt);

  SparseMat base = ops.Ku * prob.nu;
  if (Qlps) base = base + *Qlps;

  for (int i = 0; i < s; ++i) {
    const Vec wu = aux.wu.segment(i * nu, nu);
    const Vec wp = aux.wp.segment(i * np, np);
    const SparseMat N = assemble_convection(ops.mesh, ops.spaces, wu);
    const SparseMat H = assemble_convection_jacobian(ops.mesh, ops.spaces, wu);

    Vec fu = Vec::Zero(nu);
    if (prob.f) fu = assemble_forcing(ops.mesh, ops.spaces, prob.f,
                                      state.t + tab.c[i] * sys.dt);

    // True residual of the unaugmented stage equations, interior rows.
    Vec Fu_full = ops.Mu * iterate.yu.segment(i * nu, nu) + base * wu + N * wu - fu;
    Vec Fu = ops.restrict_u(Fu_full) + ops.Bt_int * wp;
    Vec Fp = ops.B * wu;

    sys.ru.segment(static_cast<Eigen::Index>(i) * ops.n_ui, ops.n_ui) = -Fu;
    sys.rp.segment(i * np, np) = -Fp;

    SparseMat J = base + N + H;
    sys.L[static_cast<std::size_t>(i)] =
        submatrix(J, ops.spaces.interior_dofs, ops.spaces.interior_dofs);
  }
  sys.residual_norm = std::sqrt(sys.ru.squaredNorm() + sys.rp.squaredNorm());
  return sys;
}

NewtonReport newton_solve(const SpatialOperators& ops, const TimeState& state,
                          const ButcherTableau& tab, const ProblemSpec& prob,
                          const NewtonConfig& cfg, const StageLinearSolver& solve,
                          const SparseMat* Qlps) {
  const int s = tab.s;
  const Eigen::Index nu = ops.spaces.n_u, np = ops.spaces.n_p;

  NewtonReport rep;
  rep.stages.s = s;
  rep.stages.yu = Vec::Zero(s * nu);
  rep.stages.yp = Vec::Zero(s * np);
  for (int i = 0; i < s; ++i)
    rep.stages.yu.segment(i * nu, nu) = stage_boundary_values(ops, tab, prob, state.t, i);

  double res0 = 0.0;
  for (int k = 0; k <= cfg.max_iters; ++k) {
    const StageSystem sys = assemble_newton_system(ops, state, rep.stages, tab, prob, Qlps);
    rep.residual_history.push_back(sys.residual_norm);
    if (k == 0) res0 = sys.residual_norm;
    const double tol = std::max(cfg.rel_tol * res0, cfg.abs_tol);
    if (sys.residual_norm <= tol) {
      rep.newton_iters = k;
      return rep;
    }
    if (k == cfg.max_iters) break;

    const StageSolveReport lin = solve(sys);
    rep.linear_iters_total += lin.iterations;
    rep.linear_solves += 1;
    rep.linear_seconds += lin.seconds;
    rep.all_linear_converged = rep.all_linear_converged && lin.converged;

    for (int i = 0; i < s; ++i) {
      const Vec du = lin.delta.segment(static_cast<Eigen::Index>(i) * ops.n_ui, ops.n_ui);
      for (std::size_t m = 0; m < ops.spaces.interior_dofs.size(); ++m)
        rep.stages.yu[i * nu + ops.spaces.interior_dofs[m]] += du[static_cast<Eigen::Index>(m)];
      rep.stages.yp.segment(i * np, np) +=
          lin.delta.segment(static_cast<Eigen::Index>(s) * ops.n_ui + i * np, np);
    }
  }
  throw NewtonDiverged("newton did not reach tolerance in " + std::to_string(cfg.max_iters) +
                       " iterations (residual " + std::to_string(rep.residual_history.back()) +
                       ", initial " + std::to_string(res0) + ")");
}

TimeState rk_update(const TimeState& state, const StageVector& stages,
                    const ButcherTableau& tab, double dt) {
  const Eigen::Index nu = state.u.size(), np = state.p.size();
  TimeState next = state;
  for (int i = 0; i < stages.s; ++i) {
    next.u += dt * tab.b[i] * stages.yu.segment(i * nu, nu);
    next.p += dt * tab.b[i] * stages.yp.segment(i * np, np);
  }
  next.t = state.t + dt;
  next.n = state.n + 1;
  return next;
}

TimeLoopResult time_loop(const SpatialOperators& ops, const ButcherTableau& tab,
                         const ProblemSpec& prob, const TimeState& initial,
                         const NewtonConfig& newton_cfg, const StageLinearSolver& solve,
                         bool store_snapshots) {
  TimeLoopResult out;
  out.state = initial;
  if (store_snapshots) out.snapshots.push_back(initial);

  for (int n = 0; n < prob.n_t; ++n) {
    SparseMat Q;
    const SparseMat* Qp = nullptr;
    if (prob.lps_enabled) {
      Q = assemble_lps(ops.mesh, ops.spaces, out.state.u, prob.nu);
      Qp = &Q;
    }
    NewtonReport rep;
    try {
      rep = newton_solve(ops, out.state, tab, prob, newton_cfg, solve, Qp);
    } catch (const NewtonDiverged& e) {
      throw NewtonDiverged("step " + std::to_string(n) + ": " + e.what());
    }
    out.state = rk_update(out.state, rep.stages, tab, prob.dt());
    if (store_snapshots) out.snapshots.push_back(out.state);

    out.stats.steps += 1;
    out.stats.newton_total += rep.newton_iters;
    out.stats.linear_iters_total += rep.linear_iters_total;
    out.stats.linear_solves += rep.linear_solves;
    out.stats.linear_seconds += rep.linear_seconds;
    out.stats.all_converged = out.stats.all_converged && rep.all_linear_converged;
  }
  return out;
}

void dump_snapshot(const std::string& path, int level, const std::string& field,
                   double time, const Vec& v) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open snapshot file " + path);
  os.precision(17);
  os << "level=" << level << " field=" << field << " time=" << time << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << "\n";
  if (!os) throw IoError("failed writing snapshot file " + path);
}

}  // namespace irkns
