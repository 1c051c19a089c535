#include "irkns/fgmres.hpp"

#include <cmath>

#include "irkns/errors.hpp"

namespace irkns {

std::string to_string(KrylovStatus s) {
  switch (s) {
    case KrylovStatus::Converged: return "converged";
    case KrylovStatus::MaxIterations: return "max_iterations";
    case KrylovStatus::Breakdown: return "breakdown";
    case KrylovStatus::Stagnation: return "stagnation";
  }
  return "unknown";
}

namespace {

struct Givens {
  double c = 1.0, s = 0.0;
  void make(double a, double b) {
    const double r = std::hypot(a, b);
    if (r == 0.0) { c = 1.0; s = 0.0; return; }
    c = a / r;
    s = b / r;
  }
  void apply(double& a, double& b) const {
    const double t = c * a + s * b;
    b = -s * a + c * b;
    a = t;
  }
};

}  // namespace

KrylovResult fgmres(const LinOp& A, const Vec& b, const LinOp& precond,
                    const KrylovConfig& cfg, const Vec* x0) {
  const Eigen::Index n = b.size();
  KrylovResult out;
  out.x = x0 ? *x0 : Vec(Vec::Zero(n));

  const int stall_window = 50;

  Vec r = x0 ? Vec(b - A(out.x)) : b;
  double beta = r.norm();
  const double target = std::max(cfg.rel_tol * beta, cfg.abs_tol);
  out.history.push_back(beta);
  if (beta <= target) {
    out.status = KrylovStatus::Converged;
    return out;
  }

  const int m = cfg.restart > 0 ? std::min(cfg.restart, cfg.max_iters) : cfg.max_iters;
  std::vector<Vec> V, Z;
  Eigen::MatrixXd H(m + 1, m);
  Eigen::MatrixXd Hraw;
  if (cfg.capture_basis) Hraw = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<Givens> rot;
  Vec g(m + 1);
  int total_it = 0;
  int stalled = 0;
  double best = beta;

  auto form_update = [&](int k) {
    // Back-substitute the Givens-triangularized H and expand in Z.
    Vec y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < k; ++i) out.x += y[i] * Z[static_cast<std::size_t>(i)];
  };

  while (total_it < cfg.max_iters) {
    V.clear();
    Z.clear();
    rot.clear();
    H.setZero();
    g.setZero();
    V.push_back(r / beta);
    g[0] = beta;

    int k = 0;
    bool lucky = false;
    for (; k < m && total_it < cfg.max_iters; ++k, ++total_it) {
      Z.push_back(precond ? precond(V[static_cast<std::size_t>(k)])
                          : V[static_cast<std::size_t>(k)]);
      Vec w = A(Z.back());
      const double norm_in = w.norm();
      for (int i = 0; i <= k; ++i) {
        const double h = V[static_cast<std::size_t>(i)].dot(w);
        H(i, k) = h;
        w -= h * V[static_cast<std::size_t>(i)];
      }
      // One reorthogonalization pass when cancellation ate most of w.
      if (w.norm() < norm_in / std::sqrt(2.0)) {
        for (int i = 0; i <= k; ++i) {
          const double h = V[static_cast<std::size_t>(i)].dot(w);
          H(i, k) += h;
          w -= h * V[static_cast<std::size_t>(i)];
        }
      }
      const double hk1 = w.norm();
      H(k + 1, k) = hk1;
      if (cfg.capture_basis) Hraw.col(k).head(k + 2) = H.col(k).head(k + 2);

      for (int i = 0; i < k; ++i) rot[static_cast<std::size_t>(i)].apply(H(i, k), H(i + 1, k));
      Givens gv;
      gv.make(H(k, k), H(k + 1, k));
      gv.apply(H(k, k), H(k + 1, k));
      rot.push_back(gv);
      gv.apply(g[k], g[k + 1]);

      const double est = std::abs(g[k + 1]);
      out.history.push_back(est);

      if (est <= target) {
        form_update(k + 1);
        out.status = KrylovStatus::Converged;
        out.iterations = total_it + 1;
        lucky = true;
        break;
      }
      if (hk1 <= 1e-14 * beta) {
        // Krylov space is exhausted but the residual is not small enough.
        form_update(k + 1);
        out.status = KrylovStatus::Breakdown;
        out.iterations = total_it + 1;
        lucky = true;
        break;
      }
      if (est >= best) {
        if (++stalled >= stall_window) {
          form_update(k + 1);
          out.status = KrylovStatus::Stagnation;
          out.iterations = total_it + 1;
          lucky = true;
          break;
        }
      } else {
        best = est;
        stalled = 0;
      }
      V.push_back(w / hk1);
    }

    if (cfg.capture_basis) {
      // A Z_k = V_{k+1} Hbar_k holds for the columns whose next basis vector
      // was formed, i.e. for full (non-breaking) iterations of this cycle.
      const Eigen::Index cols = static_cast<Eigen::Index>(V.size()) - 1;
      out.V.resize(n, static_cast<Eigen::Index>(V.size()));
      for (std::size_t i = 0; i < V.size(); ++i) out.V.col(static_cast<Eigen::Index>(i)) = V[i];
      out.H = Hraw.topLeftCorner(cols + 1, cols);
    }
    if (lucky) return out;

    form_update(k);
    out.iterations = total_it;
    r = b - A(out.x);
    beta = r.norm();
    if (beta <= target) {
      out.status = KrylovStatus::Converged;
      return out;
    }
    if (cfg.restart == 0) break;
  }

  out.status = KrylovStatus::MaxIterations;
  return out;
}

}  // namespace irkns
