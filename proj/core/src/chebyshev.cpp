#include "irkns/chebyshev.hpp"

#include <Eigen/SparseLU>
#include <random>

#include "irkns/errors.hpp"

namespace irkns {

ChebyshevMass::ChebyshevMass(const SparseMat& M, int steps) : M_(M), steps_(steps) {
  const int n = static_cast<int>(M_.rows());
  diag_ = M_.diagonal();
  for (int i = 0; i < n; ++i)
    if (diag_[i] <= 0.0) throw DiagonalBreakdown("nonpositive diagonal in chebyshev setup");

  std::mt19937 rng(42);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto randvec = [&]() {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
  };

  // Largest eigenvalue of D^{-1}M by power iteration.
  Vec v = randvec();
  v /= v.norm();
  double lmax = 1.0;
  for (int it = 0; it < 50; ++it) {
    Vec w = (M_ * v).cwiseQuotient(diag_);
    lmax = v.dot(w);
    v = w / w.norm();
  }

  // Smallest eigenvalue by inverse power iteration; D^{-1}M w = v means
  // M w = D v, one sparse solve per step.
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  {
    Eigen::SparseMatrix<double> Mc(M_);
    lu.compute(Mc);
    if (lu.info() != Eigen::Success)
      throw SingularPivot("mass matrix factorization failed in chebyshev setup");
  }
  v = randvec();
  v /= v.norm();
  double lmin = lmax;
  for (int it = 0; it < 50; ++it) {
    Vec w = lu.solve(diag_.cwiseProduct(v));
    v = w / w.norm();
    lmin = v.dot((M_ * v).cwiseQuotient(diag_));
  }

  lmin_ = 0.99 * lmin;
  lmax_ = 1.01 * lmax;
}

Vec ChebyshevMass::apply(const Vec& b) const {
  // Diagonal-preconditioned Chebyshev recurrence (Saad, Iterative Methods,
  // alg. 12.1) with x0 = 0.
  const double theta = 0.5 * (lmax_ + lmin_);
  const double delta = 0.5 * (lmax_ - lmin_);
  const double sigma1 = theta / delta;
  double rho = 1.0 / sigma1;

  Vec x = Vec::Zero(b.size());
  Vec r = b;
  Vec d = r.cwiseQuotient(diag_) / theta;
  for (int k = 0; k < steps_; ++k) {
    x += d;
    r -= M_ * d;
    const double rho_next = 1.0 / (2.0 * sigma1 - rho);
    d = rho_next * rho * d + (2.0 * rho_next / delta) * r.cwiseQuotient(diag_);
    rho = rho_next;
  }
  return x;
}

}  // namespace irkns
