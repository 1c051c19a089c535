#pragma once

#include "irkns/sparse.hpp"

namespace irkns {

// Fixed-step Chebyshev iteration for SPD mass-type matrices, preconditioned by
// the matrix diagonal. Eigenvalue brackets for D^{-1}M come from a short power
// iteration (largest) and inverse power iteration (smallest), each widened a
// little so the true spectrum stays inside the bracket.
class ChebyshevMass {
 public:
  explicit ChebyshevMass(const SparseMat& M, int steps = 20);

  // Runs the fixed number of Chebyshev steps from x0 = 0.
  Vec apply(const Vec& b) const;

  double lambda_min() const { return lmin_; }
  double lambda_max() const { return lmax_; }
  int steps() const { return steps_; }

 private:
  SparseMat M_;
  Vec diag_;
  double lmin_ = 0.0;
  double lmax_ = 0.0;
  int steps_;
};

}  // namespace irkns
