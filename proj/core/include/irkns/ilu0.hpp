#pragma once

#include "irkns/sparse.hpp"

namespace irkns {

// Incomplete LU factorization with zero fill-in on the sparsity pattern of A.
// L has unit diagonal; L and U share the storage of a single CSR copy of A.
// A zero (or tiny) pivot raises DiagonalBreakdown; factor_ilu0 retries once
// with a diagonal shift of 1e-8 * ||A||_inf before giving up.
class ILU0 {
 public:
  explicit ILU0(const SparseMat& A);

  // Solves LUx = b (forward then backward substitution).
  Vec apply(const Vec& b) const;

  int rows() const { return static_cast<int>(lu_.rows()); }

 private:
  friend ILU0 factor_ilu0(const SparseMat& A);
  ILU0() = default;
  void factor(const SparseMat& A, double shift);

  SparseMat lu_;
  std::vector<int> diag_;  // index into lu_ values of the diagonal entry per row
};

ILU0 factor_ilu0(const SparseMat& A);

}  // namespace irkns
