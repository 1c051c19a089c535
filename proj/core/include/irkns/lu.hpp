#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "irkns/errors.hpp"
#include "irkns/sparse.hpp"

namespace irkns {

// Exact sparse direct solve (row-permuted LU with partial pivoting).
class LUSolver {
 public:
  explicit LUSolver(const SparseMat& A) : lu_(std::make_unique<Impl>()) {
    Eigen::SparseMatrix<double> Ac(A);
    lu_->compute(Ac);
    if (lu_->info() != Eigen::Success)
      throw SingularPivot("sparse LU factorization failed");
  }

  Vec solve(const Vec& b) const {
    Vec x = lu_->solve(b);
    if (lu_->info() != Eigen::Success)
      throw SingularPivot("sparse LU solve failed");
    return x;
  }

 private:
  using Impl = Eigen::SparseLU<Eigen::SparseMatrix<double>>;
  std::unique_ptr<Impl> lu_;  // SparseLU is not movable; keep it boxed
};

}  // namespace irkns
