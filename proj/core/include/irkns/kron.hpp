#pragma once

#include <Eigen/Dense>

#include "irkns/errors.hpp"
#include "irkns/sparse.hpp"

namespace irkns {

// Matrix-free y = scale * (L kron R) x for a small dense left factor L (s x s)
// and a sparse right factor R (n x n). x and y are stage-stacked vectors of
// length s*n. R is applied once per stage block, then blocks are mixed by L.
class KronOperator {
 public:
  KronOperator(Eigen::MatrixXd L, SparseMat R, double scale = 1.0)
      : L_(std::move(L)), R_(std::move(R)), scale_(scale) {
    if (L_.rows() != L_.cols()) throw DimensionMismatch("kron left factor must be square");
    if (R_.rows() != R_.cols()) throw DimensionMismatch("kron right factor must be square");
  }

  int stages() const { return static_cast<int>(L_.rows()); }
  int block_size() const { return static_cast<int>(R_.rows()); }
  int size() const { return stages() * block_size(); }

  Vec apply(const Vec& x) const {
    const int s = stages();
    const int n = block_size();
    if (x.size() != static_cast<Eigen::Index>(s) * n)
      throw DimensionMismatch("kron apply: vector length mismatch");
    Eigen::MatrixXd V(n, s);
    for (int j = 0; j < s; ++j) V.col(j) = R_ * x.segment(static_cast<Eigen::Index>(j) * n, n);
    Vec y(x.size());
    for (int i = 0; i < s; ++i) {
      Vec yi = Vec::Zero(n);
      for (int j = 0; j < s; ++j) {
        const double lij = L_(i, j);
        if (lij != 0.0) yi += lij * V.col(j);
      }
      y.segment(static_cast<Eigen::Index>(i) * n, n) = scale_ * yi;
    }
    return y;
  }

  const Eigen::MatrixXd& left() const { return L_; }
  const SparseMat& right() const { return R_; }
  double scale() const { return scale_; }

 private:
  Eigen::MatrixXd L_;
  SparseMat R_;
  double scale_;
};

}  // namespace irkns
