#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

namespace irkns {

// All assembled operators are CSR: row pointers (outer), strictly increasing
// column indices within a row (inner), and values, via Eigen's compressed
// row-major storage.
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

// Accumulates coordinate-format entries; duplicates are summed on build().
class CooBuilder {
 public:
  CooBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}
  void reserve(size_t n) { trips_.reserve(n); }
  void add(int r, int c, double v) { trips_.emplace_back(r, c, v); }
  SparseMat build() const;
  const std::vector<Triplet>& triplets() const { return trips_; }

 private:
  int rows_, cols_;
  std::vector<Triplet> trips_;
};

Eigen::MatrixXd to_dense(const SparseMat& A);

// Rows/cols keep-lists; entries outside are dropped.
SparseMat submatrix(const SparseMat& A, const std::vector<int>& keep_rows,
                    const std::vector<int>& keep_cols);

SparseMat sparse_identity(int n);

// Replaces row/column `dof` by the identity row/column (used to pin one
// pressure dof; keeps symmetry).
SparseMat pin_dof(const SparseMat& A, int dof);

// Coordinate-form Matrix Market export, 1-based indices.
void write_matrix_market(const SparseMat& A, const std::string& path);

}  // namespace irkns
