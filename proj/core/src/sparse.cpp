#include "irkns/sparse.hpp"

#include <fstream>

#include "irkns/errors.hpp"

namespace irkns {

SparseMat CooBuilder::build() const {
  SparseMat A(rows_, cols_);
  A.setFromTriplets(trips_.begin(), trips_.end());
  A.makeCompressed();
  return A;
}

Eigen::MatrixXd to_dense(const SparseMat& A) {
  return Eigen::MatrixXd(A);
}

SparseMat submatrix(const SparseMat& A, const std::vector<int>& keep_rows,
                    const std::vector<int>& keep_cols) {
  std::vector<int> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (size_t i = 0; i < keep_rows.size(); ++i) rmap[keep_rows[i]] = int(i);
  for (size_t j = 0; j < keep_cols.size(); ++j) cmap[keep_cols[j]] = int(j);
  CooBuilder coo(int(keep_rows.size()), int(keep_cols.size()));
  coo.reserve(size_t(A.nonZeros()));
  for (int r = 0; r < A.outerSize(); ++r) {
    if (rmap[r] < 0) continue;
    for (SparseMat::InnerIterator it(A, r); it; ++it)
      if (cmap[it.col()] >= 0) coo.add(rmap[r], cmap[it.col()], it.value());
  }
  return coo.build();
}

SparseMat sparse_identity(int n) {
  SparseMat I(n, n);
  I.setIdentity();
  return I;
}

SparseMat pin_dof(const SparseMat& A, int dof) {
  CooBuilder coo(int(A.rows()), int(A.cols()));
  coo.reserve(size_t(A.nonZeros()));
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMat::InnerIterator it(A, r); it; ++it) {
      if (r == dof || it.col() == dof) continue;
      coo.add(r, int(it.col()), it.value());
    }
  coo.add(dof, dof, 1.0);
  return coo.build();
}

void write_matrix_market(const SparseMat& A, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
  os.precision(16);
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMat::InnerIterator it(A, r); it; ++it)
      os << r + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace irkns
