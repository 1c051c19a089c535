#include "irkns/ilu0.hpp"

#include <cmath>
#include <vector>

#include "irkns/errors.hpp"

namespace irkns {

namespace {

double inf_norm(const SparseMat& A) {
  double best = 0.0;
  for (int i = 0; i < A.outerSize(); ++i) {
    double row = 0.0;
    for (SparseMat::InnerIterator it(A, i); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

}  // namespace

void ILU0::factor(const SparseMat& A, double shift) {
  lu_ = A;
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();

  diag_.assign(n, -1);
  if (shift != 0.0) {
    for (int i = 0; i < n; ++i)
      for (int k = outer[i]; k < outer[i + 1]; ++k)
        if (inner[k] == i) val[k] += shift;
  }

  // Position of column j within the current row, -1 if outside the pattern.
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int k = outer[i]; k < outer[i + 1]; ++k) pos[inner[k]] = k;

    for (int k = outer[i]; k < outer[i + 1]; ++k) {
      const int j = inner[k];
      if (j >= i) break;
      const double piv = val[diag_[j]];
      if (piv == 0.0) throw DiagonalBreakdown("zero pivot in ilu0 at row " + std::to_string(j));
      const double lij = val[k] / piv;
      val[k] = lij;
      for (int m = diag_[j] + 1; m < outer[j + 1]; ++m) {
        const int p = pos[inner[m]];
        if (p >= 0) val[p] -= lij * val[m];
      }
    }

    const int d = pos[i];
    if (d < 0 || val[d] == 0.0)
      throw DiagonalBreakdown("zero diagonal in ilu0 at row " + std::to_string(i));
    diag_[i] = d;

    for (int k = outer[i]; k < outer[i + 1]; ++k) pos[inner[k]] = -1;
  }
}

ILU0::ILU0(const SparseMat& A) { factor(A, 0.0); }

ILU0 factor_ilu0(const SparseMat& A) {
  ILU0 f;
  try {
    f.factor(A, 0.0);
  } catch (const DiagonalBreakdown&) {
    f.factor(A, 1e-8 * inf_norm(A));
  }
  return f;
}

Vec ILU0::apply(const Vec& b) const {
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  const double* val = lu_.valuePtr();

  Vec x = b;
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = outer[i]; k < diag_[i]; ++k) s -= val[k] * x[inner[k]];
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = diag_[i] + 1; k < outer[i + 1]; ++k) s -= val[k] * x[inner[k]];
    x[i] = s / val[diag_[i]];
  }
  return x;
}

}  // namespace irkns
