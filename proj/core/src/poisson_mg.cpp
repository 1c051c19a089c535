#include "irkns/poisson_mg.hpp"

#include "irkns/assemble.hpp"
#include "irkns/errors.hpp"

namespace irkns {

namespace {

// Bilinear interpolation between nested Q1 pressure grids. Row 0 is e_0 by
// construction (the corner is a coarse node), matching the pinned dof.
SparseMat build_prolongation(const FESpaces& coarse, const FESpaces& fine) {
  CooBuilder coo(fine.n_p, coarse.n_p);
  coo.reserve(4 * static_cast<std::size_t>(fine.n_p));
  for (int j = 0; j < fine.npy; ++j) {
    for (int i = 0; i < fine.npx; ++i) {
      const int row = j * fine.npx + i;
      const int ci = i / 2, cj = j / 2;
      const double fx = 0.5 * (i % 2), fy = 0.5 * (j % 2);
      for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 2; ++a) {
          const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy);
          if (w == 0.0) continue;
          const int cc = std::min(ci + a, coarse.npx - 1);
          const int cr = std::min(cj + b, coarse.npy - 1);
          coo.add(row, cr * coarse.npx + cc, w);
        }
      }
    }
  }
  return coo.build();
}

}  // namespace

PressurePoisson::PressurePoisson(const Rect& domain, int level, int cycles)
    : cycles_(cycles) {
  if (level < 1) throw DimensionMismatch("pressure multigrid needs level >= 1");
  FESpaces prev;
  for (int l = 1; l <= level; ++l) {
    auto [mesh, spaces] = build_mesh(domain, l);
    Level lv;
    lv.K = assemble_stiffness_p(mesh, spaces);
    pin_dof(lv.K, 0);
    lv.diag = lv.K.diagonal();
    if (l > 1) lv.P = build_prolongation(prev, spaces);
    prev = spaces;
    levels_.push_back(std::move(lv));
  }
  coarse_ = std::make_unique<LUSolver>(levels_.front().K);
}

void PressurePoisson::vcycle(int lev, const Vec& b, Vec& x) const {
  const Level& lv = levels_[static_cast<std::size_t>(lev)];
  if (lev == 0) {
    x = coarse_->solve(b);
    return;
  }
  const double omega = 2.0 / 3.0;
  x += omega * (b - lv.K * x).cwiseQuotient(lv.diag);
  Vec r = b - lv.K * x;
  Vec rc = lv.P.transpose() * r;
  Vec xc = Vec::Zero(rc.size());
  vcycle(lev - 1, rc, xc);
  x += lv.P * xc;
  x += omega * (b - lv.K * x).cwiseQuotient(lv.diag);
}

Vec PressurePoisson::apply(const Vec& b) const {
  Vec x = Vec::Zero(b.size());
  x[0] = b[0];
  for (int c = 0; c < cycles_; ++c)
    vcycle(static_cast<int>(levels_.size()) - 1, b, x);
  return x;
}

}  // namespace irkns
