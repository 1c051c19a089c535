#include "irkns/assemble.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

#include "irkns/errors.hpp"

namespace irkns {

namespace detail {
bool assemble_reverse_traversal = false;
}

namespace {

struct RefData {
  // 3x3 tensor Gauss, q = 3*qy + qx; weights include the cell Jacobian.
  double wq[9];
  double n2[9][9], gx2[9][9], gy2[9][9];  // Q2 values and physical gradients
  double n1[9][4];                        // Q1 values
  double xi[3];                           // 1D quadrature nodes
  // Shared element matrices (uniform mesh: identical on every cell).
  double Me[9][9], Ke[9][9];
  double BeX[4][9], BeY[4][9];
  double Mpe[4][4], Kpe[4][4];
};

RefData make_ref(const StructuredMesh& m) {
  RefData r{};
  const double gq[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double jac = m.hx * m.hy / 4.0;
  const double dx = 2.0 / m.hx, dy = 2.0 / m.hy;
  for (int i = 0; i < 3; ++i) r.xi[i] = gq[i];

  auto q2 = [](double x, int a) {
    switch (a) {
      case 0: return 0.5 * x * (x - 1.0);
      case 1: return 1.0 - x * x;
      default: return 0.5 * x * (x + 1.0);
    }
  };
  auto dq2 = [](double x, int a) {
    switch (a) {
      case 0: return x - 0.5;
      case 1: return -2.0 * x;
      default: return x + 0.5;
    }
  };
  auto q1 = [](double x, int a) { return a == 0 ? 0.5 * (1.0 - x) : 0.5 * (1.0 + x); };

  for (int qy = 0; qy < 3; ++qy)
    for (int qx = 0; qx < 3; ++qx) {
      const int q = 3 * qy + qx;
      r.wq[q] = gw[qx] * gw[qy] * jac;
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          const int k = 3 * b + a;
          r.n2[q][k] = q2(gq[qx], a) * q2(gq[qy], b);
          r.gx2[q][k] = dq2(gq[qx], a) * q2(gq[qy], b) * dx;
          r.gy2[q][k] = q2(gq[qx], a) * dq2(gq[qy], b) * dy;
        }
      for (int b = 0; b < 2; ++b)
        for (int a = 0; a < 2; ++a)
          r.n1[q][2 * b + a] = q1(gq[qx], a) * q1(gq[qy], b);
    }

  for (int q = 0; q < 9; ++q) {
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b) {
        r.Me[a][b] += r.wq[q] * r.n2[q][a] * r.n2[q][b];
        r.Ke[a][b] += r.wq[q] * (r.gx2[q][a] * r.gx2[q][b] + r.gy2[q][a] * r.gy2[q][b]);
      }
    for (int l = 0; l < 4; ++l)
      for (int a = 0; a < 9; ++a) {
        r.BeX[l][a] -= r.wq[q] * r.n1[q][l] * r.gx2[q][a];
        r.BeY[l][a] -= r.wq[q] * r.n1[q][l] * r.gy2[q][a];
      }
    for (int l = 0; l < 4; ++l)
      for (int k = 0; k < 4; ++k) {
        r.Mpe[l][k] += r.wq[q] * r.n1[q][l] * r.n1[q][k];
        const double g1x_l = (l % 2 == 0 ? -0.5 : 0.5) * (2.0 / m.hx);
        const double g1x_k = (k % 2 == 0 ? -0.5 : 0.5) * (2.0 / m.hx);
        const double g1y_l = (l / 2 == 0 ? -0.5 : 0.5) * (2.0 / m.hy);
        const double g1y_k = (k / 2 == 0 ? -0.5 : 0.5) * (2.0 / m.hy);
        // Bilinear gradients vary over the cell; tensorize explicitly.
        const double lx = q1(r.xi[q % 3], l % 2), kx = q1(r.xi[q % 3], k % 2);
        const double ly = q1(r.xi[q / 3], l / 2), ky = q1(r.xi[q / 3], k / 2);
        r.Kpe[l][k] += r.wq[q] * (g1x_l * ly * g1x_k * ky + lx * g1y_l * kx * g1y_k);
      }
  }
  return r;
}

// Iterates cells in the canonical (or reversed, for the traversal-invariance
// hook) order.
template <typename F>
void for_cells(const StructuredMesh& m, F&& f) {
  const int n = m.nx * m.ny;
  if (!detail::assemble_reverse_traversal) {
    for (int c = 0; c < n; ++c) f(c % m.nx, c / m.nx);
  } else {
    for (int c = n; c-- > 0;) f(c % m.nx, c / m.nx);
  }
}

SparseMat scalar_q2_matrix(const StructuredMesh& m, const FESpaces& sp,
                           const double (&El)[9][9]) {
  CooBuilder coo(sp.n_scalar, sp.n_scalar);
  coo.reserve(size_t(m.cell_count()) * 81);
  for_cells(m, [&](int cx, int cy) {
    const auto g = sp.q2_nodes(cx, cy);
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b) coo.add(g[a], g[b], El[a][b]);
  });
  return coo.build();
}

SparseMat replicate_components(const SparseMat& S, int n_scalar) {
  CooBuilder coo(2 * n_scalar, 2 * n_scalar);
  coo.reserve(2 * size_t(S.nonZeros()));
  for (int r = 0; r < S.outerSize(); ++r)
    for (SparseMat::InnerIterator it(S, r); it; ++it) {
      coo.add(r, int(it.col()), it.value());
      coo.add(r + n_scalar, int(it.col()) + n_scalar, it.value());
    }
  return coo.build();
}

void wind_at_point(const FESpaces& sp, const Vec& w, const std::array<int, 9>& g,
                   const double* shape, double& wx, double& wy) {
  wx = 0.0;
  wy = 0.0;
  for (int a = 0; a < 9; ++a) {
    wx += shape[a] * w[g[a]];
    wy += shape[a] * w[sp.n_scalar + g[a]];
  }
}

}  // namespace

SparseMat assemble_mass_u(const StructuredMesh& m, const FESpaces& sp) {
  const RefData r = make_ref(m);
  return replicate_components(scalar_q2_matrix(m, sp, r.Me), sp.n_scalar);
}

SparseMat assemble_stiffness_u(const StructuredMesh& m, const FESpaces& sp) {
  const RefData r = make_ref(m);
  return replicate_components(scalar_q2_matrix(m, sp, r.Ke), sp.n_scalar);
}

SparseMat assemble_mass_p(const StructuredMesh& m, const FESpaces& sp) {
  const RefData r = make_ref(m);
  CooBuilder coo(sp.n_p, sp.n_p);
  coo.reserve(size_t(m.cell_count()) * 16);
  for_cells(m, [&](int cx, int cy) {
    const auto g = sp.q1_nodes(cx, cy);
    for (int l = 0; l < 4; ++l)
      for (int k = 0; k < 4; ++k) coo.add(g[l], g[k], r.Mpe[l][k]);
  });
  return coo.build();
}

SparseMat assemble_stiffness_p(const StructuredMesh& m, const FESpaces& sp) {
  const RefData r = make_ref(m);
  CooBuilder coo(sp.n_p, sp.n_p);
  coo.reserve(size_t(m.cell_count()) * 16);
  for_cells(m, [&](int cx, int cy) {
    const auto g = sp.q1_nodes(cx, cy);
    for (int l = 0; l < 4; ++l)
      for (int k = 0; k < 4; ++k) coo.add(g[l], g[k], r.Kpe[l][k]);
  });
  return coo.build();
}

SparseMat assemble_divergence(const StructuredMesh& m, const FESpaces& sp) {
  const RefData r = make_ref(m);
  CooBuilder coo(sp.n_p, sp.n_u);
  coo.reserve(size_t(m.cell_count()) * 72);
  for_cells(m, [&](int cx, int cy) {
    const auto g2 = sp.q2_nodes(cx, cy);
    const auto g1 = sp.q1_nodes(cx, cy);
    for (int l = 0; l < 4; ++l)
      for (int a = 0; a < 9; ++a) {
        coo.add(g1[l], g2[a], r.BeX[l][a]);
        coo.add(g1[l], sp.n_scalar + g2[a], r.BeY[l][a]);
      }
  });
  return coo.build();
}

SparseMat assemble_convection(const StructuredMesh& m, const FESpaces& sp,
                              const Vec& w) {
  if (w.size() != sp.n_u) throw DimensionMismatch("wind length != n_u");
  const RefData r = make_ref(m);
  CooBuilder coo(sp.n_scalar, sp.n_scalar);
  coo.reserve(size_t(m.cell_count()) * 81);
  for_cells(m, [&](int cx, int cy) {
    const auto g = sp.q2_nodes(cx, cy);
    double ne[9][9] = {};
    for (int q = 0; q < 9; ++q) {
      double wx, wy;
      wind_at_point(sp, w, g, r.n2[q], wx, wy);
      for (int a = 0; a < 9; ++a) {
        const double ta = r.wq[q] * r.n2[q][a];
        for (int b = 0; b < 9; ++b)
          ne[a][b] += ta * (wx * r.gx2[q][b] + wy * r.gy2[q][b]);
      }
    }
    for (int a = 0; a < 9; ++a)
      for (int b = 0; b < 9; ++b) coo.add(g[a], g[b], ne[a][b]);
  });
  return replicate_components(coo.build(), sp.n_scalar);
}

SparseMat assemble_convection_jacobian(const StructuredMesh& m,
                                       const FESpaces& sp, const Vec& w) {
  if (w.size() != sp.n_u) throw DimensionMismatch("wind length != n_u");
  const RefData r = make_ref(m);
  CooBuilder coo(sp.n_u, sp.n_u);
  coo.reserve(size_t(m.cell_count()) * 81 * 4);
  for_cells(m, [&](int cx, int cy) {
    const auto g = sp.q2_nodes(cx, cy);
    double he[2][2][9][9] = {};
    for (int q = 0; q < 9; ++q) {
      double grad[2][2] = {};  // grad[c1][c2] = d w_c1 / d x_c2
      for (int a = 0; a < 9; ++a) {
        grad[0][0] += r.gx2[q][a] * w[g[a]];
        grad[0][1] += r.gy2[q][a] * w[g[a]];
        grad[1][0] += r.gx2[q][a] * w[sp.n_scalar + g[a]];
        grad[1][1] += r.gy2[q][a] * w[sp.n_scalar + g[a]];
      }
      for (int a = 0; a < 9; ++a) {
        const double ta = r.wq[q] * r.n2[q][a];
        for (int b = 0; b < 9; ++b) {
          const double tb = ta * r.n2[q][b];
          he[0][0][a][b] += tb * grad[0][0];
          he[0][1][a][b] += tb * grad[0][1];
          he[1][0][a][b] += tb * grad[1][0];
          he[1][1][a][b] += tb * grad[1][1];
        }
      }
    }
    for (int c1 = 0; c1 < 2; ++c1)
      for (int c2 = 0; c2 < 2; ++c2)
        for (int a = 0; a < 9; ++a)
          for (int b = 0; b < 9; ++b)
            coo.add(c1 * sp.n_scalar + g[a], c2 * sp.n_scalar + g[b],
                    he[c1][c2][a][b]);
  });
  return coo.build();
}

SparseMat assemble_lps(const StructuredMesh& m, const FESpaces& sp,
                       const Vec& w, double nu) {
  if (w.size() != sp.n_u) throw DimensionMismatch("wind length != n_u");
  if (m.nx % 2 != 0 || m.ny % 2 != 0)
    throw OddCellCount("LPS patches need even cell counts");
  const RefData r = make_ref(m);
  const double hm = 2.0 * m.hx;
  const double area = 4.0 * m.hx * m.hy;
  CooBuilder coo(sp.n_scalar, sp.n_scalar);

  for (int py = 0; py < m.ny / 2; ++py)
    for (int px = 0; px < m.nx / 2; ++px) {
      const int cnode = sp.node(4 * px + 2, 4 * py + 2);  // patch centroid
      const double vx = w[cnode], vy = w[sp.n_scalar + cnode];
      const double vn = std::hypot(vx, vy);
      const double pe = vn * hm / (2.0 * nu);
      if (pe <= 1.0) continue;
      const double delta = hm / (2.0 * vn) * (1.0 - 1.0 / pe);

      // Streamline derivatives of the 25 patch-local Q2 basis functions at
      // the 36 patch quadrature points.
      double sd[36][25] = {};
      double qw[36];
      int patch_nodes[25];
      for (int pb = 0; pb < 5; ++pb)
        for (int pa = 0; pa < 5; ++pa)
          patch_nodes[5 * pb + pa] = sp.node(4 * px + pa, 4 * py + pb);

      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
          const auto g = sp.q2_nodes(2 * px + dx, 2 * py + dy);
          for (int q = 0; q < 9; ++q) {
            const int qq = (2 * dy + dx) * 9 + q;
            qw[qq] = r.wq[q];
            double wxq, wyq;
            wind_at_point(sp, w, g, r.n2[q], wxq, wyq);
            for (int b = 0; b < 3; ++b)
              for (int a = 0; a < 3; ++a) {
                const int k = 3 * b + a;
                const int pl = 5 * (2 * dy + b) + (2 * dx + a);
                sd[qq][pl] = wxq * r.gx2[q][k] + wyq * r.gy2[q][k];
              }
          }
        }

      double sbar[25] = {};
      for (int q = 0; q < 36; ++q)
        for (int p = 0; p < 25; ++p) sbar[p] += qw[q] * sd[q][p];
      for (int p = 0; p < 25; ++p) sbar[p] /= area;

      double qe[25][25] = {};
      for (int q = 0; q < 36; ++q)
        for (int p = 0; p < 25; ++p) {
          const double fp = sd[q][p] - sbar[p];
          if (fp == 0.0) continue;
          const double t = delta * qw[q] * fp;
          for (int s2 = 0; s2 < 25; ++s2) qe[p][s2] += t * (sd[q][s2] - sbar[s2]);
        }
      for (int p = 0; p < 25; ++p)
        for (int s2 = 0; s2 < 25; ++s2)
          if (qe[p][s2] != 0.0) coo.add(patch_nodes[p], patch_nodes[s2], qe[p][s2]);
    }
  return replicate_components(coo.build(), sp.n_scalar);
}

Vec assemble_forcing(const StructuredMesh& m, const FESpaces& sp,
                     const VectorField& f, double t) {
  const RefData r = make_ref(m);
  Vec out = Vec::Zero(sp.n_u);
  for_cells(m, [&](int cx, int cy) {
    const auto g = sp.q2_nodes(cx, cy);
    const double x0 = m.domain.ax + cx * m.hx;
    const double y0 = m.domain.ay + cy * m.hy;
    for (int q = 0; q < 9; ++q) {
      const double xq = x0 + (r.xi[q % 3] + 1.0) * 0.5 * m.hx;
      const double yq = y0 + (r.xi[q / 3] + 1.0) * 0.5 * m.hy;
      const auto fv = f(xq, yq, t);
      for (int a = 0; a < 9; ++a) {
        out[g[a]] += r.wq[q] * fv[0] * r.n2[q][a];
        out[sp.n_scalar + g[a]] += r.wq[q] * fv[1] * r.n2[q][a];
      }
    }
  });
  return out;
}

Vec interpolate_velocity(const FESpaces& sp, const VectorField& f, double t) {
  Vec out(sp.n_u);
  for (int k = 0; k < sp.n_scalar; ++k) {
    const auto v = f(sp.vx[k], sp.vy[k], t);
    out[k] = v[0];
    out[sp.n_scalar + k] = v[1];
  }
  return out;
}

Vec interpolate_pressure(const FESpaces& sp, const ScalarField& f, double t) {
  Vec out(sp.n_p);
  for (int k = 0; k < sp.n_p; ++k) out[k] = f(sp.px[k], sp.py[k], t);
  return out;
}

Vec l2_project_velocity(const StructuredMesh& m, const FESpaces& sp,
                        const VectorField& f, double t) {
  const SparseMat Mu = assemble_mass_u(m, sp);
  const Vec rhs = assemble_forcing(m, sp, f, t);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(
      Eigen::SparseMatrix<double>(Mu));
  if (chol.info() != Eigen::Success) throw SingularPivot("mass factorization failed");
  return chol.solve(rhs);
}

void apply_dirichlet(SparseMat& A, Vec& rhs, const std::vector<int>& dofs,
                     const Vec& values, bool symmetric) {
  if (int(dofs.size()) != values.size())
    throw MissingBoundaryValue("one value per constrained dof required");
  std::vector<char> is_bc(A.rows(), 0);
  Vec bval = Vec::Zero(A.rows());
  for (size_t i = 0; i < dofs.size(); ++i) {
    is_bc[dofs[i]] = 1;
    bval[dofs[i]] = values[i];
  }
  CooBuilder coo(int(A.rows()), int(A.cols()));
  coo.reserve(size_t(A.nonZeros()));
  for (int r = 0; r < A.outerSize(); ++r) {
    if (is_bc[r]) continue;
    for (SparseMat::InnerIterator it(A, r); it; ++it) {
      if (symmetric && is_bc[it.col()]) {
        rhs[r] -= it.value() * bval[it.col()];
      } else {
        coo.add(r, int(it.col()), it.value());
      }
    }
  }
  for (int d : dofs) coo.add(d, d, 1.0);
  for (size_t i = 0; i < dofs.size(); ++i) rhs[dofs[i]] = values[i];
  A = coo.build();
}

}  // namespace irkns
