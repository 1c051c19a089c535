#include "irkns/mesh.hpp"

#include "irkns/errors.hpp"

namespace irkns {

std::pair<StructuredMesh, FESpaces> build_mesh(const Rect& domain, int level) {
  if (level < 1) throw Error("mesh level must be >= 1");

  StructuredMesh m;
  m.domain = domain;
  m.level = level;
  m.nx = 1 << level;
  m.ny = 1 << level;
  m.hx = domain.width() / m.nx;
  m.hy = domain.height() / m.ny;

  FESpaces sp;
  sp.nvx = 2 * m.nx + 1;
  sp.nvy = 2 * m.ny + 1;
  sp.npx = m.nx + 1;
  sp.npy = m.ny + 1;
  sp.n_scalar = sp.nvx * sp.nvy;
  sp.n_u = 2 * sp.n_scalar;
  sp.n_p = sp.npx * sp.npy;

  const double hu_x = 0.5 * m.hx, hu_y = 0.5 * m.hy;
  sp.vx.resize(sp.n_scalar);
  sp.vy.resize(sp.n_scalar);
  for (int j = 0; j < sp.nvy; ++j)
    for (int i = 0; i < sp.nvx; ++i) {
      sp.vx[sp.node(i, j)] = domain.ax + hu_x * i;
      sp.vy[sp.node(i, j)] = domain.ay + hu_y * j;
    }
  sp.px.resize(sp.n_p);
  sp.py.resize(sp.n_p);
  for (int j = 0; j < sp.npy; ++j)
    for (int i = 0; i < sp.npx; ++i) {
      sp.px[sp.pnode(i, j)] = domain.ax + m.hx * i;
      sp.py[sp.pnode(i, j)] = domain.ay + m.hy * j;
    }

  for (int j = 0; j < sp.nvy; ++j)
    for (int i = 0; i < sp.nvx; ++i) {
      const int k = sp.node(i, j);
      const bool bdry = (i == 0 || i == sp.nvx - 1 || j == 0 || j == sp.nvy - 1);
      (bdry ? sp.boundary_nodes : sp.interior_nodes).push_back(k);
    }
  sp.dof_to_interior.assign(sp.n_u, -1);
  for (int comp = 0; comp < 2; ++comp)
    for (int k : sp.interior_nodes) {
      const int dof = comp == 0 ? sp.dof_x(k) : sp.dof_y(k);
      sp.dof_to_interior[dof] = int(sp.interior_dofs.size());
      sp.interior_dofs.push_back(dof);
    }
  for (int comp = 0; comp < 2; ++comp)
    for (int k : sp.boundary_nodes)
      sp.boundary_dofs.push_back(comp == 0 ? sp.dof_x(k) : sp.dof_y(k));

  return {m, sp};
}

}  // namespace irkns
