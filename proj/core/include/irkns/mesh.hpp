#pragma once

#include <array>
#include <utility>
#include <vector>

namespace irkns {

struct Rect {
  double ax = 0.0, ay = 0.0, bx = 1.0, by = 1.0;
  double width() const { return bx - ax; }
  double height() const { return by - ay; }
};

// Uniform quadrilateral mesh at refinement level l: 2^l pressure cells per
// direction. Velocity (Q2) lives on the once-refined grid, so h_u = h_p / 2.
struct StructuredMesh {
  Rect domain;
  int level = 1;
  int nx = 2, ny = 2;   // pressure cells per direction
  double hx = 0.5, hy = 0.5;  // pressure cell size
  double h_p() const { return hx; }
  double h_u() const { return 0.5 * hx; }
  int cell_count() const { return nx * ny; }
};

// Taylor-Hood Q2-Q1 dof layout. Scalar Q2 nodes are ordered lexicographically
// (x fastest); the vector space is component-major: all x-component dofs,
// then all y-component dofs. Pressure (Q1) nodes are the cell vertices,
// lexicographic as well.
struct FESpaces {
  int nvx = 0, nvy = 0;   // velocity nodes per direction (2nx+1, 2ny+1)
  int npx = 0, npy = 0;   // pressure nodes per direction (nx+1, ny+1)
  int n_scalar = 0;       // scalar Q2 dof count
  int n_u = 0;            // 2 * n_scalar
  int n_p = 0;

  std::vector<double> vx, vy;  // velocity node coordinates
  std::vector<double> px, py;  // pressure node coordinates

  std::vector<int> boundary_nodes;  // scalar Q2 ids on the Dirichlet boundary
  std::vector<int> interior_nodes;
  std::vector<int> boundary_dofs;   // vector dofs, both components
  std::vector<int> interior_dofs;
  std::vector<int> dof_to_interior; // n_u -> index in interior_dofs, or -1

  int node(int i, int j) const { return j * nvx + i; }
  int pnode(int i, int j) const { return j * npx + i; }
  int dof_x(int k) const { return k; }
  int dof_y(int k) const { return n_scalar + k; }

  // The 9 Q2 nodes of pressure cell (cx, cy), local order 3*b + a.
  std::array<int, 9> q2_nodes(int cx, int cy) const {
    std::array<int, 9> g;
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) g[3 * b + a] = node(2 * cx + a, 2 * cy + b);
    return g;
  }
  // The 4 Q1 nodes of pressure cell (cx, cy), local order 2*b + a.
  std::array<int, 4> q1_nodes(int cx, int cy) const {
    std::array<int, 4> g;
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) g[2 * b + a] = pnode(cx + a, cy + b);
    return g;
  }
};

// Builds the level-l mesh on the given rectangle together with its dof maps.
// Dirichlet velocity dofs cover the whole boundary; pressure has none.
std::pair<StructuredMesh, FESpaces> build_mesh(const Rect& domain, int level);

}  // namespace irkns
