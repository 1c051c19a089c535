#pragma once

#include <array>
#include <functional>
#include <vector>

#include "irkns/mesh.hpp"
#include "irkns/sparse.hpp"

namespace irkns {

// Time-dependent fields evaluated at (x, y, t).
using VectorField = std::function<std::array<double, 2>(double, double, double)>;
using ScalarField = std::function<double(double, double, double)>;

// All assembly uses a 3x3 tensor Gauss rule per pressure cell (exact for the
// Q2 mass/stiffness integrands on this affine mesh).

// Velocity-space (vector Q2) Gram matrices; block-diagonal over components.
SparseMat assemble_mass_u(const StructuredMesh& m, const FESpaces& sp);
SparseMat assemble_stiffness_u(const StructuredMesh& m, const FESpaces& sp);

// Pressure-space (Q1) Gram matrices.
SparseMat assemble_mass_p(const StructuredMesh& m, const FESpaces& sp);
SparseMat assemble_stiffness_p(const StructuredMesh& m, const FESpaces& sp);

// Negative divergence matrix, n_p x n_u: entries -int psi_l div(phi_j).
SparseMat assemble_divergence(const StructuredMesh& m, const FESpaces& sp);

// N(w): entries int (w . grad phi_j) phi_l, wind w a velocity coefficient
// vector evaluated at quadrature points.
SparseMat assemble_convection(const StructuredMesh& m, const FESpaces& sp,
                              const Vec& w);

// H(w): entries int (phi_j . grad w) phi_l; N(w) + H(w) is the derivative of
// u -> N(u) u at w.
SparseMat assemble_convection_jacobian(const StructuredMesh& m,
                                       const FESpaces& sp, const Vec& w);

// Local projection stabilization on disjoint 2x2-cell patches: penalizes the
// patchwise fluctuation of the streamline derivative w . grad(phi), with the
// Peclet switch delta_m = h_m/(2|w(x_m)|) (1 - 1/Pe_m) for Pe_m > 1, else 0;
// Pe_m = |w(x_m)| h_m / (2 nu), x_m the patch centroid, h_m the patch side.
SparseMat assemble_lps(const StructuredMesh& m, const FESpaces& sp,
                       const Vec& w, double nu);

// Load vector int f(.,t) . phi over the velocity space.
Vec assemble_forcing(const StructuredMesh& m, const FESpaces& sp,
                     const VectorField& f, double t);

// Nodal interpolation (exact at dof coordinates).
Vec interpolate_velocity(const FESpaces& sp, const VectorField& f, double t);
Vec interpolate_pressure(const FESpaces& sp, const ScalarField& f, double t);

// L2 projection: Gram solve against the assembled load vector.
Vec l2_project_velocity(const StructuredMesh& m, const FESpaces& sp,
                        const VectorField& f, double t);

// Row replacement for Dirichlet dofs: constrained rows become identity, the
// known values land in rhs. With `symmetric`, columns are eliminated too
// (rhs -= A(:,d) g_d on free rows), preserving symmetry for SPD solves.
void apply_dirichlet(SparseMat& A, Vec& rhs, const std::vector<int>& dofs,
                     const Vec& values, bool symmetric = false);

namespace detail {
// Test hook: reverses the element traversal order of the assembly loops to
// exercise the traversal-invariance property.
extern bool assemble_reverse_traversal;
}  // namespace detail

}  // namespace irkns
