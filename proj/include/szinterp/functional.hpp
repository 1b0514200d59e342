// Representation of functionals on W^{1,infty}_0: an L^p density (callable
// or finite element), a divergence-form flux acting through <F, grad w>,
// and finitely many point masses.  Pairings against continuous piecewise
// polynomials are exact for same-mesh finite element densities and use
// per-element quadrature otherwise.

#pragma once

#include "szinterp/space.hpp"

namespace szinterp {

/// Piecewise polynomial supported on a subset of the simplices of a mesh;
/// zero elsewhere.  Used for the dual weights psi_i and for patch-local
/// products; continuity across interior faces is the caller's invariant.
struct PiecewisePoly {
  const SimplicialMesh* mesh = nullptr;
  std::vector<int> elements;
  std::vector<BPoly> blocks;

  /// Value at x; zero outside the listed elements.  Points on shared faces
  /// take the block of the lowest element id.
  double eval(const Point& x, double tol = 1e-12) const;
  std::array<double, 2> grad_on(int block, std::span<const double> lambda) const;
  int find_element(int element) const;
};

/// The Bernstein basis function b_i of a space as a piecewise polynomial on
/// its support omega_i.
PiecewisePoly basis_patch(const LagrangeSpace& space, int node);

/// xi = density + sum_m c_m v_m - div F + sum_p weight_p delta_{x_p}.
struct DualFunctional {
  ScalarFn density;
  std::vector<std::pair<FEFunction, double>> fe_terms;
  VectorFn flux;
  std::vector<std::pair<Point, double>> atoms;

  bool density_only() const { return !flux && atoms.empty(); }
};

DualFunctional functional_from_density(ScalarFn f);
DualFunctional functional_from_fe(FEFunction f, double coeff = 1.0);
DualFunctional functional_from_flux(VectorFn flux);
DualFunctional functional_from_atom(const Point& x, double weight);

/// Throws if an atom lies outside the closed mesh domain.
void check_atoms(const DualFunctional& xi, const SimplicialMesh& mesh);

/// <xi, w> for a piecewise polynomial w.  Same-mesh finite element
/// densities are integrated exactly through Bernstein Gram matrices;
/// finite element densities living on a refinement of w's mesh drive the
/// quadrature from their own (finer) elements.
double pair_functional(const DualFunctional& xi, const PiecewisePoly& w, int quad_order);

}  // namespace szinterp
