// Global biorthogonal weights and the quasi-interpolation operators built
// from them: the zero-trace projection and its adjoint, the boundary
// corrected projection and adjoint, and the raw mass-preserving variant.
//
// The weight of node i is psi_i = (|Tref|/|omega_i|) p_{alpha(i,T)} glued
// over the support omega_i; coordinate-permutation symmetry of the local
// dual basis makes the glued function continuous.

#pragma once

#include <unordered_map>

#include "szinterp/dualbasis.hpp"
#include "szinterp/functional.hpp"

namespace szinterp {

class GlobalDualBasis {
 public:
  GlobalDualBasis(std::shared_ptr<const LagrangeSpace> space, const DualBasisTable& table);

  const LagrangeSpace& space() const { return *space_; }
  std::shared_ptr<const LagrangeSpace> space_ptr() const { return space_; }
  const DualBasisTable& table() const { return *table_; }
  /// |Tref| / |omega_i|.
  double scale(int node) const { return scale_[static_cast<std::size_t>(node)]; }

  /// psi_i as blocks of degree 3k over omega_i.
  PiecewisePoly psi(int node) const;
  /// The degree-3k block of psi_i on simplex t (t must contain node i).
  BPoly psi_block(int node, int t) const;

  /// Codomain of the adjoint operators, built on first use.
  std::shared_ptr<const LagrangeSpace> space3k() const;

  /// Default quadrature order where the degree-3k weights meet
  /// non-polynomial integrands.
  int quad_order() const { return 6 * space_->degree() + 2; }

 private:
  std::shared_ptr<const LagrangeSpace> space_;
  const DualBasisTable* table_;
  std::vector<double> scale_;
  mutable std::shared_ptr<const LagrangeSpace> space3k_;
};

/// Builds the weights for a degree-k space; the table must match (d, k).
GlobalDualBasis assemble_psi(std::shared_ptr<const LagrangeSpace> space,
                             const DualBasisTable& table);

/// Weights with zero boundary traces: psi_i for interior nodes, b_i eta
/// rho_i for boundary nodes, where eta is the sum of the interior vertex
/// hats and rho_i solves the local weighted Gram system restoring
/// biorthogonality.  Throws if a boundary patch is degenerate (the weighted
/// system is inconsistent).
class CorrectedDualBasis {
 public:
  CorrectedDualBasis(GlobalDualBasis base,
                     std::unordered_map<int, PiecewisePoly> corrected);

  const GlobalDualBasis& base() const { return base_; }
  const LagrangeSpace& space() const { return base_.space(); }
  bool is_corrected(int node) const { return corrected_.count(node) != 0; }
  PiecewisePoly psi_tilde(int node) const;

 private:
  GlobalDualBasis base_;
  std::unordered_map<int, PiecewisePoly> corrected_;
};

CorrectedDualBasis boundary_correction(const GlobalDualBasis& basis);

/// Projection onto the zero-trace space: coefficients <xi, psi_i> at
/// interior nodes, zero at boundary nodes.
FEFunction apply_pi0(const GlobalDualBasis& basis, const DualFunctional& xi,
                     int quad_order = 0);

/// L2-adjoint: sum over interior nodes of <xi, b_i> psi_i, a zero-trace
/// function of degree 3k.
FEFunction apply_pi0_star(const GlobalDualBasis& basis, const DualFunctional& xi,
                          int quad_order = 0);

/// Raw variant over all nodes; preserves the mass <P v, 1> = <v, 1>.
FEFunction apply_p_raw(const GlobalDualBasis& basis, const DualFunctional& xi,
                       int quad_order = 0);

/// Boundary-corrected projection onto the full degree-k space.
FEFunction apply_pi(const CorrectedDualBasis& basis, const DualFunctional& xi,
                    int quad_order = 0);

/// Adjoint of the corrected projection; defined for densities only.
FEFunction apply_pi_star(const CorrectedDualBasis& basis, const DualFunctional& xi,
                         int quad_order = 0);

/// <1, b_i> over the support of node i (exact).
double basis_integral(const LagrangeSpace& space, int node);

/// Dense Gram matrix <psi_i, psi_j> over the given nodes (exact).
Eigen::MatrixXd psi_gram(const GlobalDualBasis& basis, const std::vector<int>& nodes);

/// Dense Gram matrix <b_i, b_j> over the given nodes (exact).
Eigen::MatrixXd bernstein_gram(const LagrangeSpace& space, const std::vector<int>& nodes);

}  // namespace szinterp
