// Comparison operators: the global L2-projection onto the zero-trace space
// and the local self-adjoint operator assembled from vertex-wise weighted
// projections (a Clement-type construction).  The latter is not a
// projection onto the degree-k space; it reproduces degree k-1 only.

#pragma once

#include <Eigen/Sparse>

#include "szinterp/functional.hpp"

namespace szinterp {

class L2Projection {
 public:
  explicit L2Projection(std::shared_ptr<const LagrangeSpace> space);

  const LagrangeSpace& space() const { return *space_; }
  FEFunction apply(const DualFunctional& xi, int quad_order = 0) const;

 private:
  std::shared_ptr<const LagrangeSpace> space_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// C xi = sum_j phi_j C_j xi with C_j the projection onto the local
/// degree-(k-1) space over the vertex patch omega_j, orthogonal with
/// respect to the phi_j-weighted inner product.  Local spaces carry the
/// zero-boundary-trace constraint: a local function v is admissible iff
/// phi_j v has zero trace on the domain boundary.
class ClementOperator {
 public:
  explicit ClementOperator(std::shared_ptr<const LagrangeSpace> space);

  const LagrangeSpace& space() const { return *space_; }
  FEFunction apply(const DualFunctional& xi, int quad_order = 0) const;
  /// Dimension of the local space at vertex j (zero when fully constrained).
  int local_dimension(int vertex) const;

 private:
  struct VertexData {
    std::vector<PiecewisePoly> basis;     // degree k-1 blocks on omega_j
    std::vector<PiecewisePoly> weighted;  // phi_j * basis, degree k
    Eigen::LDLT<Eigen::MatrixXd> gram;    // <phi_j u_a, u_b>
  };

  std::shared_ptr<const LagrangeSpace> space_;
  std::vector<VertexData> vertex_data_;
};

}  // namespace szinterp
