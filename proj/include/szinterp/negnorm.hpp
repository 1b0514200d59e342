// Discrete surrogate for dual Sobolev norms: the exact dual norm of a
// functional restricted to an enriched zero-trace space, computed through a
// Riesz solve of the Poisson problem on a refined submesh.  The value is a
// lower bound of the W^{-1,2} norm and increases under enrichment.

#pragma once

#include <Eigen/Sparse>

#include "szinterp/functional.hpp"

namespace szinterp {

struct NegNormOptions {
  int extra_refines = 2;  // uniform refinements of the (sub)mesh
  int eval_degree = 0;    // 0: operator degree + 1
  int quad_order = 0;     // 0: 6k+2 for operator degree k
};

class NegNormSolver {
 public:
  /// region: simplex ids of the base mesh spanning the patch; empty means
  /// the whole domain.  Test functions vanish on the region boundary.
  NegNormSolver(std::shared_ptr<const SimplicialMesh> base, std::vector<int> region,
                int operator_degree, NegNormOptions options = {});

  const SimplicialMesh& evaluation_mesh() const { return *fine_; }
  const LagrangeSpace& evaluation_space() const { return *eval_space_; }

  /// sup of xi(v)/|v|_{H1} over the discrete zero-trace test space.
  double eval(const DualFunctional& xi) const;

 private:
  std::shared_ptr<const SimplicialMesh> base_;
  std::shared_ptr<const SimplicialMesh> fine_;
  std::vector<int> ancestor_;  // fine element id -> base element id
  std::shared_ptr<const LagrangeSpace> eval_space_;
  std::vector<int> compact_;   // node -> interior index or -1
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> stiffness_;
  int quad_order_ = 0;
};

/// Convenience constructors for the whole domain and for vertex patches.
NegNormSolver global_negnorm(std::shared_ptr<const SimplicialMesh> mesh, int operator_degree,
                             NegNormOptions options = {});
NegNormSolver patch_negnorm(std::shared_ptr<const SimplicialMesh> mesh,
                            const std::vector<int>& patch, int operator_degree,
                            NegNormOptions options = {});

/// (sum_j value_j^p)^(1/p).
double localized_sum(std::span<const double> values, double p = 2.0);

/// Exact element stiffness <grad b_a, grad b_b> for degree-m Bernstein
/// functions on simplex t (shared with the heat driver).
Eigen::MatrixXd element_stiffness(const SimplicialMesh& mesh, int t, int degree);

}  // namespace szinterp
