// Exact polynomial algebra on the reference d-simplex in the Bernstein basis:
// evaluation, products, degree raising, barycentric derivatives and exact
// integration.  All constructions are combinatorial; no quadrature is
// involved anywhere in this header.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "szinterp/multiindex.hpp"

namespace szinterp {

/// Volume of the reference d-simplex, 1/d!.
double ref_volume(int d);

/// Value of the Bernstein polynomial (|alpha|!/alpha!) lambda^alpha.
/// Rejects barycentric points whose entries do not sum to one (1e-12).
double bernstein_eval(const MultiIndex& alpha, std::span<const double> lambda);

/// Polynomial on the reference d-simplex stored as a dense coefficient
/// vector over multi_indices(dim, degree).
class BPoly {
 public:
  BPoly() = default;
  BPoly(int dim, int degree);
  BPoly(int dim, int degree, Eigen::VectorXd coeffs);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }

  double eval(std::span<const double> lambda) const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  Eigen::VectorXd coeffs_;
};

/// The constant polynomial written in degree-m form (all coefficients equal).
BPoly bpoly_constant(int dim, int degree, double value);

/// A single basis function b_alpha, alpha = multi_indices(dim, degree)[pos].
BPoly bpoly_unit(int dim, int degree, int pos);

/// Exact product via b_alpha^(m) b_beta^(n) =
/// [prod_j binom(alpha_j+beta_j, alpha_j) / binom(m+n, m)] b_{alpha+beta}^(m+n).
BPoly bpoly_product(const BPoly& a, const BPoly& b);

/// Same polynomial rewritten in the Bernstein basis of a higher degree.
BPoly degree_raise(const BPoly& p, int new_degree);

/// Barycentric derivatives: component j is d(p)/d(lambda_j) of degree m-1.
std::vector<BPoly> bpoly_grad(const BPoly& p);

/// Integral over the reference simplex: c_m * sum of coefficients with
/// c_m = m!/(d+m)!.
double integrate_ref(const BPoly& p);

/// Gram matrix <b_alpha^(m), b_beta^(n)> on the reference simplex,
/// cached per (d, m, n).
const Eigen::MatrixXd& ref_mass_matrix(int d, int m, int n);

/// <a, b> over the reference simplex via the cached Gram matrix.
double pair_ref(const BPoly& a, const BPoly& b);

/// Coefficients of p with the barycentric coordinates permuted: entry for
/// alpha picks up the old coefficient of alpha composed with perm.
BPoly permute_barycentric(const BPoly& p, const std::vector<int>& perm);

}  // namespace szinterp
