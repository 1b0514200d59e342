// Quadrature on the reference simplex: Gauss-Legendre on the unit interval,
// collapsed (Duffy) tensor Gauss on the unit triangle.  Rules are exact for
// polynomials up to the requested total degree and cached.

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace szinterp {

struct QuadratureRule {
  int dim = 0;
  // Barycentric coordinates of the points, d+1 entries each; weights sum to
  // the reference volume 1/d!.
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Cached reference rule exact for polynomials of total degree <= order.
const QuadratureRule& simplex_quadrature(int dim, int order);

/// Values of all degree-m Bernstein basis functions at the points of
/// simplex_quadrature(dim, order); entry (a, q) is b_a at point q.  Cached.
const Eigen::MatrixXd& bernstein_at_quadrature(int dim, int m, int order);

/// Barycentric derivatives at the quadrature points: component j holds
/// d(b_a)/d(lambda_j) as entry (a, q).  Cached.
const std::vector<Eigen::MatrixXd>& bernstein_grad_at_quadrature(int dim, int m, int order);

}  // namespace szinterp
