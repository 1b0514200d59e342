// Lagrange spaces of arbitrary degree on a simplicial mesh and finite
// element functions stored as global Bernstein coefficient vectors.  Nodes
// are deduplicated combinatorially from their barycentric lattice
// description, so conforming meshes need no coordinate tolerances.

#pragma once

#include <functional>
#include <memory>

#include "szinterp/bpoly.hpp"
#include "szinterp/mesh.hpp"

namespace szinterp {

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<std::array<double, 2>(const Point&)>;

class LagrangeSpace {
 public:
  LagrangeSpace(std::shared_ptr<const SimplicialMesh> mesh, int degree);

  const SimplicialMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const SimplicialMesh> mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int num_nodes() const { return static_cast<int>(node_coords_.size()); }
  const Point& node_coord(int i) const { return node_coords_[static_cast<std::size_t>(i)]; }
  bool node_on_boundary(int i) const { return node_on_boundary_[static_cast<std::size_t>(i)] != 0; }
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }

  /// Global node ids per simplex, in multi_indices(d, degree) order; entry a
  /// is the node at lattice point alpha/degree for alpha = multi_indices[a].
  const std::vector<int>& local_to_global(int t) const { return loc2glob_[static_cast<std::size_t>(t)]; }
  /// omega_i: simplices containing node i (the support of b_i).
  const std::vector<int>& node_support(int i) const { return node_support_[static_cast<std::size_t>(i)]; }
  double support_measure(int i) const { return support_measure_[static_cast<std::size_t>(i)]; }
  /// Position of node i within multi_indices(d, degree) on simplex t; -1 if
  /// the node does not belong to t.
  int local_index(int t, int i) const;

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  int degree_;
  std::vector<Point> node_coords_;
  std::vector<char> node_on_boundary_;
  std::vector<int> interior_nodes_;
  std::vector<std::vector<int>> loc2glob_;
  std::vector<std::vector<int>> node_support_;
  std::vector<double> support_measure_;
};

std::shared_ptr<const LagrangeSpace> make_lagrange_space(
    std::shared_ptr<const SimplicialMesh> mesh, int degree);

class FEFunction {
 public:
  FEFunction() = default;
  explicit FEFunction(std::shared_ptr<const LagrangeSpace> space);
  FEFunction(std::shared_ptr<const LagrangeSpace> space, Eigen::VectorXd coeffs);

  const LagrangeSpace& space() const { return *space_; }
  std::shared_ptr<const LagrangeSpace> space_ptr() const { return space_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }

  /// Restriction to simplex t as a reference-simplex polynomial.
  BPoly local(int t) const;
  double eval_local(int t, std::span<const double> lambda) const;
  std::array<double, 2> grad_local(int t, std::span<const double> lambda) const;
  /// Point evaluation; throws if x lies outside the mesh.
  double eval(const Point& x) const;
  std::array<double, 2> grad(const Point& x) const;

 private:
  std::shared_ptr<const LagrangeSpace> space_;
  Eigen::VectorXd coeffs_;
};

/// Interpolant matching f at every Lagrange node; reproduces polynomials of
/// degree <= space degree exactly.
FEFunction interpolate(std::shared_ptr<const LagrangeSpace> space, const ScalarFn& f);

enum class NormType { L2, H1Semi };

/// Quadrature norm of a finite element function.
double fe_norm(const FEFunction& f, NormType which, int quad_order);
/// Exact norm via Bernstein Gram matrices (no quadrature).
double fe_norm_exact(const FEFunction& f, NormType which);
/// Exact L2 product of two functions on the same space.
double fe_dot_exact(const FEFunction& a, const FEFunction& b);

struct ErrorNorms {
  double l2 = 0.0;
  double h1semi = 0.0;
};

/// Quadrature norms of v - f for a callable v with gradient grad_v.
ErrorNorms fe_error(const FEFunction& f, const ScalarFn& v, const VectorFn& grad_v,
                    int quad_order);

double callable_norm(const SimplicialMesh& mesh, const ScalarFn& f, int quad_order);

}  // namespace szinterp
