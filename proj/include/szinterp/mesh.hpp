// Conforming simplicial meshes in one and two dimensions: validation,
// derived geometry (measures, diameters, vertex patches, element
// neighborhoods), uniform and local refinement, built-in generators and
// JSON input/output.

#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace szinterp {

/// Physical point; entry [1] is unused for d = 1.
using Point = std::array<double, 2>;

class SimplicialMesh {
 public:
  SimplicialMesh(int dim, std::vector<Point> vertices,
                 std::vector<std::vector<int>> simplices);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_simplices() const { return static_cast<int>(simplices_.size()); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& simplices() const { return simplices_; }

  double measure(int t) const { return measure_[static_cast<std::size_t>(t)]; }
  double diameter(int t) const { return diameter_[static_cast<std::size_t>(t)]; }
  double max_diameter() const;

  /// Sorted vertex tuples of facets contained in exactly one simplex.
  const std::vector<std::vector<int>>& boundary_facets() const { return boundary_facets_; }
  bool vertex_on_boundary(int v) const { return vertex_on_boundary_[static_cast<std::size_t>(v)] != 0; }

  /// omega_j: simplices containing vertex j.
  const std::vector<int>& vertex_patch(int v) const { return vertex_patch_[static_cast<std::size_t>(v)]; }
  /// omega_j^2: simplices intersecting omega_j.
  const std::vector<int>& vertex_patch2(int v) const { return vertex_patch2_[static_cast<std::size_t>(v)]; }
  double patch_diameter(int v) const { return patch_diam_[static_cast<std::size_t>(v)]; }
  /// omega_T: simplices sharing at least a vertex with T.
  const std::vector<int>& simplex_neighborhood(int t) const { return simplex_nbhd_[static_cast<std::size_t>(t)]; }

  /// max over T of h_T^d / |T| (shape regularity measure).
  double shape_regularity() const { return shape_regularity_; }
  bool orientation_was_fixed() const { return orientation_fixed_; }

  /// Barycentric coordinates of x with respect to simplex t.
  Eigen::VectorXd barycentric(int t, const Point& x) const;
  /// Gradient rows: row j is the constant vector grad lambda_j on simplex t.
  const Eigen::MatrixXd& barycentric_gradients(int t) const;
  Point map_from_barycentric(int t, std::span<const double> lambda) const;
  /// Simplex containing x (barycentric test with tolerance), lowest id wins;
  /// -1 if x lies outside the mesh.
  int locate(const Point& x, double tol = 1e-12) const;

  /// Element ids of the parent mesh when this mesh was produced by
  /// refinement; empty otherwise.
  const std::vector<int>& parents() const { return parent_; }

  /// Geometric conformity scan (hanging-node detection); throws on failure.
  void validate_geometry() const;

  friend SimplicialMesh uniform_refine(const SimplicialMesh&);
  friend SimplicialMesh local_refine_1d(const SimplicialMesh&, const std::vector<int>&);

 private:
  int dim_;
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> simplices_;
  std::vector<double> measure_, diameter_;
  std::vector<std::vector<int>> boundary_facets_;
  std::vector<char> vertex_on_boundary_;
  std::vector<std::vector<int>> vertex_patch_, vertex_patch2_, simplex_nbhd_;
  std::vector<double> patch_diam_;
  std::vector<Eigen::MatrixXd> grad_lambda_;   // per simplex, (d+1) x d
  std::vector<Eigen::MatrixXd> bary_matrix_;   // per simplex, inverse affine map
  double shape_regularity_ = 0.0;
  bool orientation_fixed_ = false;
  std::vector<int> parent_;
};

SimplicialMesh build_mesh(int dim, std::vector<Point> vertices,
                          std::vector<std::vector<int>> simplices);

/// d = 1: every interval bisected; d = 2: red refinement into four children
/// via edge midpoints.  Parent ids are recorded.
SimplicialMesh uniform_refine(const SimplicialMesh& mesh);

/// Bisects exactly the marked intervals (d = 1).  Unmarked elements keep
/// their geometry; parent ids identify the correspondence.
SimplicialMesh local_refine_1d(const SimplicialMesh& mesh, const std::vector<int>& marked);

/// Uniform partition of (0,1) into n intervals.
SimplicialMesh interval_mesh(int n);
/// Partition of (0,1) at the given interior break points.
SimplicialMesh interval_mesh(const std::vector<double>& breaks);
/// n x n grid on the unit square, each cell split into two triangles.  The
/// diagonal directions alternate so that every boundary-vertex patch
/// contains an interior vertex (required by the boundary-corrected weights).
SimplicialMesh square_mesh(int n);

SimplicialMesh read_mesh_json(const std::string& path);
void write_mesh_json(const SimplicialMesh& mesh, const std::string& path);

}  // namespace szinterp
