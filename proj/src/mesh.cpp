#include "szinterp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace szinterp {

namespace {

double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int c = 0; c < dim; ++c) s += (a[static_cast<std::size_t>(c)] - b[static_cast<std::size_t>(c)]) *
                                     (a[static_cast<std::size_t>(c)] - b[static_cast<std::size_t>(c)]);
  return std::sqrt(s);
}

double signed_measure(int dim, const std::vector<Point>& v, const std::vector<int>& s) {
  if (dim == 1)
    return v[static_cast<std::size_t>(s[1])][0] - v[static_cast<std::size_t>(s[0])][0];
  const Point& a = v[static_cast<std::size_t>(s[0])];
  const Point& b = v[static_cast<std::size_t>(s[1])];
  const Point& c = v[static_cast<std::size_t>(s[2])];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

}  // namespace

SimplicialMesh::SimplicialMesh(int dim, std::vector<Point> vertices,
                               std::vector<std::vector<int>> simplices)
    : dim_(dim), vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("mesh: dim must be 1 or 2");
  const int nv = num_vertices();
  std::set<std::vector<int>> seen;
  for (auto& s : simplices_) {
    if (static_cast<int>(s.size()) != dim_ + 1)
      throw std::invalid_argument("mesh: simplex with wrong vertex count");
    for (int v : s)
      if (v < 0 || v >= nv) throw std::invalid_argument("mesh: vertex id out of range");
    std::vector<int> key = s;
    std::sort(key.begin(), key.end());
    if (std::adjacent_find(key.begin(), key.end()) != key.end())
      throw std::invalid_argument("mesh: degenerate simplex (repeated vertex)");
    if (!seen.insert(key).second) throw std::invalid_argument("mesh: duplicate simplex");
    double m = signed_measure(dim_, vertices_, s);
    if (m < 0.0) {
      std::swap(s[static_cast<std::size_t>(dim_ - 1)], s[static_cast<std::size_t>(dim_)]);
      orientation_fixed_ = true;
      m = -m;
    }
    if (m <= 1e-14) throw std::invalid_argument("mesh: zero-measure simplex");
    measure_.push_back(m);
    double h = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b)
        h = std::max(h, distance(vertices_[static_cast<std::size_t>(s[a])],
                                 vertices_[static_cast<std::size_t>(s[b])], dim_));
    diameter_.push_back(h);
  }

  // Facets and boundary detection: a facet belongs to one simplex iff it is
  // a boundary facet; more than two adjacent simplices is non-conforming.
  std::map<std::vector<int>, int> facet_count;
  for (const auto& s : simplices_) {
    for (std::size_t drop = 0; drop < s.size(); ++drop) {
      std::vector<int> facet;
      for (std::size_t a = 0; a < s.size(); ++a)
        if (a != drop) facet.push_back(s[a]);
      std::sort(facet.begin(), facet.end());
      ++facet_count[facet];
    }
  }
  vertex_on_boundary_.assign(static_cast<std::size_t>(nv), 0);
  for (const auto& [facet, count] : facet_count) {
    if (count > 2) throw std::invalid_argument("mesh: facet shared by more than two simplices");
    if (count == 1) {
      boundary_facets_.push_back(facet);
      for (int v : facet) vertex_on_boundary_[static_cast<std::size_t>(v)] = 1;
    }
  }

  vertex_patch_.assign(static_cast<std::size_t>(nv), {});
  for (int t = 0; t < num_simplices(); ++t)
    for (int v : simplices_[static_cast<std::size_t>(t)])
      vertex_patch_[static_cast<std::size_t>(v)].push_back(t);

  simplex_nbhd_.assign(static_cast<std::size_t>(num_simplices()), {});
  for (int t = 0; t < num_simplices(); ++t) {
    std::set<int> nbhd;
    for (int v : simplices_[static_cast<std::size_t>(t)])
      nbhd.insert(vertex_patch_[static_cast<std::size_t>(v)].begin(),
                  vertex_patch_[static_cast<std::size_t>(v)].end());
    simplex_nbhd_[static_cast<std::size_t>(t)].assign(nbhd.begin(), nbhd.end());
  }

  vertex_patch2_.assign(static_cast<std::size_t>(nv), {});
  patch_diam_.assign(static_cast<std::size_t>(nv), 0.0);
  for (int v = 0; v < nv; ++v) {
    std::set<int> patch2;
    std::set<int> patch_vertices;
    for (int t : vertex_patch_[static_cast<std::size_t>(v)]) {
      patch2.insert(simplex_nbhd_[static_cast<std::size_t>(t)].begin(),
                    simplex_nbhd_[static_cast<std::size_t>(t)].end());
      for (int w : simplices_[static_cast<std::size_t>(t)]) patch_vertices.insert(w);
    }
    vertex_patch2_[static_cast<std::size_t>(v)].assign(patch2.begin(), patch2.end());
    for (int a : patch_vertices)
      for (int b : patch_vertices)
        patch_diam_[static_cast<std::size_t>(v)] =
            std::max(patch_diam_[static_cast<std::size_t>(v)],
                     distance(vertices_[static_cast<std::size_t>(a)],
                              vertices_[static_cast<std::size_t>(b)], dim_));
  }

  grad_lambda_.reserve(static_cast<std::size_t>(num_simplices()));
  bary_matrix_.reserve(static_cast<std::size_t>(num_simplices()));
  for (int t = 0; t < num_simplices(); ++t) {
    Eigen::MatrixXd a(dim_ + 1, dim_ + 1);
    for (int i = 0; i <= dim_; ++i) {
      a(i, 0) = 1.0;
      for (int c = 0; c < dim_; ++c)
        a(i, c + 1) = vertices_[static_cast<std::size_t>(
            simplices_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)])][static_cast<std::size_t>(c)];
    }
    Eigen::MatrixXd inv = a.inverse();
    bary_matrix_.push_back(inv);
    Eigen::MatrixXd grads(dim_ + 1, dim_);
    for (int j = 0; j <= dim_; ++j)
      for (int c = 0; c < dim_; ++c) grads(j, c) = inv(c + 1, j);
    grad_lambda_.push_back(std::move(grads));
  }

  shape_regularity_ = 0.0;
  for (int t = 0; t < num_simplices(); ++t)
    shape_regularity_ = std::max(
        shape_regularity_, std::pow(diameter_[static_cast<std::size_t>(t)], dim_) /
                               measure_[static_cast<std::size_t>(t)]);
}

double SimplicialMesh::max_diameter() const {
  return *std::max_element(diameter_.begin(), diameter_.end());
}

Eigen::VectorXd SimplicialMesh::barycentric(int t, const Point& x) const {
  Eigen::VectorXd rhs(dim_ + 1);
  rhs[0] = 1.0;
  for (int c = 0; c < dim_; ++c) rhs[c + 1] = x[static_cast<std::size_t>(c)];
  return bary_matrix_[static_cast<std::size_t>(t)].transpose() * rhs;
}

const Eigen::MatrixXd& SimplicialMesh::barycentric_gradients(int t) const {
  return grad_lambda_[static_cast<std::size_t>(t)];
}

Point SimplicialMesh::map_from_barycentric(int t, std::span<const double> lambda) const {
  Point x{0.0, 0.0};
  for (int j = 0; j <= dim_; ++j) {
    const Point& v = vertices_[static_cast<std::size_t>(
        simplices_[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)])];
    for (int c = 0; c < dim_; ++c)
      x[static_cast<std::size_t>(c)] += lambda[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(c)];
  }
  return x;
}

int SimplicialMesh::locate(const Point& x, double tol) const {
  for (int t = 0; t < num_simplices(); ++t) {
    const Eigen::VectorXd lambda = barycentric(t, x);
    if (lambda.minCoeff() >= -tol) return t;
  }
  return -1;
}

void SimplicialMesh::validate_geometry() const {
  // Hanging-node scan: a vertex contained in the closure of a simplex must
  // be one of its vertices.
  for (int v = 0; v < num_vertices(); ++v)
    for (int t = 0; t < num_simplices(); ++t) {
      const auto& s = simplices_[static_cast<std::size_t>(t)];
      if (std::find(s.begin(), s.end(), v) != s.end()) continue;
      const Eigen::VectorXd lambda = barycentric(t, vertices_[static_cast<std::size_t>(v)]);
      if (lambda.minCoeff() >= -1e-12) {
        std::ostringstream msg;
        msg << "mesh: vertex " << v << " hangs on simplex " << t;
        throw std::invalid_argument(msg.str());
      }
    }
}

SimplicialMesh build_mesh(int dim, std::vector<Point> vertices,
                          std::vector<std::vector<int>> simplices) {
  return SimplicialMesh(dim, std::move(vertices), std::move(simplices));
}

SimplicialMesh uniform_refine(const SimplicialMesh& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  std::vector<std::vector<int>> simplices;
  std::vector<int> parent;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, -1);
    if (inserted) {
      Point m{0.0, 0.0};
      for (int c = 0; c < mesh.dim(); ++c)
        m[static_cast<std::size_t>(c)] =
            0.5 * (mesh.vertices()[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] +
                   mesh.vertices()[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)]);
      it->second = static_cast<int>(vertices.size());
      vertices.push_back(m);
    }
    return it->second;
  };

  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& s = mesh.simplices()[static_cast<std::size_t>(t)];
    if (mesh.dim() == 1) {
      const int m = mid(s[0], s[1]);
      simplices.push_back({s[0], m});
      simplices.push_back({m, s[1]});
      parent.insert(parent.end(), {t, t});
    } else {
      const int m01 = mid(s[0], s[1]);
      const int m12 = mid(s[1], s[2]);
      const int m02 = mid(s[0], s[2]);
      simplices.push_back({s[0], m01, m02});
      simplices.push_back({m01, s[1], m12});
      simplices.push_back({m02, m12, s[2]});
      simplices.push_back({m01, m12, m02});
      parent.insert(parent.end(), {t, t, t, t});
    }
  }
  SimplicialMesh fine(mesh.dim(), std::move(vertices), std::move(simplices));
  fine.parent_ = std::move(parent);
  return fine;
}

SimplicialMesh local_refine_1d(const SimplicialMesh& mesh, const std::vector<int>& marked) {
  if (mesh.dim() != 1) throw std::invalid_argument("local_refine_1d: requires d = 1");
  std::set<int> mark(marked.begin(), marked.end());
  std::vector<Point> vertices = mesh.vertices();
  std::vector<std::vector<int>> simplices;
  std::vector<int> parent;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& s = mesh.simplices()[static_cast<std::size_t>(t)];
    if (mark.count(t)) {
      Point m{0.5 * (mesh.vertices()[static_cast<std::size_t>(s[0])][0] +
                     mesh.vertices()[static_cast<std::size_t>(s[1])][0]),
              0.0};
      const int mv = static_cast<int>(vertices.size());
      vertices.push_back(m);
      simplices.push_back({s[0], mv});
      simplices.push_back({mv, s[1]});
      parent.insert(parent.end(), {t, t});
    } else {
      simplices.push_back(s);
      parent.push_back(t);
    }
  }
  SimplicialMesh fine(1, std::move(vertices), std::move(simplices));
  fine.parent_ = std::move(parent);
  return fine;
}

SimplicialMesh interval_mesh(int n) {
  std::vector<double> breaks;
  for (int i = 1; i < n; ++i) breaks.push_back(static_cast<double>(i) / n);
  return interval_mesh(breaks);
}

SimplicialMesh interval_mesh(const std::vector<double>& breaks) {
  double previous = 0.0;
  for (double b : breaks) {
    if (b <= previous || b >= 1.0)
      throw std::invalid_argument("interval_mesh: breaks must increase strictly in (0,1)");
    previous = b;
  }
  std::vector<Point> vertices{{0.0, 0.0}};
  for (double b : breaks) vertices.push_back({b, 0.0});
  vertices.push_back({1.0, 0.0});
  std::vector<std::vector<int>> simplices;
  for (int i = 0; i + 1 < static_cast<int>(vertices.size()); ++i)
    simplices.push_back({i, i + 1});
  return SimplicialMesh(1, std::move(vertices), std::move(simplices));
}

SimplicialMesh square_mesh(int n) {
  if (n < 1) throw std::invalid_argument("square_mesh: need n >= 1");
  std::vector<Point> vertices;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> simplices;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), e = id(i, j + 1);
      // Diagonals emanate from the domain corners so that every
      // boundary-vertex patch contains an interior vertex.
      bool diag_ac = (i + j) % 2 == 0;
      if ((i == 0 && j == 0) || (i == n - 1 && j == n - 1)) diag_ac = true;
      if ((i == n - 1 && j == 0) || (i == 0 && j == n - 1)) diag_ac = false;
      if (diag_ac) {
        simplices.push_back({a, b, c});
        simplices.push_back({a, c, e});
      } else {
        simplices.push_back({a, b, e});
        simplices.push_back({b, c, e});
      }
    }
  return SimplicialMesh(2, std::move(vertices), std::move(simplices));
}

SimplicialMesh read_mesh_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file " + path);
  nlohmann::json j;
  in >> j;
  const int dim = j.at("d").get<int>();
  std::vector<Point> vertices;
  for (const auto& v : j.at("vertices")) {
    Point p{0.0, 0.0};
    for (int c = 0; c < dim; ++c) p[static_cast<std::size_t>(c)] = v.at(c).get<double>();
    vertices.push_back(p);
  }
  std::vector<std::vector<int>> simplices;
  for (const auto& s : j.at("simplices")) simplices.push_back(s.get<std::vector<int>>());
  SimplicialMesh mesh(dim, std::move(vertices), std::move(simplices));
  mesh.validate_geometry();
  return mesh;
}

void write_mesh_json(const SimplicialMesh& mesh, const std::string& path) {
  nlohmann::json j;
  j["d"] = mesh.dim();
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices()) {
    nlohmann::json coords = nlohmann::json::array();
    for (int c = 0; c < mesh.dim(); ++c) coords.push_back(v[static_cast<std::size_t>(c)]);
    verts.push_back(coords);
  }
  j["simplices"] = mesh.simplices();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path);
  out << j.dump(2) << "\n";
}

}  // namespace szinterp
