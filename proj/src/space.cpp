#include "szinterp/space.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <mutex>
#include <stdexcept>

#include "szinterp/parallel.hpp"
#include "szinterp/quadrature.hpp"

namespace szinterp {

namespace {

// A Lagrange node as sorted (vertex id, lattice weight) pairs with positive
// weights; identical across all simplices containing the node.
using NodeKey = std::vector<std::pair<int, int>>;

NodeKey node_key(const std::vector<int>& simplex, const MultiIndex& alpha) {
  NodeKey key;
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] > 0) key.emplace_back(simplex[j], alpha[j]);
  std::sort(key.begin(), key.end());
  return key;
}

// Inverse of the Bernstein collocation matrix on the degree-k lattice,
// cached per (d, k); used for nodal interpolation.
const Eigen::MatrixXd& lattice_inverse(int d, int k) {
  static std::map<std::pair<int, int>, Eigen::MatrixXd> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto [it, inserted] = cache.try_emplace({d, k});
  if (inserted) {
    const auto& idx = multi_indices(d, k);
    const int n = static_cast<int>(idx.size());
    Eigen::MatrixXd a(n, n);
    for (int r = 0; r < n; ++r) {
      std::vector<double> lambda(static_cast<std::size_t>(d + 1));
      for (int j = 0; j <= d; ++j)
        lambda[static_cast<std::size_t>(j)] =
            static_cast<double>(idx[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]) / k;
      for (int c = 0; c < n; ++c)
        a(r, c) = bernstein_eval(idx[static_cast<std::size_t>(c)], lambda);
    }
    it->second = a.inverse();
  }
  return it->second;
}

}  // namespace

LagrangeSpace::LagrangeSpace(std::shared_ptr<const SimplicialMesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree_ < 1) throw std::invalid_argument("LagrangeSpace: degree must be >= 1");
  const SimplicialMesh& m = *mesh_;
  const int d = m.dim();
  const auto& idx = multi_indices(d, degree_);

  std::map<NodeKey, int> ids;
  loc2glob_.assign(static_cast<std::size_t>(m.num_simplices()), {});
  for (int t = 0; t < m.num_simplices(); ++t) {
    const auto& s = m.simplices()[static_cast<std::size_t>(t)];
    for (const auto& alpha : idx) {
      const NodeKey key = node_key(s, alpha);
      auto [it, inserted] = ids.try_emplace(key, static_cast<int>(node_coords_.size()));
      if (inserted) {
        Point x{0.0, 0.0};
        for (int j = 0; j <= d; ++j) {
          const Point& v = m.vertices()[static_cast<std::size_t>(s[static_cast<std::size_t>(j)])];
          for (int c = 0; c < d; ++c)
            x[static_cast<std::size_t>(c)] +=
                static_cast<double>(alpha[static_cast<std::size_t>(j)]) / degree_ *
                v[static_cast<std::size_t>(c)];
        }
        node_coords_.push_back(x);
      }
      loc2glob_[static_cast<std::size_t>(t)].push_back(it->second);
    }
  }

  node_support_.assign(node_coords_.size(), {});
  for (int t = 0; t < m.num_simplices(); ++t)
    for (int node : loc2glob_[static_cast<std::size_t>(t)])
      node_support_[static_cast<std::size_t>(node)].push_back(t);
  for (auto& support : node_support_) {
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
  }
  support_measure_.assign(node_coords_.size(), 0.0);
  for (std::size_t i = 0; i < node_support_.size(); ++i)
    for (int t : node_support_[i]) support_measure_[i] += m.measure(t);

  // A node is on the boundary iff its supporting vertices all lie in one
  // boundary facet of a containing simplex.
  node_on_boundary_.assign(node_coords_.size(), 0);
  std::set<std::vector<int>> boundary(m.boundary_facets().begin(), m.boundary_facets().end());
  for (int t = 0; t < m.num_simplices(); ++t) {
    const auto& s = m.simplices()[static_cast<std::size_t>(t)];
    for (std::size_t a = 0; a < idx.size(); ++a) {
      std::vector<int> carriers;
      for (std::size_t j = 0; j < idx[a].size(); ++j)
        if (idx[a][j] > 0) carriers.push_back(s[j]);
      std::sort(carriers.begin(), carriers.end());
      if (static_cast<int>(carriers.size()) > m.dim()) continue;  // interior of T
      for (const auto& facet : boundary)
        if (std::includes(facet.begin(), facet.end(), carriers.begin(), carriers.end())) {
          node_on_boundary_[static_cast<std::size_t>(
              loc2glob_[static_cast<std::size_t>(t)][a])] = 1;
          break;
        }
    }
  }
  for (int i = 0; i < num_nodes(); ++i)
    if (!node_on_boundary_[static_cast<std::size_t>(i)]) interior_nodes_.push_back(i);
}

int LagrangeSpace::local_index(int t, int i) const {
  const auto& l2g = loc2glob_[static_cast<std::size_t>(t)];
  const auto it = std::find(l2g.begin(), l2g.end(), i);
  return it == l2g.end() ? -1 : static_cast<int>(it - l2g.begin());
}

std::shared_ptr<const LagrangeSpace> make_lagrange_space(
    std::shared_ptr<const SimplicialMesh> mesh, int degree) {
  return std::make_shared<const LagrangeSpace>(std::move(mesh), degree);
}

FEFunction::FEFunction(std::shared_ptr<const LagrangeSpace> space)
    : space_(std::move(space)),
      coeffs_(Eigen::VectorXd::Zero(space_->num_nodes())) {}

FEFunction::FEFunction(std::shared_ptr<const LagrangeSpace> space, Eigen::VectorXd coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != space_->num_nodes())
    throw std::invalid_argument("FEFunction: coefficient count mismatch");
}

BPoly FEFunction::local(int t) const {
  const auto& l2g = space_->local_to_global(t);
  BPoly p(space_->mesh().dim(), space_->degree());
  for (std::size_t a = 0; a < l2g.size(); ++a)
    p.coeffs()[static_cast<Eigen::Index>(a)] = coeffs_[l2g[a]];
  return p;
}

double FEFunction::eval_local(int t, std::span<const double> lambda) const {
  return local(t).eval(lambda);
}

std::array<double, 2> FEFunction::grad_local(int t, std::span<const double> lambda) const {
  const SimplicialMesh& m = space_->mesh();
  const BPoly p = local(t);
  const auto parts = bpoly_grad(p);
  const Eigen::MatrixXd& gl = m.barycentric_gradients(t);
  std::array<double, 2> g{0.0, 0.0};
  for (int j = 0; j <= m.dim(); ++j) {
    const double dj = parts[static_cast<std::size_t>(j)].eval(lambda);
    for (int c = 0; c < m.dim(); ++c) g[static_cast<std::size_t>(c)] += dj * gl(j, c);
  }
  return g;
}

double FEFunction::eval(const Point& x) const {
  const int t = space_->mesh().locate(x);
  if (t < 0) throw std::invalid_argument("FEFunction::eval: point outside mesh");
  const Eigen::VectorXd lambda = space_->mesh().barycentric(t, x);
  return eval_local(t, {lambda.data(), static_cast<std::size_t>(lambda.size())});
}

std::array<double, 2> FEFunction::grad(const Point& x) const {
  const int t = space_->mesh().locate(x);
  if (t < 0) throw std::invalid_argument("FEFunction::grad: point outside mesh");
  const Eigen::VectorXd lambda = space_->mesh().barycentric(t, x);
  return grad_local(t, {lambda.data(), static_cast<std::size_t>(lambda.size())});
}

FEFunction interpolate(std::shared_ptr<const LagrangeSpace> space, const ScalarFn& f) {
  const LagrangeSpace& sp = *space;
  Eigen::VectorXd values(sp.num_nodes());
  for (int i = 0; i < sp.num_nodes(); ++i) values[i] = f(sp.node_coord(i));
  const Eigen::MatrixXd& inv = lattice_inverse(sp.mesh().dim(), sp.degree());
  FEFunction out(space);
  for (int t = 0; t < sp.mesh().num_simplices(); ++t) {
    const auto& l2g = sp.local_to_global(t);
    Eigen::VectorXd local(static_cast<Eigen::Index>(l2g.size()));
    for (std::size_t a = 0; a < l2g.size(); ++a) local[static_cast<Eigen::Index>(a)] = values[l2g[a]];
    const Eigen::VectorXd bernstein = inv * local;
    for (std::size_t a = 0; a < l2g.size(); ++a)
      out.coeffs()[l2g[a]] = bernstein[static_cast<Eigen::Index>(a)];
  }
  return out;
}

namespace {

double element_h1_exact(const FEFunction& f, int t) {
  const SimplicialMesh& m = f.space().mesh();
  const int d = m.dim();
  const int k = f.space().degree();
  if (k < 1) return 0.0;
  const BPoly p = f.local(t);
  const auto parts = bpoly_grad(p);
  const Eigen::MatrixXd& gl = m.barycentric_gradients(t);
  const double jac = m.measure(t) / ref_volume(d);
  double sum = 0.0;
  for (int a = 0; a <= d; ++a)
    for (int b = 0; b <= d; ++b) {
      const double geo = gl.row(a).dot(gl.row(b));
      if (geo == 0.0) continue;
      sum += geo * pair_ref(parts[static_cast<std::size_t>(a)], parts[static_cast<std::size_t>(b)]);
    }
  return jac * sum;
}

}  // namespace

double fe_norm(const FEFunction& f, NormType which, int quad_order) {
  const SimplicialMesh& m = f.space().mesh();
  const int d = m.dim();
  const int deg = f.space().degree();
  const QuadratureRule& rule = simplex_quadrature(d, quad_order);
  const Eigen::MatrixXd& values = bernstein_at_quadrature(d, deg, quad_order);
  const auto& grads = bernstein_grad_at_quadrature(d, deg, quad_order);
  const double sum = parallel_sum(m.num_simplices(), [&](std::ptrdiff_t t) {
    const double jac = m.measure(static_cast<int>(t)) / ref_volume(d);
    const BPoly local = f.local(static_cast<int>(t));
    const Eigen::MatrixXd& gl = m.barycentric_gradients(static_cast<int>(t));
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      if (which == NormType::L2) {
        const double v = local.coeffs().dot(values.col(static_cast<Eigen::Index>(q)));
        acc += rule.weights[q] * v * v;
      } else {
        double gx = 0.0, gy = 0.0;
        for (int j = 0; j <= d; ++j) {
          const double dj = local.coeffs().dot(
              grads[static_cast<std::size_t>(j)].col(static_cast<Eigen::Index>(q)));
          gx += dj * gl(j, 0);
          if (d > 1) gy += dj * gl(j, 1);
        }
        acc += rule.weights[q] * (gx * gx + gy * gy);
      }
    }
    return jac * acc;
  });
  return std::sqrt(std::max(0.0, sum));
}

double fe_norm_exact(const FEFunction& f, NormType which) {
  const SimplicialMesh& m = f.space().mesh();
  const double sum = parallel_sum(m.num_simplices(), [&](std::ptrdiff_t t) {
    if (which == NormType::L2) {
      const double jac = m.measure(static_cast<int>(t)) / ref_volume(m.dim());
      const BPoly p = f.local(static_cast<int>(t));
      return jac * pair_ref(p, p);
    }
    return element_h1_exact(f, static_cast<int>(t));
  });
  return std::sqrt(std::max(0.0, sum));
}

double fe_dot_exact(const FEFunction& a, const FEFunction& b) {
  if (a.space().mesh_ptr() != b.space().mesh_ptr())
    throw std::invalid_argument("fe_dot_exact: functions on different meshes");
  const SimplicialMesh& m = a.space().mesh();
  return parallel_sum(m.num_simplices(), [&](std::ptrdiff_t t) {
    const double jac = m.measure(static_cast<int>(t)) / ref_volume(m.dim());
    return jac * pair_ref(a.local(static_cast<int>(t)), b.local(static_cast<int>(t)));
  });
}

ErrorNorms fe_error(const FEFunction& f, const ScalarFn& v, const VectorFn& grad_v,
                    int quad_order) {
  const SimplicialMesh& m = f.space().mesh();
  const int d = m.dim();
  const int deg = f.space().degree();
  const QuadratureRule& rule = simplex_quadrature(d, quad_order);
  const Eigen::MatrixXd& values = bernstein_at_quadrature(d, deg, quad_order);
  const auto& grads = bernstein_grad_at_quadrature(d, deg, quad_order);
  std::vector<double> l2_part(static_cast<std::size_t>(m.num_simplices()));
  std::vector<double> h1_part(static_cast<std::size_t>(m.num_simplices()));
  parallel_for(m.num_simplices(), [&](std::ptrdiff_t t) {
    const double jac = m.measure(static_cast<int>(t)) / ref_volume(d);
    const BPoly local = f.local(static_cast<int>(t));
    const Eigen::MatrixXd& gl = m.barycentric_gradients(static_cast<int>(t));
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = m.map_from_barycentric(static_cast<int>(t), rule.points[q]);
      const double dv =
          v(x) - local.coeffs().dot(values.col(static_cast<Eigen::Index>(q)));
      l2 += rule.weights[q] * dv * dv;
      if (grad_v) {
        const auto gv = grad_v(x);
        double fx = 0.0, fy = 0.0;
        for (int j = 0; j <= d; ++j) {
          const double dj = local.coeffs().dot(
              grads[static_cast<std::size_t>(j)].col(static_cast<Eigen::Index>(q)));
          fx += dj * gl(j, 0);
          if (d > 1) fy += dj * gl(j, 1);
        }
        const double gx = gv[0] - fx;
        const double gy = gv[1] - fy;
        h1 += rule.weights[q] * (gx * gx + gy * gy);
      }
    }
    l2_part[static_cast<std::size_t>(t)] = jac * l2;
    h1_part[static_cast<std::size_t>(t)] = jac * h1;
  });
  ErrorNorms out;
  for (double p : l2_part) out.l2 += p;
  for (double p : h1_part) out.h1semi += p;
  out.l2 = std::sqrt(std::max(0.0, out.l2));
  out.h1semi = std::sqrt(std::max(0.0, out.h1semi));
  return out;
}

double callable_norm(const SimplicialMesh& mesh, const ScalarFn& f, int quad_order) {
  const QuadratureRule& rule = simplex_quadrature(mesh.dim(), quad_order);
  const double sum = parallel_sum(mesh.num_simplices(), [&](std::ptrdiff_t t) {
    const double jac = mesh.measure(static_cast<int>(t)) / ref_volume(mesh.dim());
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = mesh.map_from_barycentric(static_cast<int>(t), rule.points[q]);
      const double v = f(x);
      acc += rule.weights[q] * v * v;
    }
    return jac * acc;
  });
  return std::sqrt(std::max(0.0, sum));
}

}  // namespace szinterp
