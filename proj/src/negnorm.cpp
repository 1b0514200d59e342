#include "szinterp/negnorm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "szinterp/parallel.hpp"
#include "szinterp/quadrature.hpp"

namespace szinterp {

Eigen::MatrixXd element_stiffness(const SimplicialMesh& mesh, int t, int degree) {
  const int d = mesh.dim();
  const auto& idx = multi_indices(d, degree);
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
  if (degree < 1) return local;
  const Eigen::MatrixXd& mass = ref_mass_matrix(d, degree - 1, degree - 1);
  const Eigen::MatrixXd& gl = mesh.barycentric_gradients(t);
  const double jac = mesh.measure(t) / ref_volume(d);
  const double m2 = static_cast<double>(degree) * degree;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double sum = 0.0;
      for (int ca = 0; ca <= d; ++ca) {
        if (idx[static_cast<std::size_t>(a)][static_cast<std::size_t>(ca)] == 0) continue;
        MultiIndex da = idx[static_cast<std::size_t>(a)];
        --da[static_cast<std::size_t>(ca)];
        const int pa = multi_index_position(da);
        for (int cb = 0; cb <= d; ++cb) {
          if (idx[static_cast<std::size_t>(b)][static_cast<std::size_t>(cb)] == 0) continue;
          const double geo = gl.row(ca).dot(gl.row(cb));
          if (geo == 0.0) continue;
          MultiIndex db = idx[static_cast<std::size_t>(b)];
          --db[static_cast<std::size_t>(cb)];
          sum += geo * mass(pa, multi_index_position(db));
        }
      }
      local(a, b) = jac * m2 * sum;
    }
  return local;
}

namespace {

struct Submesh {
  std::shared_ptr<const SimplicialMesh> mesh;
  std::vector<int> base_element;  // submesh element -> base element
};

Submesh extract(const std::shared_ptr<const SimplicialMesh>& base,
                const std::vector<int>& region) {
  if (region.empty()) throw std::invalid_argument("negnorm: empty patch");
  std::map<int, int> vertex_map;
  std::vector<Point> vertices;
  std::vector<std::vector<int>> simplices;
  for (int t : region) {
    std::vector<int> remapped;
    for (int v : base->simplices()[static_cast<std::size_t>(t)]) {
      auto [it, inserted] = vertex_map.try_emplace(v, static_cast<int>(vertices.size()));
      if (inserted) vertices.push_back(base->vertices()[static_cast<std::size_t>(v)]);
      remapped.push_back(it->second);
    }
    simplices.push_back(std::move(remapped));
  }
  Submesh out;
  out.mesh = std::make_shared<const SimplicialMesh>(base->dim(), std::move(vertices),
                                                    std::move(simplices));
  out.base_element = region;
  return out;
}

}  // namespace

NegNormSolver::NegNormSolver(std::shared_ptr<const SimplicialMesh> base,
                             std::vector<int> region, int operator_degree,
                             NegNormOptions options)
    : base_(std::move(base)) {
  if (region.empty()) {
    region.resize(static_cast<std::size_t>(base_->num_simplices()));
    for (int t = 0; t < base_->num_simplices(); ++t) region[static_cast<std::size_t>(t)] = t;
  }
  std::sort(region.begin(), region.end());

  Submesh sub = extract(base_, region);
  ancestor_ = sub.base_element;
  std::shared_ptr<const SimplicialMesh> mesh = sub.mesh;
  for (int r = 0; r < options.extra_refines; ++r) {
    auto refined = std::make_shared<const SimplicialMesh>(uniform_refine(*mesh));
    std::vector<int> ancestor(static_cast<std::size_t>(refined->num_simplices()));
    for (int t = 0; t < refined->num_simplices(); ++t)
      ancestor[static_cast<std::size_t>(t)] =
          ancestor_[static_cast<std::size_t>(refined->parents()[static_cast<std::size_t>(t)])];
    ancestor_ = std::move(ancestor);
    mesh = std::move(refined);
  }
  fine_ = mesh;

  const int degree = options.eval_degree > 0 ? options.eval_degree : operator_degree + 1;
  quad_order_ = options.quad_order > 0 ? options.quad_order : 6 * operator_degree + 2;
  eval_space_ = make_lagrange_space(fine_, degree);

  const auto& interior = eval_space_->interior_nodes();
  compact_.assign(static_cast<std::size_t>(eval_space_->num_nodes()), -1);
  for (std::size_t a = 0; a < interior.size(); ++a)
    compact_[static_cast<std::size_t>(interior[a])] = static_cast<int>(a);
  if (interior.empty())
    throw std::invalid_argument("negnorm: evaluation space has no interior nodes");

  std::vector<Eigen::Triplet<double>> triplets;
  for (int t = 0; t < fine_->num_simplices(); ++t) {
    const Eigen::MatrixXd local = element_stiffness(*fine_, t, degree);
    const auto& l2g = eval_space_->local_to_global(t);
    for (std::size_t a = 0; a < l2g.size(); ++a) {
      const int ia = compact_[static_cast<std::size_t>(l2g[a])];
      if (ia < 0) continue;
      for (std::size_t b = 0; b < l2g.size(); ++b) {
        const int ib = compact_[static_cast<std::size_t>(l2g[b])];
        if (ib < 0) continue;
        triplets.emplace_back(ia, ib, local(static_cast<Eigen::Index>(a),
                                            static_cast<Eigen::Index>(b)));
      }
    }
  }
  Eigen::SparseMatrix<double> stiffness(static_cast<int>(interior.size()),
                                        static_cast<int>(interior.size()));
  stiffness.setFromTriplets(triplets.begin(), triplets.end());
  stiffness_.compute(stiffness);
  if (stiffness_.info() != Eigen::Success)
    throw std::runtime_error("negnorm: stiffness factorization failed");
}

double NegNormSolver::eval(const DualFunctional& xi) const {
  const LagrangeSpace& space = *eval_space_;
  const SimplicialMesh& fine = *fine_;
  const int d = fine.dim();
  const int degree = space.degree();
  const QuadratureRule& rule = simplex_quadrature(d, quad_order_);
  const Eigen::MatrixXd& values = bernstein_at_quadrature(d, degree, quad_order_);

  // Element-local load vectors, assembled in parallel and scattered serially.
  std::vector<Eigen::VectorXd> local(static_cast<std::size_t>(fine.num_simplices()));
  parallel_for(fine.num_simplices(), [&](std::ptrdiff_t tt) {
    const int t = static_cast<int>(tt);
    const auto& l2g = space.local_to_global(t);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l2g.size()));
    const double jac = fine.measure(t) / ref_volume(d);
    const int base_element = ancestor_[static_cast<std::size_t>(t)];

    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = fine.map_from_barycentric(t, rule.points[q]);
      double density = xi.density ? xi.density(x) : 0.0;
      for (const auto& [fe, coeff] : xi.fe_terms) {
        const SimplicialMesh* fem = &fe.space().mesh();
        if (fem == fine_.get()) {
          density += coeff * fe.eval_local(t, rule.points[q]);
        } else if (fem == base_.get()) {
          const Eigen::VectorXd lambda = base_->barycentric(base_element, x);
          density += coeff * fe.eval_local(base_element,
                                           {lambda.data(), static_cast<std::size_t>(lambda.size())});
        } else {
          density += coeff * fe.eval(x);
        }
      }
      if (density != 0.0)
        load += jac * rule.weights[q] * density * values.col(static_cast<Eigen::Index>(q));
      if (xi.flux) {
        const auto f = xi.flux(x);
        // grad b_a = sum_j d(b_a)/d(lambda_j) grad lambda_j
        const Eigen::MatrixXd& gl = fine.barycentric_gradients(t);
        const auto& idx = multi_indices(d, degree);
        const Eigen::MatrixXd& lower = bernstein_at_quadrature(d, degree - 1, quad_order_);
        for (std::size_t a = 0; a < l2g.size(); ++a) {
          double gx = 0.0, gy = 0.0;
          for (int j = 0; j <= d; ++j) {
            if (idx[a][static_cast<std::size_t>(j)] == 0) continue;
            MultiIndex low = idx[a];
            --low[static_cast<std::size_t>(j)];
            const double db = degree * lower(multi_index_position(low),
                                             static_cast<Eigen::Index>(q));
            gx += db * gl(j, 0);
            if (d > 1) gy += db * gl(j, 1);
          }
          load[static_cast<Eigen::Index>(a)] +=
              jac * rule.weights[q] * (f[0] * gx + f[1] * gy);
        }
      }
    }
    local[static_cast<std::size_t>(tt)] = std::move(load);
  });

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(
      space.interior_nodes().size()));
  for (int t = 0; t < fine.num_simplices(); ++t) {
    const auto& l2g = space.local_to_global(t);
    for (std::size_t a = 0; a < l2g.size(); ++a) {
      const int ia = compact_[static_cast<std::size_t>(l2g[a])];
      if (ia >= 0) rhs[ia] += local[static_cast<std::size_t>(t)][static_cast<Eigen::Index>(a)];
    }
  }

  for (const auto& [x, weight] : xi.atoms) {
    const int t = fine.locate(x);
    if (t < 0) continue;  // outside the patch: the restriction ignores it
    const Eigen::VectorXd lambda = fine.barycentric(t, x);
    const auto& idx = multi_indices(d, degree);
    const auto& l2g = space.local_to_global(t);
    for (std::size_t a = 0; a < l2g.size(); ++a) {
      const int ia = compact_[static_cast<std::size_t>(l2g[a])];
      if (ia < 0) continue;
      rhs[ia] += weight * bernstein_eval(idx[a], {lambda.data(),
                                                  static_cast<std::size_t>(lambda.size())});
    }
  }

  const Eigen::VectorXd w = stiffness_.solve(rhs);
  return std::sqrt(std::max(0.0, rhs.dot(w)));
}

NegNormSolver global_negnorm(std::shared_ptr<const SimplicialMesh> mesh, int operator_degree,
                             NegNormOptions options) {
  return NegNormSolver(std::move(mesh), {}, operator_degree, options);
}

NegNormSolver patch_negnorm(std::shared_ptr<const SimplicialMesh> mesh,
                            const std::vector<int>& patch, int operator_degree,
                            NegNormOptions options) {
  return NegNormSolver(std::move(mesh), patch, operator_degree, options);
}

double localized_sum(std::span<const double> values, double p) {
  double sum = 0.0;
  for (double v : values) sum += std::pow(std::abs(v), p);
  return std::pow(sum, 1.0 / p);
}

}  // namespace szinterp
