#include "szinterp/altops.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "szinterp/parallel.hpp"

namespace szinterp {

namespace {

int effective_order(const LagrangeSpace& space, int quad_order) {
  return quad_order > 0 ? quad_order : 6 * space.degree() + 2;
}

}  // namespace

L2Projection::L2Projection(std::shared_ptr<const LagrangeSpace> space)
    : space_(std::move(space)) {
  const LagrangeSpace& sp = *space_;
  const SimplicialMesh& mesh = sp.mesh();
  const int d = mesh.dim();
  const int k = sp.degree();
  std::vector<int> compact(static_cast<std::size_t>(sp.num_nodes()), -1);
  for (std::size_t a = 0; a < sp.interior_nodes().size(); ++a)
    compact[static_cast<std::size_t>(sp.interior_nodes()[a])] = static_cast<int>(a);

  const Eigen::MatrixXd& local_mass = ref_mass_matrix(d, k, k);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const double jac = mesh.measure(t) / ref_volume(d);
    const auto& l2g = sp.local_to_global(t);
    for (std::size_t a = 0; a < l2g.size(); ++a) {
      const int ia = compact[static_cast<std::size_t>(l2g[a])];
      if (ia < 0) continue;
      for (std::size_t b = 0; b < l2g.size(); ++b) {
        const int ib = compact[static_cast<std::size_t>(l2g[b])];
        if (ib < 0) continue;
        triplets.emplace_back(ia, ib,
                              jac * local_mass(static_cast<Eigen::Index>(a),
                                               static_cast<Eigen::Index>(b)));
      }
    }
  }
  const int n = static_cast<int>(sp.interior_nodes().size());
  Eigen::SparseMatrix<double> mass(n, n);
  mass.setFromTriplets(triplets.begin(), triplets.end());
  solver_.compute(mass);
  if (solver_.info() != Eigen::Success)
    throw std::runtime_error("L2Projection: mass matrix factorization failed");
}

FEFunction L2Projection::apply(const DualFunctional& xi, int quad_order) const {
  const LagrangeSpace& sp = *space_;
  check_atoms(xi, sp.mesh());
  const int order = effective_order(sp, quad_order);
  const auto& interior = sp.interior_nodes();
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior.size()));
  parallel_for(static_cast<std::ptrdiff_t>(interior.size()), [&](std::ptrdiff_t a) {
    rhs[static_cast<Eigen::Index>(a)] =
        pair_functional(xi, basis_patch(sp, interior[static_cast<std::size_t>(a)]), order);
  });
  const Eigen::VectorXd sol = solver_.solve(rhs);
  FEFunction out(space_);
  for (std::size_t a = 0; a < interior.size(); ++a)
    out.coeffs()[interior[a]] = sol[static_cast<Eigen::Index>(a)];
  return out;
}

namespace {

// Local Lagrange nodes of degree m on the patch, as sorted
// (global vertex, weight) keys; weight-0 entries dropped.
using PatchNodeKey = std::vector<std::pair<int, int>>;

PatchNodeKey patch_node_key(const std::vector<int>& simplex, const MultiIndex& alpha) {
  PatchNodeKey key;
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] > 0) key.emplace_back(simplex[j], alpha[j]);
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

ClementOperator::ClementOperator(std::shared_ptr<const LagrangeSpace> space)
    : space_(std::move(space)) {
  const LagrangeSpace& sp = *space_;
  const SimplicialMesh& mesh = sp.mesh();
  const int d = mesh.dim();
  const int k = sp.degree();
  const int m = k - 1;
  const std::set<std::vector<int>> boundary(mesh.boundary_facets().begin(),
                                            mesh.boundary_facets().end());

  vertex_data_.resize(static_cast<std::size_t>(mesh.num_vertices()));
  parallel_for(mesh.num_vertices(), [&](std::ptrdiff_t jv) {
    const int j = static_cast<int>(jv);
    VertexData& data = vertex_data_[static_cast<std::size_t>(j)];
    const auto& patch = mesh.vertex_patch(j);

    // A node is constrained iff its carriers lie in a boundary facet that
    // contains j (there phi_j does not vanish, so v must).
    auto constrained = [&](const PatchNodeKey& key) {
      std::vector<int> carriers;
      for (const auto& [v, w] : key) carriers.push_back(v);
      for (const auto& facet : boundary) {
        if (!std::binary_search(facet.begin(), facet.end(), j)) continue;
        if (std::includes(facet.begin(), facet.end(), carriers.begin(), carriers.end()))
          return true;
      }
      return false;
    };

    if (m == 0) {
      // Piecewise constants with continuity: one constant on the patch,
      // killed whenever a boundary facet through j exists.
      bool killed = false;
      for (const auto& facet : boundary)
        if (std::binary_search(facet.begin(), facet.end(), j)) killed = true;
      if (!killed) {
        PiecewisePoly one;
        one.mesh = &mesh;
        for (int t : patch) {
          one.elements.push_back(t);
          one.blocks.push_back(bpoly_constant(d, 0, 1.0));
        }
        data.basis.push_back(std::move(one));
      }
    } else {
      std::map<PatchNodeKey, std::vector<std::pair<int, int>>> nodes;  // key -> (t, local)
      const auto& idx = multi_indices(d, m);
      for (int t : patch) {
        const auto& s = mesh.simplices()[static_cast<std::size_t>(t)];
        for (std::size_t a = 0; a < idx.size(); ++a)
          nodes[patch_node_key(s, idx[a])].emplace_back(t, static_cast<int>(a));
      }
      for (const auto& [key, occurrences] : nodes) {
        if (constrained(key)) continue;
        PiecewisePoly fn;
        fn.mesh = &mesh;
        std::map<int, BPoly> blocks;
        for (const auto& [t, local] : occurrences) {
          auto [it, inserted] = blocks.try_emplace(t, BPoly(d, m));
          it->second.coeffs()[local] = 1.0;
        }
        for (auto& [t, block] : blocks) {
          fn.elements.push_back(t);
          fn.blocks.push_back(std::move(block));
        }
        data.basis.push_back(std::move(fn));
      }
    }

    // phi_j * u_a and the weighted Gram matrix.
    const int n = static_cast<int>(data.basis.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
      PiecewisePoly weighted;
      weighted.mesh = &mesh;
      for (std::size_t e = 0; e < data.basis[static_cast<std::size_t>(a)].elements.size(); ++e) {
        const int t = data.basis[static_cast<std::size_t>(a)].elements[e];
        const auto& s = mesh.simplices()[static_cast<std::size_t>(t)];
        const int local_vertex =
            static_cast<int>(std::find(s.begin(), s.end(), j) - s.begin());
        weighted.elements.push_back(t);
        weighted.blocks.push_back(bpoly_product(
            bpoly_unit(d, 1, local_vertex), data.basis[static_cast<std::size_t>(a)].blocks[e]));
      }
      data.weighted.push_back(std::move(weighted));
    }
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        double value = 0.0;
        for (std::size_t e = 0; e < data.weighted[static_cast<std::size_t>(a)].elements.size();
             ++e) {
          const int t = data.weighted[static_cast<std::size_t>(a)].elements[e];
          const int eb = data.basis[static_cast<std::size_t>(b)].find_element(t);
          if (eb < 0) continue;
          value += mesh.measure(t) / ref_volume(d) *
                   pair_ref(data.weighted[static_cast<std::size_t>(a)].blocks[e],
                            data.basis[static_cast<std::size_t>(b)].blocks[static_cast<std::size_t>(eb)]);
        }
        gram(a, b) = value;
        gram(b, a) = value;
      }
    if (n > 0) data.gram = Eigen::LDLT<Eigen::MatrixXd>(gram);
  });
}

int ClementOperator::local_dimension(int vertex) const {
  return static_cast<int>(vertex_data_[static_cast<std::size_t>(vertex)].basis.size());
}

FEFunction ClementOperator::apply(const DualFunctional& xi, int quad_order) const {
  const LagrangeSpace& sp = *space_;
  const SimplicialMesh& mesh = sp.mesh();
  check_atoms(xi, mesh);
  const int order = effective_order(sp, quad_order);

  // phi_j C_j xi is a continuous degree-k function on omega_j; collect its
  // global Bernstein coefficients per vertex, then sum over vertices.
  std::vector<std::map<int, double>> contribution(
      static_cast<std::size_t>(mesh.num_vertices()));
  parallel_for(mesh.num_vertices(), [&](std::ptrdiff_t jv) {
    const VertexData& data = vertex_data_[static_cast<std::size_t>(jv)];
    const int n = static_cast<int>(data.basis.size());
    if (n == 0) return;
    Eigen::VectorXd rhs(n);
    for (int a = 0; a < n; ++a)
      rhs[a] = pair_functional(xi, data.weighted[static_cast<std::size_t>(a)], order);
    const Eigen::VectorXd y = data.gram.solve(rhs);

    std::map<int, Eigen::VectorXd> element_coeffs;
    for (int a = 0; a < n; ++a)
      for (std::size_t e = 0; e < data.weighted[static_cast<std::size_t>(a)].elements.size();
           ++e) {
        const int t = data.weighted[static_cast<std::size_t>(a)].elements[e];
        auto [it, inserted] = element_coeffs.try_emplace(
            t, Eigen::VectorXd::Zero(
                   data.weighted[static_cast<std::size_t>(a)].blocks[e].coeffs().size()));
        it->second += y[a] * data.weighted[static_cast<std::size_t>(a)].blocks[e].coeffs();
      }
    auto& target = contribution[static_cast<std::size_t>(jv)];
    for (const auto& [t, coeffs] : element_coeffs) {
      const auto& l2g = sp.local_to_global(t);
      for (std::size_t a = 0; a < l2g.size(); ++a)
        target[l2g[a]] = coeffs[static_cast<Eigen::Index>(a)];
    }
  });

  FEFunction out(space_);
  for (const auto& per_vertex : contribution)
    for (const auto& [node, value] : per_vertex) out.coeffs()[node] += value;
  return out;
}

}  // namespace szinterp
