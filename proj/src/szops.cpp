#include "szinterp/szops.hpp"

#include <mutex>
#include <sstream>
#include <stdexcept>

#include "szinterp/parallel.hpp"

namespace szinterp {

GlobalDualBasis::GlobalDualBasis(std::shared_ptr<const LagrangeSpace> space,
                                 const DualBasisTable& table)
    : space_(std::move(space)), table_(&table) {
  if (table.d != space_->mesh().dim() || table.k != space_->degree())
    throw std::invalid_argument("assemble_psi: table does not match (d, k)");
  const double ref = ref_volume(space_->mesh().dim());
  scale_.resize(static_cast<std::size_t>(space_->num_nodes()));
  for (int i = 0; i < space_->num_nodes(); ++i)
    scale_[static_cast<std::size_t>(i)] = ref / space_->support_measure(i);
}

BPoly GlobalDualBasis::psi_block(int node, int t) const {
  const int local = space_->local_index(t, node);
  if (local < 0) throw std::logic_error("psi_block: node not on simplex");
  BPoly block = table_->p[static_cast<std::size_t>(local)];
  block.coeffs() *= scale(node);
  return block;
}

PiecewisePoly GlobalDualBasis::psi(int node) const {
  PiecewisePoly out;
  out.mesh = &space_->mesh();
  for (int t : space_->node_support(node)) {
    out.elements.push_back(t);
    out.blocks.push_back(psi_block(node, t));
  }
  return out;
}

std::shared_ptr<const LagrangeSpace> GlobalDualBasis::space3k() const {
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  if (!space3k_)
    space3k_ = make_lagrange_space(space_->mesh_ptr(), 3 * space_->degree());
  return space3k_;
}

GlobalDualBasis assemble_psi(std::shared_ptr<const LagrangeSpace> space,
                             const DualBasisTable& table) {
  return GlobalDualBasis(std::move(space), table);
}

namespace {

// eta = sum of interior vertex hats, restricted to simplex t (degree 1).
BPoly eta_block(const SimplicialMesh& mesh, int t) {
  const int d = mesh.dim();
  BPoly eta(d, 1);
  const auto& s = mesh.simplices()[static_cast<std::size_t>(t)];
  // multi_indices(d, 1) lists e_0, e_1, ... in vertex order
  for (int j = 0; j <= d; ++j)
    eta.coeffs()[j] = mesh.vertex_on_boundary(s[static_cast<std::size_t>(j)]) ? 0.0 : 1.0;
  return eta;
}

PiecewisePoly correct_boundary_node(const GlobalDualBasis& basis, int i) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int k = space.degree();

  std::vector<int> local_nodes;  // N cap omega_i
  for (int t : space.node_support(i))
    for (int node : space.local_to_global(t)) local_nodes.push_back(node);
  std::sort(local_nodes.begin(), local_nodes.end());
  local_nodes.erase(std::unique(local_nodes.begin(), local_nodes.end()), local_nodes.end());
  const int n = static_cast<int>(local_nodes.size());

  // Weighted Gram <b_i eta b_l, b_m> and the right-hand side <psi_i, b_m>.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int t : space.node_support(i)) {
    const double jac = mesh.measure(t) / ref_volume(d);
    const BPoly weight = bpoly_product(bpoly_unit(d, k, space.local_index(t, i)),
                                       eta_block(mesh, t));
    const BPoly psi_t = basis.psi_block(i, t);
    for (int a = 0; a < n; ++a) {
      const int la = space.local_index(t, local_nodes[static_cast<std::size_t>(a)]);
      if (la < 0) continue;
      const BPoly wa = bpoly_product(weight, bpoly_unit(d, k, la));  // degree 2k+1
      rhs[a] += jac * pair_ref(psi_t, bpoly_unit(d, k, la));
      for (int b = 0; b < n; ++b) {
        const int lb = space.local_index(t, local_nodes[static_cast<std::size_t>(b)]);
        if (lb < 0) continue;
        gram(a, b) += jac * pair_ref(wa, bpoly_unit(d, k, lb));
      }
    }
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
  const Eigen::VectorXd rho = cod.solve(rhs);
  const double residual = (gram * rho - rhs).norm();
  if (residual > 1e-8 * std::max(1.0, rhs.norm())) {
    std::ostringstream msg;
    msg << "boundary_correction: degenerate patch at node " << i
        << " (weighted system inconsistent, residual " << residual << ")";
    throw std::runtime_error(msg.str());
  }

  PiecewisePoly out;
  out.mesh = &mesh;
  for (int t : space.node_support(i)) {
    BPoly rho_t(d, k);
    for (int a = 0; a < n; ++a) {
      const int la = space.local_index(t, local_nodes[static_cast<std::size_t>(a)]);
      if (la >= 0) rho_t.coeffs()[la] = rho[a];
    }
    const BPoly weight = bpoly_product(bpoly_unit(d, k, space.local_index(t, i)),
                                       eta_block(mesh, t));
    // degree 2k+1, raised to 3k so all corrected weights share one codomain
    out.elements.push_back(t);
    out.blocks.push_back(degree_raise(bpoly_product(weight, rho_t), 3 * k));
  }
  return out;
}

}  // namespace

CorrectedDualBasis::CorrectedDualBasis(GlobalDualBasis base,
                                       std::unordered_map<int, PiecewisePoly> corrected)
    : base_(std::move(base)), corrected_(std::move(corrected)) {}

PiecewisePoly CorrectedDualBasis::psi_tilde(int node) const {
  const auto it = corrected_.find(node);
  return it != corrected_.end() ? it->second : base_.psi(node);
}

CorrectedDualBasis boundary_correction(const GlobalDualBasis& basis) {
  const LagrangeSpace& space = basis.space();
  std::vector<int> boundary_nodes;
  for (int i = 0; i < space.num_nodes(); ++i)
    if (space.node_on_boundary(i)) boundary_nodes.push_back(i);

  std::vector<PiecewisePoly> results(boundary_nodes.size());
  std::vector<std::string> failures(boundary_nodes.size());
  parallel_for(static_cast<std::ptrdiff_t>(boundary_nodes.size()), [&](std::ptrdiff_t b) {
    try {
      results[static_cast<std::size_t>(b)] =
          correct_boundary_node(basis, boundary_nodes[static_cast<std::size_t>(b)]);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(b)] = e.what();
    }
  });
  for (const std::string& failure : failures)
    if (!failure.empty()) throw std::runtime_error(failure);

  std::unordered_map<int, PiecewisePoly> corrected;
  for (std::size_t b = 0; b < boundary_nodes.size(); ++b)
    corrected.emplace(boundary_nodes[b], std::move(results[b]));
  return CorrectedDualBasis(basis, std::move(corrected));
}

namespace {

int effective_order(const GlobalDualBasis& basis, int quad_order) {
  return quad_order > 0 ? quad_order : basis.quad_order();
}

// Coefficients <xi, w_i> over the listed nodes, in parallel.
Eigen::VectorXd pair_against(const DualFunctional& xi, const std::vector<int>& nodes,
                             const std::function<PiecewisePoly(int)>& weight, int order,
                             int total_nodes) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(total_nodes);
  parallel_for(static_cast<std::ptrdiff_t>(nodes.size()), [&](std::ptrdiff_t a) {
    const int i = nodes[static_cast<std::size_t>(a)];
    coeffs[i] = pair_functional(xi, weight(i), order);
  });
  return coeffs;
}

std::vector<int> all_nodes(const LagrangeSpace& space) {
  std::vector<int> nodes(static_cast<std::size_t>(space.num_nodes()));
  for (int i = 0; i < space.num_nodes(); ++i) nodes[static_cast<std::size_t>(i)] = i;
  return nodes;
}

// Synthesizes sum_i c_i w_i in the degree-3k space.  Elements are assembled
// independently; shared-face coefficients agree because every w_i is
// continuous, so plain per-element assignment is consistent.
FEFunction synthesize_3k(const GlobalDualBasis& basis, const Eigen::VectorXd& coeffs,
                         const std::function<const PiecewisePoly*(int)>& weight_blocks,
                         const std::vector<int>& nodes) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  auto space3k = basis.space3k();
  const int block_size = static_cast<int>(multi_indices(mesh.dim(), 3 * space.degree()).size());

  std::vector<std::vector<int>> nodes_on(static_cast<std::size_t>(mesh.num_simplices()));
  for (int i : nodes)
    if (coeffs[i] != 0.0)
      for (int t : space.node_support(i)) nodes_on[static_cast<std::size_t>(t)].push_back(i);

  std::vector<Eigen::VectorXd> local(static_cast<std::size_t>(mesh.num_simplices()));
  parallel_for(mesh.num_simplices(), [&](std::ptrdiff_t t) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(block_size);
    for (int i : nodes_on[static_cast<std::size_t>(t)]) {
      const PiecewisePoly* w = weight_blocks(i);
      const int b = w->find_element(static_cast<int>(t));
      if (b >= 0) acc += coeffs[i] * w->blocks[static_cast<std::size_t>(b)].coeffs();
    }
    local[static_cast<std::size_t>(t)] = std::move(acc);
  });

  FEFunction out(space3k);
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& l2g = space3k->local_to_global(t);
    for (std::size_t a = 0; a < l2g.size(); ++a)
      out.coeffs()[l2g[a]] = local[static_cast<std::size_t>(t)][static_cast<Eigen::Index>(a)];
  }
  return out;
}

}  // namespace

FEFunction apply_pi0(const GlobalDualBasis& basis, const DualFunctional& xi, int quad_order) {
  check_atoms(xi, basis.space().mesh());
  const int order = effective_order(basis, quad_order);
  const Eigen::VectorXd coeffs =
      pair_against(xi, basis.space().interior_nodes(),
                   [&](int i) { return basis.psi(i); }, order, basis.space().num_nodes());
  return FEFunction(basis.space_ptr(), coeffs);
}

FEFunction apply_p_raw(const GlobalDualBasis& basis, const DualFunctional& xi, int quad_order) {
  check_atoms(xi, basis.space().mesh());
  const int order = effective_order(basis, quad_order);
  const Eigen::VectorXd coeffs =
      pair_against(xi, all_nodes(basis.space()),
                   [&](int i) { return basis.psi(i); }, order, basis.space().num_nodes());
  return FEFunction(basis.space_ptr(), coeffs);
}

FEFunction apply_pi0_star(const GlobalDualBasis& basis, const DualFunctional& xi,
                          int quad_order) {
  check_atoms(xi, basis.space().mesh());
  const int order = effective_order(basis, quad_order);
  const LagrangeSpace& space = basis.space();
  const Eigen::VectorXd coeffs =
      pair_against(xi, space.interior_nodes(),
                   [&](int i) { return basis_patch(space, i); }, order, space.num_nodes());
  std::vector<PiecewisePoly> cache(static_cast<std::size_t>(space.num_nodes()));
  for (int i : space.interior_nodes())
    if (coeffs[i] != 0.0) cache[static_cast<std::size_t>(i)] = basis.psi(i);
  return synthesize_3k(basis, coeffs,
                       [&](int i) { return &cache[static_cast<std::size_t>(i)]; },
                       space.interior_nodes());
}

FEFunction apply_pi(const CorrectedDualBasis& basis, const DualFunctional& xi, int quad_order) {
  check_atoms(xi, basis.space().mesh());
  const int order = effective_order(basis.base(), quad_order);
  const Eigen::VectorXd coeffs =
      pair_against(xi, all_nodes(basis.space()),
                   [&](int i) { return basis.psi_tilde(i); }, order,
                   basis.space().num_nodes());
  return FEFunction(basis.base().space_ptr(), coeffs);
}

FEFunction apply_pi_star(const CorrectedDualBasis& basis, const DualFunctional& xi,
                         int quad_order) {
  if (!xi.density_only())
    throw std::invalid_argument("apply_pi_star: defined for densities only");
  const int order = effective_order(basis.base(), quad_order);
  const LagrangeSpace& space = basis.space();
  const Eigen::VectorXd coeffs =
      pair_against(xi, all_nodes(space),
                   [&](int i) { return basis_patch(space, i); }, order, space.num_nodes());
  std::vector<PiecewisePoly> cache(static_cast<std::size_t>(space.num_nodes()));
  for (int i = 0; i < space.num_nodes(); ++i)
    if (coeffs[i] != 0.0) cache[static_cast<std::size_t>(i)] = basis.psi_tilde(i);
  return synthesize_3k(basis.base(), coeffs,
                       [&](int i) { return &cache[static_cast<std::size_t>(i)]; },
                       all_nodes(space));
}

double basis_integral(const LagrangeSpace& space, int node) {
  const double ck = static_cast<double>(factorial(space.degree())) /
                    static_cast<double>(factorial(space.mesh().dim() + space.degree()));
  double total = 0.0;
  for (int t : space.node_support(node))
    total += space.mesh().measure(t) / ref_volume(space.mesh().dim()) * ck;
  return total;
}

namespace {

Eigen::MatrixXd gram_from_patches(const SimplicialMesh& mesh,
                                  const std::vector<PiecewisePoly>& weights) {
  const int n = static_cast<int>(weights.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double value = 0.0;
      for (std::size_t ea = 0; ea < weights[static_cast<std::size_t>(a)].elements.size(); ++ea) {
        const int t = weights[static_cast<std::size_t>(a)].elements[ea];
        const int eb = weights[static_cast<std::size_t>(b)].find_element(t);
        if (eb < 0) continue;
        value += mesh.measure(t) / ref_volume(mesh.dim()) *
                 pair_ref(weights[static_cast<std::size_t>(a)].blocks[ea],
                          weights[static_cast<std::size_t>(b)].blocks[static_cast<std::size_t>(eb)]);
      }
      gram(a, b) = value;
      gram(b, a) = value;
    }
  return gram;
}

}  // namespace

Eigen::MatrixXd psi_gram(const GlobalDualBasis& basis, const std::vector<int>& nodes) {
  std::vector<PiecewisePoly> weights;
  weights.reserve(nodes.size());
  for (int i : nodes) weights.push_back(basis.psi(i));
  return gram_from_patches(basis.space().mesh(), weights);
}

Eigen::MatrixXd bernstein_gram(const LagrangeSpace& space, const std::vector<int>& nodes) {
  std::vector<PiecewisePoly> weights;
  weights.reserve(nodes.size());
  for (int i : nodes) weights.push_back(basis_patch(space, i));
  return gram_from_patches(space.mesh(), weights);
}

}  // namespace szinterp
