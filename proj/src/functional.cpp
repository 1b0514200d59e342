#include "szinterp/functional.hpp"

#include <algorithm>
#include <stdexcept>

#include "szinterp/quadrature.hpp"

namespace szinterp {

double PiecewisePoly::eval(const Point& x, double tol) const {
  for (std::size_t b = 0; b < elements.size(); ++b) {
    const Eigen::VectorXd lambda = mesh->barycentric(elements[b], x);
    if (lambda.minCoeff() >= -tol)
      return blocks[b].eval({lambda.data(), static_cast<std::size_t>(lambda.size())});
  }
  return 0.0;
}

std::array<double, 2> PiecewisePoly::grad_on(int block, std::span<const double> lambda) const {
  const auto parts = bpoly_grad(blocks[static_cast<std::size_t>(block)]);
  const Eigen::MatrixXd& gl = mesh->barycentric_gradients(elements[static_cast<std::size_t>(block)]);
  std::array<double, 2> g{0.0, 0.0};
  for (int j = 0; j <= mesh->dim(); ++j) {
    const double dj = parts[static_cast<std::size_t>(j)].eval(lambda);
    for (int c = 0; c < mesh->dim(); ++c) g[static_cast<std::size_t>(c)] += dj * gl(j, c);
  }
  return g;
}

int PiecewisePoly::find_element(int element) const {
  const auto it = std::find(elements.begin(), elements.end(), element);
  return it == elements.end() ? -1 : static_cast<int>(it - elements.begin());
}

PiecewisePoly basis_patch(const LagrangeSpace& space, int node) {
  PiecewisePoly out;
  out.mesh = &space.mesh();
  for (int t : space.node_support(node)) {
    out.elements.push_back(t);
    out.blocks.push_back(bpoly_unit(space.mesh().dim(), space.degree(), space.local_index(t, node)));
  }
  return out;
}

DualFunctional functional_from_density(ScalarFn f) {
  DualFunctional xi;
  xi.density = std::move(f);
  return xi;
}

DualFunctional functional_from_fe(FEFunction f, double coeff) {
  DualFunctional xi;
  xi.fe_terms.emplace_back(std::move(f), coeff);
  return xi;
}

DualFunctional functional_from_flux(VectorFn flux) {
  DualFunctional xi;
  xi.flux = std::move(flux);
  return xi;
}

DualFunctional functional_from_atom(const Point& x, double weight) {
  DualFunctional xi;
  xi.atoms.emplace_back(x, weight);
  return xi;
}

void check_atoms(const DualFunctional& xi, const SimplicialMesh& mesh) {
  for (const auto& [x, weight] : xi.atoms)
    if (mesh.locate(x) < 0) throw std::invalid_argument("functional: atom outside domain");
}

namespace {

// Quadrature of (callable density) * w and F . grad w over the blocks.
double pair_pointwise(const DualFunctional& xi, const PiecewisePoly& w, int quad_order) {
  const SimplicialMesh& mesh = *w.mesh;
  const int d = mesh.dim();
  const QuadratureRule& rule = simplex_quadrature(d, quad_order);
  double total = 0.0;
  for (std::size_t b = 0; b < w.elements.size(); ++b) {
    const double jac = mesh.measure(w.elements[b]) / ref_volume(d);
    const Eigen::MatrixXd& values = bernstein_at_quadrature(d, w.blocks[b].degree(), quad_order);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = mesh.map_from_barycentric(w.elements[b], rule.points[q]);
      double contrib = 0.0;
      if (xi.density) {
        const double wq = w.blocks[b].coeffs().dot(values.col(static_cast<Eigen::Index>(q)));
        contrib += xi.density(x) * wq;
      }
      if (xi.flux) {
        const auto f = xi.flux(x);
        const auto g = w.grad_on(static_cast<int>(b), rule.points[q]);
        contrib += f[0] * g[0] + f[1] * g[1];
      }
      acc += rule.weights[q] * contrib;
    }
    total += jac * acc;
  }
  return total;
}

// Exact <v, w> for a finite element density on the same mesh.
double pair_fe_same_mesh(const FEFunction& v, const PiecewisePoly& w) {
  const SimplicialMesh& mesh = *w.mesh;
  double total = 0.0;
  for (std::size_t b = 0; b < w.elements.size(); ++b) {
    const double jac = mesh.measure(w.elements[b]) / ref_volume(mesh.dim());
    total += jac * pair_ref(v.local(w.elements[b]), w.blocks[b]);
  }
  return total;
}

// <v, w> for a finite element density living on a refinement of w's mesh:
// the quadrature runs over the density's elements, w is evaluated through
// the barycentric map of the block element containing each point.
double pair_fe_refined(const FEFunction& v, const PiecewisePoly& w, int quad_order) {
  const SimplicialMesh& fine = v.space().mesh();
  const SimplicialMesh& coarse = *w.mesh;
  const int d = fine.dim();
  const QuadratureRule& rule = simplex_quadrature(d, quad_order);
  const Eigen::MatrixXd& values = bernstein_at_quadrature(d, v.space().degree(), quad_order);
  double total = 0.0;
  for (int t = 0; t < fine.num_simplices(); ++t) {
    // Assign the fine element to a block via its centroid.
    std::vector<double> center(static_cast<std::size_t>(d + 1),
                               1.0 / static_cast<double>(d + 1));
    const Point c = fine.map_from_barycentric(t, center);
    int block = -1;
    for (std::size_t b = 0; b < w.elements.size(); ++b) {
      const Eigen::VectorXd lambda = coarse.barycentric(w.elements[b], c);
      if (lambda.minCoeff() >= -1e-10) {
        block = static_cast<int>(b);
        break;
      }
    }
    if (block < 0) continue;
    const BPoly vt = v.local(t);
    const double jac = fine.measure(t) / ref_volume(d);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = fine.map_from_barycentric(t, rule.points[q]);
      const Eigen::VectorXd lambda = coarse.barycentric(w.elements[static_cast<std::size_t>(block)], x);
      const double wq = w.blocks[static_cast<std::size_t>(block)].eval(
          {lambda.data(), static_cast<std::size_t>(lambda.size())});
      acc += rule.weights[q] * vt.coeffs().dot(values.col(static_cast<Eigen::Index>(q))) * wq;
    }
    total += jac * acc;
  }
  return total;
}

}  // namespace

// <v, w> for a finite element density on a coarser mesh: quadrature over
// w's blocks with the density evaluated by point location.  Exact when the
// blocks' mesh refines the density's mesh.
double pair_fe_coarse(const FEFunction& v, const PiecewisePoly& w, int quad_order) {
  const SimplicialMesh& mesh = *w.mesh;
  const int d = mesh.dim();
  const QuadratureRule& rule = simplex_quadrature(d, quad_order);
  double total = 0.0;
  for (std::size_t b = 0; b < w.elements.size(); ++b) {
    const double jac = mesh.measure(w.elements[b]) / ref_volume(d);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = mesh.map_from_barycentric(w.elements[b], rule.points[q]);
      acc += rule.weights[q] * v.eval(x) * w.blocks[b].eval(rule.points[q]);
    }
    total += jac * acc;
  }
  return total;
}

double pair_functional(const DualFunctional& xi, const PiecewisePoly& w, int quad_order) {
  double total = 0.0;
  if (xi.density || xi.flux) total += pair_pointwise(xi, w, quad_order);
  for (const auto& [v, coeff] : xi.fe_terms) {
    if (&v.space().mesh() == w.mesh)
      total += coeff * pair_fe_same_mesh(v, w);
    else if (v.space().mesh().num_simplices() >= w.mesh->num_simplices())
      total += coeff * pair_fe_refined(v, w, quad_order);
    else
      total += coeff * pair_fe_coarse(v, w, quad_order);
  }
  for (const auto& [x, weight] : xi.atoms) total += weight * w.eval(x);
  return total;
}

}  // namespace szinterp
