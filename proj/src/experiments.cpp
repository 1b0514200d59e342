#include "szinterp/experiments.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "szinterp/altops.hpp"
#include "szinterp/parallel.hpp"
#include "szinterp/quadrature.hpp"
#include "szinterp/timespace.hpp"

namespace szinterp {

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.op = j.value("op", c.op);
  c.d = j.value("d", c.d);
  c.k = j.value("k", c.k);
  c.levels = j.value("levels", c.levels);
  c.preset = j.value("preset", c.preset);
  c.out = j.value("out", c.out);
  c.mesh_file = j.value("mesh", c.mesh_file);
  c.base_n = j.value("base_n", c.base_n);
  c.base_refines = j.value("base_refines", c.base_refines);
  c.negnorm.extra_refines = j.value("negnorm_refines", c.negnorm.extra_refines);
  c.t_end = j.value("t_end", c.t_end);
  c.kt = j.value("kt", c.kt);
  c.kx = j.value("kx", c.kx);
  c.refine_space_only = j.value("refine_space_only", c.refine_space_only);
  return c;
}

Preset make_preset(const std::string& name, int d) {
  Preset p;
  p.name = name;
  if (name == "sin" || name == "smooth") {
    if (d == 1) {
      p.value = [](const Point& x) { return std::sin(M_PI * x[0]); };
      p.gradient = [](const Point& x) {
        return std::array<double, 2>{M_PI * std::cos(M_PI * x[0]), 0.0};
      };
    } else {
      p.value = [](const Point& x) { return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]); };
      p.gradient = [](const Point& x) {
        return std::array<double, 2>{M_PI * std::cos(M_PI * x[0]) * std::sin(M_PI * x[1]),
                                     M_PI * std::sin(M_PI * x[0]) * std::cos(M_PI * x[1])};
      };
    }
    p.functional = functional_from_density(p.value);
    return p;
  }
  if (name == "fluxjump") {
    if (d != 1) throw std::invalid_argument("preset fluxjump: d = 1 only");
    p.functional = functional_from_flux([](const Point& x) {
      return std::array<double, 2>{x[0] > 0.5 ? 0.5 : -0.5, 0.0};
    });
    p.is_function = false;
    return p;
  }
  if (name == "dirac") {
    if (d != 1) throw std::invalid_argument("preset dirac: d = 1 only");
    p.functional = functional_from_atom(Point{0.5, 0.0}, 1.0);
    p.is_function = false;
    return p;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

void RateTable::add_row(int lvl, double hh, std::optional<double> l2,
                        std::optional<double> h1, std::optional<double> wm1) {
  level.push_back(lvl);
  h.push_back(hh);
  err_l2.push_back(l2);
  err_h1.push_back(h1);
  err_wm1.push_back(wm1);
}

namespace {

std::string format_cell(const std::optional<double>& value) {
  if (!value) return "";
  std::ostringstream os;
  os.precision(12);
  os << std::scientific << *value;
  return os.str();
}

std::string format_rate(const std::vector<std::optional<double>>& err, std::size_t row) {
  if (row == 0 || !err[row] || !err[row - 1] || *err[row] <= 0.0 || *err[row - 1] <= 0.0)
    return "";
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << std::log2(*err[row - 1] / *err[row]);
  return os.str();
}

}  // namespace

std::string RateTable::to_csv() const {
  std::ostringstream os;
  os << "level,h,err_L2,rate_L2,err_H1,rate_H1,err_Wm1,rate_Wm1\n";
  for (std::size_t r = 0; r < level.size(); ++r) {
    os.precision(12);
    os << level[r] << "," << std::scientific << h[r];
    os << "," << format_cell(err_l2[r]) << "," << format_rate(err_l2, r);
    os << "," << format_cell(err_h1[r]) << "," << format_rate(err_h1, r);
    os << "," << format_cell(err_wm1[r]) << "," << format_rate(err_wm1, r);
    os << "\n";
  }
  return os.str();
}

std::optional<double> RateTable::final_rate(const std::vector<std::optional<double>>& err) {
  const std::size_t n = err.size();
  if (n < 2 || !err[n - 1] || !err[n - 2] || *err[n - 1] <= 0.0 || *err[n - 2] <= 0.0)
    return std::nullopt;
  return std::log2(*err[n - 2] / *err[n - 1]);
}

namespace {

void check_envelope(const ExperimentConfig& c) {
  if (c.d < 1 || c.d > 2 || c.k < 1 || c.k > 3)
    throw std::invalid_argument("experiment: unsupported (d,k) envelope");
  const int max_levels = c.d == 1 ? 7 : 5;
  if (c.levels < 1 || c.levels > max_levels)
    throw std::invalid_argument("experiment: level count outside envelope");
}

std::shared_ptr<const SimplicialMesh> base_mesh(const ExperimentConfig& c) {
  std::shared_ptr<const SimplicialMesh> mesh;
  if (!c.mesh_file.empty())
    mesh = std::make_shared<const SimplicialMesh>(read_mesh_json(c.mesh_file));
  else if (c.d == 1)
    mesh = std::make_shared<const SimplicialMesh>(interval_mesh(c.base_n));
  else
    mesh = std::make_shared<const SimplicialMesh>(square_mesh(2));
  for (int r = 0; r < c.base_refines; ++r)
    mesh = std::make_shared<const SimplicialMesh>(uniform_refine(*mesh));
  return mesh;
}

}  // namespace

RateTable run_converge(const ExperimentConfig& config) {
  check_envelope(config);
  const Preset preset = make_preset(config.preset, config.d);
  if (!preset.is_function)
    throw std::invalid_argument("converge: preset must be a function");

  RateTable table;
  std::shared_ptr<const SimplicialMesh> mesh = base_mesh(config);
  for (int level = 0; level < config.levels; ++level) {
    auto space = make_lagrange_space(mesh, config.k);
    FEFunction u;
    if (config.op == "Pi0") {
      const GlobalDualBasis basis = assemble_psi(space, dual_basis_table(config.d, config.k));
      u = apply_pi0(basis, preset.functional);
    } else if (config.op == "Pi") {
      const CorrectedDualBasis basis =
          boundary_correction(assemble_psi(space, dual_basis_table(config.d, config.k)));
      u = apply_pi(basis, preset.functional);
    } else if (config.op == "Pi0star") {
      const GlobalDualBasis basis = assemble_psi(space, dual_basis_table(config.d, config.k));
      u = apply_pi0_star(basis, preset.functional);
    } else if (config.op == "Pi2") {
      u = L2Projection(space).apply(preset.functional);
    } else if (config.op == "Clement") {
      u = ClementOperator(space).apply(preset.functional);
    } else {
      throw std::invalid_argument("converge: unknown operator " + config.op);
    }

    const ErrorNorms errs = fe_error(u, preset.value, preset.gradient, 6 * config.k + 2);
    DualFunctional residual = functional_from_density(preset.value);
    residual.fe_terms.emplace_back(u, -1.0);
    const double wm1 = global_negnorm(mesh, config.k, config.negnorm).eval(residual);
    table.add_row(level, mesh->max_diameter(), errs.l2, errs.h1semi, wm1);
    if (level + 1 < config.levels)
      mesh = std::make_shared<const SimplicialMesh>(uniform_refine(*mesh));
  }
  return table;
}

namespace {

// Mass and stiffness over the interior nodes of a zero-trace space.
void assemble_interior(const LagrangeSpace& space, Eigen::SparseMatrix<double>& mass,
                       Eigen::SparseMatrix<double>& stiffness) {
  const SimplicialMesh& mesh = space.mesh();
  const int d = mesh.dim();
  const int k = space.degree();
  std::vector<int> compact(static_cast<std::size_t>(space.num_nodes()), -1);
  for (std::size_t a = 0; a < space.interior_nodes().size(); ++a)
    compact[static_cast<std::size_t>(space.interior_nodes()[a])] = static_cast<int>(a);
  const Eigen::MatrixXd& local_mass = ref_mass_matrix(d, k, k);
  std::vector<Eigen::Triplet<double>> tm, ts;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const double jac = mesh.measure(t) / ref_volume(d);
    const Eigen::MatrixXd local_stiff = element_stiffness(mesh, t, k);
    const auto& l2g = space.local_to_global(t);
    for (std::size_t a = 0; a < l2g.size(); ++a) {
      const int ia = compact[static_cast<std::size_t>(l2g[a])];
      if (ia < 0) continue;
      for (std::size_t b = 0; b < l2g.size(); ++b) {
        const int ib = compact[static_cast<std::size_t>(l2g[b])];
        if (ib < 0) continue;
        tm.emplace_back(ia, ib, jac * local_mass(static_cast<Eigen::Index>(a),
                                                 static_cast<Eigen::Index>(b)));
        ts.emplace_back(ia, ib, local_stiff(static_cast<Eigen::Index>(a),
                                            static_cast<Eigen::Index>(b)));
      }
    }
  }
  const int n = static_cast<int>(space.interior_nodes().size());
  mass.resize(n, n);
  stiffness.resize(n, n);
  mass.setFromTriplets(tm.begin(), tm.end());
  stiffness.setFromTriplets(ts.begin(), ts.end());
}

}  // namespace

RateTable run_heat(const ExperimentConfig& config) {
  if (config.d != 1) throw std::invalid_argument("heat: d = 1 only");
  check_envelope(config);
  const double t_end = config.t_end;

  RateTable table;
  for (int level = 0; level < config.levels; ++level) {
    const int n = config.base_n << level;
    auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(n));
    auto space = make_lagrange_space(mesh, config.k);
    const double h = mesh->max_diameter();

    Eigen::SparseMatrix<double> mass, stiffness;
    assemble_interior(*space, mass, stiffness);
    const auto& interior = space->interior_nodes();

    // Initial data through the L2 projection; time step small enough that
    // the Crank-Nicolson error is negligible against the spatial one.
    const FEFunction u0 = L2Projection(space).apply(
        functional_from_density([](const Point& x) { return std::sin(M_PI * x[0]); }));
    Eigen::VectorXd u(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t a = 0; a < interior.size(); ++a) u[static_cast<Eigen::Index>(a)] =
        u0.coeffs()[interior[a]];

    const double dt = std::pow(h, config.k + 1);
    const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt)));
    const double step = t_end / steps;
    Eigen::SparseMatrix<double> lhs = mass + 0.5 * step * stiffness;
    Eigen::SparseMatrix<double> rhs = mass - 0.5 * step * stiffness;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("heat: factorization failed");

    // Per-element tables for the gradient error: basis x-derivatives and the
    // exact-gradient prefactor at the quadrature points, fixed per level.
    const int order = 2 * config.k + 6;
    const QuadratureRule& rule = simplex_quadrature(1, order);
    const auto& idx = multi_indices(1, config.k);
    const std::size_t nq = rule.points.size();
    std::vector<int> compact(static_cast<std::size_t>(space->num_nodes()), -1);
    for (std::size_t a = 0; a < interior.size(); ++a)
      compact[static_cast<std::size_t>(interior[a])] = static_cast<int>(a);
    std::vector<Eigen::MatrixXd> basis_dx(static_cast<std::size_t>(mesh->num_simplices()));
    std::vector<Eigen::VectorXd> exact_prefactor(static_cast<std::size_t>(mesh->num_simplices()));
    for (int el = 0; el < mesh->num_simplices(); ++el) {
      const Eigen::MatrixXd& gl = mesh->barycentric_gradients(el);
      Eigen::MatrixXd table(idx.size(), nq);
      for (std::size_t a = 0; a < idx.size(); ++a) {
        const auto parts = bpoly_grad(bpoly_unit(1, config.k, static_cast<int>(a)));
        for (std::size_t q = 0; q < nq; ++q) {
          double dx = 0.0;
          for (int j = 0; j <= 1; ++j)
            dx += parts[static_cast<std::size_t>(j)].eval(rule.points[q]) * gl(j, 0);
          table(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(q)) = dx;
        }
      }
      basis_dx[static_cast<std::size_t>(el)] = std::move(table);
      Eigen::VectorXd pre(static_cast<Eigen::Index>(nq));
      for (std::size_t q = 0; q < nq; ++q) {
        const Point x = mesh->map_from_barycentric(el, rule.points[q]);
        pre[static_cast<Eigen::Index>(q)] = M_PI * std::cos(M_PI * x[0]);
      }
      exact_prefactor[static_cast<std::size_t>(el)] = std::move(pre);
    }
    auto grad_error = [&](const Eigen::VectorXd& coeffs, double t) {
      const double decay = std::exp(-M_PI * M_PI * t);
      return parallel_sum(mesh->num_simplices(), [&](std::ptrdiff_t tt) {
        const int el = static_cast<int>(tt);
        const auto& l2g = space->local_to_global(el);
        const double jac = mesh->measure(el) / ref_volume(1);
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
          double duh = 0.0;
          for (std::size_t a = 0; a < l2g.size(); ++a) {
            const int ci = compact[static_cast<std::size_t>(l2g[a])];
            if (ci >= 0)
              duh += coeffs[ci] * basis_dx[static_cast<std::size_t>(el)](
                                      static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(q));
          }
          const double du = exact_prefactor[static_cast<std::size_t>(el)]
                                           [static_cast<Eigen::Index>(q)] * decay;
          acc += rule.weights[q] * (du - duh) * (du - duh);
        }
        return jac * acc;
      });
    };

    double error_sq = 0.0;
    double previous = grad_error(u, 0.0);
    for (int s = 0; s < steps; ++s) {
      const Eigen::VectorXd b = rhs * u;
      u = solver.solve(b);
      const double current = grad_error(u, (s + 1) * step);
      error_sq += 0.5 * step * (previous + current);
      previous = current;
    }
    table.add_row(level, h, std::nullopt, std::sqrt(error_sq), std::nullopt);
  }
  return table;
}

RateTable run_smooth(const ExperimentConfig& config) {
  if (config.d != 1) throw std::invalid_argument("smooth: d = 1 only");
  check_envelope(config);
  const Preset preset = make_preset(config.preset, config.d);

  RateTable table;
  std::shared_ptr<const SimplicialMesh> mesh = base_mesh(config);
  for (int level = 0; level < config.levels; ++level) {
    auto space = make_lagrange_space(mesh, config.k);
    const CorrectedDualBasis basis =
        boundary_correction(assemble_psi(space, dual_basis_table(config.d, config.k)));
    const FEFunction smoothed = apply_pi(basis, preset.functional);

    DualFunctional residual = preset.functional;
    residual.fe_terms.emplace_back(smoothed, -1.0);
    const double wm1 = global_negnorm(mesh, config.k, config.negnorm).eval(residual);
    table.add_row(level, mesh->max_diameter(), std::nullopt, std::nullopt, wm1);
    if (level + 1 < config.levels)
      mesh = std::make_shared<const SimplicialMesh>(uniform_refine(*mesh));
  }
  return table;
}

RateTable run_spacetime(const ExperimentConfig& config) {
  if (config.d != 1) throw std::invalid_argument("spacetime: spatial dimension 1 only");
  const auto v = [](double t, const Point& x) { return std::exp(-t) * std::sin(M_PI * x[0]); };
  const auto dv_dx = [](double t, const Point& x) {
    return M_PI * std::exp(-t) * std::cos(M_PI * x[0]);
  };

  RateTable table;
  for (int level = 0; level < config.levels; ++level) {
    const int n_space = config.base_n << level;
    const int n_time = config.refine_space_only ? config.base_n : n_space;
    const TimeOps time(0.0, 1.0, n_time, config.kt);
    const SpaceOps space(make_lagrange_space(
        std::make_shared<const SimplicialMesh>(interval_mesh(n_space)), config.kx));
    const Eigen::MatrixXd samples = sample_tensor(time, space, v);
    const Eigen::MatrixXd coeffs = tensor_coefficients_tx(time, space, samples);
    const SpaceTimeErrors errs = tensor_error(time, space, coeffs, v, dv_dx);
    table.add_row(level, 1.0 / n_space, errs.l2l2, errs.l2h1, std::nullopt);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Identity-error helpers
// ---------------------------------------------------------------------------

double biorthogonality_error(const GlobalDualBasis& basis) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  std::vector<double> per_node(static_cast<std::size_t>(space.num_nodes()), 0.0);
  parallel_for(space.num_nodes(), [&](std::ptrdiff_t jj) {
    const int j = static_cast<int>(jj);
    const PiecewisePoly psi = basis.psi(j);
    // Nodes whose support meets omega_j.
    std::set<int> others;
    for (int t : space.node_support(j))
      for (int i : space.local_to_global(t)) others.insert(i);
    double worst = 0.0;
    for (int i : others) {
      double value = 0.0;
      for (std::size_t b = 0; b < psi.elements.size(); ++b) {
        const int t = psi.elements[b];
        const int li = space.local_index(t, i);
        if (li < 0) continue;
        value += mesh.measure(t) / ref_volume(mesh.dim()) *
                 pair_ref(bpoly_unit(mesh.dim(), space.degree(), li), psi.blocks[b]);
      }
      worst = std::max(worst, std::abs(value - (i == j ? 1.0 : 0.0)));
    }
    per_node[static_cast<std::size_t>(j)] = worst;
  });
  double worst = 0.0;
  for (double w : per_node) worst = std::max(worst, w);
  return worst;
}

double biorthogonality_error(const CorrectedDualBasis& basis) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  std::vector<double> per_node(static_cast<std::size_t>(space.num_nodes()), 0.0);
  parallel_for(space.num_nodes(), [&](std::ptrdiff_t jj) {
    const int j = static_cast<int>(jj);
    const PiecewisePoly psi = basis.psi_tilde(j);
    std::set<int> others;
    for (int t : space.node_support(j))
      for (int i : space.local_to_global(t)) others.insert(i);
    double worst = 0.0;
    for (int i : others) {
      double value = 0.0;
      for (std::size_t b = 0; b < psi.elements.size(); ++b) {
        const int t = psi.elements[b];
        const int li = space.local_index(t, i);
        if (li < 0) continue;
        value += mesh.measure(t) / ref_volume(mesh.dim()) *
                 pair_ref(bpoly_unit(mesh.dim(), space.degree(), li), psi.blocks[b]);
      }
      worst = std::max(worst, std::abs(value - (i == j ? 1.0 : 0.0)));
    }
    per_node[static_cast<std::size_t>(j)] = worst;
  });
  double worst = 0.0;
  for (double w : per_node) worst = std::max(worst, w);
  return worst;
}

namespace {

std::vector<double> random_barycentric(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> lambda(static_cast<std::size_t>(d + 1));
  // Exponential spacings normalized to the simplex.
  double sum = 0.0;
  for (auto& l : lambda) {
    l = -std::log(1.0 - unit(rng));
    sum += l;
  }
  for (auto& l : lambda) l /= sum;
  // Renormalize exactly to machine precision.
  double s2 = 0.0;
  for (std::size_t j = 0; j + 1 < lambda.size(); ++j) s2 += lambda[j];
  lambda.back() = 1.0 - s2;
  return lambda;
}

}  // namespace

double partition_identity_error(const GlobalDualBasis& basis, int num_points) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  std::mt19937 rng(20240901);
  std::uniform_int_distribution<int> pick(0, mesh.num_simplices() - 1);
  double worst = 0.0;
  for (int p = 0; p < num_points; ++p) {
    const int t = pick(rng);
    const std::vector<double> lambda = random_barycentric(mesh.dim(), rng);
    double value = 0.0;
    for (int i : space.local_to_global(t)) {
      const BPoly block = basis.psi_block(i, t);
      value += basis_integral(space, i) * block.eval(lambda);
    }
    worst = std::max(worst, std::abs(value - 1.0));
  }
  return worst;
}

double interior_mass_identity_error(const CorrectedDualBasis& basis, int points_per_element) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  std::mt19937 rng(20240902);
  double worst = 0.0;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    bool interior = true;
    for (int v : mesh.simplices()[static_cast<std::size_t>(t)])
      if (mesh.vertex_on_boundary(v)) interior = false;
    if (!interior) continue;
    for (int p = 0; p < points_per_element; ++p) {
      const std::vector<double> lambda = random_barycentric(mesh.dim(), rng);
      double value = 0.0;
      for (int i : space.local_to_global(t)) {
        const PiecewisePoly psi = basis.psi_tilde(i);
        const int b = psi.find_element(t);
        if (b < 0) continue;
        value += basis_integral(space, i) * psi.blocks[static_cast<std::size_t>(b)].eval(lambda);
      }
      worst = std::max(worst, std::abs(value - 1.0));
    }
  }
  return worst;
}

double corrected_trace_error(const CorrectedDualBasis& basis, int points_per_facet) {
  const LagrangeSpace& space = basis.space();
  const SimplicialMesh& mesh = space.mesh();
  const int d = mesh.dim();
  double worst = 0.0;
  for (const auto& facet : mesh.boundary_facets()) {
    for (int t = 0; t < mesh.num_simplices(); ++t) {
      const auto& s = mesh.simplices()[static_cast<std::size_t>(t)];
      std::vector<int> local_of(facet.size(), -1);
      bool contains = true;
      for (std::size_t f = 0; f < facet.size(); ++f) {
        const auto it = std::find(s.begin(), s.end(), facet[f]);
        if (it == s.end()) contains = false;
        else local_of[f] = static_cast<int>(it - s.begin());
      }
      if (!contains) continue;
      for (int p = 0; p < points_per_facet; ++p) {
        std::vector<double> lambda(static_cast<std::size_t>(d + 1), 0.0);
        if (d == 1) {
          lambda[static_cast<std::size_t>(local_of[0])] = 1.0;
        } else {
          const double s0 = (p + 1.0) / (points_per_facet + 1.0);
          lambda[static_cast<std::size_t>(local_of[0])] = s0;
          lambda[static_cast<std::size_t>(local_of[1])] = 1.0 - s0;
        }
        for (int i : space.local_to_global(t)) {
          const PiecewisePoly psi = basis.psi_tilde(i);
          const int b = psi.find_element(t);
          if (b < 0) continue;
          worst = std::max(worst,
                           std::abs(psi.blocks[static_cast<std::size_t>(b)].eval(lambda)));
        }
      }
      break;  // one containing simplex suffices
    }
  }
  return worst;
}

double max_deviation_on_interior(const FEFunction& f, double reference,
                                 int points_per_element) {
  const SimplicialMesh& mesh = f.space().mesh();
  std::mt19937 rng(20240903);
  double worst = 0.0;
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    bool interior = true;
    for (int v : mesh.simplices()[static_cast<std::size_t>(t)])
      if (mesh.vertex_on_boundary(v)) interior = false;
    if (!interior) continue;
    for (int p = 0; p < points_per_element; ++p) {
      const std::vector<double> lambda = random_barycentric(mesh.dim(), rng);
      worst = std::max(worst, std::abs(f.eval_local(t, lambda) - reference));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

namespace {

struct CheckLog {
  nlohmann::json checks = nlohmann::json::array();
  bool all_pass = true;

  void add(const std::string& name, int d, int k, double residual, double tol) {
    const bool pass = residual <= tol;
    checks.push_back({{"name", name},
                      {"d", d},
                      {"k", k},
                      {"max_residual", residual},
                      {"tolerance", tol},
                      {"pass", pass}});
    all_pass = all_pass && pass;
  }
};

std::shared_ptr<const SimplicialMesh> verify_mesh(int d) {
  if (d == 1)
    return std::make_shared<const SimplicialMesh>(
        interval_mesh(std::vector<double>{0.13, 0.25, 0.4, 0.55, 0.68, 0.85}));
  return std::make_shared<const SimplicialMesh>(square_mesh(2));
}

FEFunction random_fe(std::shared_ptr<const LagrangeSpace> space, std::mt19937& rng,
                     bool zero_trace) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  FEFunction f(space);
  if (zero_trace) {
    for (int i : space->interior_nodes()) f.coeffs()[i] = unit(rng);
  } else {
    for (int i = 0; i < space->num_nodes(); ++i) f.coeffs()[i] = unit(rng);
  }
  return f;
}

void verify_clement(CheckLog& log, int d, int k) {
  auto mesh = verify_mesh(d);
  if (d == 2) mesh = std::make_shared<const SimplicialMesh>(uniform_refine(*mesh));
  auto space = make_lagrange_space(mesh, k);
  const ClementOperator clement(space);
  std::mt19937 rng(777 + 10 * d + k);

  double self_adjoint = 0.0, identity = 0.0, elliptic = 0.0, compose = 0.0;
  const L2Projection pi2(space);
  for (int trial = 0; trial < 10; ++trial) {
    const FEFunction v = random_fe(space, rng, true);
    const FEFunction w = random_fe(space, rng, true);
    const FEFunction cv = clement.apply(functional_from_fe(v));
    const FEFunction cw = clement.apply(functional_from_fe(w));
    const double lhs = fe_dot_exact(cv, w);
    const double rhs = fe_dot_exact(v, cw);
    const double scale = std::max(1.0, std::abs(lhs));
    self_adjoint = std::max(self_adjoint, std::abs(lhs - rhs) / scale);

    // Ellipticity on the zero-trace space.
    const double energy = fe_dot_exact(cv, v);
    const double norm2 = fe_dot_exact(v, v);
    const double lower = static_cast<double>(k) / (2 * k + d);
    elliptic = std::max(elliptic, std::max(lower * norm2 - energy, energy - norm2) /
                                      std::max(1.0, norm2));

    // C Pi2 = C = Pi2 C.
    const FEFunction a = clement.apply(functional_from_fe(pi2.apply(functional_from_fe(v))));
    const FEFunction b = pi2.apply(functional_from_fe(cv));
    compose = std::max(compose, (a.coeffs() - cv.coeffs()).cwiseAbs().maxCoeff());
    compose = std::max(compose, (b.coeffs() - cv.coeffs()).cwiseAbs().maxCoeff());
  }
  // Identity on the degree-(k-1) zero-trace subspace.
  if (k >= 2) {
    auto low = make_lagrange_space(mesh, k - 1);
    for (int trial = 0; trial < 5; ++trial) {
      const FEFunction vlow = random_fe(low, rng, true);
      const FEFunction v = interpolate(space, [&](const Point& x) { return vlow.eval(x); });
      const FEFunction cv = clement.apply(functional_from_fe(v));
      identity = std::max(identity, (cv.coeffs() - v.coeffs()).cwiseAbs().maxCoeff());
    }
  }
  const FEFunction c1 = clement.apply(functional_from_density([](const Point&) { return 1.0; }));
  const double interior_const = max_deviation_on_interior(c1, 1.0, 20);

  log.add("clement_self_adjoint", d, k, self_adjoint, 1e-10);
  log.add("clement_elliptic_bounds", d, k, elliptic, 1e-10);
  if (k >= 2) log.add("clement_identity_low_degree", d, k, identity, 1e-9);
  log.add("clement_compose_l2proj", d, k, compose, 1e-9);
  log.add("clement_interior_constants", d, k, interior_const, 1e-10);
}

}  // namespace

nlohmann::json run_verify() {
  CheckLog log;

  for (int d = 1; d <= 2; ++d) {
    for (int k = 1; k <= 3; ++k) {
      const DualBasisTable& table = dual_basis_table(d, k);
      const DualBasisReport report = verify_dual_basis(table);
      log.add("dual_biorthogonality", d, k, report.biorthogonality, 1e-10);
      log.add("dual_sum_identity", d, k, report.sum_identity, 1e-10);
      log.add("dual_permutation_symmetry", d, k, report.symmetry, 1e-12);
      log.add("dual_product_structure", d, k, report.product, 1e-12);
      log.add("dual_diagonal_identity", d, k, report.diagonal, 1e-11);

      if (k == 1) {
        const DualBasisTable closed = tantardini_k1(d);
        double diff = 0.0;
        for (std::size_t a = 0; a < table.p.size(); ++a)
          diff = std::max(diff,
                          (table.p[a].coeffs() - closed.p[a].coeffs()).cwiseAbs().maxCoeff());
        log.add("dual_closed_form_match", d, k, diff, 1e-10);
      }

      auto mesh = verify_mesh(d);
      auto space = make_lagrange_space(mesh, k);
      const GlobalDualBasis basis = assemble_psi(space, dual_basis_table(d, k));
      log.add("global_biorthogonality", d, k, biorthogonality_error(basis), 1e-10);
      log.add("global_mass_identity", d, k, partition_identity_error(basis, 200), 1e-10);

      const CorrectedDualBasis corrected = boundary_correction(basis);
      log.add("corrected_biorthogonality", d, k, biorthogonality_error(corrected), 1e-9);
      log.add("corrected_zero_trace", d, k, corrected_trace_error(corrected, 12), 1e-12);

      auto fine = std::make_shared<const SimplicialMesh>(uniform_refine(*mesh));
      auto fine_space = make_lagrange_space(fine, k);
      const GlobalDualBasis fine_basis = assemble_psi(fine_space, dual_basis_table(d, k));
      const CorrectedDualBasis fine_corrected = boundary_correction(fine_basis);
      log.add("corrected_interior_mass", d, k,
              interior_mass_identity_error(fine_corrected, 10), 1e-10);

      const DualFunctional one = functional_from_density([](const Point&) { return 1.0; });
      log.add("adjoint_constant_interior", d, k,
              max_deviation_on_interior(apply_pi0_star(fine_basis, one), 1.0, 20), 1e-10);
      log.add("corrected_adjoint_constant_interior", d, k,
              max_deviation_on_interior(apply_pi_star(fine_corrected, one), 1.0, 20), 1e-10);

      verify_clement(log, d, k);
    }
  }

  {
    // Tensor commutation on a small grid.
    const TimeOps time(0.0, 1.0, 4, 1);
    const SpaceOps space(make_lagrange_space(
        std::make_shared<const SimplicialMesh>(interval_mesh(5)), 1));
    const Eigen::MatrixXd samples = sample_tensor(time, space, [](double t, const Point& x) {
      return std::exp(-t) * std::sin(M_PI * x[0]);
    });
    const Eigen::MatrixXd tx = tensor_coefficients_tx(time, space, samples);
    const Eigen::MatrixXd xt = tensor_coefficients_xt(time, space, samples);
    log.add("tensor_commutation", 1, 1, (tx - xt).cwiseAbs().maxCoeff(), 1e-9);
  }

  {
    // Averaged Taylor polynomial: exactness on monomials and the
    // derivative commutation.
    double reproduce = 0.0;
    for (int s = 1; s <= 3; ++s) {
      const AvgTaylor taylor(0.2, 0.9, s);
      const std::vector<double> coeffs =
          taylor.apply([s](double x) { return std::pow(x, s); });
      for (double x : {0.25, 0.5, 0.85})
        reproduce = std::max(reproduce,
                             std::abs(eval_monomial(coeffs, x) - std::pow(x, s)));
    }
    log.add("taylor_polynomial_reproduction", 1, 0, reproduce, 1e-9);

    const AvgTaylor t2(0.0, 1.0, 2);
    const AvgTaylor t1(0.0, 1.0, 1);
    const std::vector<double> ts = t2.apply([](double x) { return std::sin(x); });
    const std::vector<double> td = t1.apply([](double x) { return std::cos(x); });
    double commute = 0.0;
    for (double x : {0.1, 0.5, 0.9}) {
      const double derivative = ts[1] + 2.0 * ts[2] * x;
      commute = std::max(commute, std::abs(derivative - eval_monomial(td, x)));
    }
    log.add("taylor_derivative_commutation", 1, 0, commute, 1e-8);
  }

  nlohmann::json out;
  out["checks"] = log.checks;
  out["all_pass"] = log.all_pass;
  return out;
}

nlohmann::json dump_dual_basis(int d, int k) {
  const DualBasisTable& table = dual_basis_table(d, k);
  nlohmann::json out;
  out["d"] = d;
  out["k"] = k;
  auto& indices = out["multi_indices"] = nlohmann::json::array();
  for (const auto& alpha : multi_indices(d, k)) indices.push_back(alpha);
  auto dump = [](const std::vector<BPoly>& polys) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BPoly& p : polys) {
      std::vector<double> coeffs(p.coeffs().data(), p.coeffs().data() + p.coeffs().size());
      arr.push_back(coeffs);
    }
    return arr;
  };
  out["q"] = dump(table.q);
  out["z"] = dump(table.z);
  out["p"] = dump(table.p);
  return out;
}

}  // namespace szinterp
