#include "szinterp/timespace.hpp"

#include <cmath>
#include <stdexcept>

#include "szinterp/quadrature.hpp"

namespace szinterp {

namespace {

// Derivatives of the unit bump exp(-1/(1-u^2)) on (-1,1).  With
// g = -1/(1-u^2) one has g^(m) = -(m!/2) [1/(1-u)^{m+1} + (-1)^m/(1+u)^{m+1}]
// and the exponential recurrence fills in the rest.
double bump_unit_derivative(double u, int n) {
  if (std::abs(u) >= 1.0) return 0.0;
  std::vector<double> eta(static_cast<std::size_t>(n + 1));
  eta[0] = std::exp(-1.0 / (1.0 - u * u));
  std::vector<double> g(static_cast<std::size_t>(n + 1));
  for (int m = 1; m <= n; ++m)
    g[static_cast<std::size_t>(m)] =
        -0.5 * static_cast<double>(factorial(m)) *
        (1.0 / std::pow(1.0 - u, m + 1) +
         (m % 2 == 0 ? 1.0 : -1.0) / std::pow(1.0 + u, m + 1));
  for (int m = 0; m < n; ++m) {
    double next = 0.0;
    for (int r = 0; r <= m; ++r)
      next += static_cast<double>(binomial(m, r)) * g[static_cast<std::size_t>(r + 1)] *
              eta[static_cast<std::size_t>(m - r)];
    eta[static_cast<std::size_t>(m + 1)] = next;
  }
  return eta[static_cast<std::size_t>(n)];
}

}  // namespace

AvgTaylor::AvgTaylor(double a, double b, int order, int quad_points)
    : a_(a), b_(b), width_(b - a), order_(order) {
  if (width_ <= 0.0) throw std::invalid_argument("AvgTaylor: empty interval");
  if (order_ < 0) throw std::invalid_argument("AvgTaylor: negative order");
  // Equidistant midpoints: every integrand carries the bump or one of its
  // derivatives, all of which vanish to infinite order at the interval ends,
  // so the midpoint rule converges faster than any power of the step.
  const int n = std::max(800, 20 * quad_points);
  qx_.resize(static_cast<std::size_t>(n));
  qw_.assign(static_cast<std::size_t>(n), width_ / n);
  for (int q = 0; q < n; ++q)
    qx_[static_cast<std::size_t>(q)] = a_ + width_ * (q + 0.5) / n;
  double mass = 0.0;
  for (std::size_t q = 0; q < qx_.size(); ++q) mass += qw_[q] * bump(qx_[q]);
  normalization_ = 1.0 / mass;
}

double AvgTaylor::bump(double sigma) const {
  const double u = 2.0 * (sigma - a_) / width_ - 1.0;
  return normalization_ * bump_unit_derivative(u, 0) * 2.0 / width_;
}

double AvgTaylor::bump_derivative(double sigma, int n) const {
  const double u = 2.0 * (sigma - a_) / width_ - 1.0;
  return normalization_ * bump_unit_derivative(u, n) * std::pow(2.0 / width_, n + 1);
}

std::vector<double> AvgTaylor::apply(const std::function<double(double)>& v) const {
  const int s = order_;
  // I(l, p) = int v(sigma) d^l/dsigma^l [sigma^p eta(sigma)] dsigma with
  // the Leibniz rule expanding the derivative.
  auto moment = [&](int l, int p) {
    double total = 0.0;
    for (std::size_t q = 0; q < qx_.size(); ++q) {
      const double sigma = qx_[q];
      double inner = 0.0;
      for (int m = 0; m <= std::min(l, p); ++m) {
        const double power = p - m > 0 ? std::pow(sigma, p - m) : 1.0;
        inner += static_cast<double>(binomial(l, m)) *
                 static_cast<double>(factorial(p)) / static_cast<double>(factorial(p - m)) *
                 power * bump_derivative(sigma, l - m);
      }
      total += qw_[q] * v(sigma) * inner;
    }
    return total;
  };

  std::vector<double> coeffs(static_cast<std::size_t>(s + 1), 0.0);
  for (int r = 0; r <= s; ++r) {
    double acc = 0.0;
    for (int l = r; l <= s; ++l)
      acc += static_cast<double>(binomial(l, r)) / static_cast<double>(factorial(l)) *
             moment(l, l - r);
    coeffs[static_cast<std::size_t>(r)] = (r % 2 == 0 ? 1.0 : -1.0) * acc;
  }
  return coeffs;
}

double eval_monomial(std::span<const double> coeffs, double x) {
  double value = 0.0;
  for (std::size_t r = coeffs.size(); r-- > 0;) value = value * x + coeffs[r];
  return value;
}

TimeOps::TimeOps(double t0, double t1, int intervals, int degree) {
  if (intervals < 2)
    throw std::invalid_argument("TimeOps: need at least two intervals for the boundary correction");
  std::vector<Point> vertices;
  for (int i = 0; i <= intervals; ++i)
    vertices.push_back({t0 + (t1 - t0) * i / intervals, 0.0});
  std::vector<std::vector<int>> simplices;
  for (int i = 0; i < intervals; ++i) simplices.push_back({i, i + 1});
  mesh_ = std::make_shared<const SimplicialMesh>(1, std::move(vertices), std::move(simplices));
  space_ = make_lagrange_space(mesh_, degree);
  weights_ = std::make_shared<const CorrectedDualBasis>(
      boundary_correction(assemble_psi(space_, dual_basis_table(1, degree))));

  const int points = 2 * degree + 4;
  std::vector<double> x, w;
  gauss_legendre(points, x, w);
  for (int t = 0; t < mesh_->num_simplices(); ++t) {
    const auto& s = mesh_->simplices()[static_cast<std::size_t>(t)];
    const double lo = mesh_->vertices()[static_cast<std::size_t>(s[0])][0];
    const double hi = mesh_->vertices()[static_cast<std::size_t>(s[1])][0];
    for (int q = 0; q < points; ++q) {
      times_.push_back(lo + (hi - lo) * x[static_cast<std::size_t>(q)]);
      weights_at_samples_.push_back((hi - lo) * w[static_cast<std::size_t>(q)]);
    }
  }

  const int nq = static_cast<int>(times_.size());
  psi_ = Eigen::MatrixXd::Zero(space_->num_nodes(), nq);
  basis_ = Eigen::MatrixXd::Zero(space_->num_nodes(), nq);
  for (int i = 0; i < space_->num_nodes(); ++i) {
    const PiecewisePoly psi = weights_->psi_tilde(i);
    const PiecewisePoly b = basis_patch(*space_, i);
    for (int q = 0; q < nq; ++q) {
      const Point x_q{times_[static_cast<std::size_t>(q)], 0.0};
      psi_(i, q) = psi.eval(x_q);
      basis_(i, q) = b.eval(x_q);
    }
  }
}

double TimeOps::basis_value(int node, double t) const {
  return basis_patch(*space_, node).eval(Point{t, 0.0});
}

SpaceOps::SpaceOps(std::shared_ptr<const LagrangeSpace> space, int quad_order)
    : basis_set_(assemble_psi(space, dual_basis_table(space->mesh().dim(), space->degree()))) {
  const LagrangeSpace& sp = *space;
  const SimplicialMesh& mesh = sp.mesh();
  const int d = mesh.dim();
  const int order = quad_order > 0 ? quad_order : basis_set_.quad_order();
  const QuadratureRule& rule = simplex_quadrature(d, order);
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const double jac = mesh.measure(t) / ref_volume(d);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      points_.push_back(mesh.map_from_barycentric(t, rule.points[q]));
      weights_at_samples_.push_back(jac * rule.weights[q]);
    }
  }

  const int nq = static_cast<int>(points_.size());
  const int per_element = static_cast<int>(rule.points.size());
  psi_ = Eigen::MatrixXd::Zero(sp.num_nodes(), nq);
  bern_ = Eigen::MatrixXd::Zero(sp.num_nodes(), nq);
  bern_dx_ = Eigen::MatrixXd::Zero(sp.num_nodes(), nq);
  const auto& idx = multi_indices(d, sp.degree());
  for (int t = 0; t < mesh.num_simplices(); ++t) {
    const auto& l2g = sp.local_to_global(t);
    const Eigen::MatrixXd& gl = mesh.barycentric_gradients(t);
    for (std::size_t a = 0; a < l2g.size(); ++a) {
      const int node = l2g[a];
      const BPoly b = bpoly_unit(d, sp.degree(), static_cast<int>(a));
      const auto db = bpoly_grad(b);
      for (int q = 0; q < per_element; ++q) {
        const int col = t * per_element + q;
        bern_(node, col) = bernstein_eval(idx[a], rule.points[static_cast<std::size_t>(q)]);
        double dx = 0.0;
        for (int j = 0; j <= d; ++j)
          dx += db[static_cast<std::size_t>(j)].eval(rule.points[static_cast<std::size_t>(q)]) *
                gl(j, 0);
        bern_dx_(node, col) = dx;
      }
    }
  }
  for (int i : sp.interior_nodes()) {
    const PiecewisePoly psi = basis_set_.psi(i);
    for (std::size_t b = 0; b < psi.elements.size(); ++b) {
      const int t = psi.elements[b];
      for (int q = 0; q < per_element; ++q)
        psi_(i, t * per_element + q) =
            psi.blocks[b].eval(rule.points[static_cast<std::size_t>(q)]);
    }
  }
}

Eigen::MatrixXd sample_tensor(const TimeOps& time, const SpaceOps& space,
                              const SpaceTimeFn& v) {
  const auto& times = time.sample_times();
  const auto& points = space.sample_points();
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(times.size()),
                          static_cast<Eigen::Index>(points.size()));
  for (std::size_t q = 0; q < times.size(); ++q)
    for (std::size_t m = 0; m < points.size(); ++m)
      samples(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(m)) =
          v(times[q], points[m]);
  return samples;
}

Eigen::MatrixXd apply_pi_t(const TimeOps& time, const Eigen::MatrixXd& samples) {
  const auto& w = time.sample_weights();
  Eigen::MatrixXd scaled = time.psi_at_samples();
  for (int q = 0; q < scaled.cols(); ++q)
    scaled.col(q) *= w[static_cast<std::size_t>(q)];
  return scaled * samples;
}

Eigen::MatrixXd apply_pi_x(const SpaceOps& space, const Eigen::MatrixXd& samples) {
  const auto& w = space.sample_weights();
  Eigen::MatrixXd scaled = space.psi_at_samples();
  for (int q = 0; q < scaled.cols(); ++q)
    scaled.col(q) *= w[static_cast<std::size_t>(q)];
  return samples * scaled.transpose();
}

Eigen::MatrixXd tensor_coefficients_tx(const TimeOps& time, const SpaceOps& space,
                                       const Eigen::MatrixXd& samples) {
  // rows of the intermediate are time coefficients; the spatial contraction
  // acts on columns either way
  return apply_pi_x(space, apply_pi_t(time, samples));
}

Eigen::MatrixXd tensor_coefficients_xt(const TimeOps& time, const SpaceOps& space,
                                       const Eigen::MatrixXd& samples) {
  return apply_pi_t(time, apply_pi_x(space, samples));
}

SpaceTimeErrors tensor_error(const TimeOps& time, const SpaceOps& space,
                             const Eigen::MatrixXd& coeffs, const SpaceTimeFn& v,
                             const SpaceTimeFn& dv_dx) {
  const auto& times = time.sample_times();
  const auto& tw = time.sample_weights();
  const auto& points = space.sample_points();
  const auto& xw = space.sample_weights();
  // Interpolant values at the grid: Bt^T coeffs Bx.
  const Eigen::MatrixXd values =
      time.basis_at_samples().transpose() * coeffs * space.basis_at_samples();
  Eigen::MatrixXd values_dx;
  if (dv_dx)
    values_dx = time.basis_at_samples().transpose() * coeffs * space.basis_dx_at_samples();

  SpaceTimeErrors err;
  for (std::size_t q = 0; q < times.size(); ++q) {
    double slice_l2 = 0.0, slice_h1 = 0.0;
    for (std::size_t m = 0; m < points.size(); ++m) {
      const double diff = v(times[q], points[m]) -
                          values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(m));
      slice_l2 += xw[m] * diff * diff;
      if (dv_dx) {
        const double gdiff =
            dv_dx(times[q], points[m]) -
            values_dx(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(m));
        slice_h1 += xw[m] * gdiff * gdiff;
      }
    }
    err.l2l2 += tw[q] * slice_l2;
    err.l2h1 += tw[q] * slice_h1;
  }
  err.l2l2 = std::sqrt(std::max(0.0, err.l2l2));
  err.l2h1 = std::sqrt(std::max(0.0, err.l2h1));
  return err;
}

}  // namespace szinterp
