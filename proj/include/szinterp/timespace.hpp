// Space-time tensor interpolation: the 1D operator in time (boundary
// corrected, no zero-trace constraint on its image), the zero-trace spatial
// operator applied slice-wise, their composition on sampled tensors, and
// the averaged Taylor polynomial on an interval.

#pragma once

#include <functional>

#include "szinterp/szops.hpp"

namespace szinterp {

/// Taylor expansion averaged against a smooth bump density on (a, b); the
/// derivative-free form moves all derivatives onto (tau-sigma)^l eta(sigma),
/// so it applies to merely integrable inputs.
class AvgTaylor {
 public:
  AvgTaylor(double a, double b, int order, int quad_points = 40);

  int order() const { return order_; }
  double bump(double sigma) const;
  double bump_derivative(double sigma, int n) const;
  /// Monomial coefficients (constant first) of the degree-order polynomial.
  std::vector<double> apply(const std::function<double(double)>& v) const;

 private:
  double a_, b_, width_;
  int order_;
  double normalization_ = 1.0;
  std::vector<double> qx_, qw_;  // composite Gauss rule on (a, b)
};

double eval_monomial(std::span<const double> coeffs, double x);

/// The interval operator of degree k_t with boundary-corrected weights at
/// both ends, together with a per-element Gauss sampling grid (2k_t+4
/// points) and tabulated weight/basis values on it.
class TimeOps {
 public:
  TimeOps(double t0, double t1, int intervals, int degree);

  const LagrangeSpace& space() const { return *space_; }
  const CorrectedDualBasis& weights() const { return *weights_; }
  int num_nodes() const { return space_->num_nodes(); }
  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<double>& sample_weights() const { return weights_at_samples_; }
  /// Row i holds psi~_i at the samples.
  const Eigen::MatrixXd& psi_at_samples() const { return psi_; }
  /// Row i holds b_i at the samples.
  const Eigen::MatrixXd& basis_at_samples() const { return basis_; }
  double basis_value(int node, double t) const;

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  std::shared_ptr<const LagrangeSpace> space_;
  std::shared_ptr<const CorrectedDualBasis> weights_;
  std::vector<double> times_, weights_at_samples_;
  Eigen::MatrixXd psi_, basis_;
};

/// Spatial side: zero-trace weights plus a flattened per-element quadrature
/// grid with tabulated psi, basis and basis-gradient values.
class SpaceOps {
 public:
  SpaceOps(std::shared_ptr<const LagrangeSpace> space, int quad_order = 0);

  const GlobalDualBasis& basis() const { return basis_set_; }
  const LagrangeSpace& space() const { return basis_set_.space(); }
  std::shared_ptr<const LagrangeSpace> space_ptr() const { return basis_set_.space_ptr(); }
  int num_nodes() const { return space().num_nodes(); }
  const std::vector<Point>& sample_points() const { return points_; }
  const std::vector<double>& sample_weights() const { return weights_at_samples_; }
  const Eigen::MatrixXd& psi_at_samples() const { return psi_; }
  const Eigen::MatrixXd& basis_at_samples() const { return bern_; }
  /// Spatial derivative d/dx of each basis function at the samples (d = 1).
  const Eigen::MatrixXd& basis_dx_at_samples() const { return bern_dx_; }

 private:
  GlobalDualBasis basis_set_;
  std::vector<Point> points_;
  std::vector<double> weights_at_samples_;
  Eigen::MatrixXd psi_, bern_, bern_dx_;
};

using SpaceTimeFn = std::function<double(double, const Point&)>;

/// Sample matrix V(q_t, q_x) over the two grids.
Eigen::MatrixXd sample_tensor(const TimeOps& time, const SpaceOps& space,
                              const SpaceTimeFn& v);

/// Time interpolation of a sampled tensor: row i is <v(., x), psi~_{t,i}>
/// at the spatial samples.
Eigen::MatrixXd apply_pi_t(const TimeOps& time, const Eigen::MatrixXd& samples);

/// Spatial interpolation slice-wise: column j is <v(t, .), psi_{x,j}> at the
/// time samples (zero for boundary nodes).
Eigen::MatrixXd apply_pi_x(const SpaceOps& space, const Eigen::MatrixXd& samples);

/// Coefficients over time nodes x space nodes, composing time-first.
Eigen::MatrixXd tensor_coefficients_tx(const TimeOps& time, const SpaceOps& space,
                                       const Eigen::MatrixXd& samples);
/// Same coefficients composing space-first.
Eigen::MatrixXd tensor_coefficients_xt(const TimeOps& time, const SpaceOps& space,
                                       const Eigen::MatrixXd& samples);

struct SpaceTimeErrors {
  double l2l2 = 0.0;  // L2 in time of the spatial L2 error
  double l2h1 = 0.0;  // L2 in time of the spatial H1 seminorm error
};

/// Errors of the tensor interpolant against v (and dv/dx when given).
SpaceTimeErrors tensor_error(const TimeOps& time, const SpaceOps& space,
                             const Eigen::MatrixXd& coeffs, const SpaceTimeFn& v,
                             const SpaceTimeFn& dv_dx = {});

}  // namespace szinterp
