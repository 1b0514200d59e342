// Averaged Taylor polynomial and the tensor space-time operators:
// polynomial reproduction, derivative commutation, approximation order,
// slice-wise interpolation, and the order-swap identity.

#include <doctest.h>

#include <cmath>

#include "szinterp/negnorm.hpp"
#include "szinterp/timespace.hpp"

using namespace szinterp;

TEST_CASE("bump is normalized") {
  const AvgTaylor taylor(0.3, 0.8, 2);
  // re-integrate the bump with an independent midpoint rule
  double mass = 0.0;
  const int n = 4000;
  for (int q = 0; q < n; ++q) {
    const double x = 0.3 + 0.5 * (q + 0.5) / n;
    mass += 0.5 / n * taylor.bump(x);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(taylor.bump(0.3) == 0.0);
  CHECK(taylor.bump(0.8) == 0.0);
  CHECK(taylor.bump(0.55) > 0.0);
}

TEST_CASE("reproduces polynomials up to the order") {
  for (int s = 0; s <= 3; ++s) {
    const AvgTaylor taylor(0.2, 0.9, s);
    for (int power = 0; power <= s; ++power) {
      const auto coeffs = taylor.apply([power](double x) { return std::pow(x, power); });
      for (double x : {0.23, 0.5, 0.88}) {
        CHECK(eval_monomial(coeffs, x) == doctest::Approx(std::pow(x, power)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("order zero gives the averaged value") {
  const AvgTaylor taylor(0.0, 1.0, 0);
  const auto coeffs = taylor.apply([](double x) { return std::sin(x); });
  REQUIRE(coeffs.size() == 1);
  // independent evaluation of int sin * eta
  double expected = 0.0;
  const int n = 4000;
  for (int q = 0; q < n; ++q) {
    const double x = (q + 0.5) / n;
    expected += 1.0 / n * std::sin(x) * taylor.bump(x);
  }
  CHECK(coeffs[0] == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("derivative commutes with the expansion") {
  const AvgTaylor t2(0.0, 1.0, 2);
  const AvgTaylor t1(0.0, 1.0, 1);
  const auto ts = t2.apply([](double x) { return std::sin(x); });
  const auto td = t1.apply([](double x) { return std::cos(x); });
  for (double x : {0.1, 0.4, 0.8}) {
    const double derivative = ts[1] + 2.0 * ts[2] * x;
    CHECK(derivative == doctest::Approx(eval_monomial(td, x)).epsilon(1e-8));
  }
}

TEST_CASE("approximation order s+1 on shrinking intervals") {
  for (int s : {1, 2}) {
    std::vector<double> errors;
    for (int level = 0; level < 4; ++level) {
      const double h = 0.5 / (1 << level);
      const AvgTaylor taylor(0.3, 0.3 + h, s);
      const auto coeffs = taylor.apply([](double x) { return std::sin(x); });
      double sup = 0.0;
      for (int q = 0; q <= 50; ++q) {
        const double x = 0.3 + h * q / 50.0;
        sup = std::max(sup, std::abs(std::sin(x) - eval_monomial(coeffs, x)));
      }
      errors.push_back(sup);
    }
    const double rate = std::log2(errors[errors.size() - 2] / errors.back());
    CHECK(rate == doctest::Approx(s + 1.0).epsilon(0.2 / (s + 1.0)));
  }
}

TEST_CASE("stability of the averaged expansion under shrinking") {
  // measured L2 operator bound behaves like a constant
  std::vector<double> ratios;
  for (int level = 0; level < 4; ++level) {
    const double h = 0.5 / (1 << level);
    const AvgTaylor taylor(0.2, 0.2 + h, 2);
    const auto v = [](double x) { return std::cos(7.0 * x); };
    const auto coeffs = taylor.apply(v);
    double num = 0.0, den = 0.0;
    const int n = 400;
    for (int q = 0; q < n; ++q) {
      const double x = 0.2 + h * (q + 0.5) / n;
      num += h / n * eval_monomial(coeffs, x) * eval_monomial(coeffs, x);
      den += h / n * v(x) * v(x);
    }
    ratios.push_back(std::sqrt(num / den));
  }
  for (double r : ratios) CHECK(r < 3.0);
  CHECK(*std::max_element(ratios.begin(), ratios.end()) /
            *std::min_element(ratios.begin(), ratios.end()) <
        2.0);
}

TEST_CASE("time operator picks out time basis functions") {
  const TimeOps time(0.0, 1.0, 4, 1);
  const SpaceOps space(make_lagrange_space(
      std::make_shared<const SimplicialMesh>(interval_mesh(4)), 1));

  // v(t,x) = b_{t,j}(t) g(x) maps to the unit time coefficient at j
  const int j = 2;
  const auto g = [](const Point& x) { return std::sin(M_PI * x[0]); };
  const Eigen::MatrixXd samples = sample_tensor(
      time, space, [&](double t, const Point& x) { return time.basis_value(j, t) * g(x); });
  const Eigen::MatrixXd coeffs = apply_pi_t(time, samples);
  for (int i = 0; i < time.num_nodes(); ++i)
    for (int m = 0; m < coeffs.cols(); ++m) {
      const double expected =
          (i == j) ? g(space.sample_points()[static_cast<std::size_t>(m)]) : 0.0;
      CHECK(coeffs(i, m) == doctest::Approx(expected).epsilon(1e-10));
    }

  // constants in time are reproduced (no zero-trace constraint in time)
  const Eigen::MatrixXd const_samples =
      sample_tensor(time, space, [&](double, const Point& x) { return g(x); });
  const Eigen::MatrixXd const_coeffs = apply_pi_t(time, const_samples);
  for (int i = 0; i < time.num_nodes(); ++i)
    for (int m = 0; m < const_coeffs.cols(); ++m)
      CHECK(const_coeffs(i, m) ==
            doctest::Approx(g(space.sample_points()[static_cast<std::size_t>(m)]))
                .epsilon(1e-10));
}

TEST_CASE("spatial operator acts slice-wise with zero trace") {
  const TimeOps time(0.0, 1.0, 3, 1);
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(5));
  const SpaceOps space(make_lagrange_space(mesh, 2));

  const int j = space.space().interior_nodes()[1];
  const PiecewisePoly bj = basis_patch(space.space(), j);
  const auto f = [](double t) { return 1.0 + 0.5 * t; };
  const Eigen::MatrixXd samples = sample_tensor(
      time, space, [&](double t, const Point& x) { return f(t) * bj.eval(x); });
  const Eigen::MatrixXd coeffs = apply_pi_x(space, samples);
  for (int q = 0; q < coeffs.rows(); ++q)
    for (int i = 0; i < space.num_nodes(); ++i) {
      const double expected =
          (i == j) ? f(time.sample_times()[static_cast<std::size_t>(q)]) : 0.0;
      CHECK(coeffs(q, i) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("time derivative commutes with the spatial operator") {
  // v polynomial in t: compare Pi_x applied to dv/dt against the exact
  // t-derivative of Pi_x v computed coefficient-wise
  const TimeOps time(0.0, 1.0, 3, 2);
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(4));
  const SpaceOps space(make_lagrange_space(mesh, 1));

  const auto g0 = [](const Point& x) { return std::sin(M_PI * x[0]); };
  const auto g1 = [](const Point& x) { return x[0] * (1.0 - x[0]); };
  const auto v = [&](double t, const Point& x) { return g0(x) + t * t * g1(x); };
  const auto dv = [&](double t, const Point& x) { return 2.0 * t * g1(x); };

  const Eigen::MatrixXd check = sample_tensor(time, space, v);
  CHECK(check.rows() == static_cast<Eigen::Index>(time.sample_times().size()));
  const Eigen::MatrixXd direct = apply_pi_x(space, sample_tensor(time, space, dv));
  // coefficient route: Pi_x g0 + t^2 Pi_x g1 differentiates to 2 t Pi_x g1
  const Eigen::MatrixXd pig1 = apply_pi_x(
      space, sample_tensor(time, space, [&](double, const Point& x) { return g1(x); }));
  for (int q = 0; q < direct.rows(); ++q) {
    const double t = time.sample_times()[static_cast<std::size_t>(q)];
    for (int i = 0; i < direct.cols(); ++i)
      CHECK(direct(q, i) == doctest::Approx(2.0 * t * pig1(q, i)).epsilon(1e-9));
  }
}

TEST_CASE("composition order does not matter") {
  const TimeOps time(0.0, 1.0, 4, 1);
  const SpaceOps space(make_lagrange_space(
      std::make_shared<const SimplicialMesh>(interval_mesh(6)), 2));
  const Eigen::MatrixXd samples = sample_tensor(time, space, [](double t, const Point& x) {
    return std::exp(-t) * std::sin(M_PI * x[0]) + t * x[0] * (1 - x[0]);
  });
  const Eigen::MatrixXd tx = tensor_coefficients_tx(time, space, samples);
  const Eigen::MatrixXd xt = tensor_coefficients_xt(time, space, samples);
  CHECK((tx - xt).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("discrete tensor functions are reproduced") {
  const TimeOps time(0.0, 1.0, 3, 2);
  const SpaceOps space(make_lagrange_space(
      std::make_shared<const SimplicialMesh>(interval_mesh(4)), 1));
  // a discrete tensor function: time basis j times spatial basis i
  const int tj = 3;
  const int xi = space.space().interior_nodes()[1];
  const PiecewisePoly bx = basis_patch(space.space(), xi);
  const auto v = [&](double t, const Point& x) {
    return time.basis_value(tj, t) * bx.eval(x);
  };
  const Eigen::MatrixXd coeffs =
      tensor_coefficients_tx(time, space, sample_tensor(time, space, v));
  const SpaceTimeErrors err = tensor_error(time, space, coeffs, v);
  CHECK(err.l2l2 <= 1e-9);
}

TEST_CASE("time refinement converges at order k_t + 1") {
  // fine fixed spatial mesh so the time error dominates
  const auto v = [](double t, const Point& x) {
    return std::exp(-t) * std::sin(M_PI * x[0]);
  };
  const SpaceOps space(make_lagrange_space(
      std::make_shared<const SimplicialMesh>(interval_mesh(64)), 2));
  std::vector<double> errors;
  for (int level = 0; level < 3; ++level) {
    const TimeOps time(0.0, 1.0, 4 << level, 1);
    const Eigen::MatrixXd coeffs =
        tensor_coefficients_tx(time, space, sample_tensor(time, space, v));
    errors.push_back(tensor_error(time, space, coeffs, v).l2l2);
  }
  const double rate = std::log2(errors[errors.size() - 2] / errors.back());
  CHECK(rate == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("space-only refinement saturates at the time error floor") {
  const auto v = [](double t, const Point& x) {
    return std::exp(-t) * std::sin(M_PI * x[0]);
  };
  const TimeOps time(0.0, 1.0, 4, 1);  // coarse time mesh, k_t = 1
  std::vector<double> errors;
  for (int level = 0; level < 4; ++level) {
    const SpaceOps space(make_lagrange_space(
        std::make_shared<const SimplicialMesh>(interval_mesh(4 << level)), 2));
    const Eigen::MatrixXd coeffs =
        tensor_coefficients_tx(time, space, sample_tensor(time, space, v));
    errors.push_back(tensor_error(time, space, coeffs, v).l2l2);
  }
  CHECK(errors[0] / errors[1] > 1.4);              // spatial part still visible
  CHECK(errors[2] / errors[3] < 1.1);              // plateau
  CHECK(errors[3] > 0.25 * errors[0]);             // floor set by the time mesh
}

TEST_CASE("tensor operator is stable in the product L2 norm") {
  // measured norm ratio stays bounded and stable across refinement levels
  const auto v = [](double t, const Point& x) {
    return std::cos(3.0 * t) * std::sin(2.0 * M_PI * x[0]);
  };
  std::vector<double> ratios;
  for (int level = 0; level < 3; ++level) {
    const int n = 4 << level;
    const TimeOps time(0.0, 1.0, n, 1);
    const SpaceOps space(make_lagrange_space(
        std::make_shared<const SimplicialMesh>(interval_mesh(n)), 1));
    const Eigen::MatrixXd samples = sample_tensor(time, space, v);
    const Eigen::MatrixXd coeffs = tensor_coefficients_tx(time, space, samples);
    const SpaceTimeErrors image = tensor_error(
        time, space, coeffs, [](double, const Point&) { return 0.0; });
    double input = 0.0;
    for (std::size_t q = 0; q < time.sample_times().size(); ++q)
      for (std::size_t m = 0; m < space.sample_points().size(); ++m) {
        const double s = v(time.sample_times()[q], space.sample_points()[m]);
        input += time.sample_weights()[q] * space.sample_weights()[m] * s * s;
      }
    ratios.push_back(image.l2l2 / std::sqrt(input));
  }
  for (double r : ratios) CHECK(r < 2.0);
  CHECK(*std::max_element(ratios.begin(), ratios.end()) /
            *std::min_element(ratios.begin(), ratios.end()) <
        1.2);
}

TEST_CASE("slice-wise dual norm error rate in space") {
  // global-in-space dual norm of the tensor error at the time samples,
  // L2-summed in time; smooth zero-trace data gives order k_x + 2
  const auto v = [](double t, const Point& x) {
    return std::exp(-t) * std::sin(M_PI * x[0]);
  };
  std::vector<double> errors;
  for (int level = 0; level < 3; ++level) {
    const int n = 4 << level;
    const TimeOps time(0.0, 1.0, n, 2);  // time degree above the spatial one
    auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(n));
    const SpaceOps space(make_lagrange_space(mesh, 1));
    const Eigen::MatrixXd samples = sample_tensor(time, space, v);
    const Eigen::MatrixXd coeffs = tensor_coefficients_tx(time, space, samples);
    const NegNormSolver solver = global_negnorm(mesh, 1);

    const Eigen::MatrixXd at_times = time.basis_at_samples().transpose() * coeffs;
    double total = 0.0;
    for (std::size_t q = 0; q < time.sample_times().size(); ++q) {
      const double t = time.sample_times()[q];
      FEFunction slice(space.space_ptr());
      for (int i = 0; i < space.num_nodes(); ++i)
        slice.coeffs()[i] = at_times(static_cast<Eigen::Index>(q), i);
      DualFunctional residual =
          functional_from_density([&, t](const Point& x) { return v(t, x); });
      residual.fe_terms.emplace_back(slice, -1.0);
      const double value = solver.eval(residual);
      total += time.sample_weights()[q] * value * value;
    }
    errors.push_back(std::sqrt(total));
  }
  const double rate = std::log2(errors[errors.size() - 2] / errors.back());
  CHECK(rate > 2.6);
  CHECK(rate < 3.6);
}
