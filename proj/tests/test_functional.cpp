// Dual functionals and pairings: density, flux and atom parts, linearity,
// and exactness of the finite-element density route.

#include <doctest.h>

#include <cmath>
#include <random>

#include "szinterp/functional.hpp"

using namespace szinterp;

namespace {

PiecewisePoly hat_patch(const LagrangeSpace& space) {
  // the nodal basis function of the single interior node of interval_mesh(2)
  return basis_patch(space, space.interior_nodes()[0]);
}

}  // namespace

TEST_CASE("pairing examples on the two-element interval") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(2));
  auto space = make_lagrange_space(mesh, 1);
  const PiecewisePoly hat = hat_patch(*space);

  // <1, hat> = 1/2
  const DualFunctional one = functional_from_density([](const Point&) { return 1.0; });
  CHECK(pair_functional(one, hat, 8) == doctest::Approx(0.5));

  // point mass at the peak
  const DualFunctional atom = functional_from_atom({0.5, 0.0}, 1.0);
  CHECK(pair_functional(atom, hat, 8) == doctest::Approx(1.0));

  // constant flux pairs with the derivative of a zero-trace hat: zero
  const DualFunctional flux = functional_from_flux([](const Point&) {
    return std::array<double, 2>{1.0, 0.0};
  });
  CHECK(pair_functional(flux, hat, 8) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("atoms outside the domain are rejected") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(2));
  const DualFunctional bad = functional_from_atom({1.5, 0.0}, 1.0);
  CHECK_THROWS_AS(check_atoms(bad, *mesh), std::invalid_argument);
}

TEST_CASE("pairing is linear in the functional") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(4));
  auto space = make_lagrange_space(mesh, 2);
  const PiecewisePoly w = basis_patch(*space, space->interior_nodes()[2]);

  const ScalarFn f = [](const Point& x) { return std::cos(3.0 * x[0]); };
  const ScalarFn g = [](const Point& x) { return x[0] * x[0]; };
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = unit(rng), b = unit(rng);
    DualFunctional combined = functional_from_density(
        [=](const Point& x) { return a * f(x) + b * g(x); });
    const double lhs = pair_functional(combined, w, 14);
    const double rhs = a * pair_functional(functional_from_density(f), w, 14) +
                       b * pair_functional(functional_from_density(g), w, 14);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("finite element densities pair exactly") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(5));
  auto space = make_lagrange_space(mesh, 2);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  FEFunction v(space);
  for (Eigen::Index c = 0; c < v.coeffs().size(); ++c) v.coeffs()[c] = unit(rng);

  const PiecewisePoly w = basis_patch(*space, space->interior_nodes()[1]);
  // quadrature route through the callable evaluation
  const DualFunctional as_callable =
      functional_from_density([&](const Point& x) { return v.eval(x); });
  // exact route through the Bernstein Gram matrices
  const DualFunctional as_fe = functional_from_fe(v);
  const double quad = pair_functional(as_callable, w, 10);
  const double exact = pair_functional(as_fe, w, 10);
  CHECK(quad == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("finite element densities pair across mesh resolutions") {
  auto coarse = std::make_shared<const SimplicialMesh>(interval_mesh(3));
  auto fine = std::make_shared<const SimplicialMesh>(uniform_refine(*coarse));
  auto coarse_space = make_lagrange_space(coarse, 2);
  auto fine_space = make_lagrange_space(fine, 2);
  const FEFunction v = interpolate(coarse_space, [](const Point& x) {
    return x[0] * x[0] + 0.25 * x[0];
  });
  const FEFunction vf = interpolate(fine_space, [&](const Point& x) { return v.eval(x); });

  // coarse density against a fine-mesh weight, and the refined density
  // against a coarse-mesh weight, both match the same-mesh exact value
  const PiecewisePoly w_fine = basis_patch(*fine_space, fine_space->interior_nodes()[2]);
  const double coarse_vs_fine = pair_functional(functional_from_fe(v), w_fine, 12);
  const double same_fine = pair_functional(functional_from_fe(vf), w_fine, 12);
  CHECK(coarse_vs_fine == doctest::Approx(same_fine).epsilon(1e-12));

  const PiecewisePoly w_coarse = basis_patch(*coarse_space, coarse_space->interior_nodes()[1]);
  const double fine_vs_coarse = pair_functional(functional_from_fe(vf), w_coarse, 12);
  const double same_coarse = pair_functional(functional_from_fe(v), w_coarse, 12);
  CHECK(fine_vs_coarse == doctest::Approx(same_coarse).epsilon(1e-12));
}

TEST_CASE("piecewise polynomial evaluation is zero off the patch") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(4));
  auto space = make_lagrange_space(mesh, 1);
  const PiecewisePoly w = basis_patch(*space, space->interior_nodes()[0]);
  CHECK(w.eval({0.95, 0.0}) == 0.0);
  CHECK(w.eval({0.25, 0.0}) == doctest::Approx(1.0));
}
