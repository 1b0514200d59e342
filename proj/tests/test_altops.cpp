// Comparison operators: the L2-projection and the vertex-patch operator
// (self-adjointness, ellipticity, reduced reproduction order, locality).

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "szinterp/altops.hpp"
#include "szinterp/experiments.hpp"

using namespace szinterp;

namespace {

FEFunction random_zero_trace(std::shared_ptr<const LagrangeSpace> space, std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  FEFunction f(space);
  for (int i : space->interior_nodes()) f.coeffs()[i] = unit(rng);
  return f;
}

}  // namespace

TEST_CASE("l2 projection reproduces discrete functions and is self-adjoint") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(6));
  for (int k = 1; k <= 3; ++k) {
    auto space = make_lagrange_space(mesh, k);
    const L2Projection pi2(space);
    std::mt19937 rng(3 + k);

    const FEFunction vh = random_zero_trace(space, rng);
    const FEFunction pvh = pi2.apply(functional_from_fe(vh));
    CHECK((pvh.coeffs() - vh.coeffs()).cwiseAbs().maxCoeff() <= 1e-10);

    for (int trial = 0; trial < 5; ++trial) {
      const FEFunction v = random_zero_trace(space, rng);
      const FEFunction w = random_zero_trace(space, rng);
      const double lhs = fe_dot_exact(pi2.apply(functional_from_fe(v)), w);
      const double rhs = fe_dot_exact(v, pi2.apply(functional_from_fe(w)));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("l2 projection of zero data is exactly zero") {
  // keeps the time stepping of the heat study at the zero solution
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(4));
  auto space = make_lagrange_space(mesh, 2);
  const L2Projection pi2(space);
  const FEFunction zero = pi2.apply(functional_from_density([](const Point&) { return 0.0; }));
  CHECK(zero.coeffs().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("l2 projection is the best approximation") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(5));
  auto space = make_lagrange_space(mesh, 1);
  const L2Projection pi2(space);
  const GlobalDualBasis basis = assemble_psi(space, dual_basis_table(1, 1));
  const ScalarFn f = [](const Point& x) { return std::sin(M_PI * x[0]) + 0.3 * x[0] * x[0]; };
  const VectorFn df = [](const Point& x) {
    return std::array<double, 2>{M_PI * std::cos(M_PI * x[0]) + 0.6 * x[0], 0.0};
  };
  const ErrorNorms best = fe_error(pi2.apply(functional_from_density(f)), f, df, 20);
  const ErrorNorms sz = fe_error(apply_pi0(basis, functional_from_density(f)), f, df, 20);
  CHECK(best.l2 <= sz.l2 + 1e-14);
}

TEST_CASE("lowest-order operator matches the closed form") {
  auto mesh = std::make_shared<const SimplicialMesh>(
      interval_mesh(std::vector<double>{0.2, 0.45, 0.8}));
  auto space = make_lagrange_space(mesh, 1);
  const ClementOperator clement(space);
  const ScalarFn f = [](const Point& x) { return std::cos(2.0 * x[0]); };
  const FEFunction cf = clement.apply(functional_from_density(f), 20);

  // C v = sum over interior nodes of <v, b_i>/<1, b_i> b_i for k = 1
  for (int i : space->interior_nodes()) {
    const double vi = pair_functional(functional_from_density(f), basis_patch(*space, i), 20);
    const double mi = basis_integral(*space, i);
    CHECK(cf.coeffs()[i] == doctest::Approx(vi / mi).epsilon(1e-12));
  }
  for (int i = 0; i < space->num_nodes(); ++i)
    if (space->node_on_boundary(i)) CHECK(cf.coeffs()[i] == 0.0);
}

TEST_CASE("identity on the lower-degree zero-trace space") {
  for (int d = 1; d <= 2; ++d)
    for (int k = 2; k <= 3; ++k) {
      auto mesh = d == 1 ? std::make_shared<const SimplicialMesh>(interval_mesh(5))
                         : std::make_shared<const SimplicialMesh>(uniform_refine(square_mesh(2)));
      auto space = make_lagrange_space(mesh, k);
      auto low = make_lagrange_space(mesh, k - 1);
      const ClementOperator clement(space);
      std::mt19937 rng(7 + 10 * d + k);
      for (int trial = 0; trial < 3; ++trial) {
        const FEFunction vlow = random_zero_trace(low, rng);
        const FEFunction v = interpolate(space, [&](const Point& x) { return vlow.eval(x); });
        const FEFunction cv = clement.apply(functional_from_fe(v));
        CAPTURE(d);
        CAPTURE(k);
        CHECK((cv.coeffs() - v.coeffs()).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
}

TEST_CASE("constants on interior simplices") {
  auto mesh = std::make_shared<const SimplicialMesh>(uniform_refine(square_mesh(2)));
  for (int k = 1; k <= 2; ++k) {
    auto space = make_lagrange_space(mesh, k);
    const ClementOperator clement(space);
    const FEFunction c1 = clement.apply(functional_from_density([](const Point&) { return 1.0; }));
    CHECK(max_deviation_on_interior(c1, 1.0, 20) <= 1e-10);
  }
}

TEST_CASE("self-adjointness and ellipticity") {
  for (int d = 1; d <= 2; ++d)
    for (int k = 1; k <= 2; ++k) {
      auto mesh = d == 1 ? std::make_shared<const SimplicialMesh>(interval_mesh(6))
                         : std::make_shared<const SimplicialMesh>(uniform_refine(square_mesh(2)));
      auto space = make_lagrange_space(mesh, k);
      const ClementOperator clement(space);
      std::mt19937 rng(11 + 10 * d + k);
      const double lower = static_cast<double>(k) / (2 * k + d);
      for (int trial = 0; trial < 50; ++trial) {
        const FEFunction v = random_zero_trace(space, rng);
        const FEFunction cv = clement.apply(functional_from_fe(v));
        const double energy = fe_dot_exact(cv, v);
        const double norm2 = fe_dot_exact(v, v);
        CAPTURE(d);
        CAPTURE(k);
        CHECK(energy >= lower * norm2 - 1e-10 * norm2);
        CHECK(energy <= norm2 + 1e-10 * norm2);
        if (trial < 10) {
          const FEFunction w = random_zero_trace(space, rng);
          const FEFunction cw = clement.apply(functional_from_fe(w));
          CHECK(fe_dot_exact(cv, w) ==
                doctest::Approx(fe_dot_exact(v, cw)).epsilon(1e-10));
        }
      }
    }
}

TEST_CASE("composition with the l2 projection") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(5));
  for (int k = 1; k <= 2; ++k) {
    auto space = make_lagrange_space(mesh, k);
    const ClementOperator clement(space);
    const L2Projection pi2(space);
    const ScalarFn f = [](const Point& x) { return std::exp(x[0]) * std::sin(2.0 * x[0]); };
    const FEFunction cf = clement.apply(functional_from_density(f), 24);
    const FEFunction cpf =
        clement.apply(functional_from_fe(pi2.apply(functional_from_density(f), 24)));
    const FEFunction pcf = pi2.apply(functional_from_fe(cf));
    CHECK((cpf.coeffs() - cf.coeffs()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((pcf.coeffs() - cf.coeffs()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("locality of the vertex-patch operator") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(8));
  auto space = make_lagrange_space(mesh, 2);
  const ClementOperator clement(space);
  const ScalarFn bump = [](const Point& x) {
    return (x[0] > 3.0 / 8.0 && x[0] < 4.0 / 8.0) ? 1.0 : 0.0;
  };
  const FEFunction image = clement.apply(functional_from_density(bump), 40);
  std::set<int> allowed;
  for (int t : mesh->simplex_neighborhood(3))
    for (int i : space->local_to_global(t)) allowed.insert(i);
  for (int i = 0; i < space->num_nodes(); ++i)
    if (!allowed.count(i)) CHECK(std::abs(image.coeffs()[i]) <= 1e-13);
}

TEST_CASE("not a projection onto the full degree") {
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(5));
  for (int k = 1; k <= 2; ++k) {
    auto space = make_lagrange_space(mesh, k);
    const ClementOperator clement(space);
    std::mt19937 rng(17 + k);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const FEFunction v = random_zero_trace(space, rng);
      const FEFunction cv = clement.apply(functional_from_fe(v));
      FEFunction diff = cv;
      diff.coeffs() -= v.coeffs();
      worst = std::max(worst, fe_norm_exact(diff, NormType::L2));
    }
    CHECK(worst > 1e-6);
  }
}
