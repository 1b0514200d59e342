// Bernstein algebra on the reference simplex: enumeration, evaluation,
// products, degree raising, derivatives and exact integrals, checked
// against pointwise and finite-difference oracles.

#include <doctest.h>

#include <random>

#include "szinterp/bpoly.hpp"

using namespace szinterp;

namespace {

std::vector<double> random_lambda(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> lambda(static_cast<std::size_t>(d + 1));
  double sum = 0.0;
  for (auto& l : lambda) {
    l = unit(rng);
    sum += l;
  }
  for (auto& l : lambda) l /= sum;
  double partial = 0.0;
  for (std::size_t j = 0; j + 1 < lambda.size(); ++j) partial += lambda[j];
  lambda.back() = 1.0 - partial;
  return lambda;
}

BPoly random_poly(int d, int m, std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  BPoly p(d, m);
  for (Eigen::Index a = 0; a < p.coeffs().size(); ++a) p.coeffs()[a] = unit(rng);
  return p;
}

}  // namespace

TEST_CASE("multi-index enumeration follows the canonical order") {
  CHECK(multi_indices(1, 1) == std::vector<MultiIndex>{{1, 0}, {0, 1}});
  CHECK(multi_indices(2, 1) == std::vector<MultiIndex>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const auto& deg2 = multi_indices(2, 2);
  REQUIRE(deg2.size() == 6);
  CHECK(deg2.front() == MultiIndex{2, 0, 0});
  CHECK(deg2.back() == MultiIndex{0, 0, 2});
  for (std::size_t a = 0; a < deg2.size(); ++a)
    CHECK(multi_index_position(deg2[a]) == static_cast<int>(a));
}

TEST_CASE("bernstein evaluation") {
  CHECK(bernstein_eval({0, 2}, std::vector<double>{0.25, 0.75}) == doctest::Approx(0.5625));
  const double third = 1.0 / 3.0;
  CHECK(bernstein_eval({1, 1, 0}, std::vector<double>{third, third, third}) ==
        doctest::Approx(2.0 / 9.0));
  CHECK_THROWS_AS(bernstein_eval({1, 0}, std::vector<double>{0.5, 0.6}),
                  std::invalid_argument);
}

TEST_CASE("partition of unity at random points") {
  std::mt19937 rng(7);
  for (int d = 1; d <= 2; ++d)
    for (int k = 1; k <= 3; ++k)
      for (int trial = 0; trial < 100; ++trial) {
        const auto lambda = random_lambda(d, rng);
        double sum = 0.0;
        for (const auto& alpha : multi_indices(d, k)) sum += bernstein_eval(alpha, lambda);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
      }
}

TEST_CASE("product matches the pointwise oracle") {
  // b_{(1,0)} b_{(0,1)} = lambda_0 lambda_1 = (1/2) b_{(1,1)}
  const BPoly product = bpoly_product(bpoly_unit(1, 1, 0), bpoly_unit(1, 1, 1));
  CHECK(product.degree() == 2);
  CHECK(product.coeffs()[0] == doctest::Approx(0.0));
  CHECK(product.coeffs()[1] == doctest::Approx(0.5));
  CHECK(product.coeffs()[2] == doctest::Approx(0.0));

  std::mt19937 rng(11);
  for (int d = 1; d <= 2; ++d) {
    const BPoly a = random_poly(d, 2, rng);
    const BPoly b = random_poly(d, 3, rng);
    const BPoly ab = bpoly_product(a, b);
    for (int trial = 0; trial < 5; ++trial) {
      const auto lambda = random_lambda(d, rng);
      CHECK(ab.eval(lambda) ==
            doctest::Approx(a.eval(lambda) * b.eval(lambda)).epsilon(1e-13));
    }
  }
}

TEST_CASE("constant times a polynomial raises the degree only") {
  std::mt19937 rng(13);
  const BPoly p = random_poly(2, 2, rng);
  const BPoly q = bpoly_product(bpoly_constant(2, 0, 1.0), p);
  CHECK(q.degree() == 2);
  CHECK((q.coeffs() - p.coeffs()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("degree raising preserves values") {
  std::mt19937 rng(17);
  const BPoly p = random_poly(1, 1, rng);
  const BPoly raised = degree_raise(p, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const auto lambda = random_lambda(1, rng);
    CHECK(raised.eval(lambda) == doctest::Approx(p.eval(lambda)).epsilon(1e-13));
  }
  const BPoly same = degree_raise(p, 1);
  CHECK((same.coeffs() - p.coeffs()).cwiseAbs().maxCoeff() == 0.0);
  const BPoly one = degree_raise(bpoly_constant(2, 0, 1.0), 3);
  CHECK((one.coeffs().array() - 1.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("barycentric derivatives") {
  // d/dlambda_0 of b_{(2,0)} = 2 b_{(1,0)}
  const auto parts = bpoly_grad(bpoly_unit(1, 2, 0));
  CHECK(parts[0].coeffs()[0] == doctest::Approx(2.0));
  CHECK(parts[0].coeffs()[1] == doctest::Approx(0.0));
  CHECK(parts[1].coeffs().cwiseAbs().maxCoeff() == 0.0);

  const auto zero = bpoly_grad(bpoly_constant(2, 0, 4.0));
  for (const auto& comp : zero) CHECK(comp.coeffs().size() == 1);

  // Finite differences along lambda_j - lambda_last directions.
  std::mt19937 rng(19);
  for (int d = 1; d <= 2; ++d) {
    const BPoly p = random_poly(d, 3, rng);
    const auto grad = bpoly_grad(p);
    for (int trial = 0; trial < 5; ++trial) {
      auto lambda = random_lambda(d, rng);
      const double step = 1e-6;
      for (int j = 0; j < d; ++j) {
        auto up = lambda, down = lambda;
        up[static_cast<std::size_t>(j)] += step;
        up.back() -= step;
        down[static_cast<std::size_t>(j)] -= step;
        down.back() += step;
        const double fd = (p.eval(up) - p.eval(down)) / (2 * step);
        const double exact = grad[static_cast<std::size_t>(j)].eval(lambda) -
                             grad[static_cast<std::size_t>(d)].eval(lambda);
        CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("reference integrals") {
  CHECK(integrate_ref(bpoly_unit(2, 2, 0)) == doctest::Approx(1.0 / 12.0));
  CHECK(integrate_ref(bpoly_constant(1, 0, 1.0)) == doctest::Approx(1.0));
  CHECK(integrate_ref(bpoly_constant(2, 0, 1.0)) == doctest::Approx(0.5));
  // lambda_0 lambda_1 on the interval: int_0^1 x(1-x) dx = 1/6
  const BPoly p = bpoly_product(bpoly_unit(1, 1, 0), bpoly_unit(1, 1, 1));
  CHECK(integrate_ref(p) == doctest::Approx(1.0 / 6.0));
  // All basis functions of one degree share the same integral.
  for (int d = 1; d <= 2; ++d)
    for (int m = 1; m <= 6; ++m) {
      const int n = static_cast<int>(multi_indices(d, m).size());
      const double expected = integrate_ref(bpoly_unit(d, m, 0));
      for (int a = 1; a < n; ++a)
        CHECK(integrate_ref(bpoly_unit(d, m, a)) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("reference mass matrices") {
  const Eigen::MatrixXd& mass11 = ref_mass_matrix(1, 1, 1);
  CHECK(mass11(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(mass11(0, 1) == doctest::Approx(1.0 / 6.0));
  CHECK(mass11(1, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(mass11(1, 1) == doctest::Approx(1.0 / 3.0));

  for (int d = 1; d <= 2; ++d)
    for (int k = 1; k <= 3; ++k) {
      const Eigen::MatrixXd& mass = ref_mass_matrix(d, k, k);
      const double ck = static_cast<double>(factorial(k)) /
                        static_cast<double>(factorial(d + k));
      for (Eigen::Index r = 0; r < mass.rows(); ++r)
        CHECK(mass.row(r).sum() == doctest::Approx(ck).epsilon(1e-14));
      // positive definiteness
      Eigen::LLT<Eigen::MatrixXd> llt(mass);
      CHECK(llt.info() == Eigen::Success);
    }

  const Eigen::MatrixXd& mass2 = ref_mass_matrix(2, 1, 1);
  CHECK(mass2(0, 0) == doctest::Approx(mass2(1, 1)));
  CHECK(mass2(1, 1) == doctest::Approx(mass2(2, 2)));
}
