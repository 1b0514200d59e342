// Dual basis construction: system shapes, the defining identities over the
// full envelope, the k = 1 closed form as an independent oracle, quotient
// invariance, and sensitivity of the verifier.

#include <doctest.h>

#include <random>

#include "szinterp/dualbasis.hpp"

using namespace szinterp;

TEST_CASE("gauged system shapes") {
  const DualSystem s11 = build_dual_system(1, 1);
  CHECK(s11.basis_size == 2);
  CHECK(s11.matrix.rows() == 4);  // 2 off-diagonal equations + 2 gauge rows
  CHECK(s11.matrix.cols() == 4);

  const DualSystem s21 = build_dual_system(2, 1);
  CHECK(s21.basis_size == 3);
  CHECK(s21.matrix.rows() == 9);  // 6 + 3

  const DualSystem s12 = build_dual_system(1, 2);
  CHECK(s12.basis_size == 3);
  CHECK(s12.matrix.rows() == 9);

  CHECK_THROWS_AS(build_dual_system(3, 1), std::domain_error);
  CHECK_THROWS_AS(build_dual_system(1, 4), std::domain_error);
}

TEST_CASE("solved tables satisfy the defining identities") {
  for (int d = 1; d <= 2; ++d)
    for (int k = 1; k <= 3; ++k) {
      const DualBasisTable table = solve_dual_basis(d, k);
      const DualBasisReport report = verify_dual_basis(table);
      CAPTURE(d);
      CAPTURE(k);
      CHECK(report.biorthogonality <= 1e-10);
      CHECK(report.sum_identity <= 1e-10);
      CHECK(report.symmetry <= 1e-12);
      CHECK(report.product <= 1e-12);
      CHECK(report.diagonal <= 1e-11);

      const double expected_sum = static_cast<double>(factorial(d + k)) /
                                  static_cast<double>(factorial(k));
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.p.front().coeffs().size());
      for (const BPoly& p : table.p) sum += p.coeffs();
      CHECK((sum.array() - expected_sum).abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("closed form for k = 1") {
  SUBCASE("q coefficients") {
    const DualBasisTable t1 = tantardini_k1(1);
    CHECK(t1.q[0].coeffs()[0] == doctest::Approx(20.0));  // 1! * (2*4*5)/2
    CHECK(t1.q[0].coeffs()[1] == doctest::Approx(0.0));
    const DualBasisTable t2 = tantardini_k1(2);
    CHECK(t2.q[1].coeffs()[1] == doctest::Approx(90.0));  // 2! * (3*5*6)/2
  }

  SUBCASE("closed form passes the verifier") {
    for (int d = 1; d <= 2; ++d) {
      const DualBasisReport report = verify_dual_basis(tantardini_k1(d));
      CHECK(report.biorthogonality <= 1e-12);
      CHECK(report.sum_identity <= 1e-12);
      CHECK(report.symmetry <= 1e-13);
    }
  }

  SUBCASE("solver reproduces the closed-form p exactly") {
    for (int d = 1; d <= 2; ++d) {
      const DualBasisTable solved = solve_dual_basis(d, 1);
      const DualBasisTable closed = tantardini_k1(d);
      for (std::size_t a = 0; a < solved.p.size(); ++a) {
        CHECK((solved.p[a].coeffs() - closed.p[a].coeffs()).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((solved.z[a].coeffs() - closed.z[a].coeffs()).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }

  SUBCASE("pointwise closed form, d = 1") {
    // p for node l is 2 lambda_l (1 + 10 (lambda_l - lambda_0^2 - lambda_1^2)).
    const DualBasisTable solved = solve_dual_basis(1, 1);
    for (int sample = 0; sample <= 50; ++sample) {
      const double x = static_cast<double>(sample) / 50.0;
      const std::vector<double> lambda{1.0 - x, x};
      for (int l = 0; l < 2; ++l) {
        const double ll = lambda[static_cast<std::size_t>(l)];
        const double expected =
            2.0 * ll * (1.0 + 10.0 * (ll - lambda[0] * lambda[0] - lambda[1] * lambda[1]));
        CHECK(solved.p[static_cast<std::size_t>(l)].eval(lambda) ==
              doctest::Approx(expected).epsilon(1e-11));
      }
    }
  }

  SUBCASE("pointwise closed form, d = 2") {
    const DualBasisTable solved = solve_dual_basis(2, 1);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int sample = 0; sample < 50; ++sample) {
      double a = unit(rng), b = unit(rng) * (1.0 - a);
      const std::vector<double> lambda{a, b, 1.0 - a - b};
      double sq = 0.0;
      for (double l : lambda) sq += l * l;
      for (int l = 0; l < 3; ++l) {
        const double ll = lambda[static_cast<std::size_t>(l)];
        const double expected = 6.0 * ll * (1.0 + 15.0 * (ll - sq));
        CHECK(solved.p[static_cast<std::size_t>(l)].eval(lambda) ==
              doctest::Approx(expected).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("coset invariance of the assembled table") {
  // Adding one fixed r in P_k to every q_alpha leaves z and p unchanged.
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int d = 1; d <= 2; ++d)
    for (int k = 1; k <= 2; ++k) {
      const DualBasisTable base = solve_dual_basis(d, k);
      Eigen::VectorXd shift(base.q.front().coeffs().size());
      for (Eigen::Index c = 0; c < shift.size(); ++c) shift[c] = unit(rng);

      std::vector<BPoly> shifted = base.q;
      for (BPoly& q : shifted) q.coeffs() += shift;
      BPoly qbar(d, 2 * k);
      for (std::size_t mu = 0; mu < shifted.size(); ++mu)
        qbar.coeffs() += bpoly_product(bpoly_unit(d, k, static_cast<int>(mu)),
                                       shifted[mu]).coeffs();
      const double ck_inv = static_cast<double>(factorial(d + k)) /
                            static_cast<double>(factorial(k));
      for (std::size_t a = 0; a < shifted.size(); ++a) {
        BPoly z = bpoly_constant(d, 2 * k, ck_inv);
        z.coeffs() += degree_raise(shifted[a], 2 * k).coeffs();
        z.coeffs() -= qbar.coeffs();
        CHECK((z.coeffs() - base.z[a].coeffs()).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
}

TEST_CASE("verifier flags a corrupted table") {
  DualBasisTable table = solve_dual_basis(1, 1);
  table.p[0].coeffs()[0] += 1e-3;
  const DualBasisReport report = verify_dual_basis(table);
  CHECK(report.biorthogonality >= 1e-5);

  DualBasisTable table2 = solve_dual_basis(2, 2);
  table2.p[2].coeffs()[5] += 1e-3;
  CHECK(verify_dual_basis(table2).biorthogonality >= 1e-6);
}
