// The OpenMP kernels against the serial reference: identical bits for
// operator application, norms and patch solves.

#include <doctest.h>

#include <cmath>

#include "szinterp/experiments.hpp"
#include "szinterp/parallel.hpp"

using namespace szinterp;

namespace {

struct ModeGuard {
  ExecMode saved = exec_mode();
  ~ModeGuard() { set_exec_mode(saved); }
};

}  // namespace

TEST_CASE("parallel_sum reduces in index order") {
  ModeGuard guard;
  std::vector<double> items(1000);
  for (std::size_t i = 0; i < items.size(); ++i)
    items[i] = std::sin(0.1 * static_cast<double>(i)) * 1e-3 + 1.0;
  set_exec_mode(ExecMode::Serial);
  const double serial = parallel_sum(static_cast<std::ptrdiff_t>(items.size()),
                                     [&](std::ptrdiff_t i) { return items[static_cast<std::size_t>(i)]; });
  set_exec_mode(ExecMode::OpenMP);
  const double parallel = parallel_sum(static_cast<std::ptrdiff_t>(items.size()),
                                       [&](std::ptrdiff_t i) { return items[static_cast<std::size_t>(i)]; });
  CHECK(serial == parallel);  // bitwise
}

TEST_CASE("operator application is bitwise identical across modes") {
  ModeGuard guard;
  auto mesh = std::make_shared<const SimplicialMesh>(uniform_refine(square_mesh(2)));
  auto space = make_lagrange_space(mesh, 2);
  const DualFunctional f = functional_from_density(
      [](const Point& x) { return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]); });

  set_exec_mode(ExecMode::Serial);
  const GlobalDualBasis basis_serial = assemble_psi(space, dual_basis_table(2, 2));
  const FEFunction serial = apply_pi0(basis_serial, f);
  const double norm_serial = fe_norm(serial, NormType::L2, 10);

  set_exec_mode(ExecMode::OpenMP);
  const GlobalDualBasis basis_parallel = assemble_psi(space, dual_basis_table(2, 2));
  const FEFunction parallel = apply_pi0(basis_parallel, f);
  const double norm_parallel = fe_norm(parallel, NormType::L2, 10);

  CHECK((serial.coeffs() - parallel.coeffs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(norm_serial == norm_parallel);
}

TEST_CASE("identical configs give bit-identical tables") {
  ModeGuard guard;
  ExperimentConfig config;
  config.op = "Pi0";
  config.d = 1;
  config.k = 1;
  config.levels = 3;
  set_exec_mode(ExecMode::OpenMP);
  const std::string first = run_converge(config).to_csv();
  const std::string second = run_converge(config).to_csv();
  set_exec_mode(ExecMode::Serial);
  const std::string serial = run_converge(config).to_csv();
  CHECK(first == second);
  CHECK(first == serial);
}

TEST_CASE("boundary correction and patch norms agree across modes") {
  ModeGuard guard;
  auto mesh = std::make_shared<const SimplicialMesh>(interval_mesh(6));
  auto space = make_lagrange_space(mesh, 2);
  const DualFunctional f =
      functional_from_density([](const Point& x) { return std::cos(3.0 * x[0]); });

  set_exec_mode(ExecMode::Serial);
  const CorrectedDualBasis cs = boundary_correction(assemble_psi(space, dual_basis_table(1, 2)));
  const FEFunction us = apply_pi(cs, f);
  const double patch_serial = patch_negnorm(mesh, mesh->vertex_patch(3), 2).eval(f);

  set_exec_mode(ExecMode::OpenMP);
  const CorrectedDualBasis cp = boundary_correction(assemble_psi(space, dual_basis_table(1, 2)));
  const FEFunction up = apply_pi(cp, f);
  const double patch_parallel = patch_negnorm(mesh, mesh->vertex_patch(3), 2).eval(f);

  CHECK((us.coeffs() - up.coeffs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(patch_serial == patch_parallel);
}
