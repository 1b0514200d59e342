// Timing comparison of the OpenMP kernels against the serial reference:
// node-wise operator application, element-wise error norms, and the
// per-patch dual-norm sweep.  Results are checked to be identical bits
// before the timings are printed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "szinterp/experiments.hpp"
#include "szinterp/parallel.hpp"

using namespace szinterp;

namespace {

double time_best_of(int repeats, const std::function<void()>& body) {
  double best = 1e30;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

struct Case {
  std::string name;
  std::function<double()> run;  // returns a checksum
};

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;

  auto mesh2 = std::make_shared<const SimplicialMesh>(
      uniform_refine(uniform_refine(square_mesh(8))));
  auto space2 = make_lagrange_space(mesh2, 2);
  const GlobalDualBasis basis2 = assemble_psi(space2, dual_basis_table(2, 2));
  const ScalarFn wave2 = [](const Point& x) {
    return std::sin(M_PI * x[0]) * std::sin(2.0 * M_PI * x[1]);
  };
  const VectorFn grad2 = [](const Point& x) {
    return std::array<double, 2>{M_PI * std::cos(M_PI * x[0]) * std::sin(2.0 * M_PI * x[1]),
                                 2.0 * M_PI * std::sin(M_PI * x[0]) *
                                     std::cos(2.0 * M_PI * x[1])};
  };
  const FEFunction interpolant2 = interpolate(space2, wave2);

  auto mesh1 = std::make_shared<const SimplicialMesh>(interval_mesh(256));
  const ScalarFn wave1 = [](const Point& x) { return std::sin(3.0 * M_PI * x[0]); };

  std::vector<Case> cases;
  cases.push_back({"apply_pi0, 2048 triangles, k=2", [&]() {
                     const FEFunction u = apply_pi0(basis2, functional_from_density(wave2));
                     return u.coeffs().sum();
                   }});
  cases.push_back({"error norms, 2048 triangles, k=2", [&]() {
                     const ErrorNorms e = fe_error(interpolant2, wave2, grad2, 14);
                     return e.l2 + e.h1semi;
                   }});
  cases.push_back({"patch dual-norm sweep, 256 intervals", [&]() {
                     double sum = 0.0;
                     for (int v = 40; v < 72; ++v)
                       sum += patch_negnorm(mesh1, mesh1->vertex_patch(v), 1)
                                  .eval(functional_from_density(wave1));
                     return sum;
                   }});

  std::printf("%-38s %12s %12s %9s\n", "kernel", "serial [s]", "openmp [s]", "speedup");
  for (const Case& c : cases) {
    set_exec_mode(ExecMode::Serial);
    const double checksum_serial = c.run();
    const double serial = time_best_of(repeats, [&]() { (void)c.run(); });
    set_exec_mode(ExecMode::OpenMP);
    const double checksum_parallel = c.run();
    const double parallel = time_best_of(repeats, [&]() { (void)c.run(); });
    if (checksum_serial != checksum_parallel) {
      std::printf("MISMATCH in %s: %.17g vs %.17g\n", c.name.c_str(), checksum_serial,
                  checksum_parallel);
      return 1;
    }
    std::printf("%-38s %12.4f %12.4f %8.2fx\n", c.name.c_str(), serial, parallel,
                serial / parallel);
  }
  return 0;
}
