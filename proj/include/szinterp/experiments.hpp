// Experiment drivers: convergence-rate studies for the interpolation
// operators, the semi-discrete heat equation with Crank-Nicolson stepping,
// the rough right-hand-side smoothing study, the tensor space-time study,
// and the machine-readable identity verification suite.

#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "szinterp/negnorm.hpp"
#include "szinterp/szops.hpp"

namespace szinterp {

struct ExperimentConfig {
  std::string op = "Pi0";  // Pi0 | Pi | Pi0star | Pi2 | Clement | PiTensor
  int d = 1;
  int k = 1;
  int levels = 6;
  std::string preset = "sin";
  std::string out;        // CSV path; empty writes to stdout
  std::string mesh_file;  // optional base mesh (JSON)
  int base_n = 4;
  int base_refines = 0;   // uniform refinements applied to the base mesh
  NegNormOptions negnorm;
  double t_end = 0.25;          // heat study
  int kt = 1;                   // tensor study
  int kx = 1;
  bool refine_space_only = false;
};

ExperimentConfig config_from_json(const nlohmann::json& j);

/// A named test input: the functional fed to the operators plus the exact
/// value/gradient when the preset is a function.
struct Preset {
  std::string name;
  ScalarFn value;
  VectorFn gradient;
  DualFunctional functional;
  bool is_function = true;
};

Preset make_preset(const std::string& name, int d);

struct RateTable {
  std::vector<int> level;
  std::vector<double> h;
  std::vector<std::optional<double>> err_l2, err_h1, err_wm1;

  void add_row(int lvl, double hh, std::optional<double> l2, std::optional<double> h1,
               std::optional<double> wm1);
  /// Schema: level,h,err_L2,rate_L2,err_H1,rate_H1,err_Wm1,rate_Wm1 with
  /// empty cells for unrecorded norms; rates start at the second row.
  std::string to_csv() const;
  /// log2(e_{n-1}/e_n) at the final level; nullopt when undefined.
  static std::optional<double> final_rate(const std::vector<std::optional<double>>& err);
};

RateTable run_converge(const ExperimentConfig& config);
RateTable run_heat(const ExperimentConfig& config);
RateTable run_smooth(const ExperimentConfig& config);
RateTable run_spacetime(const ExperimentConfig& config);

/// Identity suite over the supported envelope; "all_pass" reports the gate.
nlohmann::json run_verify();

/// Reference-simplex dual basis coefficients as JSON for cross checks.
nlohmann::json dump_dual_basis(int d, int k);

/// Identity-error helpers shared by the suite and the tests.
double biorthogonality_error(const GlobalDualBasis& basis);
double biorthogonality_error(const CorrectedDualBasis& basis);
/// max |sum_i <1,b_i> psi_i - 1| at random points (fixed seed).
double partition_identity_error(const GlobalDualBasis& basis, int num_points);
/// Same identity restricted to interior elements, corrected weights.
double interior_mass_identity_error(const CorrectedDualBasis& basis, int points_per_element);
/// max |psi~_i| over boundary facet sample points.
double corrected_trace_error(const CorrectedDualBasis& basis, int points_per_facet);
/// max over interior elements and sample points of |f - reference|.
double max_deviation_on_interior(const FEFunction& f, double reference, int points_per_element);

}  // namespace szinterp
