// Construction of the reference-simplex dual basis: for every Bernstein
// basis function b_alpha of degree k a polynomial p_alpha = b_alpha z_alpha
// of degree 3k with <p_alpha, b_beta> = delta_{alpha,beta}, obtained from
// the ansatz z_alpha = (d+k)!/k! + q_alpha - sum_mu b_mu q_mu by solving a
// gauged linear system for the q_alpha.

#pragma once

#include <Eigen/Dense>

#include "szinterp/bpoly.hpp"

namespace szinterp {

struct DualBasisTable {
  int d = 0;
  int k = 0;
  std::vector<BPoly> q;  // degree k,  one per multi-index of degree k
  std::vector<BPoly> z;  // degree 2k
  std::vector<BPoly> p;  // degree 3k
};

/// Gauged square system for the stacked Bernstein coefficients of (q_alpha).
/// Rows: the N^2-N off-diagonal equations
///   <b_alpha (q_alpha - qbar), b_beta> = -((d+k)!/k!) <b_alpha, b_beta>
/// followed by N gauge rows forcing the coefficient-wise sum of the q_alpha
/// to vanish (one representative of the quotient; p_alpha is unaffected by
/// the choice).
struct DualSystem {
  int d = 0;
  int k = 0;
  int basis_size = 0;  // N = dim P_k
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

/// Supported envelope: d in {1,2}, k in {1,2,3}.  Throws std::domain_error
/// outside it.
DualSystem build_dual_system(int d, int k);

/// Solves the gauged system, assembles z_alpha and p_alpha and verifies the
/// defining identities before returning.  Throws std::runtime_error if the
/// solve or the verification fails.
DualBasisTable solve_dual_basis(int d, int k);

/// Closed form for k = 1: q_{e_l} = (d+1)(d+3)(d+4)/2 * lambda_l.  Used as
/// an independent oracle against solve_dual_basis.
DualBasisTable tantardini_k1(int d);

struct DualBasisReport {
  double biorthogonality = 0.0;  // max |<p_a, b_b> - delta|
  double sum_identity = 0.0;     // max coefficient deviation of sum p from (d+k)!/k!
  double symmetry = 0.0;         // max mismatch under coordinate permutations
  double product = 0.0;          // max |p_a - b_a z_a| coefficient-wise
  double diagonal = 0.0;         // residual of the recovered diagonal identity
};

DualBasisReport verify_dual_basis(const DualBasisTable& table);

/// Solved table cached per (d, k); immutable and shareable across threads.
const DualBasisTable& dual_basis_table(int d, int k);

}  // namespace szinterp
