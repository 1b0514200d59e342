#include "szinterp/dualbasis.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace szinterp {

namespace {

void check_envelope(int d, int k) {
  if (d < 1 || d > 2 || k < 1 || k > 3) {
    std::ostringstream msg;
    msg << "dual basis: unsupported (d,k) = (" << d << "," << k << ")";
    throw std::domain_error(msg.str());
  }
}

// prod_j binom(a_j + b_j, a_j), the combinatorial weight of b_a * b_b.
long long product_weight(const MultiIndex& a, const MultiIndex& b) {
  long long w = 1;
  for (std::size_t j = 0; j < a.size(); ++j) w *= binomial(a[j] + b[j], a[j]);
  return w;
}

MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex s(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) s[j] = a[j] + b[j];
  return s;
}

std::vector<std::vector<int>> permutations(int entries) {
  std::vector<int> perm(static_cast<std::size_t>(entries));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> all;
  do {
    all.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return all;
}

DualBasisTable assemble_from_q(int d, int k, std::vector<BPoly> q) {
  const auto& idx = multi_indices(d, k);
  const int n = static_cast<int>(idx.size());
  const double ck_inv = static_cast<double>(factorial(d + k)) /
                        static_cast<double>(factorial(k));

  // qbar = sum_mu b_mu q_mu, degree 2k.
  BPoly qbar(d, 2 * k);
  for (int mu = 0; mu < n; ++mu)
    qbar.coeffs() += bpoly_product(bpoly_unit(d, k, mu), q[static_cast<std::size_t>(mu)]).coeffs();

  DualBasisTable table;
  table.d = d;
  table.k = k;
  table.q = std::move(q);
  table.z.reserve(static_cast<std::size_t>(n));
  table.p.reserve(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    BPoly z = bpoly_constant(d, 2 * k, ck_inv);
    z.coeffs() += degree_raise(table.q[static_cast<std::size_t>(a)], 2 * k).coeffs();
    z.coeffs() -= qbar.coeffs();
    table.p.push_back(bpoly_product(bpoly_unit(d, k, a), z));
    table.z.push_back(std::move(z));
  }
  return table;
}

}  // namespace

DualSystem build_dual_system(int d, int k) {
  check_envelope(d, k);
  const auto& idx = multi_indices(d, k);
  const int n = static_cast<int>(idx.size());
  const auto& mass_kk = ref_mass_matrix(d, k, k);
  const auto& mass_2k_k = ref_mass_matrix(d, 2 * k, k);
  const auto& mass_3k_k = ref_mass_matrix(d, 3 * k, k);
  const double binom_2k_k = static_cast<double>(binomial(2 * k, k));
  const double binom_3k_2k = static_cast<double>(binomial(3 * k, 2 * k));
  const double ck_inv = static_cast<double>(factorial(d + k)) /
                        static_cast<double>(factorial(k));

  DualSystem sys;
  sys.d = d;
  sys.k = k;
  sys.basis_size = n;
  sys.matrix = Eigen::MatrixXd::Zero(n * n, n * n);
  sys.rhs = Eigen::VectorXd::Zero(n * n);

  // Unknown layout: x[mu*n + g] is the coefficient of b_g in q_mu.
  int row = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      for (int mu = 0; mu < n; ++mu) {
        for (int g = 0; g < n; ++g) {
          double entry = 0.0;
          if (mu == a) {
            // <b_a b_g, b_b>
            const MultiIndex ag = add(idx[static_cast<std::size_t>(a)],
                                      idx[static_cast<std::size_t>(g)]);
            entry += static_cast<double>(product_weight(idx[static_cast<std::size_t>(a)],
                                                        idx[static_cast<std::size_t>(g)])) /
                     binom_2k_k * mass_2k_k(multi_index_position(ag), b);
          }
          // -<b_a b_mu b_g, b_b>
          const MultiIndex am = add(idx[static_cast<std::size_t>(a)],
                                    idx[static_cast<std::size_t>(mu)]);
          const MultiIndex amg = add(am, idx[static_cast<std::size_t>(g)]);
          const double w = static_cast<double>(product_weight(idx[static_cast<std::size_t>(a)],
                                                              idx[static_cast<std::size_t>(mu)])) /
                           binom_2k_k *
                           static_cast<double>(product_weight(am, idx[static_cast<std::size_t>(g)])) /
                           binom_3k_2k;
          entry -= w * mass_3k_k(multi_index_position(amg), b);
          sys.matrix(row, mu * n + g) = entry;
        }
      }
      sys.rhs[row] = -ck_inv * mass_kk(a, b);
      ++row;
    }
  }
  // Gauge: coefficient-wise sum of the q_mu vanishes.
  for (int g = 0; g < n; ++g, ++row)
    for (int mu = 0; mu < n; ++mu) sys.matrix(row, mu * n + g) = 1.0;
  return sys;
}

DualBasisTable solve_dual_basis(int d, int k) {
  DualSystem sys = build_dual_system(d, k);
  const int n = sys.basis_size;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.matrix);
  if (!lu.isInvertible())
    throw std::runtime_error("solve_dual_basis: gauged system singular");
  Eigen::VectorXd x = lu.solve(sys.rhs);
  for (int refine = 0; refine < 2; ++refine)
    x += lu.solve(sys.rhs - sys.matrix * x);

  std::vector<BPoly> q;
  q.reserve(static_cast<std::size_t>(n));
  for (int mu = 0; mu < n; ++mu)
    q.emplace_back(d, k, x.segment(mu * n, n));

  // The exact solution is equivariant under coordinate permutations and the
  // gauge is permutation-invariant, so averaging over the group removes the
  // asymmetric part of the numerical error.
  const auto& idx = multi_indices(d, k);
  std::vector<BPoly> averaged(static_cast<std::size_t>(n), BPoly(d, k));
  const auto perms = permutations(d + 1);
  for (const auto& perm : perms) {
    for (int a = 0; a < n; ++a) {
      MultiIndex image(idx[static_cast<std::size_t>(a)].size());
      for (int j = 0; j <= d; ++j)
        image[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] =
            idx[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
      averaged[static_cast<std::size_t>(multi_index_position(image))].coeffs() +=
          permute_barycentric(q[static_cast<std::size_t>(a)], perm).coeffs();
    }
  }
  for (BPoly& poly : averaged) poly.coeffs() /= static_cast<double>(perms.size());

  DualBasisTable table = assemble_from_q(d, k, std::move(averaged));
  DualBasisReport report = verify_dual_basis(table);
  if (report.biorthogonality > 1e-10 || report.sum_identity > 1e-10 ||
      report.symmetry > 1e-10 || report.product > 1e-10) {
    std::ostringstream msg;
    msg << "solve_dual_basis(" << d << "," << k << "): verification failed,"
        << " biorth " << report.biorthogonality << " sum " << report.sum_identity
        << " symmetry " << report.symmetry << " product " << report.product;
    throw std::runtime_error(msg.str());
  }
  return table;
}

DualBasisTable tantardini_k1(int d) {
  // The closed-form weight (d+1)(d+3)(d+4)/2 is stated for integrals
  // normalized by the simplex measure; with <.,.> over the reference
  // simplex of volume 1/d! the biorthogonal scaling carries a factor d!.
  const double scale = static_cast<double>(factorial(d)) *
                       static_cast<double>((d + 1) * (d + 3) * (d + 4)) / 2.0;
  const auto& idx = multi_indices(d, 1);
  std::vector<BPoly> q;
  q.reserve(idx.size());
  for (std::size_t l = 0; l < idx.size(); ++l) {
    // q_{e_l} = scale * lambda_l and lambda_l = b_{e_l} in degree 1.
    BPoly ql(d, 1);
    ql.coeffs()[static_cast<Eigen::Index>(l)] = scale;
    q.push_back(std::move(ql));
  }
  return assemble_from_q(d, 1, std::move(q));
}

DualBasisReport verify_dual_basis(const DualBasisTable& table) {
  const int d = table.d, k = table.k;
  const auto& idx = multi_indices(d, k);
  const int n = static_cast<int>(idx.size());
  const double ck_inv = static_cast<double>(factorial(d + k)) /
                        static_cast<double>(factorial(k));
  DualBasisReport report;

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double value = pair_ref(table.p[static_cast<std::size_t>(a)],
                                    bpoly_unit(d, k, b));
      report.biorthogonality =
          std::max(report.biorthogonality, std::abs(value - (a == b ? 1.0 : 0.0)));
    }

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.p.front().coeffs().size());
  for (const BPoly& p : table.p) sum += p.coeffs();
  report.sum_identity = (sum.array() - ck_inv).abs().maxCoeff();

  for (const auto& perm : permutations(d + 1)) {
    for (int a = 0; a < n; ++a) {
      MultiIndex image(idx[static_cast<std::size_t>(a)].size());
      for (int j = 0; j <= d; ++j)
        image[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] =
            idx[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
      const int target = multi_index_position(image);
      const Eigen::VectorXd diff =
          permute_barycentric(table.p[static_cast<std::size_t>(a)], perm).coeffs() -
          table.p[static_cast<std::size_t>(target)].coeffs();
      report.symmetry = std::max(report.symmetry, diff.cwiseAbs().maxCoeff());
    }
  }

  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXd diff =
        table.p[static_cast<std::size_t>(a)].coeffs() -
        bpoly_product(bpoly_unit(d, k, a), table.z[static_cast<std::size_t>(a)]).coeffs();
    report.product = std::max(report.product, diff.cwiseAbs().maxCoeff());
  }

  if (!table.q.empty()) {
    // Recovered diagonal of the defining system:
    // <b_b (q_b - qbar), b_b> = 1 - (d+k)!/k! <b_b, b_b>.
    BPoly qbar(d, 2 * k);
    for (int mu = 0; mu < n; ++mu)
      qbar.coeffs() +=
          bpoly_product(bpoly_unit(d, k, mu), table.q[static_cast<std::size_t>(mu)]).coeffs();
    const auto& mass_kk = ref_mass_matrix(d, k, k);
    for (int b = 0; b < n; ++b) {
      BPoly diff = degree_raise(table.q[static_cast<std::size_t>(b)], 2 * k);
      diff.coeffs() -= qbar.coeffs();
      const double lhs = pair_ref(bpoly_product(bpoly_unit(d, k, b), diff),
                                  bpoly_unit(d, k, b));
      const double rhs = 1.0 - ck_inv * mass_kk(b, b);
      report.diagonal = std::max(report.diagonal, std::abs(lhs - rhs));
    }
  }
  return report;
}

const DualBasisTable& dual_basis_table(int d, int k) {
  static std::map<std::pair<int, int>, DualBasisTable> cache;
  static std::mutex table_mutex;
  std::lock_guard<std::mutex> lock(table_mutex);
  auto [it, inserted] = cache.try_emplace({d, k});
  if (inserted) it->second = solve_dual_basis(d, k);
  return it->second;
}

}  // namespace szinterp
