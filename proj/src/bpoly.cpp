#include "szinterp/bpoly.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace szinterp {

long long factorial(int n) {
  if (n < 0 || n > 20) throw std::invalid_argument("factorial: n out of [0,20]");
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

int multi_index_degree(const MultiIndex& alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

namespace {

void enumerate(int entries_left, int deg_left, MultiIndex& work,
               std::vector<MultiIndex>& out) {
  if (entries_left == 1) {
    work.push_back(deg_left);
    out.push_back(work);
    work.pop_back();
    return;
  }
  for (int a = deg_left; a >= 0; --a) {
    work.push_back(a);
    enumerate(entries_left - 1, deg_left - a, work, out);
    work.pop_back();
  }
}

std::mutex cache_mutex;

}  // namespace

const std::vector<MultiIndex>& multi_indices(int d, int m) {
  if (d < 1 || m < 0) throw std::invalid_argument("multi_indices: need d >= 1, m >= 0");
  static std::map<std::pair<int, int>, std::vector<MultiIndex>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto [it, inserted] = cache.try_emplace({d, m});
  if (inserted) {
    MultiIndex work;
    enumerate(d + 1, m, work, it->second);
  }
  return it->second;
}

int multi_index_position(const MultiIndex& alpha) {
  // Count indices that precede alpha in the descending-lex order.
  int deg = multi_index_degree(alpha);
  int pos = 0;
  int entries = static_cast<int>(alpha.size());
  for (int j = 0; j < entries - 1; ++j) {
    int rest = entries - 1 - j;  // entries after slot j
    for (int a = deg; a > alpha[j]; --a)
      pos += static_cast<int>(binomial(deg - a + rest - 1, rest - 1));
    deg -= alpha[j];
  }
  return pos;
}

double ref_volume(int d) { return 1.0 / static_cast<double>(factorial(d)); }

double bernstein_eval(const MultiIndex& alpha, std::span<const double> lambda) {
  if (lambda.size() != alpha.size())
    throw std::invalid_argument("bernstein_eval: dimension mismatch");
  double sum = 0.0;
  for (double l : lambda) sum += l;
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("bernstein_eval: barycentric sum differs from 1");
  int deg = multi_index_degree(alpha);
  double factor = static_cast<double>(factorial(deg));
  double value = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    factor /= static_cast<double>(factorial(alpha[j]));
    for (int r = 0; r < alpha[j]; ++r) value *= lambda[j];
  }
  return factor * value;
}

BPoly::BPoly(int dim, int degree)
    : dim_(dim), degree_(degree),
      coeffs_(Eigen::VectorXd::Zero(
          static_cast<Eigen::Index>(multi_indices(dim, degree).size()))) {}

BPoly::BPoly(int dim, int degree, Eigen::VectorXd coeffs)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != static_cast<Eigen::Index>(multi_indices(dim_, degree_).size()))
    throw std::invalid_argument("BPoly: coefficient count mismatch");
}

double BPoly::eval(std::span<const double> lambda) const {
  const auto& idx = multi_indices(dim_, degree_);
  double value = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    value += coeffs_[static_cast<Eigen::Index>(a)] * bernstein_eval(idx[a], lambda);
  return value;
}

BPoly bpoly_constant(int dim, int degree, double value) {
  BPoly p(dim, degree);
  p.coeffs().setConstant(value);  // partition of unity
  return p;
}

BPoly bpoly_unit(int dim, int degree, int pos) {
  BPoly p(dim, degree);
  p.coeffs()[pos] = 1.0;
  return p;
}

BPoly bpoly_product(const BPoly& a, const BPoly& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("bpoly_product: dim mismatch");
  const int d = a.dim();
  const int m = a.degree(), n = b.degree();
  const auto& ia = multi_indices(d, m);
  const auto& ib = multi_indices(d, n);
  BPoly out(d, m + n);
  const double denom = static_cast<double>(binomial(m + n, m));
  MultiIndex sum(static_cast<std::size_t>(d + 1));
  for (std::size_t p = 0; p < ia.size(); ++p) {
    const double ca = a.coeffs()[static_cast<Eigen::Index>(p)];
    if (ca == 0.0) continue;
    for (std::size_t q = 0; q < ib.size(); ++q) {
      const double cb = b.coeffs()[static_cast<Eigen::Index>(q)];
      if (cb == 0.0) continue;
      long long w = 1;
      for (int j = 0; j <= d; ++j) {
        sum[static_cast<std::size_t>(j)] = ia[p][static_cast<std::size_t>(j)] +
                                           ib[q][static_cast<std::size_t>(j)];
        w *= binomial(sum[static_cast<std::size_t>(j)], ia[p][static_cast<std::size_t>(j)]);
      }
      out.coeffs()[multi_index_position(sum)] += ca * cb * static_cast<double>(w) / denom;
    }
  }
  return out;
}

BPoly degree_raise(const BPoly& p, int new_degree) {
  if (new_degree < p.degree())
    throw std::invalid_argument("degree_raise: target degree below current");
  if (new_degree == p.degree()) return p;
  return bpoly_product(p, bpoly_constant(p.dim(), new_degree - p.degree(), 1.0));
}

std::vector<BPoly> bpoly_grad(const BPoly& p) {
  if (p.degree() < 1) {
    return std::vector<BPoly>(static_cast<std::size_t>(p.dim() + 1),
                              BPoly(p.dim(), 0));
  }
  const int d = p.dim();
  const int m = p.degree();
  const auto& idx = multi_indices(d, m);
  std::vector<BPoly> out;
  out.reserve(static_cast<std::size_t>(d + 1));
  for (int j = 0; j <= d; ++j) {
    BPoly comp(d, m - 1);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a][static_cast<std::size_t>(j)] == 0) continue;
      MultiIndex lowered = idx[a];
      --lowered[static_cast<std::size_t>(j)];
      comp.coeffs()[multi_index_position(lowered)] +=
          m * p.coeffs()[static_cast<Eigen::Index>(a)];
    }
    out.push_back(std::move(comp));
  }
  return out;
}

double integrate_ref(const BPoly& p) {
  const double cm = static_cast<double>(factorial(p.degree())) /
                    static_cast<double>(factorial(p.dim() + p.degree()));
  return cm * p.coeffs().sum();
}

const Eigen::MatrixXd& ref_mass_matrix(int d, int m, int n) {
  static std::map<std::tuple<int, int, int>, Eigen::MatrixXd> cache;
  static std::mutex mass_mutex;
  std::lock_guard<std::mutex> lock(mass_mutex);
  auto [it, inserted] = cache.try_emplace({d, m, n});
  if (inserted) {
    const auto& ia = multi_indices(d, m);
    const auto& ib = multi_indices(d, n);
    const double c = static_cast<double>(factorial(m + n)) /
                     static_cast<double>(factorial(d + m + n));
    const double denom = static_cast<double>(binomial(m + n, m));
    Eigen::MatrixXd mat(ia.size(), ib.size());
    for (std::size_t p = 0; p < ia.size(); ++p)
      for (std::size_t q = 0; q < ib.size(); ++q) {
        long long w = 1;
        for (int j = 0; j <= d; ++j)
          w *= binomial(ia[p][static_cast<std::size_t>(j)] + ib[q][static_cast<std::size_t>(j)],
                        ia[p][static_cast<std::size_t>(j)]);
        mat(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
            static_cast<double>(w) / denom * c;
      }
    it->second = std::move(mat);
  }
  return it->second;
}

double pair_ref(const BPoly& a, const BPoly& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("pair_ref: dim mismatch");
  const Eigen::MatrixXd& mass = ref_mass_matrix(a.dim(), a.degree(), b.degree());
  return a.coeffs().dot(mass * b.coeffs());
}

BPoly permute_barycentric(const BPoly& p, const std::vector<int>& perm) {
  const auto& idx = multi_indices(p.dim(), p.degree());
  BPoly out(p.dim(), p.degree());
  MultiIndex permuted(static_cast<std::size_t>(p.dim() + 1));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (int j = 0; j <= p.dim(); ++j)
      permuted[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] =
          idx[a][static_cast<std::size_t>(j)];
    out.coeffs()[multi_index_position(permuted)] = p.coeffs()[static_cast<Eigen::Index>(a)];
  }
  return out;
}

}  // namespace szinterp
