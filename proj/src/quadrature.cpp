#include "szinterp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "szinterp/bpoly.hpp"
#include "szinterp/parallel.hpp"

namespace szinterp {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  // Newton iteration on P_n over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
    weights[static_cast<std::size_t>(n - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

QuadratureRule build_rule(int dim, int order) {
  QuadratureRule rule;
  rule.dim = dim;
  if (dim == 1) {
    const int n = order / 2 + 1;  // exact to degree 2n-1 >= order
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({1.0 - x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]});
      rule.weights.push_back(w[static_cast<std::size_t>(i)]);
    }
  } else if (dim == 2) {
    // Collapsed square: (u,v) -> (u, v(1-u)) with Jacobian (1-u); the extra
    // factor raises the degree in u by one.
    const int n = (order + 3) / 2;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = x[static_cast<std::size_t>(i)];
        const double v = x[static_cast<std::size_t>(j)];
        const double l1 = u;
        const double l2 = v * (1.0 - u);
        rule.points.push_back({1.0 - l1 - l2, l1, l2});
        rule.weights.push_back(w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] *
                               (1.0 - u));
      }
  } else {
    throw std::invalid_argument("simplex_quadrature: dim must be 1 or 2");
  }
  return rule;
}

}  // namespace

const QuadratureRule& simplex_quadrature(int dim, int order) {
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  static std::mutex quad_mutex;
  std::lock_guard<std::mutex> lock(quad_mutex);
  auto [it, inserted] = cache.try_emplace({dim, order});
  if (inserted) it->second = build_rule(dim, order);
  return it->second;
}

const Eigen::MatrixXd& bernstein_at_quadrature(int dim, int m, int order) {
  static std::map<std::tuple<int, int, int>, Eigen::MatrixXd> cache;
  static std::mutex table_mutex;
  const QuadratureRule& rule = simplex_quadrature(dim, order);
  std::lock_guard<std::mutex> lock(table_mutex);
  auto [it, inserted] = cache.try_emplace({dim, m, order});
  if (inserted) {
    const auto& idx = multi_indices(dim, m);
    Eigen::MatrixXd values(idx.size(), rule.points.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t q = 0; q < rule.points.size(); ++q)
        values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(q)) =
            bernstein_eval(idx[a], rule.points[q]);
    it->second = std::move(values);
  }
  return it->second;
}

const std::vector<Eigen::MatrixXd>& bernstein_grad_at_quadrature(int dim, int m, int order) {
  static std::map<std::tuple<int, int, int>, std::vector<Eigen::MatrixXd>> cache;
  static std::mutex table_mutex;
  const QuadratureRule& rule = simplex_quadrature(dim, order);
  const Eigen::MatrixXd* lower = m >= 1 ? &bernstein_at_quadrature(dim, m - 1, order) : nullptr;
  std::lock_guard<std::mutex> lock(table_mutex);
  auto [it, inserted] = cache.try_emplace({dim, m, order});
  if (inserted) {
    const auto& idx = multi_indices(dim, m);
    std::vector<Eigen::MatrixXd> tables(
        static_cast<std::size_t>(dim + 1),
        Eigen::MatrixXd::Zero(idx.size(), rule.points.size()));
    if (m >= 1) {
      for (int j = 0; j <= dim; ++j)
        for (std::size_t a = 0; a < idx.size(); ++a) {
          if (idx[a][static_cast<std::size_t>(j)] == 0) continue;
          MultiIndex low = idx[a];
          --low[static_cast<std::size_t>(j)];
          tables[static_cast<std::size_t>(j)].row(static_cast<Eigen::Index>(a)) =
              static_cast<double>(m) * lower->row(multi_index_position(low));
        }
    }
    it->second = std::move(tables);
  }
  return it->second;
}

}  // namespace szinterp

