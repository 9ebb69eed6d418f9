#pragma once

// Gauss-Jacobi quadrature for the weighted kernels
//
//     int_a^t psi'(s) (psi(t)-psi(s))^p sigma(s) ds,      p > -1,
//
// including the weakly singular range p in (-1,0).  Substituting u = psi(s)
// turns the kernel into the one-sided Jacobi weight (B-u)^p on [A,B] with
// A = psi(a), B = psi(t), which the rule absorbs exactly:
//
//     ((B-A)/2)^(p+1) * sum_i w_i sigma(psi^{-1}(u_i)).
//
// The rule is exact (to rounding) whenever sigma(psi^{-1}(u)) is a
// polynomial of degree <= 2n-1 in u.  sigma is only ever sampled strictly
// inside (a,t); neither endpoint is evaluated.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "psifrac/errors.hpp"
#include "psifrac/psi.hpp"

namespace psifrac {

/// n-point rule for the weight (1-x)^p on [-1,1].
struct JacobiRule {
  int n = 0;
  double p = 0.0;
  std::vector<double> nodes;    // strictly increasing, inside (-1,1)
  std::vector<double> weights;  // positive; they sum to 2^{p+1}/(p+1)
};

namespace detail {

// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL,
// accumulating the rotations into a single row vector z (Golub-Welsch).
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  const double eps = 2.3e-16;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw error("tridiagonal eigensolver failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, pshift = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= pshift;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - pshift;
          r = (d[i] - g) * s + 2.0 * c * b;
          pshift = s * r;
          d[i + 1] = g + pshift;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= pshift;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline JacobiRule build_jacobi_rule(int n, double p) {
  // monic three-term recurrence for the weight (1-x)^p (1+x)^0
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  d[0] = -p / (p + 2.0);
  for (int k = 1; k < n; ++k) {
    const double tk = 2.0 * k + p;
    d[static_cast<std::size_t>(k)] = -(p * p) / (tk * (tk + 2.0));
    const double bk =
        4.0 * k * k * (k + p) * (k + p) / (tk * tk * (tk * tk - 1.0));
    e[static_cast<std::size_t>(k - 1)] = std::sqrt(bk);
  }
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  z[0] = 1.0;
  ql_implicit(d, e, z);

  const double mu0 = std::pow(2.0, p + 1.0) / (p + 1.0);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });

  JacobiRule rule;
  rule.n = n;
  rule.p = p;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = d[order[i]];
    rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
  }
  for (int i = 0; i < n; ++i) {
    if (!(rule.weights[i] > 0.0) || rule.nodes[i] <= -1.0 || rule.nodes[i] >= 1.0 ||
        (i > 0 && !(rule.nodes[i] > rule.nodes[i - 1])))
      throw error("quadrature rule construction produced an invalid rule");
  }
  return rule;
}

}  // namespace detail

/// Returns the cached n-point rule for the weight (1-x)^p.  Safe for
/// concurrent use; p is quantized to 1e-12 for the cache key.
inline const JacobiRule& jacobi_rule(int n, double p) {
  if (n < 1 || n > 512) throw input_error("rule size must lie in [1, 512]");
  if (!(p > -1.0)) throw input_error("Jacobi exponent must exceed -1");

  using Key = std::pair<int, std::int64_t>;
  static std::map<Key, std::unique_ptr<JacobiRule>> cache;
  static std::shared_mutex mutex;

  const Key key{n, std::llround(p * 1e12)};
  {
    std::shared_lock lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto rule = std::make_unique<JacobiRule>(detail::build_jacobi_rule(n, p));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.emplace(key, std::move(rule));
  return *it->second;
}

/// int_a^t psi'(s)(psi(t)-psi(s))^p sigma(s) ds with a fixed n-point rule.
/// Summation order is fixed (ascending node index) so results do not depend
/// on any parallel schedule of the callers.
template <std::invocable<double> F>
double psi_weighted_integral(F&& sigma, const PsiSpec& psi, double a, double t, double p,
                             int n = 64) {
  if (t < a) throw input_error("integration interval is reversed");
  if (!(p > -1.0)) throw input_error("kernel exponent must exceed -1");
  const double A = psi.value(a);
  const double B = psi.value(t);
  if (!(B > A)) return 0.0;
  const JacobiRule& rule = jacobi_rule(n, p);
  const double half = 0.5 * (B - A);
  double sum = 0.0;
  for (int i = 0; i < rule.n; ++i) {
    const double u = A + half * (rule.nodes[i] + 1.0);
    sum += rule.weights[i] * sigma(psi.inverse(u));
  }
  return std::pow(half, p + 1.0) * sum;
}

struct AdaptiveResult {
  double value = 0.0;
  double est_error = 0.0;
  int nodes_used = 0;
};

/// Doubles the rule size from 16 up to 512 until two consecutive values
/// agree to rel_tol, returning the finer value and the last difference.
template <std::invocable<double> F>
AdaptiveResult adaptive_integral(F&& sigma, const PsiSpec& psi, double a, double t, double p,
                                 double rel_tol) {
  if (!(rel_tol >= 1e-14)) throw input_error("tolerance below 1e-14 is not attainable");
  if (t < a) throw input_error("integration interval is reversed");
  if (!(psi.value(t) > psi.value(a))) return {0.0, 0.0, 0};
  double prev = psi_weighted_integral(sigma, psi, a, t, p, 16);
  double diff = 0.0;
  for (int n = 32; n <= 512; n *= 2) {
    const double cur = psi_weighted_integral(sigma, psi, a, t, p, n);
    diff = std::fabs(cur - prev);
    if (diff <= rel_tol * std::max(1.0, std::fabs(cur))) return {cur, diff, n};
    prev = cur;
  }
  throw convergence_error("weighted integral did not reach the requested tolerance",
                          prev, diff);
}

}  // namespace psifrac
