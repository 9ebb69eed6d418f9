#pragma once

// Weight functions psi: strictly increasing, differentiable maps of [0,1]
// used by the weighted fractional operators.  Built-in shapes (identity,
// a*t+b, c*t^p) carry closed-form derivatives and inverses; arbitrary
// expressions fall back to symbolic differentiation and bracketed root
// finding for the inverse.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psifrac/errors.hpp"
#include "psifrac/expr.hpp"

namespace psifrac {

enum class PsiKind { identity, affine, power, expression };

class PsiSpec {
 public:
  static PsiSpec identity() { return PsiSpec(PsiKind::identity, 1.0, 0.0); }

  /// psi(t) = a*t + b with a > 0.
  static PsiSpec affine(double a, double b) {
    if (!(a > 0.0)) throw input_error("affine weight needs a positive slope");
    return PsiSpec(PsiKind::affine, a, b);
  }

  /// psi(t) = c*t^p with c > 0, p > 0.
  static PsiSpec power(double c, double p) {
    if (!(c > 0.0) || !(p > 0.0)) throw input_error("power weight needs c > 0 and p > 0");
    return PsiSpec(PsiKind::power, c, p);
  }

  /// psi given as an expression in t; the derivative is obtained
  /// symbolically.
  static PsiSpec from_expression(const ExprAst& value) {
    return from_expression(value, diff_expr(value, Var::t));
  }

  static PsiSpec from_expression(const ExprAst& value, const ExprAst& deriv) {
    if (contains_var(value, Var::x) || contains_var(value, Var::y))
      throw input_error("a weight function may reference only t");
    PsiSpec s(PsiKind::expression, 0.0, 0.0);
    s.value_ast_ = value;
    s.deriv_ast_ = deriv;
    return s;
  }

  PsiKind kind() const { return kind_; }
  double domain_lo() const { return 0.0; }
  double domain_hi() const { return 1.0; }

  double value(double t) const {
    check_domain(t);
    switch (kind_) {
      case PsiKind::identity: return t;
      case PsiKind::affine: return c0_ * t + c1_;
      case PsiKind::power: return c0_ * std::pow(t, c1_);
      case PsiKind::expression: return eval_expr(*value_ast_, t, 0.0, 0.0);
    }
    throw input_error("bad weight kind");
  }

  double deriv(double t) const {
    check_domain(t);
    switch (kind_) {
      case PsiKind::identity: return 1.0;
      case PsiKind::affine: return c0_;
      case PsiKind::power: return c0_ * c1_ * std::pow(t, c1_ - 1.0);
      case PsiKind::expression: return eval_expr(*deriv_ast_, t, 0.0, 0.0);
    }
    throw input_error("bad weight kind");
  }

  /// Solves psi(t) = u on the domain.  Closed form for the built-in
  /// shapes; bisection refined by a few Newton steps otherwise.
  double inverse(double u) const {
    const double lo = value(domain_lo());
    const double hi = value(domain_hi());
    const double slack = 1e-14 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
    if (u < lo - slack || u > hi + slack)
      throw input_error("inverse argument outside the range of psi");
    u = std::min(std::max(u, lo), hi);
    switch (kind_) {
      case PsiKind::identity: return u;
      case PsiKind::affine: return (u - c1_) / c0_;
      case PsiKind::power: return std::pow(u / c0_, 1.0 / c1_);
      case PsiKind::expression: return invert_by_bisection(u);
    }
    throw input_error("bad weight kind");
  }

  /// The weight as an expression in t (used by symbolic sequential
  /// derivatives).
  ExprAst as_expression() const {
    switch (kind_) {
      case PsiKind::identity: return parse_expression("t");
      case PsiKind::affine:
        return parse_expression(detail::format_number(c0_) + "*t+" + detail::format_number(c1_));
      case PsiKind::power:
        return parse_expression(detail::format_number(c0_) + "*t^" + detail::format_number(c1_));
      case PsiKind::expression: return *value_ast_;
    }
    throw input_error("bad weight kind");
  }

  ExprAst deriv_expression() const {
    if (kind_ == PsiKind::expression) return *deriv_ast_;
    return diff_expr(as_expression(), Var::t);
  }

 private:
  PsiSpec(PsiKind k, double c0, double c1) : kind_(k), c0_(c0), c1_(c1) {}

  void check_domain(double t) const {
    if (!(t >= domain_lo() - 1e-12 && t <= domain_hi() + 1e-12))
      throw input_error("argument outside the domain of psi");
  }

  double invert_by_bisection(double u) const {
    double lo = domain_lo(), hi = domain_hi();
    double flo = value(lo) - u;
    if (flo == 0.0) return lo;
    int steps = 0;
    while (hi - lo > 1e-15 && steps < 200) {
      const double mid = 0.5 * (lo + hi);
      const double fm = value(mid) - u;
      if (fm == 0.0) return mid;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
      ++steps;
    }
    double root = 0.5 * (lo + hi);
    // Newton polish; keep the bracket guarantees
    for (int k = 0; k < 5; ++k) {
      const double d = deriv(root);
      if (d == 0.0) break;
      const double next = root - (value(root) - u) / d;
      if (next < domain_lo() || next > domain_hi()) break;
      root = next;
    }
    if (std::fabs(value(root) - u) > 1e-12 * std::max(1.0, std::fabs(u)))
      throw convergence_error("weight inverse did not converge", root,
                              std::fabs(value(root) - u));
    return root;
  }

  PsiKind kind_;
  double c0_, c1_;  // affine: a,b; power: c,p
  std::optional<ExprAst> value_ast_, deriv_ast_;
};

struct ValidationReport {
  bool passed = true;
  std::vector<std::string> violations;  // hard failures
  std::vector<std::string> warnings;    // endpoint derivative zeros and similar
};

/// Samples psi on a uniform grid and checks the standing hypotheses:
/// psi' > 0 (strictly, on the open interior; endpoint zeros only warn),
/// strict monotonicity of the sampled values, and the inverse round trip
/// |psi^{-1}(psi(t)) - t| <= 1e-12.
inline ValidationReport validate_psi(const PsiSpec& psi, int n_samples = 1001) {
  if (n_samples < 2) throw input_error("validation needs at least two samples");
  ValidationReport rep;
  const double a = psi.domain_lo(), b = psi.domain_hi();
  auto note = [](double t, const std::string& what) {
    return "t=" + detail::format_number(t) + ": " + what;
  };
  std::vector<double> vals(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const double t = a + (b - a) * i / (n_samples - 1);
    double v;
    try {
      v = psi.value(t);
    } catch (const error& e) {
      rep.violations.push_back(note(t, std::string("evaluation failed: ") + e.what()));
      rep.passed = false;
      return rep;
    }
    vals[static_cast<std::size_t>(i)] = v;
    try {
      const double d = psi.deriv(t);
      if (!(d > 0.0)) {
        if (i == 0 || i == n_samples - 1)
          rep.warnings.push_back(note(t, "psi' vanishes at a domain endpoint"));
        else
          rep.violations.push_back(note(t, "psi' is not strictly positive"));
      }
    } catch (const error& e) {
      rep.violations.push_back(note(t, std::string("derivative failed: ") + e.what()));
    }
    try {
      const double back = psi.inverse(v);
      if (std::fabs(back - t) > 1e-12)
        rep.violations.push_back(note(t, "inverse round trip off by " +
                                             detail::format_number(std::fabs(back - t))));
    } catch (const error& e) {
      rep.violations.push_back(note(t, std::string("inverse failed: ") + e.what()));
    }
  }
  for (int i = 0; i + 1 < n_samples; ++i) {
    if (!(vals[static_cast<std::size_t>(i)] < vals[static_cast<std::size_t>(i + 1)])) {
      const double t = a + (b - a) * i / (n_samples - 1);
      rep.violations.push_back(note(t, "sampled values are not strictly increasing"));
    }
  }
  rep.passed = rep.violations.empty();
  return rep;
}

}  // namespace psifrac
