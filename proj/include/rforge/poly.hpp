#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/monomial.hpp"

namespace rforge {

using Complex = std::complex<double>;

/// Either a symbolic coefficient slot (filled per instance) or a fixed constant.
struct Coefficient {
  std::optional<int> slot;
  double constant = 0.0;

  static Coefficient of_slot(int id) { return {id, 0.0}; }
  static Coefficient of_constant(double c) { return {std::nullopt, c}; }

  bool is_slot() const noexcept { return slot.has_value(); }
  friend bool operator==(const Coefficient&, const Coefficient&) = default;
};

struct ParamTerm {
  Monomial monomial;
  Coefficient coef;
};

/// Polynomial with symbolic coefficient slots. Terms are kept in ascending
/// grevlex order with distinct monomials.
class ParamPolynomial {
 public:
  ParamPolynomial() = default;
  explicit ParamPolynomial(std::vector<ParamTerm> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end(),
              [](const ParamTerm& a, const ParamTerm& b) { return MonomialOrder::grevlex_less(a.monomial, b.monomial); });
    for (std::size_t k = 1; k < terms_.size(); ++k)
      require(terms_[k - 1].monomial != terms_[k].monomial, "duplicate monomial in polynomial");
  }

  const std::vector<ParamTerm>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  const Coefficient* find(const Monomial& m) const {
    for (const auto& t : terms_)
      if (t.monomial == m) return &t.coef;
    return nullptr;
  }

 private:
  std::vector<ParamTerm> terms_;
};

/// System f_1 = ... = f_m = 0 in n variables with m >= n.
struct PolySystem {
  std::size_t n_vars = 0;
  std::vector<std::string> var_names;
  std::vector<ParamPolynomial> polys;

  std::size_t size() const noexcept { return polys.size(); }

  std::size_t slot_count() const {
    int hi = -1;
    for (const auto& p : polys)
      for (const auto& t : p.terms())
        if (t.coef.is_slot()) hi = std::max(hi, *t.coef.slot);
    return static_cast<std::size_t>(hi + 1);
  }

  /// Checks structural invariants; throws on violation.
  void validate() const {
    require(n_vars >= 1, "system needs at least one variable");
    require(var_names.empty() || var_names.size() == n_vars, "var_names length differs from n_vars");
    std::vector<int> seen;
    for (const auto& p : polys) {
      require(!p.empty(), "empty support");
      for (const auto& t : p.terms()) {
        require(t.monomial.size() == n_vars, "monomial length differs from n_vars");
        require(t.monomial.is_nonnegative(), "negative exponent in polynomial");
        if (t.coef.is_slot()) {
          require(*t.coef.slot >= 0, "negative slot id");
          seen.push_back(*t.coef.slot);
        } else {
          require(std::isfinite(t.coef.constant), "non-finite constant coefficient");
        }
      }
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t k = 0; k < seen.size(); ++k)
      require(seen[k] == static_cast<int>(k), "slot ids must be unique and contiguous from 0");
  }

  std::vector<std::string> names() const {
    if (!var_names.empty()) return var_names;
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n_vars; ++k) out.push_back("x" + std::to_string(k + 1));
    return out;
  }
};

template <class Scalar>
struct NumTerm {
  Monomial monomial;
  Scalar coef;
};

/// Polynomial with numeric coefficients (the instantiated f_i).
template <class Scalar = double>
class BasicNumPolynomial {
 public:
  BasicNumPolynomial() = default;
  BasicNumPolynomial(std::size_t n_vars, std::vector<NumTerm<Scalar>> terms) : n_(n_vars), terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end(), [](const auto& a, const auto& b) {
      return MonomialOrder::grevlex_less(a.monomial, b.monomial);
    });
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      require(terms_[k].monomial.size() == n_, "monomial length differs from n_vars");
      if (k > 0) require(terms_[k - 1].monomial != terms_[k].monomial, "duplicate monomial in polynomial");
    }
  }

  std::size_t n_vars() const noexcept { return n_; }
  const std::vector<NumTerm<Scalar>>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  bool is_zero() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.coef == Scalar(0); });
  }

 private:
  std::size_t n_ = 0;
  std::vector<NumTerm<Scalar>> terms_;
};

using NumPolynomial = BasicNumPolynomial<double>;

/// supp(p) for a symbolic polynomial: every monomial carrying a slot or a nonzero constant.
inline std::vector<Monomial> supp(const ParamPolynomial& p) {
  if (p.empty()) fail(ErrorKind::InvalidArgument, "empty support");
  std::vector<Monomial> out;
  for (const auto& t : p.terms())
    if (t.coef.is_slot() || t.coef.constant != 0.0) out.push_back(t.monomial);
  if (out.empty()) fail(ErrorKind::InvalidArgument, "empty support");
  return out;
}

template <class Scalar>
std::vector<Monomial> supp(const BasicNumPolynomial<Scalar>& p) {
  if (p.empty()) fail(ErrorKind::InvalidArgument, "empty support");
  std::vector<Monomial> out;
  for (const auto& t : p.terms())
    if (t.coef != Scalar(0)) out.push_back(t.monomial);
  if (out.empty()) fail(ErrorKind::InvalidArgument, "empty support");
  return out;
}

/// z^k by repeated squaring; negative powers invert.
inline Complex ipow(Complex z, int k) {
  if (k < 0) return Complex(1.0) / ipow(z, -k);
  Complex r(1.0);
  while (k > 0) {
    if (k & 1) r *= z;
    z *= z;
    k >>= 1;
  }
  return r;
}

inline Complex monomial_value(const Monomial& m, const std::vector<Complex>& point) {
  Complex v(1.0);
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m[k] != 0) v *= ipow(point[k], m[k]);
  return v;
}

template <class Scalar>
Complex evaluate(const BasicNumPolynomial<Scalar>& p, const std::vector<Complex>& point) {
  require(point.size() == p.n_vars(), "point length differs from n_vars");
  Complex sum(0.0);
  for (const auto& t : p.terms()) sum += Complex(t.coef) * monomial_value(t.monomial, point);
  return sum;
}

/// Sum of |c * x^a| over the terms; the scale used by normalized residuals.
template <class Scalar>
double term_magnitude(const BasicNumPolynomial<Scalar>& p, const std::vector<Complex>& point) {
  double s = 0.0;
  for (const auto& t : p.terms()) s += std::abs(Complex(t.coef) * monomial_value(t.monomial, point));
  return s;
}

/// Normalized equation residual: max_k |f_k(x)| / (1 + sum of term magnitudes of f_k at x).
template <class Scalar>
double normalized_residual(const std::vector<BasicNumPolynomial<Scalar>>& polys, const std::vector<Complex>& point) {
  double worst = 0.0;
  for (const auto& p : polys) {
    const double r = std::abs(evaluate(p, point)) / (1.0 + term_magnitude(p, point));
    if (!(r <= worst)) worst = r;  // NaN propagates
  }
  return worst;
}

inline std::vector<NumPolynomial> instantiate(const PolySystem& sys, const std::vector<double>& coeffs) {
  require(coeffs.size() == sys.slot_count(), "coefficient vector length " + std::to_string(coeffs.size()) +
                                                 " differs from slot count " + std::to_string(sys.slot_count()));
  for (double c : coeffs) require(std::isfinite(c), "non-finite coefficient");
  std::vector<NumPolynomial> out;
  out.reserve(sys.polys.size());
  for (const auto& p : sys.polys) {
    std::vector<NumTerm<double>> terms;
    for (const auto& t : p.terms())
      terms.push_back({t.monomial, t.coef.is_slot() ? coeffs[static_cast<std::size_t>(*t.coef.slot)] : t.coef.constant});
    out.emplace_back(sys.n_vars, std::move(terms));
  }
  return out;
}

inline std::string to_string(const ParamPolynomial& p, const std::vector<std::string>& names) {
  std::string out;
  for (const auto& t : p.terms()) {
    if (!out.empty()) out += " + ";
    out += t.coef.is_slot() ? "c" + std::to_string(*t.coef.slot) : std::to_string(t.coef.constant);
    if (!t.monomial.is_one()) out += "*" + t.monomial.to_string(names);
  }
  return out;
}

}  // namespace rforge
