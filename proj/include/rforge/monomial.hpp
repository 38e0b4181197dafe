#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "rforge/error.hpp"

namespace rforge {

/// Exponent vector x^a over a fixed number of variables.
///
/// Basis monomials and polynomial supports are always non-negative. Multiplier
/// monomials produced by the basis search are lattice translations and may carry
/// negative entries (a Laurent multiplier whose product with the polynomial is
/// still an honest polynomial); `is_nonnegative()` distinguishes the two.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t n) : exps_(n, 0) {}
  explicit Monomial(std::vector<int> exps) : exps_(std::move(exps)) {}
  Monomial(std::initializer_list<int> exps) : exps_(exps) {}

  static Monomial unit(std::size_t n, std::size_t var) {
    Monomial m(n);
    m.exps_.at(var) = 1;
    return m;
  }

  std::size_t size() const noexcept { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  int& operator[](std::size_t i) { return exps_[i]; }
  const std::vector<int>& exponents() const noexcept { return exps_; }

  int degree() const { return std::accumulate(exps_.begin(), exps_.end(), 0); }

  bool is_nonnegative() const {
    return std::all_of(exps_.begin(), exps_.end(), [](int e) { return e >= 0; });
  }

  bool is_one() const {
    return std::all_of(exps_.begin(), exps_.end(), [](int e) { return e == 0; });
  }

  Monomial& operator+=(const Monomial& o) {
    check_same(o);
    for (std::size_t k = 0; k < exps_.size(); ++k) exps_[k] += o.exps_[k];
    return *this;
  }
  Monomial& operator-=(const Monomial& o) {
    check_same(o);
    for (std::size_t k = 0; k < exps_.size(); ++k) exps_[k] -= o.exps_[k];
    return *this;
  }
  friend Monomial operator+(Monomial a, const Monomial& b) { return a += b; }
  friend Monomial operator-(Monomial a, const Monomial& b) { return a -= b; }

  // Plain lexicographic comparison of the exponent vectors; used for keys and
  // serialization tie-breaks, not as a term order.
  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend auto operator<=>(const Monomial& a, const Monomial& b) { return a.exps_ <=> b.exps_; }

  std::string to_string(const std::vector<std::string>& names = {}) const {
    std::string out;
    for (std::size_t k = 0; k < exps_.size(); ++k) {
      if (exps_[k] == 0) continue;
      if (!out.empty()) out += '*';
      out += k < names.size() ? names[k] : "x" + std::to_string(k + 1);
      if (exps_[k] != 1) out += '^' + std::to_string(exps_[k]);
    }
    return out.empty() ? "1" : out;
  }

 private:
  void check_same(const Monomial& o) const {
    require(o.exps_.size() == exps_.size(), "monomial length mismatch");
  }

  std::vector<int> exps_;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int e : m.exponents()) h = (h ^ static_cast<std::size_t>(e + 0x9e37)) * 1099511628211ull;
    return h;
  }
};

enum class OrderKind { Grevlex, Lex, Block };

/// A total term order. `Block` puts a designated set of monomials (the
/// eigenvalue block) first and orders by grevlex within each block.
class MonomialOrder {
 public:
  explicit MonomialOrder(OrderKind kind = OrderKind::Grevlex, std::vector<Monomial> first_block = {})
      : kind_(kind), first_(std::move(first_block)) {
    std::sort(first_.begin(), first_.end());
  }

  OrderKind kind() const noexcept { return kind_; }

  /// Strict "a comes before b" in ascending order.
  bool less(const Monomial& a, const Monomial& b) const {
    switch (kind_) {
      case OrderKind::Lex:
        return lex_less(a, b);
      case OrderKind::Block: {
        const bool fa = in_first(a), fb = in_first(b);
        if (fa != fb) return fa;
        return grevlex_less(a, b);
      }
      case OrderKind::Grevlex:
      default:
        return grevlex_less(a, b);
    }
  }

  bool operator()(const Monomial& a, const Monomial& b) const { return less(a, b); }

  static bool lex_less(const Monomial& a, const Monomial& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k] != b[k]) return a[k] < b[k];
    return false;
  }

  // Ascending grevlex: lower total degree first; on ties, a < b iff the last
  // nonzero entry of a - b is positive.
  static bool grevlex_less(const Monomial& a, const Monomial& b) {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    for (std::size_t k = a.size(); k-- > 0;)
      if (a[k] != b[k]) return a[k] > b[k];
    return false;
  }

 private:
  bool in_first(const Monomial& m) const { return std::binary_search(first_.begin(), first_.end(), m); }

  OrderKind kind_;
  std::vector<Monomial> first_;
};

inline void sort_grevlex(std::vector<Monomial>& ms) {
  std::sort(ms.begin(), ms.end(), MonomialOrder::grevlex_less);
}

}  // namespace rforge
