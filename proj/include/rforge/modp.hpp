#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "rforge/error.hpp"

namespace rforge::modp {

inline constexpr std::uint64_t kDefaultPrime = 2147483647ull;  // 2^31 - 1

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, std::uint64_t p) { return (a * b) % p; }

inline std::uint64_t pow(std::uint64_t b, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  b %= p;
  while (e) {
    if (e & 1) r = mul(r, b, p);
    b = mul(b, b, p);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t inv(std::uint64_t a, std::uint64_t p) { return pow(a, p - 2, p); }

/// Exact image of a finite double in Z/p (as the dyadic rational it is).
inline std::uint64_t from_double(double x, std::uint64_t p) {
  require(std::isfinite(x), "non-finite constant");
  if (x == 0.0) return 0;
  int exp = 0;
  const double mant = std::frexp(std::abs(x), &exp);  // |x| = mant * 2^exp, mant in [0.5, 1)
  auto m = static_cast<std::uint64_t>(std::ldexp(mant, 53));
  int shift = exp - 53;
  std::uint64_t v = m % p;
  if (shift > 0)
    v = mul(v, pow(2, static_cast<std::uint64_t>(shift), p), p);
  else if (shift < 0)
    v = mul(v, inv(pow(2, static_cast<std::uint64_t>(-shift), p), p), p);
  return x < 0 ? (p - v) % p : v;
}

/// Dense row-major matrix over Z/p.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint64_t> data;

  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {}
  std::uint64_t& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  std::uint64_t at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Rank by Gaussian elimination; consumes its argument.
inline std::size_t rank(Matrix a, std::uint64_t p) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols && r < a.rows; ++c) {
    std::size_t piv = r;
    while (piv < a.rows && a.at(piv, c) == 0) ++piv;
    if (piv == a.rows) continue;
    if (piv != r)
      for (std::size_t j = c; j < a.cols; ++j) std::swap(a.at(piv, j), a.at(r, j));
    const std::uint64_t iv = inv(a.at(r, c), p);
    for (std::size_t q = r + 1; q < a.rows; ++q) {
      if (a.at(q, c) == 0) continue;
      const std::uint64_t f = mul(a.at(q, c), iv, p);
      for (std::size_t j = c; j < a.cols; ++j) {
        if (a.at(r, j) == 0) continue;
        a.at(q, j) = (a.at(q, j) + p - mul(f, a.at(r, j), p)) % p;
      }
    }
    ++r;
  }
  return r;
}

}  // namespace rforge::modp
