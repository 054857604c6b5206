#include "ncv/gf.hpp"

#include <string>

#include "ncv/error.hpp"

namespace ncv::gf {

namespace {

std::uint32_t primitive_polynomial(unsigned m) {
  switch (m) {
    case 4:
      return 0x13;  // x^4 + x + 1
    case 8:
      return 0x11d;  // x^8 + x^4 + x^3 + x^2 + 1
    case 16:
      return 0x1100b;  // x^16 + x^12 + x^3 + x + 1
    default:
      throw ParameterError("unsupported field order 2^" + std::to_string(m) +
                           " (expected m in {4, 8, 16})");
  }
}

}  // namespace

GaloisField::GaloisField(FieldSpec spec) : spec_(spec), poly_(primitive_polynomial(spec.order_exponent)) {
  if (spec_.order_exponent == 16) return;

  const std::uint32_t q = order();
  log_.assign(q, 0);
  exp_.assign(2 * q, 0);
  std::uint32_t x = 1;
  for (std::uint32_t k = 0; k + 1 < q; ++k) {
    exp_[k] = static_cast<Symbol>(x);
    log_[x] = static_cast<Symbol>(k);
    x <<= 1;
    if (x & q) x ^= poly_;
  }
  for (std::uint32_t k = q - 1; k < 2 * q; ++k) exp_[k] = exp_[k - (q - 1)];
}

Symbol GaloisField::mul_carryless(Symbol a, Symbol b) const {
  std::uint32_t product = 0;
  std::uint32_t aa = a;
  for (std::uint32_t bb = b; bb != 0; bb >>= 1, aa <<= 1) {
    if (bb & 1u) product ^= aa;
  }
  for (int bit = 30; bit >= 16; --bit) {
    if (product & (std::uint32_t{1} << bit)) product ^= poly_ << (bit - 16);
  }
  return static_cast<Symbol>(product);
}

Symbol GaloisField::mul(Symbol a, Symbol b) const {
  if (a == 0 || b == 0) return 0;
  if (spec_.order_exponent == 16) return mul_carryless(a, b);
  return exp_[log_[a] + log_[b]];
}

Symbol GaloisField::inv(Symbol a) const {
  if (a == 0) throw ParameterError("inverse of zero");
  if (spec_.order_exponent != 16) {
    return exp_[(order() - 1) - log_[a]];
  }
  // a^(q-2): q-2 = 0xfffe, i.e. square-and-multiply over 15 set bits.
  Symbol result = 1;
  Symbol base = a;
  for (std::uint32_t e = order() - 2; e != 0; e >>= 1) {
    if (e & 1u) result = mul_carryless(result, base);
    base = mul_carryless(base, base);
  }
  return result;
}

void GaloisField::axpy(std::span<Symbol> dst, Symbol c, std::span<const Symbol> src) const {
  if (c == 0) return;
  const std::size_t n = dst.size() < src.size() ? dst.size() : src.size();
  if (spec_.order_exponent == 16) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[k]) dst[k] ^= mul_carryless(c, src[k]);
    }
    return;
  }
  const unsigned lc = log_[c];
  for (std::size_t k = 0; k < n; ++k) {
    if (src[k]) dst[k] ^= exp_[lc + log_[src[k]]];
  }
}

void GaloisField::scale(std::span<Symbol> v, Symbol c) const {
  for (auto& s : v) s = mul(s, c);
}

const GaloisField& field(FieldSpec spec) {
  static const GaloisField gf4{FieldSpec{4}};
  static const GaloisField gf8{FieldSpec{8}};
  static const GaloisField gf16{FieldSpec{16}};
  switch (spec.order_exponent) {
    case 4:
      return gf4;
    case 8:
      return gf8;
    case 16:
      return gf16;
    default:
      primitive_polynomial(spec.order_exponent);  // throws
      return gf8;
  }
}

}  // namespace ncv::gf
