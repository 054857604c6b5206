#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ncv::gf {

using Symbol = std::uint16_t;

/// Field GF(2^m); only m ∈ {4, 8, 16} are supported.
struct FieldSpec {
  unsigned order_exponent = 8;

  std::uint32_t order() const { return std::uint32_t{1} << order_exponent; }
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Binary extension field arithmetic over a fixed primitive polynomial.
///
/// m = 4 and m = 8 use log/antilog tables; m = 16 multiplies carrylessly and
/// reduces modulo the polynomial. Instances are immutable and are obtained
/// through `field()`, which hands out one shared instance per order.
class GaloisField {
 public:
  explicit GaloisField(FieldSpec spec);

  FieldSpec spec() const { return spec_; }
  std::uint32_t order() const { return spec_.order(); }
  std::uint32_t polynomial() const { return poly_; }

  static Symbol add(Symbol a, Symbol b) { return a ^ b; }
  Symbol mul(Symbol a, Symbol b) const;
  /// Throws ParameterError for a == 0.
  Symbol inv(Symbol a) const;
  Symbol div(Symbol a, Symbol b) const { return mul(a, inv(b)); }

  /// dst[k] += c * src[k]
  void axpy(std::span<Symbol> dst, Symbol c, std::span<const Symbol> src) const;
  /// v[k] *= c
  void scale(std::span<Symbol> v, Symbol c) const;

 private:
  Symbol mul_carryless(Symbol a, Symbol b) const;

  FieldSpec spec_;
  std::uint32_t poly_;
  std::vector<Symbol> log_;
  std::vector<Symbol> exp_;
};

/// Shared immutable field instance for `spec`; throws ParameterError on an
/// unsupported order.
const GaloisField& field(FieldSpec spec);

}  // namespace ncv::gf
