#include <random>

#include "doctest.h"
#include "ncv/error.hpp"
#include "ncv/gf.hpp"
#include "oracles.hpp"

using ncv::gf::FieldSpec;
using ncv::gf::Symbol;

namespace {

void check_exhaustive(unsigned m) {
  const auto& f = ncv::gf::field(FieldSpec{m});
  const std::uint32_t q = f.order();
  bool ok_mul = true, ok_inv = true, ok_assoc = true, ok_dist = true, ok_comm = true;
  for (std::uint32_t a = 0; a < q; ++a) {
    for (std::uint32_t b = 0; b < q; ++b) {
      const Symbol ab = f.mul(Symbol(a), Symbol(b));
      ok_mul &= ab == oracle::gf_mul(a, b, m, f.polynomial());
      ok_comm &= ab == f.mul(Symbol(b), Symbol(a));
      for (std::uint32_t c = 0; c < q; ++c) {
        ok_assoc &= f.mul(ab, Symbol(c)) == f.mul(Symbol(a), f.mul(Symbol(b), Symbol(c)));
        ok_dist &= f.mul(Symbol(a), Symbol(b ^ c)) == (ab ^ f.mul(Symbol(a), Symbol(c)));
      }
    }
    if (a != 0) ok_inv &= f.mul(Symbol(a), f.inv(Symbol(a))) == 1;
  }
  CHECK(ok_mul);
  CHECK(ok_comm);
  CHECK(ok_assoc);
  CHECK(ok_dist);
  CHECK(ok_inv);
}

}  // namespace

TEST_CASE("GF(2^4) field axioms hold exhaustively") { check_exhaustive(4); }

TEST_CASE("GF(2^8) field axioms hold exhaustively") { check_exhaustive(8); }

TEST_CASE("GF(2^16) field axioms hold on 1e5 sampled triples") {
  const auto& f = ncv::gf::field(FieldSpec{16});
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint32_t> sym(0, 0xffff);
  int bad = 0;
  for (int t = 0; t < 100000; ++t) {
    const auto a = Symbol(sym(rng)), b = Symbol(sym(rng)), c = Symbol(sym(rng));
    const Symbol ab = f.mul(a, b);
    bad += ab != oracle::gf_mul(a, b, 16, f.polynomial());
    bad += f.mul(ab, c) != f.mul(a, f.mul(b, c));
    bad += f.mul(a, Symbol(b ^ c)) != (ab ^ f.mul(a, c));
    if (a != 0) bad += f.mul(a, f.inv(a)) != 1;
  }
  CHECK(bad == 0);
}

TEST_CASE("GF(2^16) generator x has full multiplicative order") {
  const auto& f = ncv::gf::field(FieldSpec{16});
  Symbol x = 1;
  std::uint32_t order = 0;
  do {
    x = f.mul(x, 2);
    ++order;
  } while (x != 1 && order < 70000);
  CHECK(order == 65535);
}

TEST_CASE("axpy and scale agree with elementwise mul") {
  for (unsigned m : {4u, 8u, 16u}) {
    const auto& f = ncv::gf::field(FieldSpec{m});
    std::mt19937_64 rng(m);
    std::uniform_int_distribution<std::uint32_t> sym(0, f.order() - 1);
    std::vector<Symbol> dst(33), src(33);
    for (auto& v : dst) v = Symbol(sym(rng));
    for (auto& v : src) v = Symbol(sym(rng));
    const Symbol c = Symbol(sym(rng) | 1);
    auto expect = dst;
    for (std::size_t k = 0; k < dst.size(); ++k) expect[k] ^= f.mul(c, src[k]);
    f.axpy(dst, c, src);
    CHECK(dst == expect);
    auto scaled = src;
    f.scale(scaled, c);
    for (std::size_t k = 0; k < src.size(); ++k) CHECK(scaled[k] == f.mul(src[k], c));
  }
}

TEST_CASE("unsupported orders and zero inverse are rejected") {
  CHECK_THROWS_AS(ncv::gf::field(FieldSpec{5}), ncv::ParameterError);
  CHECK_THROWS_AS(ncv::gf::GaloisField(FieldSpec{32}), ncv::ParameterError);
  CHECK_THROWS_AS(ncv::gf::field(FieldSpec{8}).inv(0), ncv::ParameterError);
}
