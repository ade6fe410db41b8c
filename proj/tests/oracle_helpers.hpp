#pragma once

// Test-only oracles, independent of the engine's normalization path.

#include <map>
#include <string>
#include <vector>

#include "oe/bigint.hpp"
#include "oe/expr.hpp"

namespace oracle {

// Brute-force coefficient accounting: expands an arithmetic expression over
// plain variables into monomial -> coefficient, where a monomial is the sorted
// list of variable names with multiplicity. No sharing with oe::normalize.
using Mono = std::vector<std::string>;
using Coeffs = std::map<Mono, long long>;

inline Coeffs expand(const oe::MathPtr& e) {
  using namespace oe;
  switch (e->kind) {
    case MathKind::IntConst: {
      Coeffs c;
      if (e->value.signum() != 0) c[{}] = e->value.toInt64();
      return c;
    }
    case MathKind::Var: {
      Coeffs c;
      c[{e->name}] = 1;
      return c;
    }
    case MathKind::Neg: {
      Coeffs c = expand(e->a);
      for (auto& [m, v] : c) v = -v;
      return c;
    }
    case MathKind::BinOp: {
      Coeffs l = expand(e->a);
      Coeffs r = expand(e->b);
      Coeffs out;
      if (e->op == '*') {
        for (const auto& [ml, vl] : l)
          for (const auto& [mr, vr] : r) {
            Mono m = ml;
            m.insert(m.end(), mr.begin(), mr.end());
            std::sort(m.begin(), m.end());
            out[m] += vl * vr;
          }
      } else {
        out = l;
        for (const auto& [m, v] : r) out[m] += e->op == '+' ? v : -v;
      }
      for (auto it = out.begin(); it != out.end();)
        it = it->second == 0 ? out.erase(it) : std::next(it);
      return out;
    }
    default:
      throw std::runtime_error("oracle::expand: plain arithmetic only");
  }
}

inline oe::BigInt iterFactorial(int n) {
  oe::BigInt r(1);
  for (int i = 2; i <= n; ++i) r *= oe::BigInt(i);
  return r;
}

inline oe::BigInt iterFib(int n) {
  oe::BigInt a(0), b(1);
  for (int i = 0; i < n; ++i) {
    oe::BigInt next = a + b;
    a = b;
    b = next;
  }
  return a;
}

// The Fibonacci loop body as a two-register machine: (i, j) -> (i+j, i+2j).
inline std::pair<oe::BigInt, oe::BigInt> fibLoop(int iters, oe::BigInt i, oe::BigInt j) {
  for (int k = 0; k < iters; ++k) {
    oe::BigInt ni = i + j;
    oe::BigInt nj = i + j + j;
    i = ni;
    j = nj;
  }
  return {i, j};
}

} // namespace oracle
