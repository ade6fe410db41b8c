#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oe/bigint.hpp"
#include "oe/diag.hpp"

namespace oe {

// Read-time marker on a variable occurrence. Current is a plain occurrence in
// program text; Initial/Final are the read-before and read-after views used by
// semantic predicates.
enum class Marker { Current, Initial, Final };

struct MathExpr;
struct BoolExpr;
using MathPtr = std::shared_ptr<const MathExpr>;
using BoolPtr = std::shared_ptr<const BoolExpr>;

enum class MathKind {
  IntConst,    // value
  Psi,         // the uninitialized-value symbol
  Var,         // name, marker
  AddressOf,   // &name (operand is a variable NAME, never a value)
  Deref,       // *inner, depth >= 1; marker = read time once resolved
  Neg,         // -inner
  BinOp,       // op in {+,-,*}
  Apply,       // opaque function call f(args...)
  IndexedRead, // name[index], marker = read time of the array
};

struct MathExpr {
  MathKind kind;
  BigInt value;                  // IntConst
  std::string name;              // Var / AddressOf / Apply / IndexedRead
  Marker marker = Marker::Current;
  char op = 0;                   // BinOp
  int depth = 0;                 // Deref
  MathPtr a, b;                  // BinOp lhs/rhs; Neg/Deref inner = a; IndexedRead index = a
  std::vector<MathPtr> args;     // Apply
};

enum class Rel { Eq, Ne, Lt, Le, Gt, Ge };

enum class BoolKind { True, False, Cmp, Not, And, Or, Pred };

struct BoolExpr {
  BoolKind kind;
  Rel rel = Rel::Eq;             // Cmp
  MathPtr lhs, rhs;              // Cmp
  BoolPtr x, y;                  // Not inner = x; And/Or children
  std::string name;              // Pred
  std::vector<MathPtr> args;     // Pred
};

// -- constructors ------------------------------------------------------------

MathPtr mInt(BigInt v);
MathPtr mInt(long long v);
MathPtr mPsi();
MathPtr mVar(std::string name, Marker m = Marker::Current);
MathPtr mAddr(std::string name);
MathPtr mDeref(MathPtr inner, int depth, Marker m = Marker::Current);
MathPtr mNeg(MathPtr inner);
MathPtr mBin(char op, MathPtr l, MathPtr r);
MathPtr mApply(std::string fname, std::vector<MathPtr> args);
MathPtr mIndex(std::string array, MathPtr index, Marker m = Marker::Current);

BoolPtr bTrue();
BoolPtr bFalse();
BoolPtr bCmp(Rel r, MathPtr l, MathPtr rr);
BoolPtr bNot(BoolPtr inner);
BoolPtr bAnd(BoolPtr l, BoolPtr r);
BoolPtr bOr(BoolPtr l, BoolPtr r);
BoolPtr bPred(std::string name, std::vector<MathPtr> args);

// -- structure ---------------------------------------------------------------

// Total structural order; 0 iff structurally equal.
int compareMath(const MathPtr& a, const MathPtr& b);
int compareBool(const BoolPtr& a, const BoolPtr& b);
bool equalMath(const MathPtr& a, const MathPtr& b);
bool equalBool(const BoolPtr& a, const BoolPtr& b);

// A storage slot: a scalar/pointer variable, or one array element with a
// constant index. Keys the final-value equations of semantic predicates.
struct Slot {
  std::string base;
  std::optional<BigInt> index;

  std::string key() const;
  bool operator<(const Slot& o) const;
  bool operator==(const Slot& o) const;
};

using Binding = std::map<std::pair<std::string, Marker>, MathPtr>;

// -- operations --------------------------------------------------------------

// Multivariate polynomial normal form over {+,-,*}: integer coefficients,
// monomials sorted by a fixed total order on atoms; Psi, addresses, Deref,
// Apply and IndexedRead subterms are atoms (their arguments normalized
// recursively). Idempotent.
MathPtr normalize(const MathPtr& e);

// Normalizes comparison operands, folds constant comparisons and boolean
// units (true/false absorption, double negation).
BoolPtr normalizeBool(const BoolPtr& b);

// Replaces every Var / constant-index IndexedRead hit by the binding; the
// binding is keyed by (slot key, marker). Result is re-normalized.
MathPtr substitute(const MathPtr& e, const Binding& binding);
BoolPtr substitute(const BoolPtr& b, const Binding& binding);

// Retags occurrences of `name` (scalar, array element or whole array) with
// marker `to` wherever they currently carry `from`.
MathPtr renameMarker(const MathPtr& e, const std::string& name, Marker from, Marker to);
BoolPtr renameMarker(const BoolPtr& b, const std::string& name, Marker from, Marker to);

// Flips every Current marker to Initial (program text -> predicate view).
MathPtr flipCurrentToInitial(const MathPtr& e);
BoolPtr flipCurrentToInitial(const BoolPtr& b);

// Retags every occurrence of `from` with `to`.
MathPtr retagMarkers(const MathPtr& e, Marker from, Marker to);
BoolPtr retagMarkers(const BoolPtr& b, Marker from, Marker to);

// Marker scans.
bool containsMarker(const MathPtr& e, Marker m);
bool containsMarker(const BoolPtr& b, Marker m);
// Psi under Neg/BinOp somewhere in e.
bool psiUnderArithmetic(const MathPtr& e);
// AddressOf under Neg/BinOp/Apply/index position (fails validation).
bool addressUnderArithmetic(const MathPtr& e);

void collectVarRefs(const MathPtr& e, std::vector<std::pair<std::string, Marker>>& out);
void collectVarRefs(const BoolPtr& b, std::vector<std::pair<std::string, Marker>>& out);

// -- concrete evaluation -----------------------------------------------------

struct Address {
  std::string of;
  bool operator==(const Address& o) const { return of == o.of; }
  bool operator<(const Address& o) const { return of < o.of; }
};

// A concrete value: exact integer, address, or Psi. Booleans only appear as
// evaluation results of BoolExpr.
struct Value {
  enum class T { Int, Addr, PsiV } t = T::PsiV;
  BigInt i;
  Address addr;

  static Value ofInt(BigInt v) { return {T::Int, std::move(v), {}}; }
  static Value ofAddr(Address a) { return {T::Addr, {}, std::move(a)}; }
  static Value psi() { return {}; }
  bool isPsi() const { return t == T::PsiV; }
  bool operator==(const Value& o) const;
};

struct Store; // interp.hpp

struct EvalCtx {
  const Store* initial = nullptr; // binds Current and Initial markers
  const Store* final_ = nullptr;  // binds Final markers (optional)
  std::vector<Diagnostic>* diags = nullptr;
};

// Exact arithmetic over the store; arithmetic touching Psi yields Psi and
// records an UninitializedRead (deduplicated per variable read). Throws
// OeError for unknown variables, address arithmetic, Psi in comparisons and
// unknown opaque functions. Built-ins: abs, sigma(A,lo,hi), maxr(A,lo,hi);
// predicates even, odd, sorted, perm.
Value evaluate(const MathPtr& e, const EvalCtx& ctx);
bool evaluate(const BoolPtr& b, const EvalCtx& ctx);

// -- randomized equivalence oracle (test support) -----------------------------
//
// True iff both sides normalize to the same structure, or agree on `samples`
// pseudo-random stores with integers uniform in [-100, 100]. Probabilistic;
// falls back to the structural check alone when an expression cannot be
// concretely sampled (opaque calls, Psi, addresses).
bool equivExpr(const MathPtr& e1, const MathPtr& e2, int samples, uint64_t seed);
bool equivExpr(const BoolPtr& b1, const BoolPtr& b2, int samples, uint64_t seed);

// -- rendering ---------------------------------------------------------------

// ProgramText: Current plain, Initial `~v`, Final `v'` (until-conditions).
// Predicate:   Initial plain, Final `v'` (reduced-semantics display).
enum class RenderMode { ProgramText, Predicate };

std::string renderMath(const MathPtr& e, RenderMode mode);
std::string renderBool(const BoolPtr& b, RenderMode mode);

// Deterministic pseudo-random stream (splitmix64); used everywhere randomness
// is required so results are a pure function of the seed.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next();
  // uniform in [lo, hi]
  long long range(long long lo, long long hi);
};

} // namespace oe
