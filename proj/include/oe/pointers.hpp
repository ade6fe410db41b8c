#pragma once

#include <map>
#include <optional>
#include <string>

#include "oe/expr.hpp"

namespace oe {

// What a pointer variable is known to hold along one CSP branch. Addresses are
// one-per-variable and never change once assigned; equality is name equality.
struct PtsLink {
  enum class Kind { Addr, PsiLink, Unknown } kind = Kind::Unknown;
  std::string target; // Addr
};

// Flow- and path-sensitive points-to knowledge, tracked per branch during
// symbolic reduction. Updated only by writes to pointer-typed variables.
struct PointsToEnv {
  std::map<std::string, PtsLink> known;

  bool operator==(const PointsToEnv& o) const;
};

// Follows `known` `depth` times: *p with p -> &a resolves to a; **c with
// c -> &b, b -> &a resolves to a. Throws WrongAddress when a link is Psi
// (uninitialized pointer) and UnresolvedPointer when a link is unknown.
std::string resolveDeref(const PointsToEnv& env, const std::string& pointer, int depth);

// Classifies a normalized final value for a pointer variable.
PtsLink classifyPointerValue(const MathPtr& value);

// Replaces every Deref subterm by the variable it resolves to (Current
// markers; used on payloads and guards before term semantics).
MathPtr resolveDerefsInExpr(const MathPtr& e, const PointsToEnv& env);
BoolPtr resolveDerefsInExpr(const BoolPtr& b, const PointsToEnv& env);

} // namespace oe
