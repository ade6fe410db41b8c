#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "oe/expr.hpp"
#include "oe/syntax.hpp"

namespace oe {

// The effective variable universe of a program: declared scalars and pointers,
// plus every array element slot written with a constant index.
struct Universe {
  std::vector<Slot> slots;

  static Universe ofNames(const std::set<std::string>& names);
  static Universe ofProgram(const Program& p);
  bool contains(const Slot& s) const;
};

// A semantic predicate: the conjunction of final-value equations `v' = e_v`
// (each e_v over initial-value reads) plus opaque relational residuals.
// A variable in residualVars is constrained only by the residuals and carries
// no explicit equation.
struct SemPredicate {
  std::map<Slot, MathPtr> finalEqs;
  std::vector<BoolPtr> residuals;
  std::set<std::string> writes;       // variables explicitly written (not completion identities)
  std::set<std::string> residualVars; // relationally constrained, no equation

  bool isIdentity(const Universe& u) const;
};

struct CspBranch {
  BoolPtr guard; // over initial-value reads
  SemPredicate sp;
};

// Conditional semantic predicate: an exclusive-OR list of guarded semantic
// predicates. A one-branch CSP with a true guard is the degenerate plain case.
struct Csp {
  std::vector<CspBranch> branches;
  std::vector<Diagnostic> diagnostics;
};

// A `;`-joined chain of CSPs awaiting reduction.
using SemFormula = std::vector<Csp>;

Csp identityCsp(const Universe& u);

// -- operations ------------------------------------------------------------------

// Adds v' = v for every universe slot without an equation (and not residual-
// constrained). Idempotent.
SemPredicate complete(SemPredicate sp, const Universe& u);
Csp completeCsp(Csp c, const Universe& u);

// Semantics of one term (or skip): guard chains of each target expand to
// branches with an explicit else case; distinct targets cross-multiply with
// guards conjoined and equations merged. All markers flip Current -> Initial.
// Throws OverlapStaticallyTrue for syntactically identical guards on one
// target and BranchBudgetExceeded past `branchBudget`.
Csp termSem(const Term& t, const Universe& u, int branchBudget = 256);
Csp skipSem(const Universe& u);

// Samples random stores; reports GuardOverlap with a witness store whenever
// two branch guards hold at once. Empty result = no overlap found.
std::vector<Diagnostic> checkExclusivity(const Csp& c, int samples, uint64_t seed);

// -- equivalence (test support) ----------------------------------------------------

// Branch-set equivalence on sampled stores: at every sampled store both CSPs
// have exactly one true guard and the selected branches assign every universe
// slot the same value. Residuals are not compared.
bool cspEquiv(const Csp& a, const Csp& b, const Universe& u, int samples, uint64_t seed);

// -- rendering -----------------------------------------------------------------------

// `x' = y & y' = x when x > y (+) x' = x & y' = y when !(x > y)`
std::string renderCsp(const Csp& c);
std::string renderBranch(const CspBranch& b);

} // namespace oe
