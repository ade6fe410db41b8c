#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oe/pointers.hpp"
#include "oe/semantics.hpp"
#include "oe/syntax.hpp"

namespace oe {

class Registry; // funcsem.hpp

enum class ReduceStrategy { LeftFold, PairwiseTree };

struct TraceStep {
  std::string rule;
  SemFormula before;
  SemFormula after;
};

struct ReductionTrace {
  std::vector<TraceStep> steps;
};

struct SemOptions {
  ReduceStrategy strategy = ReduceStrategy::LeftFold;
  int unrollCap = 64;
  int branchBudget = 256;
  bool trace = false;
  bool parallel = true; // PairwiseTree may reduce independent pairs concurrently
  const Registry* registry = nullptr;
};

// One reduction outcome. `partial` marks a DivergencePartial: an until-loop
// did not close within the unroll cap and the CSP describes only the unrolled
// prefix (a Divergence diagnostic is attached).
struct SemResult {
  Csp csp;
  bool partial = false;
  ReductionTrace trace;
};

// -- the calculus -----------------------------------------------------------------

// Composes two completed CSPs: for each branch pair the successor's
// initial-value reads are substituted with the predecessor's final-value
// equations (the transfer conjunct is realized by substitution and never
// materializes); guards conjoin; statically false branches drop. Variables the
// predecessor constrains only relationally relay by renaming the successor's
// initial reads to final reads and conjoining the residual. Throws
// RelationalRelayUnsupported when the successor writes or guards on such a
// variable, BranchBudgetExceeded past the budget.
Csp relay(const Csp& p, const Csp& q, const Universe& u, int branchBudget = 256);

// Folds relay over the formula in the chosen association; both strategies
// yield branch-set-equivalent results. PairwiseTree reduces adjacent pairs
// level by level and may process pairs in parallel (deterministic slotting).
std::pair<Csp, ReductionTrace> reduce(const SemFormula& f, const Universe& u,
                                      const SemOptions& opts = {});

// Structural semantics of a validated node over the program universe.
SemResult nodeSem(const NodePtr& n, const Program& p, const SemOptions& opts = {});

// Whole-program semantics: universe derived from declarations, pointer
// environments threaded per branch.
SemResult programSem(const Program& p, const SemOptions& opts = {});

// sem(body^N) for a literal count: N copies reduced with the configured
// strategy; N=0 is the identity, N=1 the body itself.
Csp loopCountSem(const Csp& body, long long n, const Universe& u, const SemOptions& opts = {});

// Symbolic unrolling of a repeat-until loop against an accumulated prefix.
// Type-1 conditions may exit before any iteration; type-2 run the body at
// least once. Returns partial=true (with a Divergence diagnostic) when any
// branch stays live after the unroll cap.
SemResult loopUntilSem(const Csp& prefix, const Csp& body, const SemBool& cond,
                       const Universe& u, const SemOptions& opts = {});

// sem(skip^b): identity plus the wait condition as a residual.
Csp waitLoopSem(const SemBool& cond, const Universe& u);

// -- invariant mode -----------------------------------------------------------------

struct LoopSpec {
  BoolPtr invariant;   // over Initial/Final reads of body-written variables
  BoolPtr termination; // over Final reads
};

// Checks invariant preservation probabilistically (run one body iteration from
// sampled entry-satisfying stores) and, on success, returns a single-branch
// CSP whose residual is the invariant specialized by the termination
// condition, conjoined with that condition. Termination itself is assumed and
// flagged. Throws InvariantViolated with a witness store on a counterexample.
Csp loopInvariantSem(const NodePtr& loop, const Program& p, const LoopSpec& spec,
                     int samples, uint64_t seed);

// -- derived pointer facts ------------------------------------------------------------

// Facts implied by the points-to links of a reduced branch: for p holding &a,
// *p' names a and carries a's final value; double indirection derives through
// the chain.
struct DerivedFact {
  MathPtr lhs;         // *p' / **c'
  std::string pointee; // resolved variable
  MathPtr value;       // that variable's final value
};

std::vector<DerivedFact> derivePointerFacts(const Program& p, const SemPredicate& sp);

// One term step for pointer programs: resolves deref targets and reads
// through env, then applies plain term semantics; the returned env reflects
// this term's own pointer writes.
std::pair<Csp, PointsToEnv> pointerTermSem(const Term& t, const PointsToEnv& env,
                                           const Universe& u, int branchBudget = 256);

// -- trace rendering -------------------------------------------------------------------

std::string renderTrace(const ReductionTrace& t);

} // namespace oe
