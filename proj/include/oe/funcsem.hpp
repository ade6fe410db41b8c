#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oe/semantics.hpp"
#include "oe/syntax.hpp"

namespace oe {

struct Store;

// A named semantic definition. Either a CSP template spliced into a formula by
// name (relational residuals over the written variables), or a recursive value
// definition dispatched by exclusive guards.
struct FunctionDef {
  enum class Kind { SpliceSP, RecursiveValue };

  std::string name;
  std::vector<std::string> params;
  Kind kind = Kind::RecursiveValue;

  struct ValBranch {
    MathPtr value;
    BoolPtr guard; // null = unconditional
  };
  std::vector<ValBranch> branches; // RecursiveValue

  std::vector<BoolPtr> residuals;  // SpliceSP, over params (A final, A initial)
  std::set<std::string> writes;    // SpliceSP

  bool isRecursive() const;
};

// Read-only after load. Line format:
//   fn factorial(N) = 1 when N=1 (+) N*factorial(N-1) when N>1
//   fn sum(A) = sigma(A, 0, N-1)
//   fn quicksort(A) residual "perm(A',A) && sorted(A')" writes {A}
// Recursive definitions must be well-founded on their integer parameter.
class Registry {
public:
  using ConcreteImpl =
      std::function<void(Store&, const std::vector<MathPtr>& args)>;

  Registry();

  static Registry parseString(const std::string& text);
  static Registry parseFile(const std::string& path);

  void add(FunctionDef def);
  const FunctionDef* find(const std::string& name) const;

  // Concrete behaviors for splices the interpreter can execute (quicksort is
  // built in); null when unknown.
  const ConcreteImpl* concreteImpl(const std::string& name) const;

private:
  std::map<std::string, FunctionDef> fns_;
  std::map<std::string, ConcreteImpl> impls_;
};

// -- operations ----------------------------------------------------------------

// Instantiates a splice template with the call's actual argument names.
Csp instantiateSplice(const std::string& fname, const std::vector<MathPtr>& args,
                      const Registry& reg, const Universe& u);

// Appends the instantiated template as a formula step.
SemFormula spliceCall(SemFormula prefix, const std::string& fname,
                      const std::vector<MathPtr>& args, const Registry& reg,
                      const Universe& u);

// Evaluates a recursive value definition by exclusive-guard dispatch; memoized;
// each unfolding burns fuel. Throws NoBranchApplies outside all guards and
// FuelExhausted when the budget runs out.
BigInt unfoldRecursive(const std::string& fname, const BigInt& arg, const Registry& reg,
                       long long fuel = 1000000);

// Rewrites registered value calls inside payloads: constant-argument recursive
// calls unfold to literals, non-recursive templates substitute their body.
MathPtr lowerValueCalls(const MathPtr& e, const Registry& reg, long long fuel = 1000000);
Program lowerCalls(const Program& p, const Registry& reg);

// A CSP view of a recursive definition (one branch per arm, guards over the
// parameter) for exclusivity checks.
Csp recursiveDefCsp(const FunctionDef& def);

// -- Tower of Hanoi -------------------------------------------------------------

struct Move {
  char from; // pole 'A'..'C'
  char to;
  bool operator==(const Move& o) const { return from == o.from && to == o.to; }
};

std::string renderMove(const Move& m);

// Recursive middle-order traversal; length 2^n - 1. Serial reference.
std::vector<Move> hanoiSequence(int disks); // throws SizeLimit for disks > 20

// Closed form for the nth move (n = 2^k * (2m+1)); throws OutOfRange when n is
// not in [1, 2^disks - 1].
Move hanoiNthMove(int disks, long long n);

// Every move via the closed form; independent moves may compute in parallel.
std::vector<Move> hanoiAllMoves(int disks, bool parallel = true);

} // namespace oe
