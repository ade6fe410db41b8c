#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "oe/expr.hpp"

namespace oe {

// -- write targets and terms ---------------------------------------------------

enum class TargetKind { Var, ArrayElem, Deref };

struct Target {
  TargetKind kind;
  std::string name;
  MathPtr index; // ArrayElem
  int depth = 0; // Deref
  std::string token() const; // identity for disjointness checks ("x", "A[i+1]", "*p")
};

struct WriteOp {
  Target target;
  MathPtr payload;
  BoolPtr guard; // null = unconditional
};

struct Term {
  std::vector<WriteOp> writes; // nonempty
};

// -- nodes ----------------------------------------------------------------------

struct OENode;
using NodePtr = std::shared_ptr<const OENode>;

enum class NodeKind {
  Skip,
  TermNode,
  Seq,
  Guarded,
  LoopCount,
  LoopUntil,
  WaitLoop,
  Par,
  Call,
};

// An until-condition: loops classify as type-1 (final-value markers only) or
// type-2 (final and initial markers; the body runs at least once).
struct SemBool {
  BoolPtr cond;
  bool type2 = false;
};

struct OENode {
  NodeKind kind;
  Term term;                    // TermNode
  std::vector<NodePtr> seq;     // Seq
  NodePtr body;                 // Guarded / LoopCount / LoopUntil
  BoolPtr guard;                // Guarded
  bool countIsName = false;     // LoopCount with a symbolic bound
  BigInt count;                 // LoopCount literal
  std::string countName;        // LoopCount symbolic
  SemBool until;                // LoopUntil / WaitLoop
  NodePtr left, right;          // Par
  std::string fname;            // Call
  std::vector<MathPtr> callArgs;
};

NodePtr nSkip();
NodePtr nTerm(Term t);
NodePtr nSeq(std::vector<NodePtr> items);
NodePtr nGuarded(NodePtr body, BoolPtr guard);
NodePtr nLoopCount(NodePtr body, BigInt count);
NodePtr nLoopCountSym(NodePtr body, std::string name);
NodePtr nLoopUntil(NodePtr body, SemBool until);
NodePtr nWaitLoop(SemBool until);
NodePtr nPar(NodePtr l, NodePtr r);
NodePtr nCall(std::string fname, std::vector<MathPtr> args);

// -- programs --------------------------------------------------------------------

enum class VarType { Int, Ptr, PtrPtr, Array };

struct Decl {
  std::string name;
  VarType type;
  long long arraySize = 0;
};

struct Program {
  std::vector<Decl> decls;
  NodePtr body;

  const Decl* find(const std::string& name) const;
};

// -- operations --------------------------------------------------------------------

// Parses and statically validates an OE program. Throws OeError with kind
// SyntaxError / DuplicateUnguardedTarget / UndeclaredVariable /
// IllegalAddressArithmetic on bad input.
Program parse(const std::string& text);

// Expression-level entry points (used by the CLI and the registry loader).
// `markers` permits ~v / v' forms.
MathPtr parseMathExpr(const std::string& text, bool markers);
BoolPtr parseBoolExpr(const std::string& text, bool markers);

std::string prettyPrint(const Program& p);
std::string prettyPrintNode(const NodePtr& n);

// Exact set of variables syntactically targeted anywhere in n; deref targets
// contribute their "*p" token.
std::set<std::string> writtenVars(const NodePtr& n);

// Variables read anywhere in n (payloads, guards, conditions, indices).
std::set<std::string> readVars(const NodePtr& n);

bool equalNode(const NodePtr& a, const NodePtr& b);
bool equalProgram(const Program& a, const Program& b);

} // namespace oe
