#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oe {

enum class DiagKind {
  UninitializedRead,
  WrongAddress,
  GuardOverlap,
  Divergence,
  SymbolicIndexUnsupported,
  AssumedTermination, // invariant-derived semantics; termination not proved
};

const char* diagKindName(DiagKind k);

struct Diagnostic {
  DiagKind kind;
  std::string location;
  std::string message;
};

// Hard errors: parse/type failures, unsupported constructs, evaluation faults.
enum class ErrKind {
  SyntaxError,
  DuplicateUnguardedTarget,
  UndeclaredVariable,
  UnknownVariable,
  IllegalAddressArithmetic,
  PsiInComparison,
  Overflow,
  GuardOverlap,
  Divergence,
  OverlapStaticallyTrue,
  BranchBudgetExceeded,
  RelationalRelayUnsupported,
  CooperativeParallelUnsupported,
  SymbolicIndexUnsupported,
  SymbolicLoopUnsupported,
  InvariantViolated,
  WrongAddress,
  UnresolvedPointer,
  UnknownFunction,
  ArityMismatch,
  FuelExhausted,
  NoBranchApplies,
  SizeLimit,
  OutOfRange,
  EvalUnsupported,
};

const char* errKindName(ErrKind k);

struct OeError : std::runtime_error {
  ErrKind kind;
  OeError(ErrKind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

} // namespace oe
