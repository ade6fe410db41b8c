#pragma once

#include <map>
#include <string>
#include <vector>

#include "oe/expr.hpp"
#include "oe/syntax.hpp"

namespace oe {

class Registry; // funcsem.hpp

// Concrete state: one value per declared scalar/pointer, one integer sequence
// per declared array. Values are 64-bit checked at commit time.
struct Store {
  std::map<std::string, Value> vals;
  std::map<std::string, std::vector<Value>> arrays;

  bool operator==(const Store& o) const;
};

struct RunCaps {
  long long loopCap = 10000;
};

struct RunResult {
  Store final_;
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, long long> iterations; // loop label -> count
};

// Initializes missing declared variables to Psi; a diagnostic fires on first
// use, not at initialization. Terms evaluate every payload and guard against
// the pre-state before committing (simultaneous semantics). Throws OeError on
// GuardOverlap, Divergence, Overflow, unknown variables and address misuse.
RunResult run(const Program& p, const Store& s0, const RunCaps& caps = {},
              const Registry* registry = nullptr);

// -- differential testing ---------------------------------------------------------

struct Csp; // semantics.hpp

struct Mismatch {
  Store store;
  std::string detail;
};

struct DiffReport {
  int samples = 0;
  int checked = 0; // samples that produced a comparable run
  int skipped = 0;
  std::vector<Mismatch> mismatches;
  std::string skipReason; // set when the whole program was skipped
};

struct DiffOptions {
  int samples = 100;
  uint64_t seed = 0;
  bool parallel = true; // OpenMP across sample states; result independent of workers
  RunCaps caps;
  int unrollCap = 64;
  int branchBudget = 256;
  const Registry* registry = nullptr;
};

// Runs the program concretely on random initial stores and checks that the
// reduced CSP selects exactly one branch whose equations predict every final
// value. `csp` is the already-reduced semantics (so tests can corrupt it).
DiffReport differentialCheckCsp(const Program& p, const Csp& csp, const DiffOptions& opts);

// Convenience: reduces with default options first; programs whose reduction is
// partial (divergence) are skipped with a note.
DiffReport differentialCheck(const Program& p, const DiffOptions& opts);

// Serial reference for the parallel sample loop; bit-identical reports.
DiffReport differentialCheckSerial(const Program& p, const Csp& csp, const DiffOptions& opts);

// -- fuzzing -------------------------------------------------------------------------

struct FuzzOptions {
  int count = 100;
  int depth = 2;       // guard/structure nesting
  uint64_t seed = 0;
  bool allowLoops = false; // bounded counted loops only
};

// Deterministic generator of parse-valid programs over 2-4 int variables.
std::vector<Program> fuzzPrograms(const FuzzOptions& opts);

// Random store covering p's declarations, integers uniform in [-100, 100].
Store randomStore(const Program& p, Rng& rng);

// -- store literals ---------------------------------------------------------------------

// `x=1,y=-2,p=&a,q=psi,A=[3,1,2]`
Store parseStoreLiteral(const std::string& text);
std::string renderStore(const Store& s);

} // namespace oe
