#include "oe/interp.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "oe/calculus.hpp"
#include "oe/funcsem.hpp"
#include "oe/semantics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oe {

bool Store::operator==(const Store& o) const {
  if (vals.size() != o.vals.size() || arrays.size() != o.arrays.size()) return false;
  for (const auto& [k, v] : vals) {
    auto it = o.vals.find(k);
    if (it == o.vals.end() || !(it->second == v)) return false;
  }
  for (const auto& [k, a] : arrays) {
    auto it = o.arrays.find(k);
    if (it == o.arrays.end() || it->second.size() != a.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (!(a[i] == it->second[i])) return false;
  }
  return true;
}

// -- run ----------------------------------------------------------------------------

namespace {

void addDiagOnce(std::vector<Diagnostic>& diags, DiagKind kind, const std::string& loc,
                 const std::string& msg) {
  for (const auto& d : diags)
    if (d.kind == kind && d.location == loc) return;
  diags.push_back({kind, loc, msg});
}

struct Interp {
  const Program& prog;
  const RunCaps& caps;
  const Registry* registry;
  Store store;
  std::vector<Diagnostic> diags;
  std::map<std::string, long long> iterations;

  Interp(const Program& p, const Store& s0, const RunCaps& c, const Registry* reg)
      : prog(p), caps(c), registry(reg) {
    for (const auto& d : p.decls) {
      if (d.type == VarType::Array) {
        auto it = s0.arrays.find(d.name);
        if (it != s0.arrays.end()) {
          store.arrays[d.name] = it->second;
          store.arrays[d.name].resize(static_cast<size_t>(d.arraySize), Value::psi());
        } else {
          store.arrays[d.name].assign(static_cast<size_t>(d.arraySize), Value::psi());
        }
      } else {
        auto it = s0.vals.find(d.name);
        store.vals[d.name] = it != s0.vals.end() ? it->second : Value::psi();
      }
    }
  }

  EvalCtx ctx() { return {&store, nullptr, &diags}; }

  Value narrowed(Value v) {
    if (v.t == Value::T::Int && !v.i.fitsInt64())
      throw OeError(ErrKind::Overflow, "value does not fit 64 bits: " + v.i.str());
    return v;
  }

  // resolved write destination
  struct Dest {
    bool isArray = false;
    std::string name;
    long long index = 0;
    std::string key() const { return isArray ? name + "[" + std::to_string(index) + "]" : name; }
  };

  Dest resolveTarget(const Target& t) {
    switch (t.kind) {
      case TargetKind::Var:
        return {false, t.name, 0};
      case TargetKind::ArrayElem: {
        Value idx = evaluate(t.index, ctx());
        if (idx.t != Value::T::Int)
          throw OeError(ErrKind::OutOfRange, "array index is not an integer");
        auto& arr = store.arrays.at(t.name);
        if (idx.i.signum() < 0 || !idx.i.fitsInt64() ||
            idx.i.toInt64() >= static_cast<int64_t>(arr.size()))
          throw OeError(ErrKind::OutOfRange,
                        "array index out of range: " + t.name + "[" + idx.i.str() + "]");
        return {true, t.name, idx.i.toInt64()};
      }
      case TargetKind::Deref: {
        std::string cur = t.name;
        for (int i = 0; i < t.depth; ++i) {
          auto it = store.vals.find(cur);
          if (it == store.vals.end())
            throw OeError(ErrKind::UnknownVariable, "unknown variable: " + cur);
          if (it->second.t != Value::T::Addr)
            throw OeError(ErrKind::WrongAddress,
                          it->second.isPsi()
                              ? "dereference of uninitialized pointer '" + cur + "'"
                              : "dereference of non-address value in '" + cur + "'");
          cur = it->second.addr.of;
        }
        return {false, cur, 0};
      }
    }
    return {false, t.name, 0};
  }

  bool isPointerVar(const std::string& name) const {
    const Decl* d = prog.find(name);
    return d && (d->type == VarType::Ptr || d->type == VarType::PtrPtr);
  }

  void commit(const Dest& d, Value v) {
    v = narrowed(std::move(v));
    if (d.isArray) {
      store.arrays[d.name][static_cast<size_t>(d.index)] = std::move(v);
      return;
    }
    if (isPointerVar(d.name) && v.t != Value::T::Addr)
      addDiagOnce(diags, DiagKind::WrongAddress, d.name,
                  "pointer '" + d.name + "' receives a non-address value");
    store.vals[d.name] = std::move(v);
  }

  void execTerm(const Term& t) {
    // guard evaluation against the pre-state, with overlap detection per target
    std::map<std::string, int> trueGuards;
    std::vector<char> taken(t.writes.size(), 0);
    for (size_t i = 0; i < t.writes.size(); ++i) {
      const WriteOp& w = t.writes[i];
      bool g = w.guard ? evaluate(w.guard, ctx()) : true;
      taken[i] = g ? 1 : 0;
      if (g && w.guard) {
        int& n = trueGuards[w.target.token()];
        if (++n >= 2)
          throw OeError(ErrKind::GuardOverlap,
                        "two guards hold at once for '" + w.target.token() +
                            "' at state " + renderStore(store));
      }
    }
    // evaluate all taken payloads and destinations against the pre-state
    struct Pending {
      Dest dest;
      Value value;
    };
    std::vector<Pending> pending;
    for (size_t i = 0; i < t.writes.size(); ++i) {
      if (!taken[i]) continue;
      const WriteOp& w = t.writes[i];
      Dest d = resolveTarget(w.target);
      Value v = evaluate(w.payload, ctx());
      pending.push_back({std::move(d), std::move(v)});
    }
    // aliasing two simultaneous writes onto one location is only legal when
    // the values agree
    for (size_t i = 0; i < pending.size(); ++i)
      for (size_t j = i + 1; j < pending.size(); ++j)
        if (pending[i].dest.key() == pending[j].dest.key() &&
            !(pending[i].value == pending[j].value))
          throw OeError(ErrKind::GuardOverlap,
                        "simultaneous writes to '" + pending[i].dest.key() +
                            "' with different values");
    for (auto& pw : pending) commit(pw.dest, std::move(pw.value));
  }

  bool evalCond(const BoolPtr& cond, const Store& before, const Store& after) {
    EvalCtx c{&before, &after, &diags};
    return evaluate(cond, c);
  }

  void exec(const NodePtr& n) {
    switch (n->kind) {
      case NodeKind::Skip:
        return;
      case NodeKind::TermNode:
        execTerm(n->term);
        return;
      case NodeKind::Seq:
        for (const auto& c : n->seq) exec(c);
        return;
      case NodeKind::Guarded:
        if (evaluate(n->guard, ctx())) exec(n->body);
        return;
      case NodeKind::LoopCount: {
        long long count;
        if (n->countIsName) {
          Value v = evaluate(mVar(n->countName), ctx());
          if (v.t != Value::T::Int)
            throw OeError(ErrKind::OutOfRange, "loop count '" + n->countName + "' is not an integer");
          if (v.i.signum() < 0 || !v.i.fitsInt64())
            throw OeError(ErrKind::OutOfRange, "loop count out of range");
          count = v.i.toInt64();
        } else {
          if (!n->count.fitsInt64()) throw OeError(ErrKind::OutOfRange, "loop count out of range");
          count = n->count.toInt64();
        }
        if (count > caps.loopCap)
          throw OeError(ErrKind::Divergence, "loop count exceeds the iteration cap");
        std::string label = prettyPrintNode(n);
        for (long long i = 0; i < count; ++i) {
          exec(n->body);
          ++iterations[label];
        }
        return;
      }
      case NodeKind::LoopUntil: {
        std::string label = prettyPrintNode(n);
        if (!n->until.type2) {
          // type-1 may exit before any iteration
          if (evalCond(n->until.cond, store, store)) return;
        }
        for (long long i = 0; i < caps.loopCap; ++i) {
          Store before = store;
          exec(n->body);
          ++iterations[label];
          if (evalCond(n->until.cond, before, store)) return;
        }
        throw OeError(ErrKind::Divergence,
                      "until-loop did not terminate within " + std::to_string(caps.loopCap) +
                          " iterations");
      }
      case NodeKind::WaitLoop: {
        if (evalCond(n->until.cond, store, store)) return;
        throw OeError(ErrKind::Divergence,
                      "wait loop blocked: the condition is false and skip cannot change state");
      }
      case NodeKind::Par: {
        Interp first(prog, store, caps, registry);
        first.exec(n->left);
        first.exec(n->right);
        Interp second(prog, store, caps, registry);
        second.exec(n->right);
        second.exec(n->left);
        if (!(first.store == second.store))
          throw OeError(ErrKind::CooperativeParallelUnsupported,
                        "parallel branches interfere: execution orders disagree");
        store = std::move(first.store);
        for (const auto& d : first.diags) addDiagOnce(diags, d.kind, d.location, d.message);
        return;
      }
      case NodeKind::Call: {
        if (!registry)
          throw OeError(ErrKind::UnknownFunction,
                        "call to '" + n->fname + "' with no registry loaded");
        const Registry::ConcreteImpl* impl = registry->concreteImpl(n->fname);
        if (!impl)
          throw OeError(ErrKind::EvalUnsupported,
                        "no concrete implementation for spliced function '" + n->fname + "'");
        (*impl)(store, n->callArgs);
        return;
      }
    }
  }
};

} // namespace

RunResult run(const Program& p, const Store& s0, const RunCaps& caps, const Registry* registry) {
  Program lowered = registry ? lowerCalls(p, *registry) : p;
  Interp in(lowered, s0, caps, registry);
  in.exec(lowered.body);
  return {std::move(in.store), std::move(in.diags), std::move(in.iterations)};
}

// -- random stores -----------------------------------------------------------------------

Store randomStore(const Program& p, Rng& rng) {
  Store s;
  for (const auto& d : p.decls) {
    switch (d.type) {
      case VarType::Int:
        s.vals[d.name] = Value::ofInt(BigInt(rng.range(-100, 100)));
        break;
      case VarType::Ptr:
      case VarType::PtrPtr:
        s.vals[d.name] = Value::psi();
        break;
      case VarType::Array: {
        auto& arr = s.arrays[d.name];
        arr.resize(static_cast<size_t>(d.arraySize));
        for (auto& v : arr) v = Value::ofInt(BigInt(rng.range(-100, 100)));
        break;
      }
    }
  }
  return s;
}

// -- differential check ---------------------------------------------------------------------

namespace {

std::string renderValue(const Value& v) {
  switch (v.t) {
    case Value::T::Int: return v.i.str();
    case Value::T::Addr: return "&" + v.addr.of;
    case Value::T::PsiV: return "psi";
  }
  return "?";
}

// one sample comparison; empty string = consistent
std::string checkOneSample(const Program& p, const Csp& csp, const Universe& u,
                           const Store& s0, const DiffOptions& opts, bool& comparable) {
  comparable = false;
  RunResult rr;
  bool ranOk = true;
  ErrKind runErrKind{};
  try {
    rr = run(p, s0, opts.caps, opts.registry);
  } catch (const OeError& e) {
    ranOk = false;
    runErrKind = e.kind;
  }

  // symbolic guard selection at s0
  std::vector<int> trueBranches;
  for (size_t i = 0; i < csp.branches.size(); ++i) {
    bool v;
    try {
      EvalCtx c{&s0, nullptr, nullptr};
      v = evaluate(csp.branches[i].guard, c);
    } catch (const OeError&) {
      return ""; // guard not evaluable at this store; not comparable
    }
    if (v) trueBranches.push_back(static_cast<int>(i));
  }

  if (!ranOk) {
    if (runErrKind == ErrKind::GuardOverlap) {
      // consistent iff the symbolic side also lost exclusivity
      comparable = true;
      if (trueBranches.size() >= 2) return "";
      return "interpreter reports GuardOverlap but the reduced CSP selects " +
             std::to_string(trueBranches.size()) + " branch(es) at " + renderStore(s0);
    }
    if (runErrKind == ErrKind::Divergence) {
      // consistent iff the selected branch carries a residual that is false
      // at s0 (the symbolic side says the program cannot complete)
      if (trueBranches.size() == 1) {
        for (const auto& r : csp.branches[trueBranches[0]].sp.residuals) {
          try {
            EvalCtx c{&s0, &s0, nullptr};
            if (!evaluate(r, c)) {
              comparable = true;
              return "";
            }
          } catch (const OeError&) {
          }
        }
        comparable = true;
        return "interpreter diverges but the reduced CSP promises completion at " +
               renderStore(s0);
      }
      return "";
    }
    return ""; // overflow, psi comparison etc.: sample not comparable
  }

  comparable = true;
  if (trueBranches.size() != 1)
    return "exactly one guard must hold, got " + std::to_string(trueBranches.size()) + " at " +
           renderStore(s0);

  const SemPredicate& sp = csp.branches[trueBranches[0]].sp;
  for (const auto& slot : u.slots) {
    MathPtr eq;
    auto it = sp.finalEqs.find(slot);
    if (it != sp.finalEqs.end()) {
      eq = it->second;
    } else if (sp.residualVars.count(slot.base)) {
      continue; // relational; covered by residual checks below
    } else {
      eq = slot.index ? mIndex(slot.base, mInt(*slot.index), Marker::Initial)
                      : mVar(slot.base, Marker::Initial);
    }
    Value predicted;
    try {
      EvalCtx c{&s0, &rr.final_, nullptr};
      predicted = evaluate(eq, c);
    } catch (const OeError&) {
      continue; // opaque equation; not checkable
    }
    Value actual;
    if (slot.index) {
      const auto& arr = rr.final_.arrays.at(slot.base);
      long long i = slot.index->toInt64();
      if (i < 0 || i >= static_cast<long long>(arr.size())) continue;
      actual = arr[static_cast<size_t>(i)];
    } else {
      actual = rr.final_.vals.at(slot.base);
    }
    if (!(predicted == actual))
      return "final value of '" + slot.key() + "': reduced semantics predicts " +
             renderValue(predicted) + ", interpreter got " + renderValue(actual) + " at " +
             renderStore(s0);
  }

  // residual relational constraints must hold of (initial, final)
  for (const auto& r : sp.residuals) {
    try {
      EvalCtx c{&s0, &rr.final_, nullptr};
      if (!evaluate(r, c))
        return "residual '" + renderBool(r, RenderMode::Predicate) + "' fails at " +
               renderStore(s0);
    } catch (const OeError&) {
      // truly opaque residual; not checkable
    }
  }

  // unwritten arrays must come through unchanged
  for (const auto& d : p.decls) {
    if (d.type != VarType::Array) continue;
    if (sp.residualVars.count(d.name)) continue;
    const auto& fin = rr.final_.arrays.at(d.name);
    for (long long i = 0; i < d.arraySize; ++i) {
      Slot slot{d.name, BigInt(i)};
      if (u.contains(slot)) continue; // tracked slot, already compared
      auto it0 = s0.arrays.find(d.name);
      Value init = (it0 != s0.arrays.end() && i < static_cast<long long>(it0->second.size()))
                       ? it0->second[static_cast<size_t>(i)]
                       : Value::psi();
      if (!(fin[static_cast<size_t>(i)] == init))
        return "untouched element '" + slot.key() + "' changed at " + renderStore(s0);
    }
  }
  return "";
}

} // namespace

DiffReport differentialCheckSerial(const Program& p, const Csp& csp, const DiffOptions& opts) {
  DiffReport report;
  report.samples = opts.samples;
  Universe u = Universe::ofProgram(p);
  for (int i = 0; i < opts.samples; ++i) {
    Rng rng(opts.seed + 0x9E3779B97f4A7C15ull * static_cast<uint64_t>(i + 1));
    Store s0 = randomStore(p, rng);
    bool comparable = false;
    std::string detail = checkOneSample(p, csp, u, s0, opts, comparable);
    if (!comparable) {
      ++report.skipped;
      continue;
    }
    ++report.checked;
    if (!detail.empty()) report.mismatches.push_back({s0, detail});
  }
  return report;
}

DiffReport differentialCheckCsp(const Program& p, const Csp& csp, const DiffOptions& opts) {
#ifndef _OPENMP
  return differentialCheckSerial(p, csp, opts);
#else
  if (!opts.parallel) return differentialCheckSerial(p, csp, opts);
  DiffReport report;
  report.samples = opts.samples;
  Universe u = Universe::ofProgram(p);
  std::vector<std::string> details(static_cast<size_t>(opts.samples));
  std::vector<Store> stores(static_cast<size_t>(opts.samples));
  std::vector<char> comparable(static_cast<size_t>(opts.samples), 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < opts.samples; ++i) {
    Rng rng(opts.seed + 0x9E3779B97f4A7C15ull * static_cast<uint64_t>(i + 1));
    Store s0 = randomStore(p, rng);
    bool cmp = false;
    details[static_cast<size_t>(i)] = checkOneSample(p, csp, u, s0, opts, cmp);
    comparable[static_cast<size_t>(i)] = cmp ? 1 : 0;
    stores[static_cast<size_t>(i)] = std::move(s0);
  }
  for (int i = 0; i < opts.samples; ++i) {
    if (!comparable[static_cast<size_t>(i)]) {
      ++report.skipped;
      continue;
    }
    ++report.checked;
    if (!details[static_cast<size_t>(i)].empty())
      report.mismatches.push_back({stores[static_cast<size_t>(i)], details[static_cast<size_t>(i)]});
  }
  return report;
#endif
}

DiffReport differentialCheck(const Program& p, const DiffOptions& opts) {
  SemOptions so;
  so.registry = opts.registry;
  so.unrollCap = opts.unrollCap;
  so.branchBudget = opts.branchBudget;
  SemResult sem;
  try {
    sem = programSem(p, so);
  } catch (const OeError& e) {
    DiffReport report;
    report.samples = opts.samples;
    report.skipped = opts.samples;
    report.skipReason = std::string("symbolic reduction failed (") + errKindName(e.kind) +
                        "): " + e.what();
    return report;
  }
  if (sem.partial) {
    DiffReport report;
    report.samples = opts.samples;
    report.skipped = opts.samples;
    report.skipReason = "symbolic reduction is partial (possible divergence); nothing to compare";
    return report;
  }
  return differentialCheckCsp(p, sem.csp, opts);
}

// -- fuzzing -----------------------------------------------------------------------------

namespace {

struct Fuzzer {
  Rng rng;
  std::vector<std::string> vars;
  bool allowLoops;
  // guarded constructs multiply CSP branches; a small budget keeps every
  // generated program reducible within the default branch budget
  int guardBudget = 5;

  explicit Fuzzer(uint64_t seed, bool loops) : rng(seed), allowLoops(loops) {}

  MathPtr genExpr(int depth, int mulBudget) {
    int pick = static_cast<int>(rng.range(0, depth <= 0 ? 1 : (mulBudget > 0 ? 4 : 3)));
    switch (pick) {
      case 0:
        return mVar(vars[static_cast<size_t>(rng.range(0, static_cast<long long>(vars.size()) - 1))]);
      case 1:
        return mInt(rng.range(-9, 9));
      case 2:
        return mBin('+', genExpr(depth - 1, mulBudget), genExpr(depth - 1, mulBudget));
      case 3:
        return mBin('-', genExpr(depth - 1, mulBudget), genExpr(depth - 1, mulBudget));
      default:
        return mBin('*', genExpr(depth - 1, 0), genExpr(depth - 1, 0));
    }
  }

  BoolPtr genCmp() {
    Rel rels[] = {Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le, Rel::Gt, Rel::Ge};
    return bCmp(rels[rng.range(0, 5)], genExpr(1, 1), genExpr(1, 0));
  }

  BoolPtr genGuard(int depth) {
    if (depth <= 0 || rng.range(0, 2) == 0) return genCmp();
    switch (rng.range(0, 2)) {
      case 0: return bAnd(genGuard(depth - 1), genGuard(depth - 1));
      case 1: return bOr(genGuard(depth - 1), genGuard(depth - 1));
      default: return bNot(genGuard(depth - 1));
    }
  }

  NodePtr genTerm(int depth) {
    Term t;
    int targets = static_cast<int>(rng.range(1, 2));
    std::vector<std::string> pool = vars;
    for (int i = 0; i < targets && !pool.empty(); ++i) {
      size_t vi = static_cast<size_t>(rng.range(0, static_cast<long long>(pool.size()) - 1));
      std::string v = pool[vi];
      pool.erase(pool.begin() + static_cast<long long>(vi));
      int form = static_cast<int>(rng.range(0, depth > 0 && guardBudget > 0 ? 2 : 0));
      if (form != 0) guardBudget -= form;
      if (form == 0) {
        WriteOp w;
        w.target = {TargetKind::Var, v, nullptr, 0};
        w.payload = genExpr(2, 1);
        t.writes.push_back(std::move(w));
      } else {
        // an exclusive guarded pair: e < c and e >= c (second arm optional)
        MathPtr e = genExpr(1, 0);
        MathPtr c = mInt(rng.range(-20, 20));
        WriteOp w1;
        w1.target = {TargetKind::Var, v, nullptr, 0};
        w1.payload = genExpr(2, 1);
        w1.guard = bCmp(Rel::Lt, e, c);
        t.writes.push_back(std::move(w1));
        if (form == 2) {
          WriteOp w2;
          w2.target = {TargetKind::Var, v, nullptr, 0};
          w2.payload = genExpr(2, 1);
          w2.guard = bCmp(Rel::Ge, e, c);
          t.writes.push_back(std::move(w2));
        }
      }
    }
    return nTerm(std::move(t));
  }

  NodePtr genItem(int depth) {
    long long pick = rng.range(0, 9);
    if (depth > 0 && pick == 0 && guardBudget > 0) {
      --guardBudget;
      return nGuarded(genSeq(depth - 1), genGuard(1));
    }
    if (depth > 0 && pick == 1 && allowLoops) {
      return nLoopCount(genSeq(depth - 1), BigInt(rng.range(0, 3)));
    }
    if (depth > 0 && pick == 2 && vars.size() >= 2) {
      // independent parallel: split the variable pool
      size_t half = vars.size() / 2;
      std::vector<std::string> left(vars.begin(), vars.begin() + static_cast<long long>(half));
      std::vector<std::string> right(vars.begin() + static_cast<long long>(half), vars.end());
      Fuzzer fl(rng.next(), allowLoops);
      fl.vars = left;
      Fuzzer fr(rng.next(), allowLoops);
      fr.vars = right;
      return nPar(fl.genTerm(0), fr.genTerm(0));
    }
    if (pick == 3) return nSkip();
    return genTerm(depth);
  }

  NodePtr genSeq(int depth) {
    std::vector<NodePtr> items;
    int n = static_cast<int>(rng.range(1, 3));
    for (int i = 0; i < n; ++i) items.push_back(genItem(depth));
    return nSeq(std::move(items));
  }

  Program gen(int depth) {
    Program p;
    static const char* names[] = {"x", "y", "z", "w"};
    int nv = static_cast<int>(rng.range(2, 4));
    vars.clear();
    for (int i = 0; i < nv; ++i) {
      vars.push_back(names[i]);
      p.decls.push_back({names[i], VarType::Int, 0});
    }
    p.body = genSeq(depth);
    return p;
  }
};

} // namespace

std::vector<Program> fuzzPrograms(const FuzzOptions& opts) {
  std::vector<Program> out;
  out.reserve(static_cast<size_t>(opts.count));
  for (int i = 0; i < opts.count; ++i) {
    Fuzzer f(opts.seed + 0x51ED2701u * static_cast<uint64_t>(i + 1), opts.allowLoops);
    Program p = f.gen(opts.depth);
    // parse-validate what we emit; regeneration is a bug, not a fallback
    parse(prettyPrint(p));
    out.push_back(std::move(p));
  }
  return out;
}

// -- store literals ----------------------------------------------------------------------

Store parseStoreLiteral(const std::string& text) {
  Store s;
  std::string t = text;
  size_t pos = 0;
  auto skipWs = [&] {
    while (pos < t.size() && (t[pos] == ' ' || t[pos] == '\t')) ++pos;
  };
  while (true) {
    skipWs();
    if (pos >= t.size()) break;
    size_t eq = t.find('=', pos);
    if (eq == std::string::npos)
      throw OeError(ErrKind::SyntaxError, "store literal entry needs '=': " + t.substr(pos));
    std::string name = t.substr(pos, eq - pos);
    while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
    pos = eq + 1;
    skipWs();
    if (pos < t.size() && t[pos] == '[') {
      std::vector<Value> arr;
      ++pos;
      while (true) {
        skipWs();
        if (pos < t.size() && t[pos] == ']') {
          ++pos;
          break;
        }
        size_t end = t.find_first_of(",]", pos);
        if (end == std::string::npos)
          throw OeError(ErrKind::SyntaxError, "unterminated array literal");
        std::string item = t.substr(pos, end - pos);
        while (!item.empty() && item.back() == ' ') item.pop_back();
        arr.push_back(item == "psi" ? Value::psi() : Value::ofInt(BigInt::fromString(item)));
        pos = end;
        if (t[pos] == ',') ++pos;
      }
      s.arrays[name] = std::move(arr);
    } else {
      size_t end = t.find(',', pos);
      if (end == std::string::npos) end = t.size();
      std::string item = t.substr(pos, end - pos);
      while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.pop_back();
      if (item == "psi")
        s.vals[name] = Value::psi();
      else if (!item.empty() && item[0] == '&')
        s.vals[name] = Value::ofAddr({item.substr(1)});
      else
        s.vals[name] = Value::ofInt(BigInt::fromString(item));
      pos = end;
    }
    skipWs();
    if (pos < t.size() && t[pos] == ',') {
      ++pos;
      continue;
    }
    if (pos >= t.size()) break;
    throw OeError(ErrKind::SyntaxError, "expected ',' in store literal");
  }
  return s;
}

std::string renderStore(const Store& s) {
  std::string out;
  for (const auto& [name, v] : s.vals) {
    if (!out.empty()) out += ", ";
    out += name + "=" + renderValue(v);
  }
  for (const auto& [name, arr] : s.arrays) {
    if (!out.empty()) out += ", ";
    out += name + "=[";
    for (size_t i = 0; i < arr.size(); ++i) {
      if (i) out += ",";
      out += renderValue(arr[i]);
    }
    out += "]";
  }
  return out;
}

} // namespace oe
