#include "oe/calculus.hpp"

#include <algorithm>
#include <functional>

#include "oe/funcsem.hpp"
#include "oe/interp.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oe {

namespace {

MathPtr initialRef(const Slot& s) {
  if (s.index) return mIndex(s.base, mInt(*s.index), Marker::Initial);
  return mVar(s.base, Marker::Initial);
}

void addDiagOnce(std::vector<Diagnostic>& diags, DiagKind kind, const std::string& loc,
                 const std::string& msg) {
  for (const auto& d : diags)
    if (d.kind == kind && d.location == loc) return;
  diags.push_back({kind, loc, msg});
}

Binding bindingOfFinalEqs(const SemPredicate& sp, Marker key) {
  Binding b;
  for (const auto& [slot, e] : sp.finalEqs) b[{slot.key(), key}] = e;
  return b;
}

bool refersToAny(const BoolPtr& b, const std::set<std::string>& names) {
  std::vector<std::pair<std::string, Marker>> refs;
  collectVarRefs(b, refs);
  for (const auto& [n, m] : refs)
    if (names.count(n)) return true;
  return false;
}

} // namespace

// -- relay (Rule 2 + Rules 4/5) ------------------------------------------------------

Csp relay(const Csp& p, const Csp& q, const Universe& u, int branchBudget) {
  (void)u; // inputs arrive completed over u; the fold needs no further slots
  if (static_cast<long long>(p.branches.size()) * static_cast<long long>(q.branches.size()) >
      branchBudget)
    throw OeError(ErrKind::BranchBudgetExceeded,
                  "relay would exceed the branch budget (" + std::to_string(branchBudget) + ")");

  Csp out;
  out.diagnostics = p.diagnostics;
  for (const auto& d : q.diagnostics) addDiagOnce(out.diagnostics, d.kind, d.location, d.message);

  for (const auto& bp : p.branches) {
    const std::set<std::string>& rvars = bp.sp.residualVars;
    Binding binding = bindingOfFinalEqs(bp.sp, Marker::Initial);
    for (const auto& bq : q.branches) {
      // relational relay restrictions
      if (!rvars.empty()) {
        for (const auto& w : bq.sp.writes) {
          std::string base = w.substr(0, w.find('['));
          if (rvars.count(base))
            throw OeError(ErrKind::RelationalRelayUnsupported,
                          "successor writes '" + base +
                              "', which the predecessor constrains only relationally");
        }
        if (refersToAny(bq.guard, rvars))
          throw OeError(ErrKind::RelationalRelayUnsupported,
                        "successor guard depends on a relationally constrained variable");
      }

      BoolPtr gq = bq.guard;
      for (const auto& rv : rvars) gq = renameMarker(gq, rv, Marker::Initial, Marker::Final);
      BoolPtr guard = normalizeBool(bAnd(bp.guard, substitute(gq, binding)));
      if (guard->kind == BoolKind::False) continue;

      SemPredicate sp;
      sp.writes = bp.sp.writes;
      for (const auto& w : bq.sp.writes) sp.writes.insert(w);
      sp.residualVars = rvars;
      for (const auto& rv : bq.sp.residualVars) sp.residualVars.insert(rv);

      for (const auto& [slot, e] : bq.sp.finalEqs) {
        if (rvars.count(slot.base)) {
          // completion identity for a relationally constrained variable: the
          // constraint stays relational, so the identity is dropped
          if (equalMath(e, initialRef(slot))) continue;
          throw OeError(ErrKind::RelationalRelayUnsupported,
                        "successor writes '" + slot.base +
                            "', which the predecessor constrains only relationally");
        }
        MathPtr ev = e;
        for (const auto& rv : rvars) ev = renameMarker(ev, rv, Marker::Initial, Marker::Final);
        sp.finalEqs.emplace(slot, substitute(ev, binding));
      }
      for (const auto& r : bp.sp.residuals) sp.residuals.push_back(r);
      for (const auto& r : bq.sp.residuals) {
        BoolPtr rr = r;
        for (const auto& rv : rvars) rr = renameMarker(rr, rv, Marker::Initial, Marker::Final);
        sp.residuals.push_back(substitute(rr, binding));
      }
      out.branches.push_back({guard, std::move(sp)});
    }
  }
  return out;
}

// -- reduce (Rules 1, 3) ---------------------------------------------------------------

namespace {

void traceStep(ReductionTrace& t, bool enabled, const char* rule, SemFormula before,
               SemFormula after) {
  if (!enabled) return;
  t.steps.push_back({rule, std::move(before), std::move(after)});
}

} // namespace

std::pair<Csp, ReductionTrace> reduce(const SemFormula& f, const Universe& u,
                                      const SemOptions& opts) {
  if (f.empty()) throw OeError(ErrKind::EvalUnsupported, "cannot reduce an empty formula");
  ReductionTrace trace;

  SemFormula steps;
  steps.reserve(f.size());
  for (const auto& c : f) steps.push_back(completeCsp(c, u));
  traceStep(trace, opts.trace, "completion", f, steps);

  if (opts.strategy == ReduceStrategy::LeftFold || steps.size() == 1) {
    Csp acc = steps[0];
    for (size_t i = 1; i < steps.size(); ++i) {
      Csp next = relay(acc, steps[i], u, opts.branchBudget);
      traceStep(trace, opts.trace, "relay", {acc, steps[i]}, {next});
      acc = std::move(next);
    }
    return {std::move(acc), std::move(trace)};
  }

  // PairwiseTree: reduce adjacent pairs level by level; pairs are independent
  // and may run concurrently. Slot-indexed writes keep the result identical to
  // the serial schedule.
  SemFormula level = std::move(steps);
  while (level.size() > 1) {
    size_t pairs = level.size() / 2;
    SemFormula next(pairs + (level.size() % 2));
    std::vector<std::string> errors(pairs);
    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel && pairs > 1)
#endif
    for (long long i = 0; i < static_cast<long long>(pairs); ++i) {
      try {
        next[i] = relay(level[2 * i], level[2 * i + 1], u, opts.branchBudget);
      } catch (const OeError& e) {
        errors[i] = e.what();
        failed = true;
      }
    }
    if (failed) {
      for (const auto& m : errors)
        if (!m.empty()) throw OeError(ErrKind::BranchBudgetExceeded, m);
    }
    if (level.size() % 2) next[pairs] = level.back();
    if (opts.trace)
      traceStep(trace, true, "relay (pairwise)", level, next);
    level = std::move(next);
  }
  return {std::move(level[0]), std::move(trace)};
}

// -- loops ---------------------------------------------------------------------------------

Csp loopCountSem(const Csp& body, long long n, const Universe& u, const SemOptions& opts) {
  if (n < 0) throw OeError(ErrKind::OutOfRange, "negative loop count");
  if (n == 0) return identityCsp(u);
  Csp b = completeCsp(body, u);
  if (n == 1) return b;
  SemFormula f(static_cast<size_t>(n), b);
  SemOptions sub = opts;
  sub.trace = false;
  return reduce(f, u, sub).first;
}

namespace {

// cond with Final markers bound to the current state's equations and Initial
// markers to the previous iteration's.
BoolPtr condAt(const BoolPtr& cond, const SemPredicate& cur, const SemPredicate* prev) {
  Binding b = bindingOfFinalEqs(cur, Marker::Final);
  if (prev) {
    Binding bi = bindingOfFinalEqs(*prev, Marker::Initial);
    for (auto& [k, v] : bi) b.emplace(k, v);
  }
  return substitute(cond, b);
}

struct LiveBranch {
  BoolPtr guard;
  SemPredicate sp;
  SemPredicate prev;
  bool hasPrev = false;
};

} // namespace

SemResult loopUntilSem(const Csp& prefix, const Csp& body, const SemBool& cond,
                       const Universe& u, const SemOptions& opts) {
  SemResult result;
  Csp pre = completeCsp(prefix, u);
  Csp b = completeCsp(body, u);

  std::vector<CspBranch> exited;
  std::vector<LiveBranch> live;
  for (const auto& br : pre.branches) live.push_back({br.guard, br.sp, {}, false});
  result.csp.diagnostics = pre.diagnostics;
  for (const auto& d : b.diagnostics)
    addDiagOnce(result.csp.diagnostics, d.kind, d.location, d.message);

  auto splitOnCond = [&](std::vector<LiveBranch>& pool, bool checkNow) {
    if (!checkNow) return;
    std::vector<LiveBranch> still;
    for (auto& lb : pool) {
      BoolPtr c = condAt(cond.cond, lb.sp, lb.hasPrev ? &lb.prev : nullptr);
      if (c->kind == BoolKind::False ||
          containsMarker(c, Marker::Final) || containsMarker(c, Marker::Initial)) {
        // false, or unresolved markers the exit test cannot fold: keep iterating
        still.push_back(std::move(lb));
        continue;
      }
      if (c->kind == BoolKind::True) {
        exited.push_back({lb.guard, lb.sp});
        continue;
      }
      // symbolic guard: split into an exiting and a continuing branch
      BoolPtr stay = normalizeBool(bAnd(lb.guard, bNot(c)));
      BoolPtr leave = normalizeBool(bAnd(lb.guard, c));
      if (leave->kind != BoolKind::False) exited.push_back({leave, lb.sp});
      if (stay->kind != BoolKind::False) {
        lb.guard = stay;
        still.push_back(std::move(lb));
      }
    }
    pool = std::move(still);
  };

  // type-1 loops may exit before any iteration
  splitOnCond(live, !cond.type2);

  for (int k = 0; k < opts.unrollCap && !live.empty(); ++k) {
    std::vector<LiveBranch> next;
    for (const auto& lb : live) {
      Csp one;
      one.branches.push_back({lb.guard, lb.sp});
      Csp stepped = relay(one, b, u, opts.branchBudget);
      for (auto& nb : stepped.branches) next.push_back({nb.guard, std::move(nb.sp), lb.sp, true});
      if (static_cast<long long>(next.size() + exited.size()) > opts.branchBudget)
        throw OeError(ErrKind::BranchBudgetExceeded, "until-loop unrolling exceeds branch budget");
    }
    live = std::move(next);
    splitOnCond(live, true);
  }

  result.csp.branches = std::move(exited);
  if (!live.empty()) {
    result.partial = true;
    for (auto& lb : live) result.csp.branches.push_back({lb.guard, std::move(lb.sp)});
    addDiagOnce(result.csp.diagnostics, DiagKind::Divergence, "",
                "until-loop did not close after " + std::to_string(opts.unrollCap) +
                    " unrollings; result covers the unrolled prefix only");
  }
  return result;
}

Csp waitLoopSem(const SemBool& cond, const Universe& u) {
  Csp c = identityCsp(u);
  BoolPtr atEntry = normalizeBool(retagMarkers(cond.cond, Marker::Final, Marker::Initial));
  if (atEntry->kind == BoolKind::True) return c; // exits immediately, pure identity
  c.branches[0].sp.residuals.push_back(atEntry);
  c.diagnostics.push_back({DiagKind::Divergence, "",
                           "waits for an external event to make '" +
                               renderBool(atEntry, RenderMode::Predicate) +
                               "' true; no state change"});
  return c;
}

// -- node semantics --------------------------------------------------------------------------

namespace {

struct Reducer {
  const Program& prog;
  Universe u;
  SemOptions opts;
  ReductionTrace trace;

  std::set<std::string> pointerVars;

  explicit Reducer(const Program& p, const SemOptions& o) : prog(p), opts(o) {
    u = Universe::ofProgram(p);
    for (const auto& d : p.decls)
      if (d.type == VarType::Ptr || d.type == VarType::PtrPtr) pointerVars.insert(d.name);
  }

  void record(const char* rule, SemFormula before, SemFormula after) {
    if (!opts.trace) return;
    trace.steps.push_back({rule, std::move(before), std::move(after)});
  }

  PointsToEnv envOf(const SemPredicate& sp) const {
    PointsToEnv env;
    for (const auto& pv : pointerVars) {
      Slot s{pv, std::nullopt};
      auto it = sp.finalEqs.find(s);
      if (it == sp.finalEqs.end()) {
        env.known[pv] = {PtsLink::Kind::Unknown, ""};
        continue;
      }
      if (equalMath(it->second, initialRef(s))) {
        env.known[pv] = {PtsLink::Kind::Unknown, ""}; // very-initial value, unknown
        continue;
      }
      env.known[pv] = classifyPointerValue(it->second);
    }
    return env;
  }

  Term resolveTerm(const Term& t, const PointsToEnv& env) const {
    Term out;
    for (const auto& w : t.writes) {
      WriteOp nw;
      nw.payload = resolveDerefsInExpr(w.payload, env);
      if (w.guard) nw.guard = resolveDerefsInExpr(w.guard, env);
      if (w.target.kind == TargetKind::Deref) {
        nw.target.kind = TargetKind::Var;
        nw.target.name = resolveDeref(env, w.target.name, w.target.depth);
      } else {
        nw.target = w.target;
        if (w.target.kind == TargetKind::ArrayElem)
          nw.target.index = resolveDerefsInExpr(w.target.index, env);
      }
      out.writes.push_back(std::move(nw));
    }
    return out;
  }

  // relay acc x term, resolving derefs per branch and flagging writes of
  // non-address values into pointer variables
  Csp stepTerm(const Csp& acc, const Term& t) {
    Csp out;
    out.diagnostics = acc.diagnostics;
    bool needsEnv = !pointerVars.empty();
    // pointer-free terms resolve identically on every branch
    Csp shared;
    if (!needsEnv) shared = termSem(t, u, opts.branchBudget);
    for (const auto& br : acc.branches) {
      Term resolved = needsEnv ? resolveTerm(t, envOf(br.sp)) : t;
      Csp termCsp = needsEnv ? termSem(resolved, u, opts.branchBudget) : shared;
      Csp one;
      one.branches.push_back(br);
      Csp stepped = relay(one, termCsp, u, opts.branchBudget);
      record("relay", {one, termCsp}, {stepped});
      for (auto& nb : stepped.branches) {
        // pointer writes must receive addresses
        for (const auto& w : resolved.writes) {
          if (w.target.kind != TargetKind::Var || !pointerVars.count(w.target.name)) continue;
          Slot s{w.target.name, std::nullopt};
          auto it = nb.sp.finalEqs.find(s);
          if (it == nb.sp.finalEqs.end()) continue;
          if (equalMath(it->second, initialRef(s))) continue; // guarded else case
          if (it->second->kind != MathKind::AddressOf)
            addDiagOnce(out.diagnostics, DiagKind::WrongAddress, w.target.name,
                        "pointer '" + w.target.name + "' receives a non-address value: " +
                            renderMath(it->second, RenderMode::Predicate));
        }
        out.branches.push_back(std::move(nb));
      }
      if (static_cast<long long>(out.branches.size()) > opts.branchBudget)
        throw OeError(ErrKind::BranchBudgetExceeded, "term composition exceeds branch budget");
    }
    return out;
  }

  Csp relayInto(Csp acc, const Csp& next) {
    Csp merged = relay(acc, next, u, opts.branchBudget);
    record("relay", {acc, next}, {merged});
    return merged;
  }

  // guard + else-identity per A4.2 / A2.2, nested guards collapsed per A2.3
  Csp guardCsp(const Csp& inner, BoolPtr guard) const {
    BoolPtr g = normalizeBool(flipCurrentToInitial(guard));
    Csp out;
    out.diagnostics = inner.diagnostics;
    if (g->kind == BoolKind::True) {
      out.branches = inner.branches;
      return out;
    }
    if (g->kind != BoolKind::False) {
      for (const auto& br : inner.branches) {
        BoolPtr ng = normalizeBool(bAnd(br.guard, g));
        if (ng->kind == BoolKind::False) continue;
        out.branches.push_back({ng, br.sp});
      }
    }
    BoolPtr elseGuard = normalizeBool(bNot(g));
    if (elseGuard->kind != BoolKind::False)
      out.branches.push_back({elseGuard, complete(SemPredicate{}, u)});
    return out;
  }

  bool independentPar(const NodePtr& l, const NodePtr& r) const {
    std::function<bool(const NodePtr&)> hasCallOrPtr = [&](const NodePtr& n) -> bool {
      switch (n->kind) {
        case NodeKind::Call:
          return true;
        case NodeKind::TermNode:
          for (const auto& w : n->term.writes)
            if (w.target.kind == TargetKind::Deref) return true;
          return false;
        case NodeKind::Seq:
          for (const auto& c : n->seq)
            if (hasCallOrPtr(c)) return true;
          return false;
        case NodeKind::Guarded:
        case NodeKind::LoopCount:
        case NodeKind::LoopUntil:
          return hasCallOrPtr(n->body);
        case NodeKind::Par:
          return hasCallOrPtr(n->left) || hasCallOrPtr(n->right);
        default:
          return false;
      }
    };
    if (hasCallOrPtr(l) || hasCallOrPtr(r)) return false;
    if (!pointerVars.empty()) return false; // pointer programs get no parallel composition
    std::set<std::string> wl = writtenVars(l), wr = writtenVars(r);
    std::set<std::string> rl = readVars(l), rr = readVars(r);
    for (const auto& v : wl)
      if (wr.count(v) || rr.count(v)) return false;
    for (const auto& v : wr)
      if (rl.count(v)) return false;
    return true;
  }

  // semantics of one node in isolation (identity prefix)
  SemResult semOf(const NodePtr& n) {
    SemResult acc;
    acc.csp = identityCsp(u);
    foldInto(acc, n);
    return acc;
  }

  // a sequence of plain steps reduces as one formula in the chosen association
  bool foldFlatSeq(SemResult& acc, const NodePtr& n) {
    if (!pointerVars.empty() || n->seq.size() < 2) return false;
    for (const auto& c : n->seq)
      if (c->kind != NodeKind::TermNode && c->kind != NodeKind::Skip &&
          c->kind != NodeKind::Call)
        return false;
    SemFormula f;
    for (const auto& c : n->seq) {
      if (c->kind == NodeKind::Skip) continue;
      if (c->kind == NodeKind::TermNode) {
        f.push_back(termSem(c->term, u, opts.branchBudget));
      } else {
        if (!opts.registry)
          throw OeError(ErrKind::UnknownFunction,
                        "call to '" + c->fname + "' with no registry loaded");
        f.push_back(instantiateSplice(c->fname, c->callArgs, *opts.registry, u));
      }
    }
    if (f.empty()) return true;
    auto [csp, tr] = reduce(f, u, opts);
    if (opts.trace)
      for (auto& step : tr.steps) trace.steps.push_back(std::move(step));
    acc.csp = relayInto(std::move(acc.csp), csp);
    return true;
  }

  // folds node n into the accumulated semantics (prefix-aware)
  void foldInto(SemResult& acc, const NodePtr& n) {
    switch (n->kind) {
      case NodeKind::Skip:
        return;
      case NodeKind::Seq:
        if (foldFlatSeq(acc, n)) return;
        for (const auto& c : n->seq) foldInto(acc, c);
        return;
      case NodeKind::TermNode:
        acc.csp = stepTerm(acc.csp, n->term);
        return;
      case NodeKind::Call: {
        if (!opts.registry)
          throw OeError(ErrKind::UnknownFunction,
                        "call to '" + n->fname + "' with no registry loaded");
        Csp spl = instantiateSplice(n->fname, n->callArgs, *opts.registry, u);
        acc.csp = relayInto(std::move(acc.csp), spl);
        return;
      }
      case NodeKind::Guarded: {
        // collapse nested guards: (p^{b1})^{b2} = p^{b1 && b2}
        BoolPtr g = n->guard;
        NodePtr body = n->body;
        while (body->kind == NodeKind::Guarded) {
          g = bAnd(body->guard, g);
          body = body->body;
        }
        SemResult sub = semOf(body);
        if (sub.partial) acc.partial = true;
        acc.csp = relayInto(std::move(acc.csp), guardCsp(sub.csp, g));
        return;
      }
      case NodeKind::LoopCount: {
        if (n->countIsName)
          throw OeError(ErrKind::SymbolicLoopUnsupported,
                        "loop count '" + n->countName +
                            "' is symbolic; supply a loop invariant to reduce it");
        if (!n->count.fitsInt64())
          throw OeError(ErrKind::SizeLimit, "loop count too large");
        SemResult sub = semOf(n->body);
        if (sub.partial) acc.partial = true;
        Csp loop = loopCountSem(sub.csp, n->count.toInt64(), u, opts);
        acc.csp = relayInto(std::move(acc.csp), loop);
        return;
      }
      case NodeKind::LoopUntil: {
        SemResult body = semOf(n->body);
        if (body.partial) acc.partial = true;
        SemResult looped = loopUntilSem(acc.csp, body.csp, n->until, u, opts);
        acc.csp = std::move(looped.csp);
        acc.partial = acc.partial || looped.partial;
        return;
      }
      case NodeKind::WaitLoop: {
        acc.csp = relayInto(std::move(acc.csp), waitLoopSem(n->until, u));
        return;
      }
      case NodeKind::Par: {
        if (!independentPar(n->left, n->right))
          throw OeError(ErrKind::CooperativeParallelUnsupported,
                        "parallel branches are not independent; cooperative semantics is out of scope");
        SemResult l = semOf(n->left);
        SemResult r = semOf(n->right);
        if (l.partial || r.partial) acc.partial = true;
        Csp par;
        par.diagnostics = l.csp.diagnostics;
        for (const auto& d : r.csp.diagnostics)
          addDiagOnce(par.diagnostics, d.kind, d.location, d.message);
        for (const auto& bl : l.csp.branches) {
          for (const auto& br : r.csp.branches) {
            BoolPtr g = normalizeBool(bAnd(bl.guard, br.guard));
            if (g->kind == BoolKind::False) continue;
            SemPredicate sp;
            for (const auto& [slot, e] : bl.sp.finalEqs)
              if (bl.sp.writes.count(slot.key())) sp.finalEqs[slot] = e;
            for (const auto& [slot, e] : br.sp.finalEqs)
              if (br.sp.writes.count(slot.key())) sp.finalEqs[slot] = e;
            for (const auto& w : bl.sp.writes) sp.writes.insert(w);
            for (const auto& w : br.sp.writes) sp.writes.insert(w);
            for (const auto& r2 : bl.sp.residuals) sp.residuals.push_back(r2);
            for (const auto& r2 : br.sp.residuals) sp.residuals.push_back(r2);
            par.branches.push_back({g, complete(std::move(sp), u)});
          }
        }
        acc.csp = relayInto(std::move(acc.csp), par);
        return;
      }
    }
  }
};

} // namespace

SemResult nodeSem(const NodePtr& n, const Program& p, const SemOptions& opts) {
  Reducer r(p, opts);
  SemResult res = r.semOf(n);
  res.trace = std::move(r.trace);
  return res;
}

SemResult programSem(const Program& p, const SemOptions& opts) {
  Program lowered = opts.registry ? lowerCalls(p, *opts.registry) : p;
  Reducer r(lowered, opts);
  SemResult res;
  res.csp = identityCsp(r.u);
  r.foldInto(res, lowered.body);
  res.trace = std::move(r.trace);

  // uninitialized reads surface as Psi under arithmetic in the reduced equations
  for (const auto& br : res.csp.branches)
    for (const auto& [slot, e] : br.sp.finalEqs)
      if (psiUnderArithmetic(e))
        addDiagOnce(res.csp.diagnostics, DiagKind::UninitializedRead, slot.key(),
                    "final value of '" + slot.key() + "' computes with an uninitialized value: " +
                        renderMath(e, RenderMode::Predicate));
  return res;
}

// -- invariant mode ------------------------------------------------------------------------

namespace {

void flattenAnd(const BoolPtr& b, std::vector<BoolPtr>& out) {
  if (b->kind == BoolKind::And) {
    flattenAnd(b->x, out);
    flattenAnd(b->y, out);
    return;
  }
  out.push_back(b);
}

} // namespace

Csp loopInvariantSem(const NodePtr& loop, const Program& p, const LoopSpec& spec,
                     int samples, uint64_t seed) {
  if (loop->kind != NodeKind::LoopCount && loop->kind != NodeKind::LoopUntil)
    throw OeError(ErrKind::EvalUnsupported, "invariant mode applies to loops only");
  NodePtr body = loop->body;

  BoolPtr h = normalizeBool(flipCurrentToInitial(spec.invariant));
  BoolPtr k = normalizeBool(flipCurrentToInitial(spec.termination));

  // the invariant may only speak about variables the body writes
  std::set<std::string> written = writtenVars(body);
  {
    std::vector<std::pair<std::string, Marker>> refs;
    collectVarRefs(h, refs);
    for (const auto& [name, m] : refs)
      if (m == Marker::Final && !written.count(name))
        throw OeError(ErrKind::SyntaxError,
                      "invariant mentions '" + name + "', which the loop body does not write");
  }

  Program bodyProg;
  bodyProg.decls = p.decls;
  bodyProg.body = body;

  std::vector<BoolPtr> hParts;
  flattenAnd(h, hParts);

  Rng rng(seed);
  int nonVacuous = 0;
  for (int i = 0; i < samples; ++i) {
    Store s = randomStore(p, rng);
    // entry repair: solve equality conjuncts v' = e for v
    for (const auto& part : hParts) {
      if (part->kind != BoolKind::Cmp || part->rel != Rel::Eq) continue;
      if (part->lhs->kind != MathKind::Var || part->lhs->marker != Marker::Final) continue;
      EvalCtx rctx{&s, &s, nullptr};
      try {
        Value v = evaluate(part->rhs, rctx);
        if (v.t == Value::T::Int) s.vals[part->lhs->name] = v;
      } catch (const OeError&) {
      }
    }
    bool entry;
    try {
      EvalCtx ectx{&s, &s, nullptr};
      entry = evaluate(h, ectx);
    } catch (const OeError&) {
      continue;
    }
    if (!entry) continue;
    RunResult after;
    try {
      after = run(bodyProg, s, {});
    } catch (const OeError&) {
      continue;
    }
    bool post;
    try {
      EvalCtx pctx{&s, &after.final_, nullptr};
      post = evaluate(h, pctx);
    } catch (const OeError&) {
      continue;
    }
    ++nonVacuous;
    if (!post)
      throw OeError(ErrKind::InvariantViolated,
                    "invariant not preserved by one body iteration; witness store: " +
                        renderStore(s));
  }

  // residual: invariant specialized by the termination condition, plus the
  // condition itself
  Binding termBinding;
  std::vector<BoolPtr> kParts;
  flattenAnd(k, kParts);
  for (const auto& part : kParts) {
    if (part->kind != BoolKind::Cmp || part->rel != Rel::Eq) continue;
    if (part->lhs->kind == MathKind::Var && part->lhs->marker == Marker::Final)
      termBinding[{part->lhs->name, Marker::Final}] = part->rhs;
  }
  std::vector<BoolPtr> residuals;
  for (const auto& part : hParts) {
    BoolPtr r = substitute(part, termBinding);
    if (r->kind == BoolKind::True) continue;
    residuals.push_back(r);
  }
  for (const auto& part : kParts)
    if (part->kind != BoolKind::True) residuals.push_back(part);

  Universe u = Universe::ofProgram(p);
  SemPredicate sp;
  sp.residuals = std::move(residuals);
  for (const auto& w : written) {
    sp.residualVars.insert(w);
    sp.writes.insert(w);
  }
  Csp out;
  out.branches.push_back({bTrue(), complete(std::move(sp), u)});
  out.diagnostics.push_back(
      {DiagKind::AssumedTermination, "",
       "semantics derived from the loop invariant (" + std::to_string(nonVacuous) +
           " preservation samples); termination assumed"});
  return out;
}

// -- derived pointer facts --------------------------------------------------------------------

std::vector<DerivedFact> derivePointerFacts(const Program& p, const SemPredicate& sp) {
  std::vector<DerivedFact> out;
  auto eqOf = [&](const std::string& name) -> MathPtr {
    Slot s{name, std::nullopt};
    auto it = sp.finalEqs.find(s);
    return it != sp.finalEqs.end() ? it->second : initialRef(s);
  };
  auto linkOf = [&](const std::string& name) -> PtsLink {
    return classifyPointerValue(eqOf(name));
  };
  for (const auto& d : p.decls) {
    if (d.type != VarType::Ptr && d.type != VarType::PtrPtr) continue;
    PtsLink l1 = linkOf(d.name);
    if (l1.kind != PtsLink::Kind::Addr) continue;
    out.push_back({mDeref(mVar(d.name, Marker::Final), 1, Marker::Final), l1.target,
                   eqOf(l1.target)});
    if (d.type == VarType::PtrPtr) {
      PtsLink l2 = linkOf(l1.target);
      if (l2.kind != PtsLink::Kind::Addr) continue;
      out.push_back({mDeref(mVar(d.name, Marker::Final), 2, Marker::Final), l2.target,
                     eqOf(l2.target)});
    }
  }
  return out;
}

std::pair<Csp, PointsToEnv> pointerTermSem(const Term& t, const PointsToEnv& env,
                                           const Universe& u, int branchBudget) {
  Term resolved;
  for (const auto& w : t.writes) {
    WriteOp nw;
    nw.payload = resolveDerefsInExpr(w.payload, env);
    if (w.guard) nw.guard = resolveDerefsInExpr(w.guard, env);
    if (w.target.kind == TargetKind::Deref) {
      nw.target.kind = TargetKind::Var;
      nw.target.name = resolveDeref(env, w.target.name, w.target.depth);
    } else {
      nw.target = w.target;
      if (w.target.kind == TargetKind::ArrayElem)
        nw.target.index = resolveDerefsInExpr(w.target.index, env);
    }
    resolved.writes.push_back(std::move(nw));
  }
  Csp csp = termSem(resolved, u, branchBudget);
  PointsToEnv next = env;
  for (const auto& w : resolved.writes) {
    if (w.target.kind != TargetKind::Var) continue;
    bool tracked = env.known.count(w.target.name) || w.payload->kind == MathKind::AddressOf;
    if (!tracked) continue;
    PtsLink link = classifyPointerValue(normalize(w.payload));
    if (link.kind != PtsLink::Kind::Addr)
      csp.diagnostics.push_back({DiagKind::WrongAddress, w.target.name,
                                 "pointer '" + w.target.name + "' receives a non-address value"});
    next.known[w.target.name] = link;
  }
  return {std::move(csp), std::move(next)};
}

// -- trace rendering -------------------------------------------------------------------------

std::string renderTrace(const ReductionTrace& t) {
  std::string s;
  for (const auto& step : t.steps) {
    s += step.rule + ":\n";
    s += "  before:";
    for (const auto& c : step.before) s += "  { " + renderCsp(c) + " }";
    s += "\n  after: ";
    for (const auto& c : step.after) s += "  { " + renderCsp(c) + " }";
    s += "\n";
  }
  return s;
}

} // namespace oe
