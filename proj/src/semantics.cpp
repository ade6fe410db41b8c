#include "oe/semantics.hpp"

#include <algorithm>
#include <functional>

#include "oe/interp.hpp"

namespace oe {

// -- universe ---------------------------------------------------------------------

Universe Universe::ofNames(const std::set<std::string>& names) {
  Universe u;
  for (const auto& n : names) u.slots.push_back({n, std::nullopt});
  return u;
}

namespace {

void collectWrittenSlots(const NodePtr& n, std::set<Slot>& out) {
  switch (n->kind) {
    case NodeKind::Skip:
    case NodeKind::WaitLoop:
    case NodeKind::Call:
      return;
    case NodeKind::TermNode:
      for (const auto& w : n->term.writes) {
        if (w.target.kind == TargetKind::ArrayElem) {
          MathPtr idx = normalize(w.target.index);
          if (idx->kind == MathKind::IntConst) out.insert({w.target.name, idx->value});
        }
      }
      return;
    case NodeKind::Seq:
      for (const auto& c : n->seq) collectWrittenSlots(c, out);
      return;
    case NodeKind::Guarded:
    case NodeKind::LoopCount:
    case NodeKind::LoopUntil:
      collectWrittenSlots(n->body, out);
      return;
    case NodeKind::Par:
      collectWrittenSlots(n->left, out);
      collectWrittenSlots(n->right, out);
      return;
  }
}

} // namespace

Universe Universe::ofProgram(const Program& p) {
  Universe u;
  for (const auto& d : p.decls)
    if (d.type != VarType::Array) u.slots.push_back({d.name, std::nullopt});
  std::set<Slot> elems;
  collectWrittenSlots(p.body, elems);
  for (const auto& s : elems) u.slots.push_back(s);
  std::sort(u.slots.begin(), u.slots.end());
  return u;
}

bool Universe::contains(const Slot& s) const {
  return std::find(slots.begin(), slots.end(), s) != slots.end();
}

// -- semantic predicates -------------------------------------------------------------

static MathPtr initialRef(const Slot& s) {
  if (s.index) return mIndex(s.base, mInt(*s.index), Marker::Initial);
  return mVar(s.base, Marker::Initial);
}

static MathPtr finalRef(const Slot& s) {
  if (s.index) return mIndex(s.base, mInt(*s.index), Marker::Final);
  return mVar(s.base, Marker::Final);
}

bool SemPredicate::isIdentity(const Universe& u) const {
  if (!residuals.empty() || !residualVars.empty()) return false;
  for (const auto& s : u.slots) {
    auto it = finalEqs.find(s);
    if (it == finalEqs.end()) continue;
    if (!equalMath(it->second, initialRef(s))) return false;
  }
  for (const auto& [s, e] : finalEqs) {
    if (!u.contains(s) && !equalMath(e, initialRef(s))) return false;
  }
  return true;
}

SemPredicate complete(SemPredicate sp, const Universe& u) {
  for (const auto& s : u.slots) {
    if (sp.finalEqs.count(s)) continue;
    if (sp.residualVars.count(s.base)) continue;
    sp.finalEqs.emplace(s, initialRef(s));
  }
  return sp;
}

Csp completeCsp(Csp c, const Universe& u) {
  for (auto& br : c.branches) br.sp = complete(std::move(br.sp), u);
  return c;
}

Csp identityCsp(const Universe& u) {
  Csp c;
  c.branches.push_back({bTrue(), complete(SemPredicate{}, u)});
  return c;
}

Csp skipSem(const Universe& u) { return identityCsp(u); }

// -- term semantics --------------------------------------------------------------------

namespace {

struct GroupBranch {
  BoolPtr guard;     // already Initial-marked and normalized
  bool isWrite;      // false = the else case (identity for this target)
  MathPtr payload;   // Initial-marked, normalized (when isWrite)
};

struct Group {
  Slot slot;
  std::vector<GroupBranch> branches;
};

Slot slotOfTarget(const Target& t) {
  switch (t.kind) {
    case TargetKind::Var:
      return {t.name, std::nullopt};
    case TargetKind::ArrayElem: {
      MathPtr idx = normalize(t.index);
      if (idx->kind != MathKind::IntConst)
        throw OeError(ErrKind::SymbolicIndexUnsupported,
                      "symbolic array index in write target: " + t.token());
      return {t.name, idx->value};
    }
    case TargetKind::Deref:
      throw OeError(ErrKind::UnresolvedPointer,
                    "deref target reached term semantics unresolved: " + t.token());
  }
  return {t.name, std::nullopt};
}

} // namespace

Csp termSem(const Term& t, const Universe& u, int branchBudget) {
  // group writes by target, preserving first-occurrence order
  std::vector<Group> groups;
  for (const auto& w : t.writes) {
    Slot s = slotOfTarget(w.target);
    Group* g = nullptr;
    for (auto& existing : groups)
      if (existing.slot == s) g = &existing;
    if (!g) {
      groups.push_back({s, {}});
      g = &groups.back();
    }
    GroupBranch gb;
    gb.isWrite = true;
    gb.payload = normalize(flipCurrentToInitial(w.payload));
    gb.guard = w.guard ? normalizeBool(flipCurrentToInitial(w.guard)) : bTrue();
    g->branches.push_back(std::move(gb));
  }

  // expand each group: guarded chain + else case per A1.3/A1.4
  for (auto& g : groups) {
    bool allTrue = g.branches.size() == 1 && g.branches[0].guard->kind == BoolKind::True;
    if (allTrue) continue;
    for (size_t i = 0; i < g.branches.size(); ++i)
      for (size_t j = i + 1; j < g.branches.size(); ++j)
        if (equalBool(g.branches[i].guard, g.branches[j].guard))
          throw OeError(ErrKind::OverlapStaticallyTrue,
                        "two guards for '" + g.slot.key() + "' are identical: " +
                            renderBool(g.branches[i].guard, RenderMode::Predicate));
    BoolPtr disj;
    for (const auto& gb : g.branches) disj = disj ? bOr(disj, gb.guard) : gb.guard;
    GroupBranch elseCase;
    elseCase.isWrite = false;
    elseCase.guard = normalizeBool(bNot(disj));
    g.branches.push_back(std::move(elseCase));
    // prune statically false arms
    std::vector<GroupBranch> kept;
    for (auto& gb : g.branches)
      if (gb.guard->kind != BoolKind::False) kept.push_back(std::move(gb));
    g.branches = std::move(kept);
  }

  long long total = 1;
  for (const auto& g : groups) {
    total *= static_cast<long long>(g.branches.size());
    if (total > branchBudget)
      throw OeError(ErrKind::BranchBudgetExceeded,
                    "term expands past the branch budget (" + std::to_string(branchBudget) + ")");
  }

  // cross product
  Csp out;
  std::vector<size_t> pick(groups.size(), 0);
  while (true) {
    BoolPtr guard = bTrue();
    SemPredicate sp;
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const GroupBranch& gb = groups[gi].branches[pick[gi]];
      guard = normalizeBool(bAnd(guard, gb.guard));
      if (gb.isWrite) {
        sp.finalEqs[groups[gi].slot] = gb.payload;
        sp.writes.insert(groups[gi].slot.key());
      }
    }
    if (guard->kind != BoolKind::False)
      out.branches.push_back({guard, complete(std::move(sp), u)});
    // advance
    size_t gi = 0;
    for (; gi < groups.size(); ++gi) {
      if (++pick[gi] < groups[gi].branches.size()) break;
      pick[gi] = 0;
    }
    if (gi == groups.size()) break;
  }
  if (groups.empty()) return identityCsp(u);
  return out;
}

// -- exclusivity sampling -----------------------------------------------------------------

namespace {

// Builds a store able to evaluate the given refs: scalars plus arrays sized to
// the largest constant index mentioned.
void sampleStoreForExprs(const std::vector<BoolPtr>& guards, Rng& rng, Store& s) {
  std::vector<std::pair<std::string, Marker>> refs;
  for (const auto& g : guards) collectVarRefs(g, refs);
  std::map<std::string, long long> arrays;
  std::function<void(const MathPtr&)> scanM = [&](const MathPtr& e) {
    switch (e->kind) {
      case MathKind::IndexedRead: {
        MathPtr idx = normalize(e->a);
        long long i = idx->kind == MathKind::IntConst && idx->value.fitsInt64()
                          ? idx->value.toInt64()
                          : 0;
        auto [it, _] = arrays.emplace(e->name, i);
        it->second = std::max(it->second, i);
        scanM(e->a);
        return;
      }
      case MathKind::Neg:
      case MathKind::Deref:
        scanM(e->a);
        return;
      case MathKind::BinOp:
        scanM(e->a);
        scanM(e->b);
        return;
      case MathKind::Apply:
        for (const auto& a : e->args) scanM(a);
        return;
      default:
        return;
    }
  };
  std::function<void(const BoolPtr&)> scanB = [&](const BoolPtr& b) {
    switch (b->kind) {
      case BoolKind::Cmp:
        scanM(b->lhs);
        scanM(b->rhs);
        return;
      case BoolKind::Not:
        scanB(b->x);
        return;
      case BoolKind::And:
      case BoolKind::Or:
        scanB(b->x);
        scanB(b->y);
        return;
      case BoolKind::Pred:
        for (const auto& a : b->args) scanM(a);
        return;
      default:
        return;
    }
  };
  for (const auto& g : guards) scanB(g);
  for (const auto& [name, m] : refs) {
    (void)m;
    if (arrays.count(name)) continue;
    if (!s.vals.count(name)) s.vals[name] = Value::ofInt(BigInt(rng.range(-100, 100)));
  }
  for (const auto& [name, maxIdx] : arrays) {
    auto& arr = s.arrays[name];
    arr.resize(static_cast<size_t>(maxIdx) + 1);
    for (auto& v : arr) v = Value::ofInt(BigInt(rng.range(-100, 100)));
  }
}

} // namespace

std::vector<Diagnostic> checkExclusivity(const Csp& c, int samples, uint64_t seed) {
  std::vector<Diagnostic> out;
  if (c.branches.size() < 2) return out;
  std::vector<BoolPtr> guards;
  for (const auto& b : c.branches) guards.push_back(b.guard);
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    Store s;
    sampleStoreForExprs(guards, rng, s);
    EvalCtx ctx{&s, nullptr, nullptr};
    int firstTrue = -1;
    bool usable = true;
    for (size_t i = 0; i < guards.size() && usable; ++i) {
      bool v = false;
      try {
        v = evaluate(guards[i], ctx);
      } catch (const OeError&) {
        usable = false;
        break;
      }
      if (!v) continue;
      if (firstTrue < 0) {
        firstTrue = static_cast<int>(i);
      } else {
        out.push_back({DiagKind::GuardOverlap, "",
                       "guards '" + renderBool(guards[firstTrue], RenderMode::Predicate) +
                           "' and '" + renderBool(guards[i], RenderMode::Predicate) +
                           "' both hold at " + renderStore(s)});
        return out;
      }
    }
  }
  return out;
}

// -- sampled branch-set equivalence ----------------------------------------------------------

namespace {

// exactly-one-true-guard selection; -1 when not exactly one or unevaluable
int selectBranch(const Csp& c, const EvalCtx& ctx) {
  int sel = -1;
  for (size_t i = 0; i < c.branches.size(); ++i) {
    bool v;
    try {
      v = evaluate(c.branches[i].guard, ctx);
    } catch (const OeError&) {
      return -1;
    }
    if (!v) continue;
    if (sel >= 0) return -1;
    sel = static_cast<int>(i);
  }
  return sel;
}

} // namespace

bool cspEquiv(const Csp& a, const Csp& b, const Universe& u, int samples, uint64_t seed) {
  Rng rng(seed);
  std::map<std::string, long long> arrays;
  for (const auto& s : u.slots)
    if (s.index) {
      long long i = s.index->fitsInt64() ? s.index->toInt64() : 0;
      auto [it, _] = arrays.emplace(s.base, i);
      it->second = std::max(it->second, i);
    }
  for (int k = 0; k < samples; ++k) {
    Store s;
    for (const auto& sl : u.slots)
      if (!sl.index && !s.vals.count(sl.base))
        s.vals[sl.base] = Value::ofInt(BigInt(rng.range(-100, 100)));
    for (const auto& [name, maxIdx] : arrays) {
      auto& arr = s.arrays[name];
      arr.resize(static_cast<size_t>(maxIdx) + 1);
      for (auto& v : arr) v = Value::ofInt(BigInt(rng.range(-100, 100)));
    }
    EvalCtx ctx{&s, nullptr, nullptr};
    int ia = selectBranch(a, ctx);
    int ib = selectBranch(b, ctx);
    if (ia < 0 && ib < 0) continue; // not comparable at this store
    if ((ia < 0) != (ib < 0)) return false;
    const SemPredicate& pa = a.branches[ia].sp;
    const SemPredicate& pb = b.branches[ib].sp;
    for (const auto& sl : u.slots) {
      auto ea = pa.finalEqs.count(sl) ? pa.finalEqs.at(sl) : initialRef(sl);
      auto eb = pb.finalEqs.count(sl) ? pb.finalEqs.at(sl) : initialRef(sl);
      try {
        if (!(evaluate(ea, ctx) == evaluate(eb, ctx))) return false;
      } catch (const OeError&) {
        if (!equalMath(normalize(ea), normalize(eb))) return false;
      }
    }
  }
  return true;
}

// -- rendering ------------------------------------------------------------------------------

std::string renderBranch(const CspBranch& b) {
  std::string s;
  for (const auto& [slot, e] : b.sp.finalEqs) {
    if (!s.empty()) s += " & ";
    s += renderMath(finalRef(slot), RenderMode::Predicate) + " = " +
         renderMath(e, RenderMode::Predicate);
  }
  for (const auto& r : b.sp.residuals) {
    if (!s.empty()) s += " & ";
    s += renderBool(r, RenderMode::Predicate);
  }
  if (s.empty()) s = "true";
  if (b.guard->kind != BoolKind::True)
    s += " when " + renderBool(b.guard, RenderMode::Predicate);
  return s;
}

std::string renderCsp(const Csp& c) {
  std::string s;
  for (size_t i = 0; i < c.branches.size(); ++i) {
    if (i) s += " (+) ";
    s += renderBranch(c.branches[i]);
  }
  return s;
}

} // namespace oe
