#include "oe/expr.hpp"

#include <algorithm>
#include <cassert>

#include "oe/interp.hpp"

namespace oe {

const char* diagKindName(DiagKind k) {
  switch (k) {
    case DiagKind::UninitializedRead: return "UninitializedRead";
    case DiagKind::WrongAddress: return "WrongAddress";
    case DiagKind::GuardOverlap: return "GuardOverlap";
    case DiagKind::Divergence: return "Divergence";
    case DiagKind::SymbolicIndexUnsupported: return "SymbolicIndexUnsupported";
    case DiagKind::AssumedTermination: return "AssumedTermination";
  }
  return "?";
}

const char* errKindName(ErrKind k) {
  switch (k) {
    case ErrKind::SyntaxError: return "SyntaxError";
    case ErrKind::DuplicateUnguardedTarget: return "DuplicateUnguardedTarget";
    case ErrKind::UndeclaredVariable: return "UndeclaredVariable";
    case ErrKind::UnknownVariable: return "UnknownVariable";
    case ErrKind::IllegalAddressArithmetic: return "IllegalAddressArithmetic";
    case ErrKind::PsiInComparison: return "PsiInComparison";
    case ErrKind::Overflow: return "Overflow";
    case ErrKind::GuardOverlap: return "GuardOverlap";
    case ErrKind::Divergence: return "Divergence";
    case ErrKind::OverlapStaticallyTrue: return "OverlapStaticallyTrue";
    case ErrKind::BranchBudgetExceeded: return "BranchBudgetExceeded";
    case ErrKind::RelationalRelayUnsupported: return "RelationalRelayUnsupported";
    case ErrKind::CooperativeParallelUnsupported: return "CooperativeParallelUnsupported";
    case ErrKind::SymbolicIndexUnsupported: return "SymbolicIndexUnsupported";
    case ErrKind::SymbolicLoopUnsupported: return "SymbolicLoopUnsupported";
    case ErrKind::InvariantViolated: return "InvariantViolated";
    case ErrKind::WrongAddress: return "WrongAddress";
    case ErrKind::UnresolvedPointer: return "UnresolvedPointer";
    case ErrKind::UnknownFunction: return "UnknownFunction";
    case ErrKind::ArityMismatch: return "ArityMismatch";
    case ErrKind::FuelExhausted: return "FuelExhausted";
    case ErrKind::NoBranchApplies: return "NoBranchApplies";
    case ErrKind::SizeLimit: return "SizeLimit";
    case ErrKind::OutOfRange: return "OutOfRange";
    case ErrKind::EvalUnsupported: return "EvalUnsupported";
  }
  return "?";
}

// -- constructors ------------------------------------------------------------

static MathPtr makeMath(MathExpr e) { return std::make_shared<const MathExpr>(std::move(e)); }
static BoolPtr makeBool(BoolExpr b) { return std::make_shared<const BoolExpr>(std::move(b)); }

MathPtr mInt(BigInt v) {
  MathExpr e;
  e.kind = MathKind::IntConst;
  e.value = std::move(v);
  return makeMath(std::move(e));
}
MathPtr mInt(long long v) { return mInt(BigInt(v)); }

MathPtr mPsi() {
  MathExpr e;
  e.kind = MathKind::Psi;
  return makeMath(std::move(e));
}

MathPtr mVar(std::string name, Marker m) {
  MathExpr e;
  e.kind = MathKind::Var;
  e.name = std::move(name);
  e.marker = m;
  return makeMath(std::move(e));
}

MathPtr mAddr(std::string name) {
  MathExpr e;
  e.kind = MathKind::AddressOf;
  e.name = std::move(name);
  return makeMath(std::move(e));
}

MathPtr mDeref(MathPtr inner, int depth, Marker m) {
  MathExpr e;
  e.kind = MathKind::Deref;
  e.a = std::move(inner);
  e.depth = depth;
  e.marker = m;
  return makeMath(std::move(e));
}

MathPtr mNeg(MathPtr inner) {
  MathExpr e;
  e.kind = MathKind::Neg;
  e.a = std::move(inner);
  return makeMath(std::move(e));
}

MathPtr mBin(char op, MathPtr l, MathPtr r) {
  MathExpr e;
  e.kind = MathKind::BinOp;
  e.op = op;
  e.a = std::move(l);
  e.b = std::move(r);
  return makeMath(std::move(e));
}

MathPtr mApply(std::string fname, std::vector<MathPtr> args) {
  MathExpr e;
  e.kind = MathKind::Apply;
  e.name = std::move(fname);
  e.args = std::move(args);
  return makeMath(std::move(e));
}

MathPtr mIndex(std::string array, MathPtr index, Marker m) {
  MathExpr e;
  e.kind = MathKind::IndexedRead;
  e.name = std::move(array);
  e.a = std::move(index);
  e.marker = m;
  return makeMath(std::move(e));
}

BoolPtr bTrue() {
  BoolExpr b;
  b.kind = BoolKind::True;
  return makeBool(std::move(b));
}
BoolPtr bFalse() {
  BoolExpr b;
  b.kind = BoolKind::False;
  return makeBool(std::move(b));
}
BoolPtr bCmp(Rel r, MathPtr l, MathPtr rr) {
  BoolExpr b;
  b.kind = BoolKind::Cmp;
  b.rel = r;
  b.lhs = std::move(l);
  b.rhs = std::move(rr);
  return makeBool(std::move(b));
}
BoolPtr bNot(BoolPtr inner) {
  BoolExpr b;
  b.kind = BoolKind::Not;
  b.x = std::move(inner);
  return makeBool(std::move(b));
}
BoolPtr bAnd(BoolPtr l, BoolPtr r) {
  BoolExpr b;
  b.kind = BoolKind::And;
  b.x = std::move(l);
  b.y = std::move(r);
  return makeBool(std::move(b));
}
BoolPtr bOr(BoolPtr l, BoolPtr r) {
  BoolExpr b;
  b.kind = BoolKind::Or;
  b.x = std::move(l);
  b.y = std::move(r);
  return makeBool(std::move(b));
}
BoolPtr bPred(std::string name, std::vector<MathPtr> args) {
  BoolExpr b;
  b.kind = BoolKind::Pred;
  b.name = std::move(name);
  b.args = std::move(args);
  return makeBool(std::move(b));
}

// -- structural compare --------------------------------------------------------

static int cmp3(int a, int b) { return a < b ? -1 : a > b ? 1 : 0; }

int compareMath(const MathPtr& a, const MathPtr& b) {
  if (a == b) return 0;
  if (!a || !b) return a ? 1 : -1;
  if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind))) return c;
  switch (a->kind) {
    case MathKind::IntConst:
      return BigInt::cmp(a->value, b->value);
    case MathKind::Psi:
      return 0;
    case MathKind::Var:
      if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
      return cmp3(static_cast<int>(a->marker), static_cast<int>(b->marker));
    case MathKind::AddressOf: {
      int c = a->name.compare(b->name);
      return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    case MathKind::Deref:
      if (int c = cmp3(a->depth, b->depth)) return c;
      if (int c = cmp3(static_cast<int>(a->marker), static_cast<int>(b->marker))) return c;
      return compareMath(a->a, b->a);
    case MathKind::Neg:
      return compareMath(a->a, b->a);
    case MathKind::BinOp:
      if (int c = cmp3(a->op, b->op)) return c;
      if (int c = compareMath(a->a, b->a)) return c;
      return compareMath(a->b, b->b);
    case MathKind::Apply: {
      if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
      if (int c = cmp3(static_cast<int>(a->args.size()), static_cast<int>(b->args.size()))) return c;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (int c = compareMath(a->args[i], b->args[i])) return c;
      return 0;
    }
    case MathKind::IndexedRead:
      if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
      if (int c = cmp3(static_cast<int>(a->marker), static_cast<int>(b->marker))) return c;
      return compareMath(a->a, b->a);
  }
  return 0;
}

int compareBool(const BoolPtr& a, const BoolPtr& b) {
  if (a == b) return 0;
  if (!a || !b) return a ? 1 : -1;
  if (int c = cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind))) return c;
  switch (a->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return 0;
    case BoolKind::Cmp:
      if (int c = cmp3(static_cast<int>(a->rel), static_cast<int>(b->rel))) return c;
      if (int c = compareMath(a->lhs, b->lhs)) return c;
      return compareMath(a->rhs, b->rhs);
    case BoolKind::Not:
      return compareBool(a->x, b->x);
    case BoolKind::And:
    case BoolKind::Or:
      if (int c = compareBool(a->x, b->x)) return c;
      return compareBool(a->y, b->y);
    case BoolKind::Pred: {
      if (int c = a->name.compare(b->name)) return c < 0 ? -1 : 1;
      if (int c = cmp3(static_cast<int>(a->args.size()), static_cast<int>(b->args.size()))) return c;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (int c = compareMath(a->args[i], b->args[i])) return c;
      return 0;
    }
  }
  return 0;
}

bool equalMath(const MathPtr& a, const MathPtr& b) { return compareMath(a, b) == 0; }
bool equalBool(const BoolPtr& a, const BoolPtr& b) { return compareBool(a, b) == 0; }

// -- Slot ---------------------------------------------------------------------

std::string Slot::key() const {
  if (!index) return base;
  return base + "[" + index->str() + "]";
}
bool Slot::operator<(const Slot& o) const {
  if (base != o.base) return base < o.base;
  if (index.has_value() != o.index.has_value()) return !index.has_value();
  if (!index) return false;
  return *index < *o.index;
}
bool Slot::operator==(const Slot& o) const {
  return base == o.base && index.has_value() == o.index.has_value() &&
         (!index || *index == *o.index);
}

// -- polynomial normal form -----------------------------------------------------

namespace {

struct AtomLess {
  bool operator()(const MathPtr& a, const MathPtr& b) const { return compareMath(a, b) < 0; }
};

// monomial: sorted (atom, degree) list, degrees >= 1
using Mono = std::vector<std::pair<MathPtr, int>>;

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
      if (int c = compareMath(a[i].first, b[i].first)) return c < 0;
      if (a[i].second != b[i].second) return a[i].second < b[i].second;
    }
    return a.size() < b.size();
  }
};

using Poly = std::map<Mono, BigInt, MonoLess>;

Poly polyConst(BigInt c) {
  Poly p;
  if (!c.isZero()) p.emplace(Mono{}, std::move(c));
  return p;
}

Poly polyAtom(MathPtr atom) {
  Poly p;
  p.emplace(Mono{{std::move(atom), 1}}, BigInt(1));
  return p;
}

void addInto(Poly& dst, const Mono& m, const BigInt& c) {
  auto [it, inserted] = dst.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.isZero()) dst.erase(it);
  }
}

Poly addPoly(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b) addInto(r, m, c);
  return r;
}

Poly negPoly(const Poly& a) {
  Poly r;
  for (const auto& [m, c] : a) r.emplace(m, -c);
  return r;
}

Mono mulMono(const Mono& a, const Mono& b) {
  Mono r;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = compareMath(a[i].first, b[j].first);
    if (c < 0) r.push_back(a[i++]);
    else if (c > 0) r.push_back(b[j++]);
    else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i, ++j;
    }
  }
  while (i < a.size()) r.push_back(a[i++]);
  while (j < b.size()) r.push_back(b[j++]);
  return r;
}

Poly mulPoly(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) addInto(r, mulMono(ma, mb), ca * cb);
  return r;
}

Poly toPoly(const MathPtr& e);

// Cancels *&v chains: Deref(AddressOf(v), d, m) -> d==1 ? v@m : Deref(v@m, d-1, m).
MathPtr cancelDeref(MathPtr inner, int depth, Marker m) {
  while (depth > 0 && inner->kind == MathKind::AddressOf) {
    inner = mVar(inner->name, m);
    --depth;
    if (depth > 0 && inner->kind == MathKind::Var) break; // plain var: cannot cancel further
  }
  if (depth == 0) return inner;
  return mDeref(std::move(inner), depth, m);
}

MathPtr normalizeAtomArgs(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      args.reserve(e->args.size());
      for (const auto& a : e->args) args.push_back(normalize(a));
      return mApply(e->name, std::move(args));
    }
    case MathKind::IndexedRead:
      return mIndex(e->name, normalize(e->a), e->marker);
    case MathKind::Deref:
      return cancelDeref(normalize(e->a), e->depth, e->marker);
    default:
      return e;
  }
}

Poly toPoly(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::IntConst:
      return polyConst(e->value);
    case MathKind::Psi:
    case MathKind::Var:
    case MathKind::AddressOf:
      return polyAtom(e);
    case MathKind::Apply:
    case MathKind::IndexedRead:
      return polyAtom(normalizeAtomArgs(e));
    case MathKind::Deref: {
      MathPtr r = normalizeAtomArgs(e);
      if (r->kind != MathKind::Deref) return toPoly(r); // cancellation completed
      return polyAtom(r);
    }
    case MathKind::Neg:
      return negPoly(toPoly(e->a));
    case MathKind::BinOp: {
      Poly l = toPoly(e->a);
      Poly r = toPoly(e->b);
      switch (e->op) {
        case '+': return addPoly(l, r);
        case '-': return addPoly(l, negPoly(r));
        case '*': return mulPoly(l, r);
      }
      assert(false && "bad op");
      return {};
    }
  }
  return {};
}

MathPtr monoExpr(const Mono& m) {
  MathPtr prod;
  for (const auto& [atom, deg] : m)
    for (int i = 0; i < deg; ++i) prod = prod ? mBin('*', prod, atom) : atom;
  return prod;
}

MathPtr fromPoly(const Poly& p) {
  if (p.empty()) return mInt(0);
  MathPtr sum;
  for (const auto& [m, c] : p) {
    bool neg = c.signum() < 0;
    BigInt mag = c.abs();
    MathPtr piece;
    if (m.empty()) {
      piece = mInt(mag);
    } else {
      MathPtr prod = monoExpr(m);
      piece = (mag == BigInt(1)) ? prod : mBin('*', mInt(mag), prod);
    }
    if (!sum) sum = neg ? mNeg(piece) : piece;
    else sum = mBin(neg ? '-' : '+', sum, piece);
  }
  return sum;
}

} // namespace

MathPtr normalize(const MathPtr& e) { return fromPoly(toPoly(e)); }

// Returns the constant value iff e normalizes to an integer constant.
static std::optional<BigInt> constValue(const MathPtr& e) {
  Poly p = toPoly(e);
  if (p.empty()) return BigInt(0);
  if (p.size() == 1 && p.begin()->first.empty()) return p.begin()->second;
  return std::nullopt;
}

BoolPtr normalizeBool(const BoolPtr& b) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp: {
      MathPtr l = normalize(b->lhs);
      MathPtr r = normalize(b->rhs);
      // fold constant comparisons via the difference polynomial
      std::optional<BigInt> d = constValue(mBin('-', l, r));
      if (d) {
        int s = BigInt::cmp(*d, BigInt(0));
        bool v = false;
        switch (b->rel) {
          case Rel::Eq: v = s == 0; break;
          case Rel::Ne: v = s != 0; break;
          case Rel::Lt: v = s < 0; break;
          case Rel::Le: v = s <= 0; break;
          case Rel::Gt: v = s > 0; break;
          case Rel::Ge: v = s >= 0; break;
        }
        return v ? bTrue() : bFalse();
      }
      // x = x style identities where both sides normalize equal
      if (equalMath(l, r)) {
        switch (b->rel) {
          case Rel::Eq: case Rel::Le: case Rel::Ge: return bTrue();
          case Rel::Ne: case Rel::Lt: case Rel::Gt: return bFalse();
        }
      }
      return bCmp(b->rel, l, r);
    }
    case BoolKind::Not: {
      BoolPtr i = normalizeBool(b->x);
      if (i->kind == BoolKind::True) return bFalse();
      if (i->kind == BoolKind::False) return bTrue();
      if (i->kind == BoolKind::Not) return i->x;
      return bNot(i);
    }
    case BoolKind::And: {
      BoolPtr l = normalizeBool(b->x);
      BoolPtr r = normalizeBool(b->y);
      if (l->kind == BoolKind::False || r->kind == BoolKind::False) return bFalse();
      if (l->kind == BoolKind::True) return r;
      if (r->kind == BoolKind::True) return l;
      return bAnd(l, r);
    }
    case BoolKind::Or: {
      BoolPtr l = normalizeBool(b->x);
      BoolPtr r = normalizeBool(b->y);
      if (l->kind == BoolKind::True || r->kind == BoolKind::True) return bTrue();
      if (l->kind == BoolKind::False) return r;
      if (r->kind == BoolKind::False) return l;
      return bOr(l, r);
    }
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(normalize(a));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

// -- substitution ----------------------------------------------------------------

static MathPtr substRaw(const MathPtr& e, const Binding& binding) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::AddressOf:
      return e;
    case MathKind::Var: {
      auto it = binding.find({e->name, e->marker});
      return it != binding.end() ? it->second : e;
    }
    case MathKind::IndexedRead: {
      MathPtr idx = normalize(substRaw(e->a, binding));
      if (idx->kind == MathKind::IntConst) {
        Slot s{e->name, idx->value};
        auto it = binding.find({s.key(), e->marker});
        if (it != binding.end()) return it->second;
      }
      return mIndex(e->name, idx, e->marker);
    }
    case MathKind::Deref:
      return mDeref(substRaw(e->a, binding), e->depth, e->marker);
    case MathKind::Neg:
      return mNeg(substRaw(e->a, binding));
    case MathKind::BinOp:
      return mBin(e->op, substRaw(e->a, binding), substRaw(e->b, binding));
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      for (const auto& a : e->args) args.push_back(substRaw(a, binding));
      return mApply(e->name, std::move(args));
    }
  }
  return e;
}

MathPtr substitute(const MathPtr& e, const Binding& binding) {
  if (binding.empty()) return normalize(e);
  return normalize(substRaw(e, binding));
}

BoolPtr substitute(const BoolPtr& b, const Binding& binding) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp:
      return normalizeBool(bCmp(b->rel, substRaw(b->lhs, binding), substRaw(b->rhs, binding)));
    case BoolKind::Not:
      return normalizeBool(bNot(substitute(b->x, binding)));
    case BoolKind::And:
      return normalizeBool(bAnd(substitute(b->x, binding), substitute(b->y, binding)));
    case BoolKind::Or:
      return normalizeBool(bOr(substitute(b->x, binding), substitute(b->y, binding)));
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(normalize(substRaw(a, binding)));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

// -- marker retagging --------------------------------------------------------------

MathPtr renameMarker(const MathPtr& e, const std::string& name, Marker from, Marker to) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::AddressOf:
      return e;
    case MathKind::Var:
      if (e->name == name && e->marker == from) return mVar(e->name, to);
      return e;
    case MathKind::IndexedRead: {
      MathPtr idx = renameMarker(e->a, name, from, to);
      Marker m = (e->name == name && e->marker == from) ? to : e->marker;
      return mIndex(e->name, idx, m);
    }
    case MathKind::Deref:
      return mDeref(renameMarker(e->a, name, from, to), e->depth, e->marker);
    case MathKind::Neg:
      return mNeg(renameMarker(e->a, name, from, to));
    case MathKind::BinOp:
      return mBin(e->op, renameMarker(e->a, name, from, to), renameMarker(e->b, name, from, to));
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      for (const auto& a : e->args) args.push_back(renameMarker(a, name, from, to));
      return mApply(e->name, std::move(args));
    }
  }
  return e;
}

BoolPtr renameMarker(const BoolPtr& b, const std::string& name, Marker from, Marker to) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp:
      return bCmp(b->rel, renameMarker(b->lhs, name, from, to), renameMarker(b->rhs, name, from, to));
    case BoolKind::Not:
      return bNot(renameMarker(b->x, name, from, to));
    case BoolKind::And:
      return bAnd(renameMarker(b->x, name, from, to), renameMarker(b->y, name, from, to));
    case BoolKind::Or:
      return bOr(renameMarker(b->x, name, from, to), renameMarker(b->y, name, from, to));
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(renameMarker(a, name, from, to));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

static MathPtr mapMarkers(const MathPtr& e, Marker from, Marker to) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::AddressOf:
      return e;
    case MathKind::Var:
      return e->marker == from ? mVar(e->name, to) : e;
    case MathKind::IndexedRead:
      return mIndex(e->name, mapMarkers(e->a, from, to), e->marker == from ? to : e->marker);
    case MathKind::Deref:
      return mDeref(mapMarkers(e->a, from, to), e->depth, e->marker == from ? to : e->marker);
    case MathKind::Neg:
      return mNeg(mapMarkers(e->a, from, to));
    case MathKind::BinOp:
      return mBin(e->op, mapMarkers(e->a, from, to), mapMarkers(e->b, from, to));
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      for (const auto& a : e->args) args.push_back(mapMarkers(a, from, to));
      return mApply(e->name, std::move(args));
    }
  }
  return e;
}

static BoolPtr mapMarkers(const BoolPtr& b, Marker from, Marker to) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp:
      return bCmp(b->rel, mapMarkers(b->lhs, from, to), mapMarkers(b->rhs, from, to));
    case BoolKind::Not:
      return bNot(mapMarkers(b->x, from, to));
    case BoolKind::And:
      return bAnd(mapMarkers(b->x, from, to), mapMarkers(b->y, from, to));
    case BoolKind::Or:
      return bOr(mapMarkers(b->x, from, to), mapMarkers(b->y, from, to));
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(mapMarkers(a, from, to));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

MathPtr flipCurrentToInitial(const MathPtr& e) { return mapMarkers(e, Marker::Current, Marker::Initial); }
BoolPtr flipCurrentToInitial(const BoolPtr& b) { return mapMarkers(b, Marker::Current, Marker::Initial); }

MathPtr retagMarkers(const MathPtr& e, Marker from, Marker to) { return mapMarkers(e, from, to); }
BoolPtr retagMarkers(const BoolPtr& b, Marker from, Marker to) { return mapMarkers(b, from, to); }

// -- scans ---------------------------------------------------------------------------

bool containsMarker(const MathPtr& e, Marker m) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::AddressOf:
      return false;
    case MathKind::Var:
      return e->marker == m;
    case MathKind::IndexedRead:
      return e->marker == m || containsMarker(e->a, m);
    case MathKind::Deref:
      return e->marker == m || containsMarker(e->a, m);
    case MathKind::Neg:
      return containsMarker(e->a, m);
    case MathKind::BinOp:
      return containsMarker(e->a, m) || containsMarker(e->b, m);
    case MathKind::Apply:
      for (const auto& a : e->args)
        if (containsMarker(a, m)) return true;
      return false;
  }
  return false;
}

bool containsMarker(const BoolPtr& b, Marker m) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return false;
    case BoolKind::Cmp:
      return containsMarker(b->lhs, m) || containsMarker(b->rhs, m);
    case BoolKind::Not:
      return containsMarker(b->x, m);
    case BoolKind::And:
    case BoolKind::Or:
      return containsMarker(b->x, m) || containsMarker(b->y, m);
    case BoolKind::Pred:
      for (const auto& a : b->args)
        if (containsMarker(a, m)) return true;
      return false;
  }
  return false;
}

static bool containsPsi(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::Psi: return true;
    case MathKind::IntConst:
    case MathKind::Var:
    case MathKind::AddressOf:
      return false;
    case MathKind::IndexedRead:
    case MathKind::Deref:
    case MathKind::Neg:
      return containsPsi(e->a);
    case MathKind::BinOp:
      return containsPsi(e->a) || containsPsi(e->b);
    case MathKind::Apply:
      for (const auto& a : e->args)
        if (containsPsi(a)) return true;
      return false;
  }
  return false;
}

bool psiUnderArithmetic(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::Neg:
      return containsPsi(e->a);
    case MathKind::BinOp:
      return containsPsi(e->a) || containsPsi(e->b);
    case MathKind::IndexedRead:
    case MathKind::Deref:
      return psiUnderArithmetic(e->a);
    case MathKind::Apply:
      for (const auto& a : e->args)
        if (psiUnderArithmetic(a)) return true;
      return false;
    default:
      return false;
  }
}

static bool containsAddress(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::AddressOf: return true;
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::Var:
      return false;
    case MathKind::IndexedRead:
    case MathKind::Deref:
    case MathKind::Neg:
      return containsAddress(e->a);
    case MathKind::BinOp:
      return containsAddress(e->a) || containsAddress(e->b);
    case MathKind::Apply:
      for (const auto& a : e->args)
        if (containsAddress(a)) return true;
      return false;
  }
  return false;
}

bool addressUnderArithmetic(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::Neg:
      return containsAddress(e->a);
    case MathKind::BinOp:
      return containsAddress(e->a) || containsAddress(e->b);
    case MathKind::IndexedRead:
      return containsAddress(e->a);
    case MathKind::Deref:
      return addressUnderArithmetic(e->a); // the address directly under * is the point of *
    case MathKind::Apply:
      for (const auto& a : e->args)
        if (containsAddress(a)) return true;
      return false;
    default:
      return false;
  }
}

void collectVarRefs(const MathPtr& e, std::vector<std::pair<std::string, Marker>>& out) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::AddressOf:
      return;
    case MathKind::Var:
      out.emplace_back(e->name, e->marker);
      return;
    case MathKind::IndexedRead:
      out.emplace_back(e->name, e->marker);
      collectVarRefs(e->a, out);
      return;
    case MathKind::Deref:
    case MathKind::Neg:
      collectVarRefs(e->a, out);
      return;
    case MathKind::BinOp:
      collectVarRefs(e->a, out);
      collectVarRefs(e->b, out);
      return;
    case MathKind::Apply:
      for (const auto& a : e->args) collectVarRefs(a, out);
      return;
  }
}

void collectVarRefs(const BoolPtr& b, std::vector<std::pair<std::string, Marker>>& out) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return;
    case BoolKind::Cmp:
      collectVarRefs(b->lhs, out);
      collectVarRefs(b->rhs, out);
      return;
    case BoolKind::Not:
      collectVarRefs(b->x, out);
      return;
    case BoolKind::And:
    case BoolKind::Or:
      collectVarRefs(b->x, out);
      collectVarRefs(b->y, out);
      return;
    case BoolKind::Pred:
      for (const auto& a : b->args) collectVarRefs(a, out);
      return;
  }
}

// -- rendering -------------------------------------------------------------------

static std::string renderName(const std::string& n, Marker m, RenderMode mode) {
  switch (m) {
    case Marker::Current:
      return n;
    case Marker::Initial:
      return mode == RenderMode::ProgramText ? "~" + n : n;
    case Marker::Final:
      return n + "'";
  }
  return n;
}

static std::string renderPrec(const MathPtr& e, RenderMode mode, int ctx);

static std::string renderArgs(const std::vector<MathPtr>& args, RenderMode mode) {
  std::string s;
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += renderPrec(args[i], mode, 0);
  }
  return s;
}

// precedence: 0 sum, 1 product, 2 unary, 3 atom
static std::string renderPrec(const MathPtr& e, RenderMode mode, int ctx) {
  std::string s;
  int prec = 3;
  switch (e->kind) {
    case MathKind::IntConst:
      s = e->value.str();
      if (e->value.signum() < 0) prec = 2;
      break;
    case MathKind::Psi:
      s = "psi";
      break;
    case MathKind::Var:
      s = renderName(e->name, e->marker, mode);
      break;
    case MathKind::AddressOf:
      s = "&" + e->name;
      break;
    case MathKind::Deref: {
      std::string stars(static_cast<size_t>(e->depth), '*');
      if (e->a->kind == MathKind::Var)
        s = stars + renderName(e->a->name, e->a->marker, mode);
      else
        s = stars + "(" + renderPrec(e->a, mode, 0) + ")";
      prec = 2;
      break;
    }
    case MathKind::Neg:
      s = "-" + renderPrec(e->a, mode, 2);
      prec = 2;
      break;
    case MathKind::BinOp:
      if (e->op == '*') {
        s = renderPrec(e->a, mode, 1) + " * " + renderPrec(e->b, mode, 2);
        prec = 1;
      } else {
        s = renderPrec(e->a, mode, 0) + " " + e->op + " " + renderPrec(e->b, mode, 1);
        prec = 0;
      }
      break;
    case MathKind::Apply:
      s = e->name + "(" + renderArgs(e->args, mode) + ")";
      break;
    case MathKind::IndexedRead:
      s = renderName(e->name, e->marker, mode) + "[" + renderPrec(e->a, mode, 0) + "]";
      break;
  }
  if (prec < ctx) return "(" + s + ")";
  return s;
}

std::string renderMath(const MathPtr& e, RenderMode mode) { return renderPrec(e, mode, 0); }

static const char* relText(Rel r) {
  switch (r) {
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
  }
  return "?";
}

// precedence: 0 or, 1 and, 2 atom
static std::string renderBoolPrec(const BoolPtr& b, RenderMode mode, int ctx) {
  std::string s;
  int prec = 2;
  switch (b->kind) {
    case BoolKind::True: s = "true"; break;
    case BoolKind::False: s = "false"; break;
    case BoolKind::Cmp:
      s = renderPrec(b->lhs, mode, 0) + " " + relText(b->rel) + " " + renderPrec(b->rhs, mode, 0);
      break;
    case BoolKind::Not:
      s = "!(" + renderBoolPrec(b->x, mode, 0) + ")";
      break;
    case BoolKind::And:
      s = renderBoolPrec(b->x, mode, 1) + " && " + renderBoolPrec(b->y, mode, 1);
      prec = 1;
      break;
    case BoolKind::Or:
      s = renderBoolPrec(b->x, mode, 0) + " || " + renderBoolPrec(b->y, mode, 0);
      prec = 0;
      break;
    case BoolKind::Pred:
      s = b->name + "(" + renderArgs(b->args, mode) + ")";
      break;
  }
  if (prec < ctx) return "(" + s + ")";
  return s;
}

std::string renderBool(const BoolPtr& b, RenderMode mode) { return renderBoolPrec(b, mode, 0); }

// -- Rng -------------------------------------------------------------------------

uint64_t Rng::next() {
  state += 0x9E3779B97f4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

long long Rng::range(long long lo, long long hi) {
  return lo + static_cast<long long>(next() % static_cast<uint64_t>(hi - lo + 1));
}

// -- concrete evaluation ------------------------------------------------------------

bool Value::operator==(const Value& o) const {
  if (t != o.t) return false;
  switch (t) {
    case T::Int: return i == o.i;
    case T::Addr: return addr == o.addr;
    case T::PsiV: return true;
  }
  return false;
}

namespace {

struct EvalValue {
  Value v;
  std::string psiSource; // variable a Psi was read from, for diagnostics
};

void addDiagOnce(const EvalCtx& ctx, DiagKind kind, const std::string& loc, const std::string& msg) {
  if (!ctx.diags) return;
  for (const auto& d : *ctx.diags)
    if (d.kind == kind && d.location == loc) return;
  ctx.diags->push_back({kind, loc, msg});
}

const Store& storeFor(const EvalCtx& ctx, Marker m) {
  const Store* s = (m == Marker::Final) ? ctx.final_ : ctx.initial;
  if (!s)
    throw OeError(ErrKind::UnknownVariable,
                  m == Marker::Final ? "no final store bound for a final-value read"
                                     : "no store bound");
  return *s;
}

EvalValue readVar(const EvalCtx& ctx, const std::string& name, Marker m) {
  const Store& s = storeFor(ctx, m);
  auto it = s.vals.find(name);
  if (it == s.vals.end())
    throw OeError(ErrKind::UnknownVariable, "unknown variable: " + name);
  EvalValue r{it->second, {}};
  if (r.v.isPsi()) r.psiSource = name;
  return r;
}

EvalValue readArray(const EvalCtx& ctx, const std::string& name, Marker m, const BigInt& idx) {
  const Store& s = storeFor(ctx, m);
  auto it = s.arrays.find(name);
  if (it == s.arrays.end())
    throw OeError(ErrKind::UnknownVariable, "unknown array: " + name);
  if (idx.signum() < 0 || !idx.fitsInt64() ||
      idx.toInt64() >= static_cast<int64_t>(it->second.size()))
    throw OeError(ErrKind::OutOfRange, "array index out of range: " + name + "[" + idx.str() + "]");
  EvalValue r{it->second[static_cast<size_t>(idx.toInt64())], {}};
  if (r.v.isPsi()) r.psiSource = name + "[" + idx.str() + "]";
  return r;
}

const std::vector<Value>& arrayFor(const EvalCtx& ctx, const MathPtr& ref) {
  if (ref->kind != MathKind::Var)
    throw OeError(ErrKind::EvalUnsupported, "expected an array name argument");
  const Store& s = storeFor(ctx, ref->marker);
  auto it = s.arrays.find(ref->name);
  if (it == s.arrays.end())
    throw OeError(ErrKind::UnknownVariable, "unknown array: " + ref->name);
  return it->second;
}

EvalValue evalM(const MathPtr& e, const EvalCtx& ctx);

BigInt evalInt(const MathPtr& e, const EvalCtx& ctx, const char* what) {
  EvalValue v = evalM(e, ctx);
  if (v.v.t != Value::T::Int)
    throw OeError(ErrKind::EvalUnsupported, std::string("expected an integer for ") + what);
  return v.v.i;
}

EvalValue arith(const EvalCtx& ctx, char op, EvalValue l, EvalValue r) {
  if (l.v.t == Value::T::Addr || r.v.t == Value::T::Addr)
    throw OeError(ErrKind::IllegalAddressArithmetic, "arithmetic on an address");
  if (l.v.isPsi() || r.v.isPsi()) {
    std::string src = l.v.isPsi() ? l.psiSource : r.psiSource;
    addDiagOnce(ctx, DiagKind::UninitializedRead, src.empty() ? "psi" : src,
                "arithmetic involves an uninitialized value");
    EvalValue out{Value::psi(), src};
    return out;
  }
  BigInt v;
  switch (op) {
    case '+': v = l.v.i + r.v.i; break;
    case '-': v = l.v.i - r.v.i; break;
    case '*': v = l.v.i * r.v.i; break;
    default: assert(false);
  }
  return {Value::ofInt(v), {}};
}

EvalValue evalM(const MathPtr& e, const EvalCtx& ctx) {
  switch (e->kind) {
    case MathKind::IntConst:
      return {Value::ofInt(e->value), {}};
    case MathKind::Psi:
      return {Value::psi(), {}};
    case MathKind::Var:
      return readVar(ctx, e->name, e->marker);
    case MathKind::AddressOf:
      return {Value::ofAddr({e->name}), {}};
    case MathKind::Deref: {
      EvalValue cur = evalM(e->a, ctx);
      for (int i = 0; i < e->depth; ++i) {
        if (cur.v.t != Value::T::Addr)
          throw OeError(ErrKind::WrongAddress,
                        cur.v.isPsi() ? "dereference of an uninitialized pointer"
                                      : "dereference of a non-address value");
        cur = readVar(ctx, cur.v.addr.of, e->marker);
      }
      return cur;
    }
    case MathKind::Neg: {
      EvalValue v = evalM(e->a, ctx);
      if (v.v.t == Value::T::Addr)
        throw OeError(ErrKind::IllegalAddressArithmetic, "negation of an address");
      if (v.v.isPsi()) {
        addDiagOnce(ctx, DiagKind::UninitializedRead, v.psiSource.empty() ? "psi" : v.psiSource,
                    "arithmetic involves an uninitialized value");
        return v;
      }
      return {Value::ofInt(-v.v.i), {}};
    }
    case MathKind::BinOp:
      return arith(ctx, e->op, evalM(e->a, ctx), evalM(e->b, ctx));
    case MathKind::Apply: {
      if (e->name == "abs" && e->args.size() == 1) {
        EvalValue v = evalM(e->args[0], ctx);
        if (v.v.t != Value::T::Int) {
          if (v.v.isPsi()) {
            addDiagOnce(ctx, DiagKind::UninitializedRead, v.psiSource.empty() ? "psi" : v.psiSource,
                        "arithmetic involves an uninitialized value");
            return v;
          }
          throw OeError(ErrKind::IllegalAddressArithmetic, "abs of an address");
        }
        return {Value::ofInt(v.v.i.abs()), {}};
      }
      if ((e->name == "sigma" || e->name == "maxr") && e->args.size() == 3) {
        const std::vector<Value>& arr = arrayFor(ctx, e->args[0]);
        BigInt lo = evalInt(e->args[1], ctx, e->name.c_str());
        BigInt hi = evalInt(e->args[2], ctx, e->name.c_str());
        long long l = lo.signum() < 0 ? 0 : (lo.fitsInt64() ? lo.toInt64() : static_cast<long long>(arr.size()));
        long long h = hi.fitsInt64() ? hi.toInt64() : -1;
        if (h >= static_cast<long long>(arr.size())) h = static_cast<long long>(arr.size()) - 1;
        if (e->name == "sigma") {
          BigInt acc(0);
          for (long long i = l; i <= h; ++i) {
            const Value& el = arr[static_cast<size_t>(i)];
            if (el.isPsi()) {
              addDiagOnce(ctx, DiagKind::UninitializedRead, e->args[0]->name,
                          "sum over an uninitialized array element");
              return {Value::psi(), e->args[0]->name};
            }
            acc += el.i;
          }
          return {Value::ofInt(acc), {}};
        }
        if (l > h) throw OeError(ErrKind::OutOfRange, "maxr over an empty range");
        BigInt best;
        bool first = true;
        for (long long i = l; i <= h; ++i) {
          const Value& el = arr[static_cast<size_t>(i)];
          if (el.isPsi()) {
            addDiagOnce(ctx, DiagKind::UninitializedRead, e->args[0]->name,
                        "max over an uninitialized array element");
            return {Value::psi(), e->args[0]->name};
          }
          if (first || el.i > best) best = el.i;
          first = false;
        }
        return {Value::ofInt(best), {}};
      }
      throw OeError(ErrKind::EvalUnsupported, "opaque function has no concrete meaning: " + e->name);
    }
    case MathKind::IndexedRead: {
      BigInt idx = evalInt(e->a, ctx, "array index");
      return readArray(ctx, e->name, e->marker, idx);
    }
  }
  throw OeError(ErrKind::EvalUnsupported, "unreachable");
}

} // namespace

Value evaluate(const MathPtr& e, const EvalCtx& ctx) { return evalM(e, ctx).v; }

bool evaluate(const BoolPtr& b, const EvalCtx& ctx) {
  switch (b->kind) {
    case BoolKind::True: return true;
    case BoolKind::False: return false;
    case BoolKind::Cmp: {
      Value l = evaluate(b->lhs, ctx);
      Value r = evaluate(b->rhs, ctx);
      if (l.isPsi() || r.isPsi())
        throw OeError(ErrKind::PsiInComparison, "comparison on an uninitialized value");
      if (l.t == Value::T::Addr || r.t == Value::T::Addr) {
        if (b->rel != Rel::Eq && b->rel != Rel::Ne)
          throw OeError(ErrKind::IllegalAddressArithmetic, "addresses admit only = and != comparisons");
        bool eq = l.t == r.t && (l.t == Value::T::Addr ? l.addr == r.addr : l.i == r.i);
        return b->rel == Rel::Eq ? eq : !eq;
      }
      int c = BigInt::cmp(l.i, r.i);
      switch (b->rel) {
        case Rel::Eq: return c == 0;
        case Rel::Ne: return c != 0;
        case Rel::Lt: return c < 0;
        case Rel::Le: return c <= 0;
        case Rel::Gt: return c > 0;
        case Rel::Ge: return c >= 0;
      }
      return false;
    }
    case BoolKind::Not:
      return !evaluate(b->x, ctx);
    case BoolKind::And: {
      bool l = evaluate(b->x, ctx);
      bool r = evaluate(b->y, ctx);
      return l && r;
    }
    case BoolKind::Or: {
      bool l = evaluate(b->x, ctx);
      bool r = evaluate(b->y, ctx);
      return l || r;
    }
    case BoolKind::Pred: {
      if ((b->name == "even" || b->name == "odd") && b->args.size() == 1) {
        Value v = evaluate(b->args[0], ctx);
        if (v.isPsi()) throw OeError(ErrKind::PsiInComparison, "parity of an uninitialized value");
        if (v.t != Value::T::Int)
          throw OeError(ErrKind::IllegalAddressArithmetic, "parity of an address");
        // parity from the decimal representation; magnitude sign is irrelevant
        std::string s = v.i.str();
        int last = s.back() - '0';
        bool even = last % 2 == 0;
        return b->name == "even" ? even : !even;
      }
      if (b->name == "sorted" && b->args.size() == 1) {
        const std::vector<Value>& a = arrayFor(ctx, b->args[0]);
        for (size_t i = 0; i + 1 < a.size(); ++i) {
          if (a[i].isPsi() || a[i + 1].isPsi())
            throw OeError(ErrKind::PsiInComparison, "sortedness of an uninitialized array");
          if (a[i].i > a[i + 1].i) return false;
        }
        return true;
      }
      if (b->name == "perm" && b->args.size() == 2) {
        std::vector<Value> a = arrayFor(ctx, b->args[0]);
        std::vector<Value> c = arrayFor(ctx, b->args[1]);
        if (a.size() != c.size()) return false;
        auto key = [](const Value& v) {
          if (v.isPsi()) throw OeError(ErrKind::PsiInComparison, "permutation of an uninitialized array");
          return v.i;
        };
        std::vector<BigInt> ka, kc;
        for (const auto& v : a) ka.push_back(key(v));
        for (const auto& v : c) kc.push_back(key(v));
        std::sort(ka.begin(), ka.end());
        std::sort(kc.begin(), kc.end());
        return ka == kc;
      }
      throw OeError(ErrKind::EvalUnsupported, "opaque predicate has no concrete meaning: " + b->name);
    }
  }
  return false;
}

// -- randomized equivalence ------------------------------------------------------------

namespace {

bool sampleable(const MathPtr& e) {
  switch (e->kind) {
    case MathKind::Psi:
    case MathKind::AddressOf:
    case MathKind::Deref:
    case MathKind::Apply:
    case MathKind::IndexedRead:
      return false;
    case MathKind::IntConst:
    case MathKind::Var:
      return true;
    case MathKind::Neg:
      return sampleable(e->a);
    case MathKind::BinOp:
      return sampleable(e->a) && sampleable(e->b);
  }
  return false;
}

bool sampleable(const BoolPtr& b) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return true;
    case BoolKind::Cmp:
      return sampleable(b->lhs) && sampleable(b->rhs);
    case BoolKind::Not:
      return sampleable(b->x);
    case BoolKind::And:
    case BoolKind::Or:
      return sampleable(b->x) && sampleable(b->y);
    case BoolKind::Pred:
      return false;
  }
  return false;
}

void buildStores(const std::vector<std::pair<std::string, Marker>>& refs, Rng& rng,
                 Store& init, Store& fin) {
  for (const auto& [name, m] : refs) {
    Store& s = (m == Marker::Final) ? fin : init;
    if (!s.vals.count(name)) s.vals[name] = Value::ofInt(BigInt(rng.range(-100, 100)));
  }
}

} // namespace

bool equivExpr(const MathPtr& e1, const MathPtr& e2, int samples, uint64_t seed) {
  MathPtr n1 = normalize(e1);
  MathPtr n2 = normalize(e2);
  if (equalMath(n1, n2)) return true;
  if (!sampleable(e1) || !sampleable(e2)) return false;
  std::vector<std::pair<std::string, Marker>> refs;
  collectVarRefs(e1, refs);
  collectVarRefs(e2, refs);
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    Store init, fin;
    buildStores(refs, rng, init, fin);
    EvalCtx ctx{&init, &fin, nullptr};
    if (!(evaluate(e1, ctx) == evaluate(e2, ctx))) return false;
  }
  return true;
}

bool equivExpr(const BoolPtr& b1, const BoolPtr& b2, int samples, uint64_t seed) {
  BoolPtr n1 = normalizeBool(b1);
  BoolPtr n2 = normalizeBool(b2);
  if (equalBool(n1, n2)) return true;
  if (!sampleable(b1) || !sampleable(b2)) return false;
  std::vector<std::pair<std::string, Marker>> refs;
  collectVarRefs(b1, refs);
  collectVarRefs(b2, refs);
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    Store init, fin;
    buildStores(refs, rng, init, fin);
    EvalCtx ctx{&init, &fin, nullptr};
    if (evaluate(b1, ctx) != evaluate(b2, ctx)) return false;
  }
  return true;
}

} // namespace oe
