#include "oe/funcsem.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "oe/interp.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oe {

bool FunctionDef::isRecursive() const {
  std::function<bool(const MathPtr&)> scan = [&](const MathPtr& e) -> bool {
    switch (e->kind) {
      case MathKind::Apply:
        if (e->name == name) return true;
        for (const auto& a : e->args)
          if (scan(a)) return true;
        return false;
      case MathKind::Neg:
      case MathKind::Deref:
      case MathKind::IndexedRead:
        return scan(e->a);
      case MathKind::BinOp:
        return scan(e->a) || scan(e->b);
      default:
        return false;
    }
  };
  for (const auto& b : branches)
    if (scan(b.value)) return true;
  return false;
}

// -- registry -------------------------------------------------------------------

Registry::Registry() {
  impls_["quicksort"] = [](Store& s, const std::vector<MathPtr>& args) {
    if (args.empty() || args[0]->kind != MathKind::Var)
      throw OeError(ErrKind::ArityMismatch, "quicksort expects an array name");
    auto it = s.arrays.find(args[0]->name);
    if (it == s.arrays.end())
      throw OeError(ErrKind::UnknownVariable, "unknown array: " + args[0]->name);
    for (const auto& v : it->second)
      if (v.isPsi())
        throw OeError(ErrKind::PsiInComparison, "sorting an uninitialized array");
    std::sort(it->second.begin(), it->second.end(),
              [](const Value& a, const Value& b) { return a.i < b.i; });
  };
}

void Registry::add(FunctionDef def) { fns_[def.name] = std::move(def); }

const FunctionDef* Registry::find(const std::string& name) const {
  auto it = fns_.find(name);
  return it == fns_.end() ? nullptr : &it->second;
}

const Registry::ConcreteImpl* Registry::concreteImpl(const std::string& name) const {
  auto it = impls_.find(name);
  return it == impls_.end() ? nullptr : &it->second;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// splits "value when guard"; the guard part is optional
std::pair<std::string, std::string> splitWhen(const std::string& s) {
  size_t pos = s.find(" when ");
  if (pos == std::string::npos) return {trim(s), ""};
  return {trim(s.substr(0, pos)), trim(s.substr(pos + 6))};
}

void checkWellFounded(const FunctionDef& def) {
  if (!def.isRecursive()) return;
  if (def.params.size() != 1)
    throw OeError(ErrKind::SyntaxError,
                  "recursive definition '" + def.name + "' needs exactly one integer parameter");
  const std::string& p = def.params[0];
  std::function<void(const MathPtr&)> scan = [&](const MathPtr& e) {
    if (e->kind == MathKind::Apply && e->name == def.name) {
      if (e->args.size() != 1)
        throw OeError(ErrKind::ArityMismatch, "recursive call arity mismatch in " + def.name);
      MathPtr delta = normalize(mBin('-', e->args[0], mVar(p, Marker::Current)));
      bool smaller = false;
      if (delta->kind == MathKind::Neg && delta->a->kind == MathKind::IntConst)
        smaller = delta->a->value.signum() > 0;
      if (!smaller)
        throw OeError(ErrKind::SyntaxError,
                      "recursive definition '" + def.name +
                          "' is not well-founded: step argument must be strictly smaller");
    }
    switch (e->kind) {
      case MathKind::Neg:
      case MathKind::Deref:
      case MathKind::IndexedRead:
        scan(e->a);
        return;
      case MathKind::BinOp:
        scan(e->a);
        scan(e->b);
        return;
      case MathKind::Apply:
        for (const auto& a : e->args) scan(a);
        return;
      default:
        return;
    }
  };
  for (const auto& b : def.branches) scan(b.value);
}

FunctionDef parseLine(const std::string& rawLine) {
  std::string line = trim(rawLine);
  if (line.rfind("fn ", 0) != 0)
    throw OeError(ErrKind::SyntaxError, "registry line must start with 'fn': " + line);
  size_t lp = line.find('(');
  size_t rp = line.find(')', lp);
  if (lp == std::string::npos || rp == std::string::npos)
    throw OeError(ErrKind::SyntaxError, "registry line missing parameter list: " + line);

  FunctionDef def;
  def.name = trim(line.substr(3, lp - 3));
  std::string paramSec = line.substr(lp + 1, rp - lp - 1);
  std::stringstream ps(paramSec);
  std::string piece;
  while (std::getline(ps, piece, ',')) {
    piece = trim(piece);
    if (!piece.empty()) def.params.push_back(piece);
  }

  std::string rest = trim(line.substr(rp + 1));
  if (rest.rfind("residual", 0) == 0) {
    def.kind = FunctionDef::Kind::SpliceSP;
    size_t q1 = rest.find('"');
    size_t q2 = rest.rfind('"');
    if (q1 == std::string::npos || q2 <= q1)
      throw OeError(ErrKind::SyntaxError, "residual definition needs a quoted predicate: " + line);
    def.residuals.push_back(parseBoolExpr(rest.substr(q1 + 1, q2 - q1 - 1), true));
    size_t wl = rest.find("writes", q2);
    if (wl != std::string::npos) {
      size_t b1 = rest.find('{', wl);
      size_t b2 = rest.find('}', wl);
      if (b1 == std::string::npos || b2 == std::string::npos)
        throw OeError(ErrKind::SyntaxError, "writes clause needs {names}: " + line);
      std::stringstream ws(rest.substr(b1 + 1, b2 - b1 - 1));
      while (std::getline(ws, piece, ',')) {
        piece = trim(piece);
        if (!piece.empty()) def.writes.insert(piece);
      }
    }
    return def;
  }

  if (rest.empty() || rest[0] != '=')
    throw OeError(ErrKind::SyntaxError, "registry line needs '=' or 'residual': " + line);
  def.kind = FunctionDef::Kind::RecursiveValue;
  std::string body = trim(rest.substr(1));
  size_t start = 0;
  while (true) {
    size_t sep = body.find("(+)", start);
    std::string part =
        sep == std::string::npos ? body.substr(start) : body.substr(start, sep - start);
    auto [valueText, guardText] = splitWhen(trim(part));
    FunctionDef::ValBranch br;
    br.value = parseMathExpr(valueText, true);
    if (!guardText.empty()) br.guard = parseBoolExpr(guardText, true);
    def.branches.push_back(std::move(br));
    if (sep == std::string::npos) break;
    start = sep + 3;
  }
  checkWellFounded(def);
  return def;
}

} // namespace

Registry Registry::parseString(const std::string& text) {
  Registry reg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    reg.add(parseLine(t));
  }
  return reg;
}

Registry Registry::parseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw OeError(ErrKind::SyntaxError, "cannot open registry file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseString(ss.str());
}

// -- splicing ----------------------------------------------------------------------

namespace {

MathPtr renameVars(const MathPtr& e, const std::map<std::string, std::string>& m) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
      return e;
    case MathKind::Var: {
      auto it = m.find(e->name);
      return it == m.end() ? e : mVar(it->second, e->marker);
    }
    case MathKind::AddressOf: {
      auto it = m.find(e->name);
      return it == m.end() ? e : mAddr(it->second);
    }
    case MathKind::Deref:
      return mDeref(renameVars(e->a, m), e->depth, e->marker);
    case MathKind::Neg:
      return mNeg(renameVars(e->a, m));
    case MathKind::BinOp:
      return mBin(e->op, renameVars(e->a, m), renameVars(e->b, m));
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      for (const auto& a : e->args) args.push_back(renameVars(a, m));
      return mApply(e->name, std::move(args));
    }
    case MathKind::IndexedRead: {
      auto it = m.find(e->name);
      return mIndex(it == m.end() ? e->name : it->second, renameVars(e->a, m), e->marker);
    }
  }
  return e;
}

BoolPtr renameVars(const BoolPtr& b, const std::map<std::string, std::string>& m) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp:
      return bCmp(b->rel, renameVars(b->lhs, m), renameVars(b->rhs, m));
    case BoolKind::Not:
      return bNot(renameVars(b->x, m));
    case BoolKind::And:
      return bAnd(renameVars(b->x, m), renameVars(b->y, m));
    case BoolKind::Or:
      return bOr(renameVars(b->x, m), renameVars(b->y, m));
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(renameVars(a, m));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

} // namespace

Csp instantiateSplice(const std::string& fname, const std::vector<MathPtr>& args,
                      const Registry& reg, const Universe& u) {
  const FunctionDef* def = reg.find(fname);
  if (!def) throw OeError(ErrKind::UnknownFunction, "unknown function: " + fname);
  if (def->kind != FunctionDef::Kind::SpliceSP)
    throw OeError(ErrKind::UnknownFunction, "'" + fname + "' is not a splice definition");
  if (args.size() != def->params.size())
    throw OeError(ErrKind::ArityMismatch,
                  fname + " expects " + std::to_string(def->params.size()) + " argument(s)");
  std::map<std::string, std::string> ren;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i]->kind != MathKind::Var)
      throw OeError(ErrKind::ArityMismatch, "splice arguments must be variable names");
    ren[def->params[i]] = args[i]->name;
  }
  SemPredicate sp;
  for (const auto& r : def->residuals) sp.residuals.push_back(renameVars(r, ren));
  for (const auto& w : def->writes) {
    auto it = ren.find(w);
    std::string actual = it == ren.end() ? w : it->second;
    sp.writes.insert(actual);
    sp.residualVars.insert(actual);
  }
  Csp c;
  c.branches.push_back({bTrue(), complete(std::move(sp), u)});
  return c;
}

SemFormula spliceCall(SemFormula prefix, const std::string& fname,
                      const std::vector<MathPtr>& args, const Registry& reg,
                      const Universe& u) {
  prefix.push_back(instantiateSplice(fname, args, reg, u));
  return prefix;
}

// -- recursive values -----------------------------------------------------------------

namespace {

struct RecEval {
  const FunctionDef& def;
  const Registry& reg;
  long long fuel;
  std::map<std::string, BigInt> memo;

  BigInt evalExpr(const MathPtr& e, const BigInt& x) {
    switch (e->kind) {
      case MathKind::IntConst:
        return e->value;
      case MathKind::Var:
        if (e->name == def.params[0]) return x;
        throw OeError(ErrKind::EvalUnsupported,
                      "free variable '" + e->name + "' in recursive definition");
      case MathKind::Neg:
        return -evalExpr(e->a, x);
      case MathKind::BinOp: {
        BigInt l = evalExpr(e->a, x);
        BigInt r = evalExpr(e->b, x);
        switch (e->op) {
          case '+': return l + r;
          case '-': return l - r;
          case '*': return l * r;
        }
        throw OeError(ErrKind::EvalUnsupported, "bad operator");
      }
      case MathKind::Apply: {
        if (e->name == def.name) return unfold(evalExpr(e->args[0], x));
        if (e->name == "abs" && e->args.size() == 1) return evalExpr(e->args[0], x).abs();
        const FunctionDef* other = reg.find(e->name);
        if (other && other->kind == FunctionDef::Kind::RecursiveValue &&
            e->args.size() == 1)
          return unfoldRecursive(e->name, evalExpr(e->args[0], x), reg, fuel);
        throw OeError(ErrKind::EvalUnsupported, "opaque call in recursive definition: " + e->name);
      }
      default:
        throw OeError(ErrKind::EvalUnsupported, "unsupported construct in recursive definition");
    }
  }

  bool evalGuard(const BoolPtr& b, const BigInt& x) {
    switch (b->kind) {
      case BoolKind::True:
        return true;
      case BoolKind::False:
        return false;
      case BoolKind::Cmp: {
        int c = BigInt::cmp(evalExpr(b->lhs, x), evalExpr(b->rhs, x));
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
        return !evalGuard(b->x, x);
      case BoolKind::And:
        return evalGuard(b->x, x) && evalGuard(b->y, x);
      case BoolKind::Or:
        return evalGuard(b->x, x) || evalGuard(b->y, x);
      case BoolKind::Pred: {
        if ((b->name == "even" || b->name == "odd") && b->args.size() == 1) {
          BigInt v = evalExpr(b->args[0], x);
          std::string s = v.str();
          bool even = (s.back() - '0') % 2 == 0;
          return b->name == "even" ? even : !even;
        }
        throw OeError(ErrKind::EvalUnsupported, "opaque predicate in recursive definition");
      }
    }
    return false;
  }

  BigInt unfold(const BigInt& x) {
    auto it = memo.find(x.str());
    if (it != memo.end()) return it->second;
    if (--fuel < 0)
      throw OeError(ErrKind::FuelExhausted, "fuel exhausted unfolding " + def.name);
    for (const auto& br : def.branches) {
      if (br.guard && !evalGuard(br.guard, x)) continue;
      BigInt v = evalExpr(br.value, x);
      memo.emplace(x.str(), v);
      return v;
    }
    throw OeError(ErrKind::NoBranchApplies,
                  "no branch of " + def.name + " applies to " + x.str());
  }
};

} // namespace

BigInt unfoldRecursive(const std::string& fname, const BigInt& arg, const Registry& reg,
                       long long fuel) {
  const FunctionDef* def = reg.find(fname);
  if (!def) throw OeError(ErrKind::UnknownFunction, "unknown function: " + fname);
  if (def->kind != FunctionDef::Kind::RecursiveValue)
    throw OeError(ErrKind::UnknownFunction, "'" + fname + "' is not a value definition");
  if (def->params.size() != 1)
    throw OeError(ErrKind::ArityMismatch, fname + " is not a unary value definition");
  RecEval ev{*def, reg, fuel, {}};
  return ev.unfold(arg);
}

Csp recursiveDefCsp(const FunctionDef& def) {
  Csp c;
  for (const auto& br : def.branches) {
    SemPredicate sp;
    sp.writes.insert(def.name);
    c.branches.push_back({br.guard ? br.guard : bTrue(), std::move(sp)});
  }
  return c;
}

// -- payload lowering --------------------------------------------------------------------

MathPtr lowerValueCalls(const MathPtr& e, const Registry& reg, long long fuel) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::Var:
    case MathKind::AddressOf:
      return e;
    case MathKind::Deref:
      return mDeref(lowerValueCalls(e->a, reg, fuel), e->depth, e->marker);
    case MathKind::Neg:
      return mNeg(lowerValueCalls(e->a, reg, fuel));
    case MathKind::BinOp:
      return mBin(e->op, lowerValueCalls(e->a, reg, fuel), lowerValueCalls(e->b, reg, fuel));
    case MathKind::IndexedRead:
      return mIndex(e->name, lowerValueCalls(e->a, reg, fuel), e->marker);
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      for (const auto& a : e->args) args.push_back(lowerValueCalls(a, reg, fuel));
      const FunctionDef* def = reg.find(e->name);
      if (!def || def->kind != FunctionDef::Kind::RecursiveValue)
        return mApply(e->name, std::move(args));
      if (!def->isRecursive() && def->branches.size() == 1 &&
          (!def->branches[0].guard || def->branches[0].guard->kind == BoolKind::True)) {
        if (args.size() != def->params.size())
          throw OeError(ErrKind::ArityMismatch, e->name + ": argument count mismatch");
        // substitute the template body; parameters are plain occurrences
        std::map<std::string, std::string> ren;
        Binding binding;
        for (size_t i = 0; i < args.size(); ++i) {
          if (args[i]->kind == MathKind::Var) {
            ren[def->params[i]] = args[i]->name;
          } else {
            binding[{def->params[i], Marker::Current}] = args[i];
          }
        }
        MathPtr body = renameVars(def->branches[0].value, ren);
        return binding.empty() ? body : substitute(body, binding);
      }
      if (args.size() == 1 && args[0]->kind == MathKind::IntConst)
        return mInt(unfoldRecursive(e->name, args[0]->value, reg, fuel));
      return mApply(e->name, std::move(args));
    }
  }
  return e;
}

namespace {

BoolPtr lowerBool(const BoolPtr& b, const Registry& reg) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp:
      return bCmp(b->rel, lowerValueCalls(b->lhs, reg), lowerValueCalls(b->rhs, reg));
    case BoolKind::Not:
      return bNot(lowerBool(b->x, reg));
    case BoolKind::And:
      return bAnd(lowerBool(b->x, reg), lowerBool(b->y, reg));
    case BoolKind::Or:
      return bOr(lowerBool(b->x, reg), lowerBool(b->y, reg));
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(lowerValueCalls(a, reg));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

NodePtr lowerNode(const NodePtr& n, const Registry& reg) {
  switch (n->kind) {
    case NodeKind::Skip:
    case NodeKind::Call:
      return n;
    case NodeKind::TermNode: {
      Term t;
      for (const auto& w : n->term.writes) {
        WriteOp nw;
        nw.target = w.target;
        if (w.target.kind == TargetKind::ArrayElem)
          nw.target.index = lowerValueCalls(w.target.index, reg);
        nw.payload = lowerValueCalls(w.payload, reg);
        if (w.guard) nw.guard = lowerBool(w.guard, reg);
        t.writes.push_back(std::move(nw));
      }
      return nTerm(std::move(t));
    }
    case NodeKind::Seq: {
      std::vector<NodePtr> items;
      for (const auto& c : n->seq) items.push_back(lowerNode(c, reg));
      return nSeq(std::move(items));
    }
    case NodeKind::Guarded:
      return nGuarded(lowerNode(n->body, reg), lowerBool(n->guard, reg));
    case NodeKind::LoopCount:
      if (n->countIsName) return nLoopCountSym(lowerNode(n->body, reg), n->countName);
      return nLoopCount(lowerNode(n->body, reg), n->count);
    case NodeKind::LoopUntil: {
      SemBool sb = n->until;
      sb.cond = lowerBool(sb.cond, reg);
      return nLoopUntil(lowerNode(n->body, reg), std::move(sb));
    }
    case NodeKind::WaitLoop: {
      SemBool sb = n->until;
      sb.cond = lowerBool(sb.cond, reg);
      return nWaitLoop(std::move(sb));
    }
    case NodeKind::Par:
      return nPar(lowerNode(n->left, reg), lowerNode(n->right, reg));
  }
  return n;
}

} // namespace

Program lowerCalls(const Program& p, const Registry& reg) {
  Program out;
  out.decls = p.decls;
  out.body = lowerNode(p.body, reg);
  return out;
}

// -- Tower of Hanoi --------------------------------------------------------------------

std::string renderMove(const Move& m) {
  return std::string(1, m.from) + " -> " + std::string(1, m.to);
}

namespace {

void hanoiRec(int n, char a, char b, char c, std::vector<Move>& out) {
  if (n == 1) {
    out.push_back({a, c});
    return;
  }
  hanoiRec(n - 1, a, c, b, out);
  out.push_back({a, c});
  hanoiRec(n - 1, b, a, c, out);
}

} // namespace

std::vector<Move> hanoiSequence(int disks) {
  if (disks < 1 || disks > 20)
    throw OeError(ErrKind::SizeLimit, "hanoi sequence supports 1..20 disks (length 2^N - 1)");
  std::vector<Move> out;
  out.reserve((1ull << disks) - 1);
  hanoiRec(disks, 'A', 'B', 'C', out);
  return out;
}

Move hanoiNthMove(int disks, long long n) {
  if (disks < 1 || disks > 62) throw OeError(ErrKind::OutOfRange, "disk count out of range");
  long long total = (1ll << disks) - 1;
  if (n < 1 || n > total)
    throw OeError(ErrKind::OutOfRange,
                  "move index " + std::to_string(n) + " outside [1, " + std::to_string(total) + "]");
  // n = 2^k * (2m + 1)
  int k = 0;
  long long rest = n;
  while ((rest & 1) == 0) {
    rest >>= 1;
    ++k;
  }
  long long m = rest >> 1;
  // base triple by parity of N - k, then rotate m times: (a,b,c) -> (c,a,b)
  char t[3];
  if ((disks - k) % 2 != 0) {
    t[0] = 'A';
    t[1] = 'B';
    t[2] = 'C';
  } else {
    t[0] = 'A';
    t[1] = 'C';
    t[2] = 'B';
  }
  int r = static_cast<int>(m % 3);
  for (int i = 0; i < r; ++i) {
    char a = t[0], b = t[1], c = t[2];
    t[0] = c;
    t[1] = a;
    t[2] = b;
  }
  return {t[0], t[2]};
}

std::vector<Move> hanoiAllMoves(int disks, bool parallel) {
  if (disks < 1 || disks > 30) throw OeError(ErrKind::SizeLimit, "disk count out of range");
  long long total = (1ll << disks) - 1;
  std::vector<Move> out(static_cast<size_t>(total));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && total > 1024)
#endif
  for (long long n = 1; n <= total; ++n) out[static_cast<size_t>(n - 1)] = hanoiNthMove(disks, n);
  (void)parallel;
  return out;
}

} // namespace oe
