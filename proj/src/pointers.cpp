#include "oe/pointers.hpp"

namespace oe {

bool PointsToEnv::operator==(const PointsToEnv& o) const {
  if (known.size() != o.known.size()) return false;
  for (const auto& [name, link] : known) {
    auto it = o.known.find(name);
    if (it == o.known.end()) return false;
    if (link.kind != it->second.kind || link.target != it->second.target) return false;
  }
  return true;
}

std::string resolveDeref(const PointsToEnv& env, const std::string& pointer, int depth) {
  std::string cur = pointer;
  for (int i = 0; i < depth; ++i) {
    auto it = env.known.find(cur);
    if (it == env.known.end() || it->second.kind == PtsLink::Kind::Unknown)
      throw OeError(ErrKind::UnresolvedPointer,
                    "cannot resolve *" + cur + " symbolically (pointer value unknown)");
    if (it->second.kind == PtsLink::Kind::PsiLink)
      throw OeError(ErrKind::WrongAddress, "dereference of uninitialized pointer '" + cur + "'");
    cur = it->second.target;
  }
  return cur;
}

PtsLink classifyPointerValue(const MathPtr& value) {
  if (value->kind == MathKind::AddressOf) return {PtsLink::Kind::Addr, value->name};
  if (value->kind == MathKind::Psi) return {PtsLink::Kind::PsiLink, ""};
  return {PtsLink::Kind::Unknown, ""};
}

MathPtr resolveDerefsInExpr(const MathPtr& e, const PointsToEnv& env) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::Var:
    case MathKind::AddressOf:
      return e;
    case MathKind::Deref: {
      // *&v cancels structurally first; what remains resolves via the env
      MathPtr inner = normalize(e->a);
      int depth = e->depth;
      while (depth > 0 && inner->kind == MathKind::AddressOf) {
        inner = mVar(inner->name, e->marker);
        --depth;
      }
      if (depth == 0) return inner;
      if (inner->kind != MathKind::Var)
        throw OeError(ErrKind::UnresolvedPointer, "dereference of a non-variable expression");
      return mVar(resolveDeref(env, inner->name, depth), e->marker);
    }
    case MathKind::Neg:
      return mNeg(resolveDerefsInExpr(e->a, env));
    case MathKind::BinOp:
      return mBin(e->op, resolveDerefsInExpr(e->a, env), resolveDerefsInExpr(e->b, env));
    case MathKind::Apply: {
      std::vector<MathPtr> args;
      for (const auto& a : e->args) args.push_back(resolveDerefsInExpr(a, env));
      return mApply(e->name, std::move(args));
    }
    case MathKind::IndexedRead:
      return mIndex(e->name, resolveDerefsInExpr(e->a, env), e->marker);
  }
  return e;
}

BoolPtr resolveDerefsInExpr(const BoolPtr& b, const PointsToEnv& env) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return b;
    case BoolKind::Cmp:
      return bCmp(b->rel, resolveDerefsInExpr(b->lhs, env), resolveDerefsInExpr(b->rhs, env));
    case BoolKind::Not:
      return bNot(resolveDerefsInExpr(b->x, env));
    case BoolKind::And:
      return bAnd(resolveDerefsInExpr(b->x, env), resolveDerefsInExpr(b->y, env));
    case BoolKind::Or:
      return bOr(resolveDerefsInExpr(b->x, env), resolveDerefsInExpr(b->y, env));
    case BoolKind::Pred: {
      std::vector<MathPtr> args;
      for (const auto& a : b->args) args.push_back(resolveDerefsInExpr(a, env));
      return bPred(b->name, std::move(args));
    }
  }
  return b;
}

} // namespace oe
