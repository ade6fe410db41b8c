#include "oe/syntax.hpp"

#include <cassert>
#include <map>

namespace oe {

// -- node constructors ---------------------------------------------------------

static NodePtr makeNode(OENode n) { return std::make_shared<const OENode>(std::move(n)); }

NodePtr nSkip() {
  OENode n;
  n.kind = NodeKind::Skip;
  return makeNode(std::move(n));
}
NodePtr nTerm(Term t) {
  OENode n;
  n.kind = NodeKind::TermNode;
  n.term = std::move(t);
  return makeNode(std::move(n));
}
NodePtr nSeq(std::vector<NodePtr> items) {
  if (items.size() == 1) return items[0];
  OENode n;
  n.kind = NodeKind::Seq;
  n.seq = std::move(items);
  return makeNode(std::move(n));
}
NodePtr nGuarded(NodePtr body, BoolPtr guard) {
  OENode n;
  n.kind = NodeKind::Guarded;
  n.body = std::move(body);
  n.guard = std::move(guard);
  return makeNode(std::move(n));
}
NodePtr nLoopCount(NodePtr body, BigInt count) {
  OENode n;
  n.kind = NodeKind::LoopCount;
  n.body = std::move(body);
  n.count = std::move(count);
  return makeNode(std::move(n));
}
NodePtr nLoopCountSym(NodePtr body, std::string name) {
  OENode n;
  n.kind = NodeKind::LoopCount;
  n.body = std::move(body);
  n.countIsName = true;
  n.countName = std::move(name);
  return makeNode(std::move(n));
}
NodePtr nLoopUntil(NodePtr body, SemBool until) {
  OENode n;
  n.kind = NodeKind::LoopUntil;
  n.body = std::move(body);
  n.until = std::move(until);
  return makeNode(std::move(n));
}
NodePtr nWaitLoop(SemBool until) {
  OENode n;
  n.kind = NodeKind::WaitLoop;
  n.until = std::move(until);
  return makeNode(std::move(n));
}
NodePtr nPar(NodePtr l, NodePtr r) {
  OENode n;
  n.kind = NodeKind::Par;
  n.left = std::move(l);
  n.right = std::move(r);
  return makeNode(std::move(n));
}
NodePtr nCall(std::string fname, std::vector<MathPtr> args) {
  OENode n;
  n.kind = NodeKind::Call;
  n.fname = std::move(fname);
  n.callArgs = std::move(args);
  return makeNode(std::move(n));
}

std::string Target::token() const {
  switch (kind) {
    case TargetKind::Var: return name;
    case TargetKind::ArrayElem:
      return name + "[" + renderMath(normalize(index), RenderMode::ProgramText) + "]";
    case TargetKind::Deref: return std::string(static_cast<size_t>(depth), '*') + name;
  }
  return name;
}

const Decl* Program::find(const std::string& name) const {
  for (const auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

// -- lexer -----------------------------------------------------------------------

namespace {

enum class Tok { Name, Int, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

bool isNameStart(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool isNameChar(char c) { return isNameStart(c) || (c >= '0' && c <= '9'); }

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto bump = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') bump(1);
      continue;
    }
    int tl = line, tc = col;
    if (isNameStart(c)) {
      size_t j = i;
      while (j < text.size() && isNameChar(text[j])) ++j;
      out.push_back({Tok::Name, text.substr(i, j - i), tl, tc});
      bump(j - i);
      continue;
    }
    if (c >= '0' && c <= '9') {
      size_t j = i;
      while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
      out.push_back({Tok::Int, text.substr(i, j - i), tl, tc});
      bump(j - i);
      continue;
    }
    auto two = [&](const char* p) {
      return i + 1 < text.size() && text[i] == p[0] && text[i + 1] == p[1];
    };
    if (two("!=") || two("<=") || two(">=") || two("&&") || two("||")) {
      out.push_back({Tok::Punct, text.substr(i, 2), tl, tc});
      bump(2);
      continue;
    }
    static const std::string singles = "!()[]{},;:^~'&*+-=<>";
    if (singles.find(c) != std::string::npos) {
      out.push_back({Tok::Punct, std::string(1, c), tl, tc});
      bump(1);
      continue;
    }
    throw OeError(ErrKind::SyntaxError, std::to_string(tl) + ":" + std::to_string(tc) +
                                            ": unexpected character '" + std::string(1, c) + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::set<std::string> kKeywords = {"var", "int", "ptr", "skip", "call", "until", "psi"};

// -- parser ------------------------------------------------------------------------

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  bool markers; // permit ~v and v' in expressions

  explicit Parser(const std::string& text, bool allowMarkers)
      : toks(lex(text)), markers(allowMarkers) {}

  const Token& peek(size_t k = 0) const { return toks[std::min(pos + k, toks.size() - 1)]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    throw OeError(ErrKind::SyntaxError, std::to_string(t.line) + ":" + std::to_string(t.col) +
                                            ": expected " + expected + ", found '" +
                                            (t.kind == Tok::End ? "<end>" : t.text) + "'");
  }

  bool isPunct(const std::string& p, size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool isName(const std::string& n, size_t k = 0) const {
    return peek(k).kind == Tok::Name && peek(k).text == n;
  }

  bool accept(const std::string& p) {
    if (isPunct(p)) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(const std::string& p) {
    if (!accept(p)) fail("'" + p + "'");
  }
  bool acceptName(const std::string& n) {
    if (isName(n)) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string expectIdent() {
    if (peek().kind != Tok::Name) fail("an identifier");
    if (kKeywords.count(peek().text)) fail("an identifier (got keyword '" + peek().text + "')");
    return toks[pos++].text;
  }
  BigInt expectInt() {
    if (peek().kind != Tok::Int) fail("an integer");
    return BigInt::fromString(toks[pos++].text);
  }

  // marker suffix for a just-parsed name
  Marker nameMarker(bool initial) {
    if (accept("'")) {
      if (!markers) fail("no final-value marker in program text");
      return Marker::Final;
    }
    return initial ? Marker::Initial : Marker::Current;
  }

  // ---- math expressions ----

  MathPtr parseArith() {
    MathPtr e = parseMul();
    while (isPunct("+") || isPunct("-")) {
      char op = toks[pos++].text[0];
      e = mBin(op, e, parseMul());
    }
    return e;
  }

  MathPtr parseMul() {
    MathPtr e = parseUnary();
    while (isPunct("*")) {
      ++pos;
      e = mBin('*', e, parseUnary());
    }
    return e;
  }

  MathPtr parseUnary() {
    if (accept("-")) {
      MathPtr inner = parseUnary();
      if (inner->kind == MathKind::IntConst) return mInt(-inner->value);
      return mNeg(inner);
    }
    if (isPunct("*")) {
      int depth = 0;
      while (accept("*")) ++depth;
      std::string name = expectIdent();
      Marker m = nameMarker(false);
      return mDeref(mVar(name, m), depth, m);
    }
    return parsePrimary();
  }

  MathPtr parsePrimary() {
    if (peek().kind == Tok::Int) return mInt(expectInt());
    if (acceptName("psi")) return mPsi();
    if (accept("&")) {
      std::string name = expectIdent();
      if (isPunct("'")) fail("a variable name after & (not a value)");
      return mAddr(name);
    }
    if (accept("~")) {
      if (!markers) fail("no initial-value marker in program text");
      std::string name = expectIdent();
      if (accept("[")) {
        MathPtr idx = parseArith();
        expect("]");
        return mIndex(name, idx, Marker::Initial);
      }
      return mVar(name, Marker::Initial);
    }
    if (accept("(")) {
      MathPtr e = parseArith();
      expect(")");
      return e;
    }
    if (peek().kind == Tok::Name) {
      std::string name = expectIdent();
      if (isPunct("(")) {
        ++pos;
        std::vector<MathPtr> args;
        if (!isPunct(")")) {
          args.push_back(parseArith());
          while (accept(",")) args.push_back(parseArith());
        }
        expect(")");
        return mApply(name, std::move(args));
      }
      Marker m = nameMarker(false);
      if (accept("[")) {
        MathPtr idx = parseArith();
        expect("]");
        return mIndex(name, idx, m);
      }
      return mVar(name, m);
    }
    fail("an expression");
  }

  // ---- boolean expressions ----

  BoolPtr parseBor() {
    BoolPtr b = parseBand();
    while (accept("||")) b = bOr(b, parseBand());
    return b;
  }

  BoolPtr parseBand() {
    BoolPtr b = parseBfactor();
    while (accept("&&")) b = bAnd(b, parseBfactor());
    return b;
  }

  BoolPtr parseBfactor() {
    if (accept("!")) return bNot(parseBfactor());
    return parseBatom();
  }

  bool atRel() const {
    return isPunct("=") || isPunct("!=") || isPunct("<") || isPunct("<=") || isPunct(">") ||
           isPunct(">=");
  }

  Rel parseRel() {
    std::string r = toks[pos++].text;
    if (r == "=") return Rel::Eq;
    if (r == "!=") return Rel::Ne;
    if (r == "<") return Rel::Lt;
    if (r == "<=") return Rel::Le;
    if (r == ">") return Rel::Gt;
    return Rel::Ge;
  }

  BoolPtr parseBatom() {
    if (isPunct("(")) {
      // Either a parenthesized boolean or the lhs of a comparison.
      size_t save = pos;
      try {
        ++pos;
        BoolPtr b = parseBor();
        expect(")");
        if (atRel() || isPunct("+") || isPunct("-") || isPunct("*")) fail("boolean context");
        return b;
      } catch (const OeError&) {
        pos = save;
      }
    }
    MathPtr lhs = parseArith();
    if (!atRel()) {
      // A bare opaque application reads as a predicate.
      if (lhs->kind == MathKind::Apply) return bPred(lhs->name, lhs->args);
      fail("a comparison operator");
    }
    Rel r = parseRel();
    MathPtr rhs = parseArith();
    return bCmp(r, lhs, rhs);
  }

  // ---- OE structure ----

  Target parseTarget() {
    if (isPunct("*")) {
      int depth = 0;
      while (accept("*")) ++depth;
      Target t;
      t.kind = TargetKind::Deref;
      t.name = expectIdent();
      t.depth = depth;
      return t;
    }
    std::string name = expectIdent();
    if (accept("[")) {
      Target t;
      t.kind = TargetKind::ArrayElem;
      t.name = name;
      t.index = parseArith();
      expect("]");
      return t;
    }
    Target t;
    t.kind = TargetKind::Var;
    t.name = name;
    return t;
  }

  WriteOp parseSimple() {
    WriteOp w;
    w.target = parseTarget();
    expect("!");
    expect("(");
    w.payload = parseArith();
    expect(")");
    if (accept("[")) {
      w.guard = parseBor();
      expect("]");
    }
    return w;
  }

  bool atTargetStart() const {
    if (isPunct("*")) return true;
    if (peek().kind != Tok::Name || kKeywords.count(peek().text)) return false;
    // NAME '!' or NAME '[' ... ']' '!'
    if (isPunct("!", 1)) return true;
    if (isPunct("[", 1)) return true;
    return false;
  }

  NodePtr parseAtom() {
    if (acceptName("skip")) return nSkip();
    if (acceptName("call")) {
      std::string fname = expectIdent();
      expect("(");
      std::vector<MathPtr> args;
      if (!isPunct(")")) {
        args.push_back(parseArith());
        while (accept(",")) args.push_back(parseArith());
      }
      expect(")");
      return nCall(std::move(fname), std::move(args));
    }
    if (accept("(")) {
      NodePtr first = parseSeq();
      if (accept("||")) {
        NodePtr second = parseSeq();
        expect(")");
        return nPar(first, second);
      }
      expect(")");
      return first;
    }
    if (atTargetStart()) {
      Term t;
      t.writes.push_back(parseSimple());
      while (accept(",")) t.writes.push_back(parseSimple());
      return nTerm(std::move(t));
    }
    fail("a term, '(', 'skip' or 'call'");
  }

  SemBool parseUntil() {
    bool saved = markers;
    markers = true;
    BoolPtr cond = parseBor();
    markers = saved;
    SemBool sb;
    sb.cond = cond;
    if (!containsMarker(cond, Marker::Final))
      fail("an until-condition mentioning at least one final value (v')");
    sb.type2 = containsMarker(cond, Marker::Initial);
    return sb;
  }

  NodePtr parseItem() {
    NodePtr a = parseAtom();
    if (accept("^")) {
      if (accept("{")) {
        if (!acceptName("until")) fail("'until'");
        SemBool sb = parseUntil();
        expect("}");
        if (a->kind == NodeKind::Skip) return nWaitLoop(std::move(sb));
        return nLoopUntil(a, std::move(sb));
      }
      if (peek().kind == Tok::Int) return nLoopCount(a, expectInt());
      if (peek().kind == Tok::Name) return nLoopCountSym(a, expectIdent());
      fail("a loop bound (integer, name or {until ...})");
    }
    if (accept("[")) {
      BoolPtr g = parseBor();
      expect("]");
      return nGuarded(a, g);
    }
    return a;
  }

  NodePtr parseSeq() {
    std::vector<NodePtr> items;
    items.push_back(parseItem());
    while (accept(";")) items.push_back(parseItem());
    return nSeq(std::move(items));
  }

  Decl parseDecl() {
    Decl d;
    ++pos; // 'var'
    d.name = expectIdent();
    expect(":");
    if (acceptName("ptr")) {
      if (acceptName("ptr")) {
        d.type = VarType::PtrPtr;
      } else {
        d.type = VarType::Ptr;
      }
      if (!acceptName("int")) fail("'int'");
      expect(";");
      return d;
    }
    if (!acceptName("int")) fail("'int' or 'ptr'");
    if (accept("[")) {
      BigInt n = expectInt();
      if (!n.fitsInt64() || n.toInt64() <= 0) fail("a positive array size");
      d.type = VarType::Array;
      d.arraySize = n.toInt64();
      expect("]");
    } else {
      d.type = VarType::Int;
    }
    expect(";");
    return d;
  }

  Program parseProgram() {
    Program p;
    while (isName("var")) p.decls.push_back(parseDecl());
    p.body = parseSeq();
    if (peek().kind != Tok::End) fail("end of input");
    return p;
  }
};

// -- static validation ----------------------------------------------------------

struct Validator {
  const Program& p;
  std::map<std::string, const Decl*> table;

  explicit Validator(const Program& prog) : p(prog) {
    for (const auto& d : p.decls) {
      if (table.count(d.name))
        throw OeError(ErrKind::SyntaxError, "duplicate declaration of '" + d.name + "'");
      table[d.name] = &d;
    }
  }

  const Decl& require(const std::string& name) const {
    auto it = table.find(name);
    if (it == table.end())
      throw OeError(ErrKind::UndeclaredVariable, "undeclared variable '" + name + "'");
    return *it->second;
  }

  void checkExpr(const MathPtr& e, bool arrayRefOk) const {
    switch (e->kind) {
      case MathKind::IntConst:
      case MathKind::Psi:
        return;
      case MathKind::Var: {
        const Decl& d = require(e->name);
        if (d.type == VarType::Array && !arrayRefOk)
          throw OeError(ErrKind::SyntaxError,
                        "array '" + e->name + "' used as a scalar (index it or pass it to a function)");
        return;
      }
      case MathKind::AddressOf: {
        const Decl& d = require(e->name);
        if (d.type == VarType::Array)
          throw OeError(ErrKind::SyntaxError, "&" + e->name + ": address of a whole array");
        return;
      }
      case MathKind::Deref: {
        if (e->a->kind != MathKind::Var)
          throw OeError(ErrKind::SyntaxError, "dereference of a non-variable");
        const Decl& d = require(e->a->name);
        int maxDepth = d.type == VarType::Ptr ? 1 : d.type == VarType::PtrPtr ? 2 : 0;
        if (e->depth > maxDepth)
          throw OeError(ErrKind::SyntaxError,
                        "'" + e->a->name + "' does not support " + std::to_string(e->depth) +
                            "-level indirection");
        return;
      }
      case MathKind::Neg:
        checkExpr(e->a, false);
        return;
      case MathKind::BinOp:
        checkExpr(e->a, false);
        checkExpr(e->b, false);
        return;
      case MathKind::Apply:
        for (const auto& a : e->args) checkExpr(a, true);
        return;
      case MathKind::IndexedRead: {
        const Decl& d = require(e->name);
        if (d.type != VarType::Array)
          throw OeError(ErrKind::SyntaxError, "'" + e->name + "' is not an array");
        checkExpr(e->a, false);
        return;
      }
    }
  }

  void checkPayload(const MathPtr& e) const {
    checkExpr(e, false);
    if (addressUnderArithmetic(e))
      throw OeError(ErrKind::IllegalAddressArithmetic,
                    "address used as an arithmetic operand: " +
                        renderMath(e, RenderMode::ProgramText));
  }

  void checkBool(const BoolPtr& b) const {
    switch (b->kind) {
      case BoolKind::True:
      case BoolKind::False:
        return;
      case BoolKind::Cmp: {
        checkExpr(b->lhs, false);
        checkExpr(b->rhs, false);
        bool addr = b->lhs->kind == MathKind::AddressOf || b->rhs->kind == MathKind::AddressOf;
        if (addr && b->rel != Rel::Eq && b->rel != Rel::Ne)
          throw OeError(ErrKind::IllegalAddressArithmetic,
                        "addresses admit only = and != comparisons");
        if (addressUnderArithmetic(b->lhs) || addressUnderArithmetic(b->rhs))
          throw OeError(ErrKind::IllegalAddressArithmetic, "address used as an arithmetic operand");
        return;
      }
      case BoolKind::Not:
        checkBool(b->x);
        return;
      case BoolKind::And:
      case BoolKind::Or:
        checkBool(b->x);
        checkBool(b->y);
        return;
      case BoolKind::Pred:
        for (const auto& a : b->args) checkExpr(a, true);
        return;
    }
  }

  void checkTarget(const Target& t) const {
    const Decl& d = require(t.name);
    switch (t.kind) {
      case TargetKind::Var:
        if (d.type == VarType::Array)
          throw OeError(ErrKind::SyntaxError, "cannot write whole array '" + t.name + "'");
        return;
      case TargetKind::ArrayElem:
        if (d.type != VarType::Array)
          throw OeError(ErrKind::SyntaxError, "'" + t.name + "' is not an array");
        checkExpr(t.index, false);
        return;
      case TargetKind::Deref: {
        int maxDepth = d.type == VarType::Ptr ? 1 : d.type == VarType::PtrPtr ? 2 : 0;
        if (t.depth > maxDepth)
          throw OeError(ErrKind::SyntaxError,
                        "'" + t.name + "' does not support " + std::to_string(t.depth) +
                            "-level indirection");
        return;
      }
    }
  }

  void checkTerm(const Term& t) const {
    std::map<std::string, std::pair<int, int>> groups; // token -> (total, unguarded)
    for (const auto& w : t.writes) {
      checkTarget(w.target);
      checkPayload(w.payload);
      if (w.guard) checkBool(w.guard);
      auto& g = groups[w.target.token()];
      ++g.first;
      if (!w.guard) ++g.second;
    }
    for (const auto& [token, g] : groups) {
      if (g.first >= 2 && g.second > 0)
        throw OeError(ErrKind::DuplicateUnguardedTarget,
                      "variable '" + token + "' written more than once without exclusive guards");
    }
  }

  void checkNode(const NodePtr& n) const {
    switch (n->kind) {
      case NodeKind::Skip:
        return;
      case NodeKind::TermNode:
        checkTerm(n->term);
        return;
      case NodeKind::Seq:
        for (const auto& c : n->seq) checkNode(c);
        return;
      case NodeKind::Guarded:
        checkBool(n->guard);
        checkNode(n->body);
        return;
      case NodeKind::LoopCount:
        if (n->countIsName) require(n->countName);
        checkNode(n->body);
        return;
      case NodeKind::LoopUntil:
        checkBool(n->until.cond);
        checkNode(n->body);
        return;
      case NodeKind::WaitLoop:
        checkBool(n->until.cond);
        return;
      case NodeKind::Par:
        checkNode(n->left);
        checkNode(n->right);
        return;
      case NodeKind::Call:
        for (const auto& a : n->callArgs) checkExpr(a, true);
        return;
    }
  }
};

} // namespace

Program parse(const std::string& text) {
  Parser parser(text, false);
  Program p = parser.parseProgram();
  Validator v(p);
  v.checkNode(p.body);
  return p;
}

MathPtr parseMathExpr(const std::string& text, bool allowMarkers) {
  Parser parser(text, allowMarkers);
  MathPtr e = parser.parseArith();
  if (parser.peek().kind != Tok::End) parser.fail("end of expression");
  return e;
}

BoolPtr parseBoolExpr(const std::string& text, bool allowMarkers) {
  Parser parser(text, allowMarkers);
  BoolPtr b = parser.parseBor();
  if (parser.peek().kind != Tok::End) parser.fail("end of expression");
  return b;
}

// -- pretty printer -----------------------------------------------------------------

namespace {

std::string ppTarget(const Target& t) {
  switch (t.kind) {
    case TargetKind::Var: return t.name;
    case TargetKind::ArrayElem:
      return t.name + "[" + renderMath(t.index, RenderMode::ProgramText) + "]";
    case TargetKind::Deref: return std::string(static_cast<size_t>(t.depth), '*') + t.name;
  }
  return t.name;
}

std::string ppTerm(const Term& t) {
  std::string s;
  for (size_t i = 0; i < t.writes.size(); ++i) {
    const WriteOp& w = t.writes[i];
    if (i) s += ", ";
    s += ppTarget(w.target) + "!(" + renderMath(w.payload, RenderMode::ProgramText) + ")";
    if (w.guard) s += "[" + renderBool(w.guard, RenderMode::ProgramText) + "]";
  }
  return s;
}

std::string ppSeqLevel(const NodePtr& n);

std::string ppItem(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::Skip:
      return "skip";
    case NodeKind::TermNode:
      return ppTerm(n->term);
    case NodeKind::Seq:
      return "(" + ppSeqLevel(n) + ")";
    case NodeKind::Guarded:
      return "(" + ppSeqLevel(n->body) + ")[" + renderBool(n->guard, RenderMode::ProgramText) + "]";
    case NodeKind::LoopCount:
      return "(" + ppSeqLevel(n->body) + ")^" + (n->countIsName ? n->countName : n->count.str());
    case NodeKind::LoopUntil:
      return "(" + ppSeqLevel(n->body) + ")^{until " +
             renderBool(n->until.cond, RenderMode::ProgramText) + "}";
    case NodeKind::WaitLoop:
      return "skip^{until " + renderBool(n->until.cond, RenderMode::ProgramText) + "}";
    case NodeKind::Par:
      return "(" + ppSeqLevel(n->left) + " || " + ppSeqLevel(n->right) + ")";
    case NodeKind::Call: {
      std::string s = "call " + n->fname + "(";
      for (size_t i = 0; i < n->callArgs.size(); ++i) {
        if (i) s += ", ";
        s += renderMath(n->callArgs[i], RenderMode::ProgramText);
      }
      return s + ")";
    }
  }
  return "";
}

std::string ppSeqLevel(const NodePtr& n) {
  if (n->kind != NodeKind::Seq) return ppItem(n);
  std::string s;
  for (size_t i = 0; i < n->seq.size(); ++i) {
    if (i) s += "; ";
    s += ppItem(n->seq[i]);
  }
  return s;
}

} // namespace

std::string prettyPrintNode(const NodePtr& n) { return ppSeqLevel(n); }

std::string prettyPrint(const Program& p) {
  std::string s;
  for (const auto& d : p.decls) {
    s += "var " + d.name + ": ";
    switch (d.type) {
      case VarType::Int: s += "int"; break;
      case VarType::Ptr: s += "ptr int"; break;
      case VarType::PtrPtr: s += "ptr ptr int"; break;
      case VarType::Array: s += "int[" + std::to_string(d.arraySize) + "]"; break;
    }
    s += ";\n";
  }
  s += ppSeqLevel(p.body) + "\n";
  return s;
}

// -- scans ------------------------------------------------------------------------------

static void written(const NodePtr& n, std::set<std::string>& out) {
  switch (n->kind) {
    case NodeKind::Skip:
    case NodeKind::WaitLoop:
    case NodeKind::Call:
      return;
    case NodeKind::TermNode:
      for (const auto& w : n->term.writes) {
        if (w.target.kind == TargetKind::Deref)
          out.insert(w.target.token());
        else
          out.insert(w.target.name);
      }
      return;
    case NodeKind::Seq:
      for (const auto& c : n->seq) written(c, out);
      return;
    case NodeKind::Guarded:
    case NodeKind::LoopCount:
    case NodeKind::LoopUntil:
      written(n->body, out);
      return;
    case NodeKind::Par:
      written(n->left, out);
      written(n->right, out);
      return;
  }
}

std::set<std::string> writtenVars(const NodePtr& n) {
  std::set<std::string> out;
  written(n, out);
  return out;
}

namespace {

void readTokensExpr(const MathPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case MathKind::IntConst:
    case MathKind::Psi:
    case MathKind::AddressOf:
      return;
    case MathKind::Var:
      out.insert(e->name);
      return;
    case MathKind::Deref:
      if (e->a->kind == MathKind::Var) {
        out.insert(e->a->name);
        out.insert(std::string(static_cast<size_t>(e->depth), '*') + e->a->name);
      } else {
        readTokensExpr(e->a, out);
      }
      return;
    case MathKind::Neg:
      readTokensExpr(e->a, out);
      return;
    case MathKind::BinOp:
      readTokensExpr(e->a, out);
      readTokensExpr(e->b, out);
      return;
    case MathKind::Apply:
      for (const auto& a : e->args) readTokensExpr(a, out);
      return;
    case MathKind::IndexedRead:
      out.insert(e->name);
      readTokensExpr(e->a, out);
      return;
  }
}

void readTokensBool(const BoolPtr& b, std::set<std::string>& out) {
  switch (b->kind) {
    case BoolKind::True:
    case BoolKind::False:
      return;
    case BoolKind::Cmp:
      readTokensExpr(b->lhs, out);
      readTokensExpr(b->rhs, out);
      return;
    case BoolKind::Not:
      readTokensBool(b->x, out);
      return;
    case BoolKind::And:
    case BoolKind::Or:
      readTokensBool(b->x, out);
      readTokensBool(b->y, out);
      return;
    case BoolKind::Pred:
      for (const auto& a : b->args) readTokensExpr(a, out);
      return;
  }
}

void reads(const NodePtr& n, std::set<std::string>& out) {
  switch (n->kind) {
    case NodeKind::Skip:
      return;
    case NodeKind::TermNode:
      for (const auto& w : n->term.writes) {
        readTokensExpr(w.payload, out);
        if (w.guard) readTokensBool(w.guard, out);
        if (w.target.kind == TargetKind::ArrayElem) readTokensExpr(w.target.index, out);
        if (w.target.kind == TargetKind::Deref) out.insert(w.target.name);
      }
      return;
    case NodeKind::Seq:
      for (const auto& c : n->seq) reads(c, out);
      return;
    case NodeKind::Guarded:
      readTokensBool(n->guard, out);
      reads(n->body, out);
      return;
    case NodeKind::LoopCount:
      if (n->countIsName) out.insert(n->countName);
      reads(n->body, out);
      return;
    case NodeKind::LoopUntil:
      readTokensBool(n->until.cond, out);
      reads(n->body, out);
      return;
    case NodeKind::WaitLoop:
      readTokensBool(n->until.cond, out);
      return;
    case NodeKind::Par:
      reads(n->left, out);
      reads(n->right, out);
      return;
    case NodeKind::Call:
      for (const auto& a : n->callArgs) readTokensExpr(a, out);
      return;
  }
}

} // namespace

std::set<std::string> readVars(const NodePtr& n) {
  std::set<std::string> out;
  reads(n, out);
  return out;
}

// -- structural equality -----------------------------------------------------------

static bool equalTarget(const Target& a, const Target& b) {
  if (a.kind != b.kind || a.name != b.name || a.depth != b.depth) return false;
  if (a.kind == TargetKind::ArrayElem) return equalMath(a.index, b.index);
  return true;
}

static bool equalTerm(const Term& a, const Term& b) {
  if (a.writes.size() != b.writes.size()) return false;
  for (size_t i = 0; i < a.writes.size(); ++i) {
    const WriteOp& x = a.writes[i];
    const WriteOp& y = b.writes[i];
    if (!equalTarget(x.target, y.target)) return false;
    if (!equalMath(x.payload, y.payload)) return false;
    if (static_cast<bool>(x.guard) != static_cast<bool>(y.guard)) return false;
    if (x.guard && !equalBool(x.guard, y.guard)) return false;
  }
  return true;
}

bool equalNode(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Skip:
      return true;
    case NodeKind::TermNode:
      return equalTerm(a->term, b->term);
    case NodeKind::Seq:
      if (a->seq.size() != b->seq.size()) return false;
      for (size_t i = 0; i < a->seq.size(); ++i)
        if (!equalNode(a->seq[i], b->seq[i])) return false;
      return true;
    case NodeKind::Guarded:
      return equalBool(a->guard, b->guard) && equalNode(a->body, b->body);
    case NodeKind::LoopCount:
      if (a->countIsName != b->countIsName) return false;
      if (a->countIsName) return a->countName == b->countName && equalNode(a->body, b->body);
      return a->count == b->count && equalNode(a->body, b->body);
    case NodeKind::LoopUntil:
      return equalBool(a->until.cond, b->until.cond) && a->until.type2 == b->until.type2 &&
             equalNode(a->body, b->body);
    case NodeKind::WaitLoop:
      return equalBool(a->until.cond, b->until.cond);
    case NodeKind::Par:
      return equalNode(a->left, b->left) && equalNode(a->right, b->right);
    case NodeKind::Call:
      if (a->fname != b->fname || a->callArgs.size() != b->callArgs.size()) return false;
      for (size_t i = 0; i < a->callArgs.size(); ++i)
        if (!equalMath(a->callArgs[i], b->callArgs[i])) return false;
      return true;
  }
  return false;
}

bool equalProgram(const Program& a, const Program& b) {
  if (a.decls.size() != b.decls.size()) return false;
  for (size_t i = 0; i < a.decls.size(); ++i) {
    const Decl& x = a.decls[i];
    const Decl& y = b.decls[i];
    if (x.name != y.name || x.type != y.type || x.arraySize != y.arraySize) return false;
  }
  return equalNode(a.body, b.body);
}

} // namespace oe
