#include <doctest.h>

#include "oe/calculus.hpp"
#include "oe/interp.hpp"
#include "oe/semantics.hpp"
#include "oe/syntax.hpp"

using namespace oe;

namespace {

Universe uni(std::initializer_list<std::string> names) {
  return Universe::ofNames(std::set<std::string>(names));
}

// first term of a parsed one-liner
const Term& termOf(const Program& p) {
  REQUIRE(p.body->kind == NodeKind::TermNode);
  return p.body->term;
}

MathPtr initRef(const std::string& n) { return mVar(n, Marker::Initial); }

} // namespace

TEST_CASE("skip semantics is the identity predicate") {
  Universe u = uni({"x"});
  Csp c = skipSem(u);
  REQUIRE(c.branches.size() == 1);
  CHECK(c.branches[0].guard->kind == BoolKind::True);
  CHECK(equalMath(c.branches[0].sp.finalEqs.at({"x", std::nullopt}), initRef("x")));
}

TEST_CASE("a guard chain expands to its arms plus the else case") {
  Program p = parse("var x: int; var y: int; x!(1)[y > 0], x!(0)[y = 0], x!(-1)[y < 0]");
  Universe u = Universe::ofProgram(p);
  Csp c = termSem(termOf(p), u);
  REQUIRE(c.branches.size() == 4);
  CHECK(renderBool(c.branches[0].guard, RenderMode::Predicate) == "y > 0");
  CHECK(renderBool(c.branches[3].guard, RenderMode::Predicate) == "!(y > 0 || y = 0 || y < 0)");
  CHECK(equalMath(c.branches[0].sp.finalEqs.at({"x", std::nullopt}), mInt(1)));
  CHECK(equalMath(c.branches[3].sp.finalEqs.at({"x", std::nullopt}), initRef("x")));
  // every branch fixes y to itself
  for (const auto& br : c.branches)
    CHECK(equalMath(br.sp.finalEqs.at({"y", std::nullopt}), initRef("y")));

  SUBCASE("interpreter agrees on stores around the split points") {
    for (long long yv : {-2, 0, 3}) {
      Store s0;
      s0.vals["x"] = Value::ofInt(BigInt(9));
      s0.vals["y"] = Value::ofInt(BigInt(yv));
      RunResult rr = run(p, s0);
      int trueCount = 0;
      for (const auto& br : c.branches) {
        EvalCtx ctx{&s0, nullptr, nullptr};
        if (!evaluate(br.guard, ctx)) continue;
        ++trueCount;
        EvalCtx ectx{&s0, &rr.final_, nullptr};
        CHECK(evaluate(br.sp.finalEqs.at({"x", std::nullopt}), ectx) == rr.final_.vals.at("x"));
      }
      CHECK(trueCount == 1);
    }
  }
}

TEST_CASE("a simultaneous term writes both variables in one branch") {
  Program p = parse("var x: int; var y: int; x!(2), y!(1)");
  Csp c = termSem(termOf(p), Universe::ofProgram(p));
  REQUIRE(c.branches.size() == 1);
  CHECK(equalMath(c.branches[0].sp.finalEqs.at({"x", std::nullopt}), mInt(2)));
  CHECK(equalMath(c.branches[0].sp.finalEqs.at({"y", std::nullopt}), mInt(1)));
}

TEST_CASE("completion") {
  Universe u = uni({"x", "y"});
  SemPredicate sp;
  sp.finalEqs[{"x", std::nullopt}] = mInt(1);
  sp.writes.insert("x");
  SemPredicate c = complete(sp, u);
  CHECK(equalMath(c.finalEqs.at({"y", std::nullopt}), initRef("y")));
  SUBCASE("idempotent") {
    SemPredicate cc = complete(c, u);
    CHECK(cc.finalEqs.size() == c.finalEqs.size());
    CHECK(equalMath(cc.finalEqs.at({"x", std::nullopt}), mInt(1)));
  }
  SUBCASE("empty over V is the full identity") {
    SemPredicate id = complete(SemPredicate{}, uni({"x"}));
    CHECK(equalMath(id.finalEqs.at({"x", std::nullopt}), initRef("x")));
  }
}

TEST_CASE("completeCsp completes every branch and leaves guards alone") {
  Universe u = uni({"x", "y"});
  Csp c;
  SemPredicate a;
  a.finalEqs[{"x", std::nullopt}] = mInt(1);
  SemPredicate b;
  b.finalEqs[{"y", std::nullopt}] = mInt(2);
  c.branches.push_back({parseBoolExpr("x > 0", false), a});
  c.branches.push_back({parseBoolExpr("x <= 0", false), b});
  Csp done = completeCsp(c, u);
  for (const auto& br : done.branches) CHECK(br.sp.finalEqs.size() == 2);
  CHECK(renderBool(done.branches[0].guard, RenderMode::Predicate) == "x > 0");
}

TEST_CASE("exclusivity sampling") {
  SUBCASE("the sign guards are disjoint") {
    Program p = parse("var x: int; var y: int; x!(1)[y > 0], x!(0)[y = 0], x!(-1)[y < 0]");
    Csp c = termSem(termOf(p), Universe::ofProgram(p));
    CHECK(checkExclusivity(c, 100, 42).empty());
  }
  SUBCASE("overlapping guards produce a witness within 100 samples") {
    Program p = parse("var x: int; x!(1)[x > 0], x!(2)[x > 1]");
    Csp c = termSem(termOf(p), Universe::ofProgram(p));
    std::vector<Diagnostic> ds = checkExclusivity(c, 100, 42);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].kind == DiagKind::GuardOverlap);
    CHECK(ds[0].message.find("x") != std::string::npos);
  }
  SUBCASE("a single true branch cannot overlap") {
    CHECK(checkExclusivity(identityCsp(uni({"x"})), 50, 1).empty());
  }
}

TEST_CASE("syntactically identical guards are rejected eagerly") {
  Program p = parse("var x: int; var y: int; x!(1)[y > 0], x!(2)[y > 0]");
  CHECK_THROWS_AS(termSem(termOf(p), Universe::ofProgram(p)), OeError);
}

TEST_CASE("the branch budget caps guard-chain cross products") {
  // five variables, each a 3-arm chain plus else: 4^5 = 1024 > 256
  std::string src = "var a: int; var b: int; var c: int; var d: int; var e: int; var t: int; ";
  std::string term;
  for (const char* v : {"a", "b", "c", "d", "e"}) {
    if (!term.empty()) term += ", ";
    std::string n(v);
    term += n + "!(1)[t > 0], " + n + "!(2)[t = 0], " + n + "!(3)[t < 0]";
  }
  Program p = parse(src + term);
  CHECK_THROWS_AS(termSem(termOf(p), Universe::ofProgram(p)), OeError);
}

TEST_CASE("simultaneous composition commutes for disjoint targets") {
  Rng rng(99);
  static const char* names[] = {"x", "y", "z", "w"};
  for (int i = 0; i < 1000; ++i) {
    // two disjoint single-write terms, possibly guarded
    int a = static_cast<int>(rng.range(0, 3));
    int b = static_cast<int>(rng.range(0, 3));
    if (a == b) b = (b + 1) % 4;
    auto mkwrite = [&](const char* v) {
      std::string n(v);
      std::string w = n + "!(" + names[rng.range(0, 3)] + " + " +
                      std::to_string(rng.range(-5, 5)) + ")";
      if (rng.range(0, 1)) w += "[" + n + " > " + std::to_string(rng.range(-3, 3)) + "]";
      return w;
    };
    std::string decls = "var x: int; var y: int; var z: int; var w: int; ";
    std::string wa = mkwrite(names[a]);
    std::string wb = mkwrite(names[b]);
    Program pq = parse(decls + wa + ", " + wb);
    Program qp = parse(decls + wb + ", " + wa);
    Universe u = Universe::ofProgram(pq);
    Csp cab = termSem(termOf(pq), u);
    Csp cba = termSem(termOf(qp), u);
    REQUIRE(cspEquiv(cab, cba, u, 12, 1000 + static_cast<uint64_t>(i)));
  }
}

TEST_CASE("axiom-generated guards are exhaustive") {
  // the disjunction of branch guards holds at every sampled store
  Rng rng(1212);
  static const char* names[] = {"x", "y"};
  for (int i = 0; i < 1000; ++i) {
    std::string term;
    int writes = static_cast<int>(rng.range(1, 2));
    std::vector<int> used;
    for (int w = 0; w < writes; ++w) {
      int v = static_cast<int>(rng.range(0, 1));
      if (std::count(used.begin(), used.end(), v)) continue;
      used.push_back(v);
      if (!term.empty()) term += ", ";
      std::string n = names[v];
      int arms = static_cast<int>(rng.range(0, 2));
      if (arms == 0) {
        term += n + "!(1)";
      } else {
        term += n + "!(1)[" + names[rng.range(0, 1)] + " > " + std::to_string(rng.range(-5, 5)) +
                "]";
        if (arms == 2)
          term += ", " + n + "!(2)[" + names[rng.range(0, 1)] + " < " +
                  std::to_string(rng.range(-15, -6)) + "]";
      }
    }
    Program p = parse("var x: int; var y: int; " + term);
    Csp c = termSem(p.body->term, Universe::ofProgram(p));
    for (int s = 0; s < 10; ++s) {
      Store st;
      st.vals["x"] = Value::ofInt(BigInt(rng.range(-100, 100)));
      st.vals["y"] = Value::ofInt(BigInt(rng.range(-100, 100)));
      EvalCtx ctx{&st, nullptr, nullptr};
      bool any = false;
      for (const auto& br : c.branches) any = any || evaluate(br.guard, ctx);
      REQUIRE(any);
    }
  }
}

TEST_CASE("renderCsp formats branches with when and (+)") {
  Program p = parse("var x: int; var y: int; (x!(y); y!(x))[x > y]");
  SemResult r = programSem(p);
  // cross-write sequence: x'=y, y'=x under x>y, identity otherwise
  CHECK(renderCsp(r.csp) ==
        "x' = y & y' = y when x > y (+) x' = x & y' = y when !(x > y)");
}
