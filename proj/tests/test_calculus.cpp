#include <doctest.h>

#include "oe/calculus.hpp"
#include "oe/funcsem.hpp"
#include "oe/interp.hpp"
#include "oracle_helpers.hpp"

using namespace oe;

namespace {

Program declsXY() { return parse("var x: int; var y: int; skip"); }

Csp semOfTerm(const Program& ctx, const std::string& termSrc) {
  Program p = parse(prettyPrint(ctx).substr(0, prettyPrint(ctx).rfind("skip")) + termSrc);
  return nodeSem(p.body, p).csp;
}

// fuzzed guarded/unguarded term CSPs over x, y for the law suites
Csp fuzzCsp(Rng& rng, const Program& p, const Universe& u) {
  static const char* vars[] = {"x", "y"};
  std::string src;
  int writes = static_cast<int>(rng.range(1, 2));
  std::vector<int> used;
  for (int i = 0; i < writes; ++i) {
    int v = static_cast<int>(rng.range(0, 1));
    if (std::count(used.begin(), used.end(), v)) continue;
    used.push_back(v);
    if (!src.empty()) src += ", ";
    std::string n = vars[v];
    src += n + "!(" + vars[rng.range(0, 1)] + " + " + std::to_string(rng.range(-4, 4)) + ")";
    if (rng.range(0, 1)) src += "[" + n + " > " + std::to_string(rng.range(-3, 3)) + "]";
  }
  Program q = parse("var x: int; var y: int; " + src);
  return completeCsp(termSem(q.body->term, u), u);
}

std::string sem(const std::string& src, ReduceStrategy strategy = ReduceStrategy::LeftFold) {
  SemOptions o;
  o.strategy = strategy;
  return renderCsp(programSem(parse(src), o).csp);
}

} // namespace

TEST_CASE("relay composes two writes by substitution") {
  Program p = declsXY();
  Universe u = Universe::ofProgram(p);
  Csp first = semOfTerm(p, "x!(x+y)");
  Csp second = semOfTerm(p, "y!(x-y)");
  Csp c = relay(first, second, u);
  REQUIRE(c.branches.size() == 1);
  CHECK(equalMath(c.branches[0].sp.finalEqs.at({"x", std::nullopt}),
                  normalize(parseMathExpr("~x + ~y", true))));
  CHECK(equalMath(c.branches[0].sp.finalEqs.at({"y", std::nullopt}), mVar("x", Marker::Initial)));
}

TEST_CASE("the identity CSP is a unit on both sides of relay") {
  Program p = declsXY();
  Universe u = Universe::ofProgram(p);
  Rng rng(31337);
  for (int i = 0; i < 1000; ++i) {
    Csp c = fuzzCsp(rng, p, u);
    Csp l = relay(identityCsp(u), c, u);
    Csp r = relay(c, identityCsp(u), u);
    REQUIRE(cspEquiv(l, c, u, 8, 50 + static_cast<uint64_t>(i)));
    REQUIRE(cspEquiv(r, c, u, 8, 90 + static_cast<uint64_t>(i)));
  }
}

TEST_CASE("reduce flattens the swap formula") {
  CHECK(sem("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)") == "x' = y & y' = x");
}

TEST_CASE("guarded swap keeps the identity else-branch") {
  CHECK(sem("var x: int; var y: int; (x!(x+y); y!(x-y); x!(x-y))[x > y]") ==
        "x' = y & y' = x when x > y (+) x' = x & y' = y when !(x > y)");
}

TEST_CASE("a constant prefix folds the guard and prunes the dead branch") {
  CHECK(sem("var x: int; var y: int; x!(2), y!(1); (x!(x+y); y!(x-y); x!(x-y))[x > y]") ==
        "x' = 1 & y' = 2");
}

TEST_CASE("single-step formulas reduce to themselves") {
  Program p = declsXY();
  Universe u = Universe::ofProgram(p);
  Csp c = semOfTerm(p, "x!(x+y)");
  auto [r, trace] = reduce({c}, u);
  CHECK(cspEquiv(r, completeCsp(c, u), u, 16, 5));
}

TEST_CASE("leftFold and pairwiseTree reductions agree") {
  SUBCASE("on the swap chain") {
    CHECK(sem("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)",
              ReduceStrategy::PairwiseTree) == "x' = y & y' = x");
  }
  SUBCASE("on 1000 fuzzed three-step formulas") {
    Program p = declsXY();
    Universe u = Universe::ofProgram(p);
    Rng rng(777);
    SemOptions fold;
    SemOptions tree;
    tree.strategy = ReduceStrategy::PairwiseTree;
    for (int i = 0; i < 1000; ++i) {
      SemFormula f{fuzzCsp(rng, p, u), fuzzCsp(rng, p, u), fuzzCsp(rng, p, u)};
      Csp a = reduce(f, u, fold).first;
      Csp b = reduce(f, u, tree).first;
      REQUIRE(cspEquiv(a, b, u, 10, 4000 + static_cast<uint64_t>(i)));
    }
  }
}

TEST_CASE("nested guards collapse to their conjunction") {
  std::string once = sem("var x: int; var y: int; (x!(5))[x > 0 && y > 0]");
  std::string twice = sem("var x: int; var y: int; ((x!(5))[x > 0])[y > 0]");
  CHECK(once == twice);

  Program p = declsXY();
  Universe u = Universe::ofProgram(p);
  Rng rng(8383);
  for (int i = 0; i < 1000; ++i) {
    long long a = rng.range(-3, 3), b = rng.range(-3, 3);
    std::string decls = "var x: int; var y: int; ";
    std::string body = "x!(y + " + std::to_string(rng.range(-4, 4)) + ")";
    std::string g1 = "x > " + std::to_string(a);
    std::string g2 = "y < " + std::to_string(b);
    Csp nested = programSem(parse(decls + "((" + body + ")[" + g1 + "])[" + g2 + "]")).csp;
    Csp flat = programSem(parse(decls + "(" + body + ")[" + g1 + " && " + g2 + "]")).csp;
    REQUIRE(cspEquiv(nested, flat, u, 10, 7000 + static_cast<uint64_t>(i)));
  }
}

TEST_CASE("independent parallel composition is conjunction") {
  CHECK(sem("var x: int; var y: int; (x!(1) || y!(2))") == "x' = 1 & y' = 2");
  SUBCASE("interpreter agrees on both interleavings by construction") {
    Program p = parse("var x: int; var y: int; (x!(1) || y!(2))");
    Store s0;
    s0.vals["x"] = Value::ofInt(BigInt(7));
    s0.vals["y"] = Value::ofInt(BigInt(8));
    RunResult rr = run(p, s0);
    CHECK(rr.final_.vals.at("x").i == BigInt(1));
    CHECK(rr.final_.vals.at("y").i == BigInt(2));
  }
  SUBCASE("interfering branches are rejected") {
    CHECK_THROWS_AS(programSem(parse("var x: int; (x!(1) || x!(2))")), OeError);
    CHECK_THROWS_AS(programSem(parse("var x: int; var y: int; (x!(y) || y!(2))")), OeError);
  }
}

TEST_CASE("counted loops") {
  Program p = parse("var i: int; var j: int; i!(i+j); j!(i+j)");
  Universe u = Universe::ofProgram(p);
  Csp body = programSem(p).csp;

  SUBCASE("one iteration is the Fibonacci step") {
    Csp c = loopCountSem(body, 1, u);
    REQUIRE(c.branches.size() == 1);
    CHECK(equalMath(c.branches[0].sp.finalEqs.at({"i", std::nullopt}),
                    normalize(parseMathExpr("~i + ~j", true))));
    CHECK(equalMath(c.branches[0].sp.finalEqs.at({"j", std::nullopt}),
                    normalize(parseMathExpr("~i + 2*~j", true))));
  }
  SUBCASE("zero iterations is the identity") {
    Csp c = loopCountSem(body, 0, u);
    CHECK(cspEquiv(c, identityCsp(u), u, 16, 3));
  }
  SUBCASE("two iterations compose the step with itself") {
    Csp c = loopCountSem(body, 2, u);
    CHECK(equalMath(c.branches[0].sp.finalEqs.at({"i", std::nullopt}),
                    normalize(parseMathExpr("2*~i + 3*~j", true))));
    CHECK(equalMath(c.branches[0].sp.finalEqs.at({"j", std::nullopt}),
                    normalize(parseMathExpr("3*~i + 5*~j", true))));
  }
  SUBCASE("m+n iterations split at any point") {
    Rng rng(606);
    Program q = declsXY();
    Universe uq = Universe::ofProgram(q);
    for (int rep = 0; rep < 200; ++rep) {
      Csp b = fuzzCsp(rng, q, uq);
      for (int m = 0; m <= 4; ++m)
        for (int n = 0; n <= 4 - m; ++n) {
          Csp whole = loopCountSem(b, m + n, uq);
          Csp split = relay(loopCountSem(b, m, uq), loopCountSem(b, n, uq), uq);
          REQUIRE(cspEquiv(whole, split, uq, 6,
                           9000 + static_cast<uint64_t>(rep * 25 + m * 5 + n)));
        }
    }
  }
  SUBCASE("counted powers of the body track the iterative Fibonacci pair") {
    for (int n = 0; n <= 10; ++n) {
      Csp c = loopCountSem(body, n, u);
      Store s0;
      s0.vals["i"] = Value::ofInt(BigInt(0));
      s0.vals["j"] = Value::ofInt(BigInt(1));
      EvalCtx ctx{&s0, nullptr, nullptr};
      auto [oi, oj] = oracle::fibLoop(n, BigInt(0), BigInt(1));
      CHECK(evaluate(c.branches[0].sp.finalEqs.at({"i", std::nullopt}), ctx).i == oi);
      CHECK(evaluate(c.branches[0].sp.finalEqs.at({"j", std::nullopt}), ctx).i == oj);
    }
  }
}

TEST_CASE("until-loops unroll against their prefix") {
  SUBCASE("a constant prefix closes the counter loop") {
    CHECK(sem("var x: int; x!(0); (x!(x+1))^{until x' = 3}") == "x' = 3");
  }
  SUBCASE("a type-1 condition that already holds exits immediately") {
    Program p = parse("var x: int; (x!(x+1))^{until x' + 1 = x' + 1}");
    SemResult r = programSem(p);
    CHECK_FALSE(r.partial);
    CHECK(renderCsp(r.csp) == "x' = x");
  }
  SUBCASE("an opaque iteration stays partial") {
    Program p = parse(
        "var x: int; var a: int; var delta: int;"
        "x!(a); (x!(g(x)))^{until abs(x' - ~x) <= delta}");
    SemOptions o;
    o.unrollCap = 8;
    SemResult r = programSem(p, o);
    CHECK(r.partial);
    bool hasDivergence = false;
    for (const auto& d : r.csp.diagnostics) hasDivergence |= d.kind == DiagKind::Divergence;
    CHECK(hasDivergence);
  }
  SUBCASE("the never-true Fibonacci condition diverges") {
    Program p = parse("var i: int; var j: int; i!(0), j!(1); (i!(i+j); j!(i+j))^{until i' = j'}");
    SemOptions o;
    o.unrollCap = 16;
    SemResult r = programSem(p, o);
    CHECK(r.partial);
  }
}

TEST_CASE("wait loops keep the condition as a residual") {
  Program p = parse("var b: int; skip^{until b' = 1}");
  Universe u = Universe::ofProgram(p);
  Csp c = waitLoopSem(p.body->until, u);
  REQUIRE(c.branches.size() == 1);
  REQUIRE(c.branches[0].sp.residuals.size() == 1);
  CHECK(renderBool(c.branches[0].sp.residuals[0], RenderMode::Predicate) == "b = 1");
  SUBCASE("an immediately true wait is a plain identity") {
    Program q = parse("var b: int; skip^{until b' + 1 = b' + 1}");
    Csp cq = waitLoopSem(q.body->until, Universe::ofProgram(q));
    CHECK(cq.branches[0].sp.residuals.empty());
    CHECK(cq.diagnostics.empty());
  }
}

TEST_CASE("invariant mode") {
  Program p = parse(
      "var A: int[5]; var m: int; var i: int;"
      "m!(A[0]), i!(1); (m!(A[i])[A[i] > m], i!(i+1))^{until !(i' < 5)}");
  REQUIRE(p.body->kind == NodeKind::Seq);
  NodePtr loop = p.body->seq[1];

  SUBCASE("the max-of-array invariant yields the closed-form residual") {
    LoopSpec spec;
    spec.invariant = parseBoolExpr("m' = maxr(A, 0, i'-1) && 1 <= i' && i' <= 5", true);
    spec.termination = parseBoolExpr("i' = 5", true);
    Csp c = loopInvariantSem(loop, p, spec, 300, 9);
    REQUIRE(c.branches.size() == 1);
    std::string residuals;
    for (const auto& r : c.branches[0].sp.residuals)
      residuals += renderBool(r, RenderMode::Predicate) + "; ";
    CHECK(residuals == "m' = maxr(A, 0, 4); i' = 5; ");
    bool flagged = false;
    for (const auto& d : c.diagnostics) flagged |= d.kind == DiagKind::AssumedTermination;
    CHECK(flagged);
  }
  SUBCASE("a vacuous invariant is accepted with an empty residual") {
    LoopSpec spec;
    spec.invariant = bTrue();
    spec.termination = bTrue();
    Csp c = loopInvariantSem(loop, p, spec, 50, 9);
    CHECK(c.branches[0].sp.residuals.empty());
  }
  SUBCASE("a false invariant is rejected with a witness") {
    Program fib = parse("var i: int; var j: int; i!(0), j!(1); (i!(i+j); j!(i+j))^{until i' = j'}");
    LoopSpec spec;
    spec.invariant = parseBoolExpr("i' = i", true);
    spec.termination = bTrue();
    try {
      loopInvariantSem(fib.body->seq[1], fib, spec, 200, 77);
      FAIL("expected InvariantViolated");
    } catch (const OeError& e) {
      CHECK(e.kind == ErrKind::InvariantViolated);
      CHECK(std::string(e.what()).find("witness") != std::string::npos);
    }
  }
  SUBCASE("invariants over unwritten variables are rejected") {
    LoopSpec spec;
    spec.invariant = parseBoolExpr("q' = 1", true);
    spec.termination = bTrue();
    CHECK_THROWS_AS(loopInvariantSem(loop, p, spec, 10, 1), OeError);
  }
}

TEST_CASE("symbolic loop counts need an invariant") {
  Program p = parse("var x: int; var N: int; (x!(x+1))^N");
  CHECK_THROWS_AS(programSem(p), OeError);
}

TEST_CASE("marker discipline after reduction") {
  FuzzOptions fo;
  fo.count = 300;
  fo.depth = 2;
  fo.seed = 5150;
  for (const Program& p : fuzzPrograms(fo)) {
    SemResult r = programSem(p);
    for (const auto& br : r.csp.branches) {
      REQUIRE_FALSE(containsMarker(br.guard, Marker::Final));
      for (const auto& [slot, e] : br.sp.finalEqs) {
        REQUIRE_FALSE(containsMarker(e, Marker::Final));
        REQUIRE_FALSE(containsMarker(e, Marker::Current));
      }
    }
  }
}

TEST_CASE("traces replay to the final result") {
  Program p = parse("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)");
  SemOptions o;
  o.trace = true;
  SemResult r = programSem(p, o);
  REQUIRE_FALSE(r.trace.steps.empty());
  const TraceStep& last = r.trace.steps.back();
  REQUIRE(last.after.size() == 1);
  CHECK(renderCsp(last.after[0]) == renderCsp(r.csp));
  // each relay step recomputes
  Universe u = Universe::ofProgram(p);
  for (const auto& step : r.trace.steps) {
    if (step.rule != "relay" || step.before.size() != 2) continue;
    Csp redo = relay(step.before[0], step.before[1], u);
    REQUIRE(step.after.size() == 1);
    CHECK(renderCsp(redo) == renderCsp(step.after[0]));
  }
  CHECK_FALSE(renderTrace(r.trace).empty());
}
