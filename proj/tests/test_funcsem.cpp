#include <doctest.h>

#include <fstream>

#include "oe/calculus.hpp"
#include "oe/funcsem.hpp"
#include "oe/interp.hpp"
#include "oracle_helpers.hpp"

using namespace oe;

namespace {

const char* kRegistry =
    "fn factorial(N) = 1 when N=1 (+) N*factorial(N-1) when N>1\n"
    "fn fibonacci(N) = 0 when N=0 (+) 1 when N=1 (+) fibonacci(N-1)+fibonacci(N-2) when N>=2\n"
    "fn sum(A) = sigma(A, 0, N-1)\n"
    "fn quicksort(A) residual \"perm(A',A) && sorted(A')\" writes {A}\n";

} // namespace

TEST_CASE("registry parsing") {
  Registry reg = Registry::parseString(kRegistry);
  const FunctionDef* fact = reg.find("factorial");
  REQUIRE(fact != nullptr);
  CHECK(fact->kind == FunctionDef::Kind::RecursiveValue);
  REQUIRE(fact->branches.size() == 2);
  CHECK(fact->isRecursive());

  const FunctionDef* qs = reg.find("quicksort");
  REQUIRE(qs != nullptr);
  CHECK(qs->kind == FunctionDef::Kind::SpliceSP);
  CHECK(qs->writes == std::set<std::string>{"A"});
  REQUIRE(qs->residuals.size() == 1);

  const FunctionDef* sum = reg.find("sum");
  REQUIRE(sum != nullptr);
  CHECK_FALSE(sum->isRecursive());

  SUBCASE("ill-founded recursion is rejected") {
    CHECK_THROWS_AS(Registry::parseString("fn bad(N) = bad(N) when N>0"), OeError);
    CHECK_THROWS_AS(Registry::parseString("fn worse(N) = worse(N+1) when N>0"), OeError);
  }
  SUBCASE("junk lines are rejected") {
    CHECK_THROWS_AS(Registry::parseString("fx nope(N) = 1"), OeError);
    CHECK_THROWS_AS(Registry::parseString("fn broken(N) residual no-quotes writes {N}"), OeError);
  }
}

TEST_CASE("recursive values unfold by exclusive-guard dispatch") {
  Registry reg = Registry::parseString(kRegistry);
  SUBCASE("factorial matches the iterative product") {
    CHECK(unfoldRecursive("factorial", BigInt(1), reg) == BigInt(1));
    CHECK(unfoldRecursive("factorial", BigInt(5), reg) == BigInt(120));
    for (int n = 1; n <= 20; ++n)
      CHECK(unfoldRecursive("factorial", BigInt(n), reg) == oracle::iterFactorial(n));
  }
  SUBCASE("fibonacci matches the two-register loop") {
    CHECK(unfoldRecursive("fibonacci", BigInt(10), reg) == BigInt(55));
    for (int n = 0; n <= 30; ++n)
      CHECK(unfoldRecursive("fibonacci", BigInt(n), reg) == oracle::iterFib(n));
  }
  SUBCASE("arguments outside all guards") {
    try {
      unfoldRecursive("factorial", BigInt(-1), reg);
      FAIL("expected NoBranchApplies");
    } catch (const OeError& e) {
      CHECK(e.kind == ErrKind::NoBranchApplies);
    }
  }
  SUBCASE("fuel bounds the unfolding") {
    try {
      unfoldRecursive("factorial", BigInt(100), reg, 10);
      FAIL("expected FuelExhausted");
    } catch (const OeError& e) {
      CHECK(e.kind == ErrKind::FuelExhausted);
    }
  }
  SUBCASE("registered definitions pass the exclusivity check") {
    CHECK(checkExclusivity(recursiveDefCsp(*reg.find("factorial")), 200, 3).empty());
    CHECK(checkExclusivity(recursiveDefCsp(*reg.find("fibonacci")), 200, 3).empty());
  }
}

TEST_CASE("splices") {
  Registry reg = Registry::parseString(kRegistry);
  SUBCASE("quicksort then take-last reduces to the relational maximum") {
    Program p = parse("var A: int[5]; var m: int; call quicksort(A); m!(A[4])");
    SemOptions o;
    o.registry = &reg;
    SemResult r = programSem(p, o);
    REQUIRE(r.csp.branches.size() == 1);
    const SemPredicate& sp = r.csp.branches[0].sp;
    CHECK(equalMath(sp.finalEqs.at({"m", std::nullopt}),
                    mIndex("A", mInt(4), Marker::Final)));
    REQUIRE(sp.residuals.size() == 1);
    CHECK(renderBool(sp.residuals[0], RenderMode::Predicate) == "perm(A', A) && sorted(A')");
    CHECK(sp.residualVars.count("A") == 1);
  }
  SUBCASE("writing a relationally constrained variable is unsupported") {
    Program p = parse("var A: int[5]; var m: int; call quicksort(A); A[0]!(1)");
    SemOptions o;
    o.registry = &reg;
    try {
      programSem(p, o);
      FAIL("expected RelationalRelayUnsupported");
    } catch (const OeError& e) {
      CHECK(e.kind == ErrKind::RelationalRelayUnsupported);
    }
  }
  SUBCASE("call-by-value reads substitute the registered template") {
    Program p = parse("var A: int[5]; var m: int; var N: int; m!(sum(A))");
    SemOptions o;
    o.registry = &reg;
    SemResult r = programSem(p, o);
    CHECK(renderMath(r.csp.branches[0].sp.finalEqs.at({"m", std::nullopt}),
                     RenderMode::Predicate) == "sigma(A, 0, -1 + N)");
  }
  SUBCASE("constant recursive calls lower to literals") {
    Program p = parse("var m: int; m!(factorial(5))");
    SemOptions o;
    o.registry = &reg;
    SemResult r = programSem(p, o);
    CHECK(equalMath(r.csp.branches[0].sp.finalEqs.at({"m", std::nullopt}), mInt(120)));
  }
  SUBCASE("an identity splice template changes nothing observable") {
    Registry reg2 = Registry::parseString("fn nop(x) residual \"x' = x\" writes {}\n");
    Program with = parse("var x: int; call nop(x); x!(x + 1)");
    Program without = parse("var x: int; x!(x + 1)");
    SemOptions o;
    o.registry = &reg2;
    Universe u = Universe::ofProgram(with);
    CHECK(cspEquiv(programSem(with, o).csp, programSem(without).csp, u, 32, 17));
  }
  SUBCASE("spliceCall appends one formula step") {
    Program p = parse("var A: int[5]; skip");
    Universe u = Universe::ofProgram(p);
    SemFormula f{identityCsp(u)};
    SemFormula g = spliceCall(f, "quicksort", {mVar("A")}, reg, u);
    CHECK(g.size() == 2);
    CHECK(g[1].branches[0].sp.residualVars.count("A") == 1);
  }
  SUBCASE("unknown functions and arity mismatches") {
    Program p = parse("var A: int[5]; skip");
    Universe u = Universe::ofProgram(p);
    CHECK_THROWS_AS(instantiateSplice("mystery", {mVar("A")}, reg, u), OeError);
    CHECK_THROWS_AS(instantiateSplice("quicksort", {}, reg, u), OeError);
  }
}

TEST_CASE("hanoi sequences") {
  SUBCASE("one disk moves straight to the goal pole") {
    std::vector<Move> s = hanoiSequence(1);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == Move{'A', 'C'});
  }
  SUBCASE("two disks expand by hand") {
    std::vector<Move> s = hanoiSequence(2);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == Move{'A', 'B'});
    CHECK(s[1] == Move{'A', 'C'});
    CHECK(s[2] == Move{'B', 'C'});
  }
  SUBCASE("four disks need fifteen moves") {
    CHECK(hanoiSequence(4).size() == 15);
  }
  SUBCASE("length is 2^N - 1 up to sixteen disks") {
    for (int n = 1; n <= 16; ++n)
      CHECK(hanoiSequence(n).size() == (1ull << n) - 1);
  }
  SUBCASE("twenty-one disks exceed the size limit") {
    CHECK_THROWS_AS(hanoiSequence(21), OeError);
  }
}

TEST_CASE("the closed form reproduces the recursion") {
  SUBCASE("the worked case: ten of fifteen") {
    CHECK(hanoiNthMove(4, 10) == Move{'B', 'A'});
  }
  SUBCASE("the base case") {
    CHECK(hanoiNthMove(1, 1) == Move{'A', 'C'});
  }
  SUBCASE("exhaustively for up to ten disks") {
    for (int n = 1; n <= 10; ++n) {
      std::vector<Move> seq = hanoiSequence(n);
      for (long long k = 1; k <= static_cast<long long>(seq.size()); ++k)
        REQUIRE(hanoiNthMove(n, k) == seq[static_cast<size_t>(k - 1)]);
    }
  }
  SUBCASE("out-of-range indices are rejected") {
    CHECK_THROWS_AS(hanoiNthMove(4, 0), OeError);
    CHECK_THROWS_AS(hanoiNthMove(4, 16), OeError);
  }
  SUBCASE("the parallel all-moves kernel equals the serial recursion") {
    CHECK(hanoiAllMoves(12, true) == hanoiSequence(12));
    CHECK(hanoiAllMoves(12, false) == hanoiSequence(12));
  }
}

TEST_CASE("recursive and loop Fibonacci formulations agree") {
  Registry reg = Registry::parseString(kRegistry);
  Program loopBody = parse("var i: int; var j: int; i!(i+j); j!(i+j)");
  Universe u = Universe::ofProgram(loopBody);
  Csp body = programSem(loopBody).csp;
  for (int n = 0; n <= 10; ++n) {
    Csp c = loopCountSem(body, n, u);
    Store s0;
    s0.vals["i"] = Value::ofInt(BigInt(0));
    s0.vals["j"] = Value::ofInt(BigInt(1));
    EvalCtx ctx{&s0, nullptr, nullptr};
    BigInt iAfter = evaluate(c.branches[0].sp.finalEqs.at({"i", std::nullopt}), ctx).i;
    // N loop iterations advance two Fibonacci indices at once
    CHECK(iAfter == unfoldRecursive("fibonacci", BigInt(2 * n), reg));
  }
}

TEST_CASE("the registry file in the corpus loads") {
  Registry reg = Registry::parseFile(std::string(CORPUS_DIR) + "/registry.fn");
  CHECK(reg.find("factorial"));
  CHECK(reg.find("fibonacci"));
  CHECK(reg.find("sum"));
  CHECK(reg.find("quicksort"));
  CHECK(reg.concreteImpl("quicksort") != nullptr);
}
