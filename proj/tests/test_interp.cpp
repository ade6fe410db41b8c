#include <doctest.h>

#include <functional>

#include "oe/calculus.hpp"
#include "oe/interp.hpp"

using namespace oe;

namespace {

Store mk(std::initializer_list<std::pair<std::string, long long>> vs) {
  Store s;
  for (const auto& [n, v] : vs) s.vals[n] = Value::ofInt(BigInt(v));
  return s;
}

} // namespace

TEST_CASE("runs the swap sequence") {
  Program p = parse("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)");
  RunResult rr = run(p, mk({{"x", 2}, {"y", 1}}));
  CHECK(rr.final_.vals.at("x").i == BigInt(1));
  CHECK(rr.final_.vals.at("y").i == BigInt(2));
  CHECK(rr.diagnostics.empty());
}

TEST_CASE("skip changes nothing") {
  Program p = parse("var x: int; skip");
  RunResult rr = run(p, mk({{"x", 3}}));
  CHECK(rr.final_.vals.at("x").i == BigInt(3));
}

TEST_CASE("overlapping true guards abort the run") {
  Program p = parse("var x: int; var y: int; x!(1)[y > 0], x!(2)[y > -1]");
  try {
    run(p, mk({{"x", 0}, {"y", 1}}));
    FAIL("expected GuardOverlap");
  } catch (const OeError& e) {
    CHECK(e.kind == ErrKind::GuardOverlap);
  }
  // no overlap at y = 0: only the second guard holds
  RunResult rr = run(p, mk({{"x", 0}, {"y", 0}}));
  CHECK(rr.final_.vals.at("x").i == BigInt(2));
  // neither guard: the else case leaves x alone
  RunResult r2 = run(p, mk({{"x", 9}, {"y", -5}}));
  CHECK(r2.final_.vals.at("x").i == BigInt(9));
}

TEST_CASE("simultaneous writes read the pre-state") {
  Program p = parse("var x: int; var y: int; x!(y), y!(x)");
  RunResult rr = run(p, mk({{"x", 1}, {"y", 2}}));
  CHECK(rr.final_.vals.at("x").i == BigInt(2));
  CHECK(rr.final_.vals.at("y").i == BigInt(1));
  // the sequential version is different: that is the point of the operator
  Program q = parse("var x: int; var y: int; x!(y); y!(x)");
  RunResult rq = run(q, mk({{"x", 1}, {"y", 2}}));
  CHECK(rq.final_.vals.at("x").i == BigInt(2));
  CHECK(rq.final_.vals.at("y").i == BigInt(2));
}

TEST_CASE("variables missing from the initial store read as psi on first use") {
  Program p = parse("var x: int; var y: int; y!(x + 1)");
  RunResult rr = run(p, Store{});
  CHECK(rr.final_.vals.at("y").isPsi());
  REQUIRE(rr.diagnostics.size() == 1);
  CHECK(rr.diagnostics[0].kind == DiagKind::UninitializedRead);
  CHECK(rr.diagnostics[0].location == "x");
}

TEST_CASE("identical inputs give identical results") {
  Program p = parse("var x: int; var y: int; (x!(x*2); y!(y - x))[x > y]; x!(x + y)");
  Store s0 = mk({{"x", 7}, {"y", -3}});
  RunResult a = run(p, s0);
  RunResult b = run(p, s0);
  CHECK(a.final_ == b.final_);
  CHECK(a.diagnostics.size() == b.diagnostics.size());
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("loop execution") {
  SUBCASE("counted loops iterate exactly N times") {
    Program p = parse("var x: int; x!(0); (x!(x+1))^7");
    RunResult rr = run(p, Store{});
    CHECK(rr.final_.vals.at("x").i == BigInt(7));
  }
  SUBCASE("symbolic counts read the store") {
    Program p = parse("var x: int; var N: int; x!(0); (x!(x+1))^N");
    RunResult rr = run(p, mk({{"N", 5}}));
    CHECK(rr.final_.vals.at("x").i == BigInt(5));
  }
  SUBCASE("type-1 until loops may exit before any iteration") {
    Program p = parse("var x: int; (x!(x+1))^{until x' = 3}");
    RunResult rr = run(p, mk({{"x", 3}}));
    CHECK(rr.final_.vals.at("x").i == BigInt(3));
    CHECK(rr.iterations.empty());
  }
  SUBCASE("type-2 until loops run the body at least once") {
    Program p = parse("var x: int; (x!(x+1))^{until x' = ~x + 1}");
    RunResult rr = run(p, mk({{"x", 3}}));
    CHECK(rr.final_.vals.at("x").i == BigInt(4));
  }
  SUBCASE("a cap converts nontermination into Divergence") {
    Program p = parse("var x: int; x!(0); (x!(x+1))^{until x' = -1}");
    RunCaps caps;
    caps.loopCap = 50;
    try {
      run(p, Store{}, caps);
      FAIL("expected Divergence");
    } catch (const OeError& e) {
      CHECK(e.kind == ErrKind::Divergence);
    }
  }
  SUBCASE("a blocked wait loop diverges without spinning") {
    Program p = parse("var b: int; skip^{until b' = 1}");
    CHECK_THROWS_AS(run(p, mk({{"b", 0}})), OeError);
    RunResult rr = run(p, mk({{"b", 1}}));
    CHECK(rr.final_.vals.at("b").i == BigInt(1));
  }
}

TEST_CASE("overflow is detected at commit") {
  Program p = parse("var x: int; x!(9223372036854775807); x!(x * 2)");
  try {
    run(p, Store{});
    FAIL("expected Overflow");
  } catch (const OeError& e) {
    CHECK(e.kind == ErrKind::Overflow);
  }
}

TEST_CASE("parallel execution demands order-independence") {
  Program ok = parse("var x: int; var y: int; (x!(1) || y!(2))");
  RunResult rr = run(ok, mk({{"x", 0}, {"y", 0}}));
  CHECK(rr.final_.vals.at("x").i == BigInt(1));
  CHECK(rr.final_.vals.at("y").i == BigInt(2));

  Program bad = parse("var x: int; var y: int; (x!(1); y!(x) || x!(2))");
  CHECK_THROWS_AS(run(bad, mk({{"x", 0}, {"y", 0}})), OeError);
}

TEST_CASE("differential checking") {
  SUBCASE("swap agrees on 100 states") {
    Program p = parse("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)");
    DiffOptions o;
    o.samples = 100;
    DiffReport r = differentialCheck(p, o);
    CHECK(r.checked == 100);
    CHECK(r.mismatches.empty());
  }
  SUBCASE("the sign term agrees and its guards stay exhaustive") {
    Program p = parse("var x: int; var y: int; x!(1)[y > 0], x!(0)[y = 0], x!(-1)[y < 0]");
    DiffOptions o;
    o.samples = 200;
    DiffReport r = differentialCheck(p, o);
    CHECK(r.checked == 200);
    CHECK(r.mismatches.empty());
  }
  SUBCASE("a corrupted CSP is flagged on every sample") {
    Program p = parse("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)");
    SemResult sem = programSem(p);
    // the offset exceeds the sampling range, so no store can mask it
    Csp bad = sem.csp;
    bad.branches[0].sp.finalEqs[{"x", std::nullopt}] =
        normalize(mBin('+', mVar("x", Marker::Initial), mInt(500)));
    DiffOptions o;
    o.samples = 100;
    DiffReport r = differentialCheckCsp(p, bad, o);
    CHECK(r.mismatches.size() == 100);
  }
  SUBCASE("serial and parallel sample loops produce the same report") {
    Program p = parse("var x: int; var y: int; var z: int; (x!(y * 2); z!(x - y))[y > 0]");
    SemResult sem = programSem(p);
    DiffOptions ser;
    ser.samples = 500;
    ser.parallel = false;
    DiffOptions par = ser;
    par.parallel = true;
    DiffReport a = differentialCheckSerial(p, sem.csp, ser);
    DiffReport b = differentialCheckCsp(p, sem.csp, par);
    CHECK(a.checked == b.checked);
    CHECK(a.skipped == b.skipped);
    CHECK(a.mismatches.size() == b.mismatches.size());
  }
}

TEST_CASE("fuzzed program generation") {
  SUBCASE("emits parse-valid programs") {
    FuzzOptions o;
    o.count = 3;
    o.depth = 2;
    o.seed = 42;
    std::vector<Program> ps = fuzzPrograms(o);
    REQUIRE(ps.size() == 3);
    for (const auto& p : ps) CHECK_NOTHROW(parse(prettyPrint(p)));
  }
  SUBCASE("depth zero stays straight-line") {
    FuzzOptions o;
    o.count = 50;
    o.depth = 0;
    o.seed = 9;
    for (const auto& p : fuzzPrograms(o)) {
      std::function<void(const NodePtr&)> walk = [&](const NodePtr& n) {
        CHECK((n->kind == NodeKind::Seq || n->kind == NodeKind::TermNode ||
               n->kind == NodeKind::Skip));
        if (n->kind == NodeKind::Seq)
          for (const auto& c : n->seq) walk(c);
      };
      walk(p.body);
    }
  }
  SUBCASE("the same seed reproduces the same programs") {
    FuzzOptions o;
    o.count = 10;
    o.depth = 3;
    o.seed = 1234;
    std::vector<Program> a = fuzzPrograms(o);
    std::vector<Program> b = fuzzPrograms(o);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(prettyPrint(a[i]) == prettyPrint(b[i]));
  }
}

TEST_CASE("store literals parse and render") {
  Store s = parseStoreLiteral("x=1, y=-2, p=&a, q=psi, A=[3,1,2]");
  CHECK(s.vals.at("x").i == BigInt(1));
  CHECK(s.vals.at("y").i == BigInt(-2));
  CHECK(s.vals.at("p").addr.of == "a");
  CHECK(s.vals.at("q").isPsi());
  REQUIRE(s.arrays.at("A").size() == 3);
  CHECK(s.arrays.at("A")[2].i == BigInt(2));
  // render -> parse round trip preserves the store
  Store again = parseStoreLiteral(renderStore(s));
  CHECK(s == again);
}
