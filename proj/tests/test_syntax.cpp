#include <doctest.h>

#include "oe/interp.hpp"
#include "oe/syntax.hpp"

using namespace oe;

TEST_CASE("parses the swap sequence into three single-write terms") {
  Program p = parse("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)");
  REQUIRE(p.body->kind == NodeKind::Seq);
  REQUIRE(p.body->seq.size() == 3);
  for (const auto& n : p.body->seq) {
    REQUIRE(n->kind == NodeKind::TermNode);
    CHECK(n->term.writes.size() == 1);
  }
  CHECK(p.body->seq[0]->term.writes[0].target.name == "x");
  CHECK(equalMath(p.body->seq[0]->term.writes[0].payload, parseMathExpr("x + y", false)));
}

TEST_CASE("a guard chain on one variable is a single term") {
  Program p = parse("var x: int; var y: int; x!(1)[y > 0], x!(0)[y = 0], x!(-1)[y < 0]");
  REQUIRE(p.body->kind == NodeKind::TermNode);
  REQUIRE(p.body->term.writes.size() == 3);
  for (const auto& w : p.body->term.writes) CHECK(w.guard != nullptr);
}

TEST_CASE("skip and friends") {
  CHECK(parse("skip").body->kind == NodeKind::Skip);
  CHECK(parse("var b: int; skip^{until b' = 1}").body->kind == NodeKind::WaitLoop);
  CHECK(parse("var x: int; (x!(1))^3").body->kind == NodeKind::LoopCount);
  CHECK(parse("var x: int; var N: int; (x!(1))^N").body->countIsName);
  CHECK(parse("var x: int; var y: int; (x!(1) || y!(2))").body->kind == NodeKind::Par);
}

TEST_CASE("rejects a duplicate unguarded target") {
  CHECK_THROWS_WITH_AS(parse("var x: int; x!(1), x!(2)"),
                       doctest::Contains("written more than once"), OeError);
  // mixed guarded/unguarded writes of one variable are just as wrong
  CHECK_THROWS_AS(parse("var x: int; var y: int; x!(1)[y > 0], x!(2)"), OeError);
}

TEST_CASE("rejects undeclared and ill-typed references") {
  CHECK_THROWS_AS(parse("x!(1)"), OeError);
  CHECK_THROWS_AS(parse("var x: int; x!(q)"), OeError);
  CHECK_THROWS_AS(parse("var x: int; *x!(1)"), OeError);          // not a pointer
  CHECK_THROWS_AS(parse("var p: ptr int; **p!(1)"), OeError);     // too deep
  CHECK_THROWS_AS(parse("var A: int[3]; A!(1)"), OeError);        // whole-array write
  CHECK_THROWS_AS(parse("var x: int; x!(x)[x']"), OeError);       // marker in program text
  CHECK_THROWS_AS(parse("var x: int; x!(~x)"), OeError);
  CHECK_THROWS_AS(parse("var x: int; (x!(1))^{until x = 1}"), OeError); // no final marker
  CHECK_THROWS_AS(parse("var p: ptr int; p!(&a)"), OeError);      // &undeclared
  CHECK_THROWS_AS(parse("var x: int; x!(&x + 1)"), OeError);      // address arithmetic
}

TEST_CASE("writtenVars is the syntactic target set") {
  CHECK(writtenVars(parse("skip").body).empty());
  Program swap = parse("var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)");
  CHECK(writtenVars(swap.body) == std::set<std::string>{"x", "y"});
  Program par = parse("var x: int; var y: int; (x!(1) || y!(2))");
  CHECK(writtenVars(par.body) == std::set<std::string>{"x", "y"});
  Program dp = parse("var a: int; var d: ptr int; d!(&a); *d!(3)");
  CHECK(writtenVars(dp.body) == std::set<std::string>{"d", "*d"});
}

TEST_CASE("readVars tracks payloads, guards and conditions") {
  Program p = parse("var x: int; var y: int; var z: int; x!(y)[z > 0]");
  std::set<std::string> r = readVars(p.body);
  CHECK(r.count("y"));
  CHECK(r.count("z"));
  CHECK_FALSE(r.count("x"));
}

TEST_CASE("pretty printing round-trips the showcase programs") {
  const char* sources[] = {
      "var x: int; var y: int; x!(x+y); y!(x-y); x!(x-y)",
      "skip",
      "var x: int; var y: int; x!(1)[y > 0], x!(0)[y = 0], x!(-1)[y < 0]",
      "var a: int; var d: ptr int; a!(psi); d!(&a); *d!(10 - *d); d!(10 - *d)",
      "var i: int; var j: int; i!(0), j!(1); (i!(i+j); j!(i+j))^10",
      "var x: int; x!(0); (x!(x+1))^{until x' = 3}",
      "var b: int; var x: int; skip^{until b' = 1}; x!(5)",
      "var x: int; var y: int; (x!(1) || y!(2))",
      "var A: int[5]; var m: int; call quicksort(A); m!(A[4])",
      "var x: int; var y: int; ((x!(1))[x > 0])[y > 0]",
  };
  for (const char* src : sources) {
    Program p = parse(src);
    Program q = parse(prettyPrint(p));
    REQUIRE(equalProgram(p, q));
    // a second round is textually stable
    CHECK(prettyPrint(q) == prettyPrint(p));
  }
}

TEST_CASE("pretty printing round-trips fuzzed programs") {
  FuzzOptions fo;
  fo.count = 10000;
  fo.depth = 3;
  fo.seed = 424242;
  fo.allowLoops = true;
  std::vector<Program> ps = fuzzPrograms(fo);
  for (const auto& p : ps) {
    Program q = parse(prettyPrint(p));
    REQUIRE(equalProgram(p, q));
  }
}

TEST_CASE("term disjointness holds exactly when same-target groups are all guarded") {
  // adversarial generator: random write lists with deliberate target collisions
  Rng rng(86420);
  static const char* names[] = {"x", "y"};
  for (int i = 0; i < 2000; ++i) {
    int writes = static_cast<int>(rng.range(1, 4));
    std::string term;
    std::map<std::string, std::pair<int, int>> groups; // target -> (count, unguarded)
    for (int w = 0; w < writes; ++w) {
      std::string v = names[rng.range(0, 1)];
      bool guarded = rng.range(0, 1) == 1;
      if (!term.empty()) term += ", ";
      term += v + "!(" + std::to_string(w) + ")";
      if (guarded) term += "[y > " + std::to_string(w * 7) + "]"; // distinct guards
      auto& g = groups[v];
      ++g.first;
      if (!guarded) ++g.second;
    }
    bool legal = true;
    for (const auto& [t, g] : groups)
      if (g.first >= 2 && g.second > 0) legal = false;
    std::string src = "var x: int; var y: int; " + term;
    if (legal) {
      REQUIRE_NOTHROW(parse(src));
    } else {
      try {
        parse(src);
        FAIL("accepted an overlapping unguarded term: ", src);
      } catch (const OeError& e) {
        REQUIRE(e.kind == ErrKind::DuplicateUnguardedTarget);
      }
    }
  }
}

TEST_CASE("write guards bind to the write, item guards need parens") {
  Program a = parse("var x: int; var y: int; x!(1)[y > 0]");
  REQUIRE(a.body->kind == NodeKind::TermNode);
  CHECK(a.body->term.writes[0].guard != nullptr);

  Program b = parse("var x: int; var y: int; (x!(1))[y > 0]");
  REQUIRE(b.body->kind == NodeKind::Guarded);
  CHECK(b.body->body->kind == NodeKind::TermNode);
}

TEST_CASE("comments and whitespace are ignored") {
  Program p = parse("# leading comment\nvar x: int;\nx!(1) # trailing\n");
  CHECK(p.body->kind == NodeKind::TermNode);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse("var x: int; x!(");
    FAIL("expected a syntax error");
  } catch (const OeError& e) {
    CHECK(e.kind == ErrKind::SyntaxError);
    CHECK(std::string(e.what()).find(":") != std::string::npos);
  }
}
