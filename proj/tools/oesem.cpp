// oesem: compute, run and cross-check the semantics of OE programs.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oe/calculus.hpp"
#include "oe/funcsem.hpp"
#include "oe/interp.hpp"
#include "oe/jsonio.hpp"
#include "oe/semantics.hpp"
#include "oe/syntax.hpp"

using namespace oe;

namespace {

struct CliConfig {
  std::string input;
  std::string format = "text";
  uint64_t seed = 0;
  int samples = 100;
  int unrollCap = 64;
  int branchBudget = 256;
  long long loopCap = 10000;
  bool trace = false;
  std::string strategy = "fold";
  std::string registryPath;
  std::string stateLiteral;
  std::string invariantText;
  std::string terminationText;
  bool serial = false;
};

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw OeError(ErrKind::SyntaxError, "cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SemOptions semOptions(const CliConfig& cfg, const Registry* reg) {
  SemOptions o;
  o.strategy = cfg.strategy == "tree" ? ReduceStrategy::PairwiseTree : ReduceStrategy::LeftFold;
  o.unrollCap = cfg.unrollCap;
  o.branchBudget = cfg.branchBudget;
  o.trace = cfg.trace;
  o.parallel = !cfg.serial;
  o.registry = reg;
  return o;
}

int emitError(const CliConfig& cfg, const OeError& e) {
  if (cfg.format == "json") {
    Json j;
    j["error"]["kind"] = errKindName(e.kind);
    j["error"]["message"] = e.what();
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "error (" << errKindName(e.kind) << "): " << e.what() << "\n";
  }
  return 2;
}

void printDiagnosticsText(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return;
  std::cout << "diagnostics:\n";
  for (const auto& d : diags) {
    std::cout << "  " << diagKindName(d.kind);
    if (!d.location.empty()) std::cout << " at " << d.location;
    std::cout << ": " << d.message << "\n";
  }
}

// invariant mode: replace the first top-level loop by its invariant-derived
// semantics, composing any prefix and suffix around it
SemResult semWithInvariant(const Program& p, const CliConfig& cfg, const Registry* reg) {
  LoopSpec spec;
  spec.invariant = parseBoolExpr(cfg.invariantText, true);
  spec.termination = cfg.terminationText.empty() ? bTrue()
                                                 : parseBoolExpr(cfg.terminationText, true);
  std::vector<NodePtr> items;
  if (p.body->kind == NodeKind::Seq)
    items = p.body->seq;
  else
    items = {p.body};
  size_t loopAt = items.size();
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i]->kind == NodeKind::LoopCount || items[i]->kind == NodeKind::LoopUntil) {
      loopAt = i;
      break;
    }
  }
  if (loopAt == items.size())
    throw OeError(ErrKind::EvalUnsupported, "no loop found for invariant mode");

  Universe u = Universe::ofProgram(p);
  SemOptions so = semOptions(cfg, reg);
  Csp inv = loopInvariantSem(items[loopAt], p, spec, cfg.samples, cfg.seed);

  SemFormula f;
  if (loopAt > 0) {
    std::vector<NodePtr> before(items.begin(), items.begin() + static_cast<long long>(loopAt));
    f.push_back(nodeSem(nSeq(before), p, so).csp);
  }
  f.push_back(inv);
  if (loopAt + 1 < items.size()) {
    std::vector<NodePtr> after(items.begin() + static_cast<long long>(loopAt) + 1, items.end());
    f.push_back(nodeSem(nSeq(after), p, so).csp);
  }
  SemResult res;
  auto [csp, trace] = reduce(f, u, so);
  res.csp = std::move(csp);
  res.trace = std::move(trace);
  return res;
}

int cmdSem(const CliConfig& cfg) {
  Registry reg;
  if (!cfg.registryPath.empty()) reg = Registry::parseFile(cfg.registryPath);
  const Registry* regp = cfg.registryPath.empty() ? nullptr : &reg;
  Program p = parse(readFile(cfg.input));
  SemResult res = cfg.invariantText.empty() ? programSem(p, semOptions(cfg, regp))
                                            : semWithInvariant(p, cfg, regp);

  std::vector<std::vector<DerivedFact>> derived;
  for (const auto& br : res.csp.branches) derived.push_back(derivePointerFacts(p, br.sp));

  if (cfg.format == "json") {
    Json j;
    j["command"] = "sem";
    j["input"] = cfg.input;
    j["result"] = toJson(res.csp);
    for (size_t i = 0; i < derived.size(); ++i)
      if (!derived[i].empty()) j["result"]["branches"][i]["derived"] = toJson(derived[i]);
    j["result"]["partial"] = res.partial;
    j["diagnostics"] = toJson(res.csp.diagnostics);
    j["trace"] = toJson(res.trace);
    std::cout << j.dump(2) << "\n";
  } else {
    if (cfg.trace) std::cout << renderTrace(res.trace);
    std::cout << renderCsp(res.csp) << "\n";
    for (size_t i = 0; i < derived.size(); ++i)
      for (const auto& f : derived[i]) {
        std::cout << "derived";
        if (derived.size() > 1) std::cout << " (branch " << i << ")";
        std::cout << ": " << renderMath(f.lhs, RenderMode::Predicate) << " = " << f.pointee
                  << " = " << renderMath(f.value, RenderMode::Predicate) << "\n";
      }
    if (res.partial) std::cout << "note: partial semantics (unroll cap reached)\n";
    printDiagnosticsText(res.csp.diagnostics);
  }
  return res.csp.diagnostics.empty() ? 0 : 1;
}

int cmdRun(const CliConfig& cfg) {
  Registry reg;
  if (!cfg.registryPath.empty()) reg = Registry::parseFile(cfg.registryPath);
  const Registry* regp = cfg.registryPath.empty() ? nullptr : &reg;
  Program p = parse(readFile(cfg.input));
  Store s0 = cfg.stateLiteral.empty() ? Store{} : parseStoreLiteral(cfg.stateLiteral);
  RunCaps caps;
  caps.loopCap = cfg.loopCap;
  RunResult rr = run(p, s0, caps, regp);
  if (cfg.format == "json") {
    Json j;
    j["command"] = "run";
    j["input"] = cfg.input;
    j["result"]["store"] = toJson(rr.final_);
    j["diagnostics"] = toJson(rr.diagnostics);
    j["trace"] = Json::array();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << renderStore(rr.final_) << "\n";
    printDiagnosticsText(rr.diagnostics);
  }
  return rr.diagnostics.empty() ? 0 : 1;
}

int cmdCheck(const CliConfig& cfg) {
  Registry reg;
  if (!cfg.registryPath.empty()) reg = Registry::parseFile(cfg.registryPath);
  const Registry* regp = cfg.registryPath.empty() ? nullptr : &reg;
  Program p = parse(readFile(cfg.input));
  DiffOptions opts;
  opts.samples = cfg.samples;
  opts.seed = cfg.seed;
  opts.parallel = !cfg.serial;
  opts.caps.loopCap = cfg.loopCap;
  opts.unrollCap = cfg.unrollCap;
  opts.branchBudget = cfg.branchBudget;
  opts.registry = regp;
  DiffReport report = differentialCheck(p, opts);
  if (cfg.format == "json") {
    Json j;
    j["command"] = "check";
    j["input"] = cfg.input;
    j["result"]["report"] = toJson(report);
    j["diagnostics"] = Json::array();
    j["trace"] = Json::array();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "samples: " << report.samples << "  checked: " << report.checked
              << "  skipped: " << report.skipped << "  mismatches: " << report.mismatches.size()
              << "\n";
    if (!report.skipReason.empty()) std::cout << "note: " << report.skipReason << "\n";
    for (size_t i = 0; i < report.mismatches.size() && i < 5; ++i)
      std::cout << "mismatch: " << report.mismatches[i].detail << "\n";
  }
  if (!report.mismatches.empty()) return 3;
  return report.skipReason.empty() ? 0 : 1;
}

// greedy structural shrink that preserves the failure
Program minimizeProgram(const Program& p0, const std::function<bool(const Program&)>& fails) {
  Program best = p0;
  bool improved = true;
  auto tryCandidate = [&](Program cand) {
    try {
      Program reparsed = parse(prettyPrint(cand));
      if (fails(reparsed) && prettyPrint(reparsed).size() < prettyPrint(best).size()) {
        best = std::move(reparsed);
        return true;
      }
    } catch (const OeError&) {
    }
    return false;
  };
  while (improved) {
    improved = false;
    if (best.body->kind == NodeKind::Seq) {
      for (size_t i = 0; i < best.body->seq.size(); ++i) {
        std::vector<NodePtr> items = best.body->seq;
        items.erase(items.begin() + static_cast<long long>(i));
        Program cand = best;
        cand.body = nSeq(items);
        if (tryCandidate(std::move(cand))) {
          improved = true;
          break;
        }
      }
      if (improved) continue;
    }
    if (best.body->kind == NodeKind::Guarded || best.body->kind == NodeKind::LoopCount) {
      Program cand = best;
      cand.body = best.body->body;
      if (tryCandidate(std::move(cand))) continue;
    }
    if (best.body->kind == NodeKind::TermNode && best.body->term.writes.size() > 1) {
      for (size_t i = 0; i < best.body->term.writes.size(); ++i) {
        Term t = best.body->term;
        t.writes.erase(t.writes.begin() + static_cast<long long>(i));
        Program cand = best;
        cand.body = nTerm(t);
        if (tryCandidate(std::move(cand))) {
          improved = true;
          break;
        }
      }
    }
  }
  return best;
}

int cmdFuzz(const CliConfig& cfg, int programs, int depth, int stores) {
  FuzzOptions fo;
  fo.count = programs;
  fo.depth = depth;
  fo.seed = cfg.seed;
  DiffOptions dopts;
  dopts.samples = stores;
  dopts.seed = cfg.seed;
  dopts.parallel = !cfg.serial;

  auto failing = [&](const Program& p) {
    try {
      return !differentialCheck(p, dopts).mismatches.empty();
    } catch (const OeError&) {
      return false;
    }
  };

  std::vector<Program> ps = fuzzPrograms(fo);
  for (size_t i = 0; i < ps.size(); ++i) {
    DiffReport report;
    try {
      report = differentialCheck(ps[i], dopts);
    } catch (const OeError& e) {
      std::cerr << "program " << i << " failed to reduce: " << e.what() << "\n";
      continue;
    }
    if (report.mismatches.empty()) continue;
    Program minimized = minimizeProgram(ps[i], failing);
    if (cfg.format == "json") {
      Json j;
      j["command"] = "fuzz";
      j["result"]["program"] = prettyPrint(minimized);
      j["result"]["report"] = toJson(differentialCheck(minimized, dopts));
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "counterexample (program " << i << ", minimized):\n"
                << prettyPrint(minimized) << "detail: " << report.mismatches[0].detail << "\n";
    }
    return 3;
  }
  if (cfg.format == "json") {
    Json j;
    j["command"] = "fuzz";
    j["result"]["programs"] = programs;
    j["result"]["mismatches"] = 0;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "fuzzed " << programs << " programs, no mismatches\n";
  }
  return 0;
}

int cmdHanoi(const CliConfig& cfg, int disks, long long move, bool all) {
  if (move > 0) {
    Move m = hanoiNthMove(disks, move);
    if (cfg.format == "json") {
      Json j;
      j["command"] = "hanoi";
      j["result"]["move"] = renderMove(m);
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << renderMove(m) << "\n";
    }
    return 0;
  }
  if (all) {
    std::vector<Move> seq = hanoiAllMoves(disks, !cfg.serial);
    if (cfg.format == "json") {
      Json j;
      j["command"] = "hanoi";
      Json ms = Json::array();
      for (const auto& m : seq) ms.push_back(renderMove(m));
      j["result"]["moves"] = std::move(ms);
      std::cout << j.dump(2) << "\n";
    } else {
      for (const auto& m : seq) std::cout << renderMove(m) << "\n";
    }
    return 0;
  }
  long long total = (1ll << disks) - 1;
  if (cfg.format == "json") {
    Json j;
    j["command"] = "hanoi";
    j["result"]["length"] = total;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "moves: " << total << "\n";
  }
  return 0;
}

int cmdFmt(const CliConfig& cfg) {
  Program p = parse(readFile(cfg.input));
  std::cout << prettyPrint(p);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantics calculator for operation-expression programs"};
  app.require_subcommand(1);
  app.fallthrough();

  CliConfig cfg;
  app.add_option("--format", cfg.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--samples", cfg.samples, "sample count for probabilistic checks");
  app.add_option("--unroll-cap", cfg.unrollCap, "until-loop unroll cap");
  app.add_option("--branch-budget", cfg.branchBudget, "CSP branch budget");
  app.add_option("--loop-cap", cfg.loopCap, "interpreter iteration cap");
  app.add_option("--registry", cfg.registryPath, "function registry file");
  app.add_flag("--trace", cfg.trace, "print the reduction rule log");
  app.add_option("--strategy", cfg.strategy, "fold or tree")
      ->check(CLI::IsMember({"fold", "tree"}));
  app.add_flag("--serial", cfg.serial, "disable parallel execution paths");

  auto* sem = app.add_subcommand("sem", "reduce a program to its semantic predicate");
  sem->add_option("file", cfg.input, "OE source file")->required();
  sem->add_option("--invariant", cfg.invariantText, "loop invariant (invariant mode)");
  sem->add_option("--termination", cfg.terminationText, "loop termination condition");

  auto* runc = app.add_subcommand("run", "interpret a program concretely");
  runc->add_option("file", cfg.input, "OE source file")->required();
  runc->add_option("--state", cfg.stateLiteral, "initial store, e.g. x=1,y=2,A=[3,1,2]");

  auto* check = app.add_subcommand("check", "differential-test semantics against the interpreter");
  check->add_option("file", cfg.input, "OE source file")->required();

  int fuzzPrograms = 100, fuzzDepth = 2, fuzzStores = 20;
  auto* fuzz = app.add_subcommand("fuzz", "generate programs and cross-check them");
  fuzz->add_option("--programs", fuzzPrograms, "number of programs");
  fuzz->add_option("--depth", fuzzDepth, "structure nesting depth");
  fuzz->add_option("--stores", fuzzStores, "stores per program");

  int hanoiDisks = 4;
  long long hanoiMove = 0;
  bool hanoiAll = false;
  auto* hanoi = app.add_subcommand("hanoi", "Tower of Hanoi move computations");
  hanoi->add_option("--disks", hanoiDisks, "number of disks")->required();
  hanoi->add_option("--move", hanoiMove, "compute the nth move in closed form");
  hanoi->add_flag("--all", hanoiAll, "emit the whole move sequence");

  auto* fmt = app.add_subcommand("fmt", "parse and pretty-print a program");
  fmt->add_option("file", cfg.input, "OE source file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sem->parsed()) return cmdSem(cfg);
    if (runc->parsed()) return cmdRun(cfg);
    if (check->parsed()) return cmdCheck(cfg);
    if (fuzz->parsed()) return cmdFuzz(cfg, fuzzPrograms, fuzzDepth, fuzzStores);
    if (hanoi->parsed()) return cmdHanoi(cfg, hanoiDisks, hanoiMove, hanoiAll);
    if (fmt->parsed()) return cmdFmt(cfg);
  } catch (const OeError& e) {
    return emitError(cfg, e);
  }
  return 0;
}
