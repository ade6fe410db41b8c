// oebench: serial reference vs parallel kernels on the three hot paths.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "oe/calculus.hpp"
#include "oe/funcsem.hpp"
#include "oe/interp.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace oe;
using Clock = std::chrono::steady_clock;

namespace {

double ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

void benchReduce(int steps) {
  Program p = parse("var i: int; var j: int; i!(i+j); j!(i+j)");
  Universe u = Universe::ofProgram(p);
  Csp body = programSem(p).csp;
  SemFormula f(static_cast<size_t>(steps), body);

  SemOptions serial;
  serial.strategy = ReduceStrategy::LeftFold;
  SemOptions par;
  par.strategy = ReduceStrategy::PairwiseTree;
  par.parallel = true;

  auto t0 = Clock::now();
  Csp a = reduce(f, u, serial).first;
  auto t1 = Clock::now();
  Csp b = reduce(f, u, par).first;
  auto t2 = Clock::now();

  bool equal = renderCsp(a) == renderCsp(b);
  std::printf("reduce   steps=%-6d leftFold %9.2f ms   pairwiseTree %9.2f ms   speedup %5.2fx   %s\n",
              steps, ms(t0, t1), ms(t1, t2), ms(t0, t1) / ms(t1, t2),
              equal ? "identical" : "MISMATCH");
}

void benchCheck(int samples) {
  Program p = parse(
      "var x: int; var y: int; var z: int; var w: int;"
      "x!(x+y), y!(x-y); (z!(x*2); w!(z+y))[x > y]; x!(x-1)[w > 0], x!(x+1)[w <= 0]");
  SemResult sem = programSem(p);

  DiffOptions serial;
  serial.samples = samples;
  serial.parallel = false;
  DiffOptions par = serial;
  par.parallel = true;

  auto t0 = Clock::now();
  DiffReport a = differentialCheckSerial(p, sem.csp, serial);
  auto t1 = Clock::now();
  DiffReport b = differentialCheckCsp(p, sem.csp, par);
  auto t2 = Clock::now();

  bool equal = a.checked == b.checked && a.skipped == b.skipped &&
               a.mismatches.size() == b.mismatches.size();
  std::printf("check    n=%-10d serial   %9.2f ms   parallel     %9.2f ms   speedup %5.2fx   %s\n",
              samples, ms(t0, t1), ms(t1, t2), ms(t0, t1) / ms(t1, t2),
              equal ? "identical" : "MISMATCH");
}

void benchHanoi(int disks) {
  auto t0 = Clock::now();
  std::vector<Move> a = hanoiSequence(disks);
  auto t1 = Clock::now();
  std::vector<Move> b = hanoiAllMoves(disks, true);
  auto t2 = Clock::now();

  bool equal = a == b;
  std::printf("hanoi    disks=%-6d recursive %8.2f ms   closed form  %9.2f ms   speedup %5.2fx   %s\n",
              disks, ms(t0, t1), ms(t1, t2), ms(t0, t1) / ms(t1, t2),
              equal ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel comparison"};
  std::string kernel = "all";
  int steps = 4096;
  int samples = 20000;
  int disks = 20;
  app.add_option("--kernel", kernel, "reduce | check | hanoi | all")
      ->check(CLI::IsMember({"reduce", "check", "hanoi", "all"}));
  app.add_option("--steps", steps, "formula length for the reduce kernel");
  app.add_option("--samples", samples, "stores for the check kernel");
  app.add_option("--disks", disks, "disks for the hanoi kernel");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: unavailable, parallel paths run serially\n");
#endif

  if (kernel == "reduce" || kernel == "all") benchReduce(steps);
  if (kernel == "check" || kernel == "all") benchCheck(samples);
  if (kernel == "hanoi" || kernel == "all") benchHanoi(disks);
  return 0;
}
