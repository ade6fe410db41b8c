// End-to-end checks of the oesem binary: exit codes, key outputs, and the
// corpus invariant (every shipped program exits 0 or 1 via sem and check).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Result {
  int exitCode;
  std::string output;
};

Result runCmd(const std::string& args) {
  std::string cmd = std::string(OESEM_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, "popen failed"};
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

void expect(bool ok, const std::string& what, const std::string& detail = "") {
  std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) {
    if (!detail.empty()) std::printf("     %s\n", detail.c_str());
    ++failures;
  }
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string corpusFlags(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    size_t at = line.find("# flags:");
    if (at != std::string::npos) return line.substr(at + 8);
    if (!line.empty() && line[0] != '#') break;
  }
  return "";
}

} // namespace

int main() {
  const std::string corpus = CORPUS_DIR;
  const std::string reg = " --registry " + corpus + "/registry.fn ";

  Result sem = runCmd("sem " + corpus + "/swap.oe");
  expect(sem.exitCode == 0 && contains(sem.output, "x' = y & y' = x"),
         "sem swap.oe prints the swapped predicate", sem.output);

  Result runr = runCmd("run " + corpus + "/swap.oe --state x=2,y=1");
  expect(runr.exitCode == 0 && contains(runr.output, "x=1, y=2"),
         "run swap.oe --state x=2,y=1 lands on x=1, y=2", runr.output);

  Result hanoi = runCmd("hanoi --disks 4 --move 10");
  expect(hanoi.exitCode == 0 && contains(hanoi.output, "B -> A"),
         "hanoi --disks 4 --move 10 is B -> A", hanoi.output);

  Result hanoiAll = runCmd("hanoi --disks 4 --all");
  expect(hanoiAll.exitCode == 0, "hanoi --all succeeds");

  Result psi = runCmd("sem " + corpus + "/ptr_psi.oe");
  expect(psi.exitCode == 1 && contains(psi.output, "UninitializedRead") &&
             contains(psi.output, "WrongAddress"),
         "sem ptr_psi.oe exits 1 with the two pointer defects", psi.output);

  Result check = runCmd("check " + corpus + "/swap.oe --samples 50 --seed 3");
  expect(check.exitCode == 0 && contains(check.output, "mismatches: 0"),
         "check swap.oe finds no mismatches", check.output);

  Result fuzz = runCmd("fuzz --programs 40 --depth 2 --seed 11");
  expect(fuzz.exitCode == 0 && contains(fuzz.output, "no mismatches"),
         "fuzz exits clean over 40 programs", fuzz.output);

  Result fmt = runCmd("fmt " + corpus + "/sign.oe");
  expect(fmt.exitCode == 0 && contains(fmt.output, "x!(1)[y > 0]"),
         "fmt reprints the sign chain", fmt.output);

  Result trace = runCmd("sem " + corpus + "/swap.oe --trace");
  expect(trace.exitCode == 0 && contains(trace.output, "relay"),
         "sem --trace logs the rule applications", trace.output);

  Result inv = runCmd(
      "sem " + corpus + "/maxarray.oe --invariant \"m' = maxr(A, 0, i'-1) && 1 <= i' && i' <= 5\""
      " --termination \"i' = 5\"");
  expect(inv.exitCode == 1 && contains(inv.output, "m' = maxr(A, 0, 4) & i' = 5") &&
             contains(inv.output, "AssumedTermination"),
         "invariant mode reproduces the closed-form residual", inv.output);

  Result badParse = runCmd("sem " + corpus + "/registry.fn");
  expect(badParse.exitCode == 2, "a non-program input exits 2", badParse.output);

  Result badState = runCmd("sem " + corpus + "/does_not_exist.oe");
  expect(badState.exitCode == 2, "a missing file exits 2");

  // byte-identical output for identical inputs and seed
  Result j1 = runCmd("check " + corpus + "/sign.oe --samples 64 --seed 9 --format json");
  Result j2 = runCmd("check " + corpus + "/sign.oe --samples 64 --seed 9 --format json");
  expect(j1.exitCode == 0 && j1.output == j2.output,
         "json check output is byte-identical for a fixed seed");
  Result j3 = runCmd("sem " + corpus + "/swap_guarded.oe --format json");
  Result j4 = runCmd("sem " + corpus + "/swap_guarded.oe --format json");
  expect(j3.exitCode == 0 && j3.output == j4.output && contains(j3.output, "\"branches\""),
         "json sem output is byte-identical and shaped as documented");

  // json errors land on stderr as machine-readable objects
  Result jerr = runCmd("sem " + corpus + "/registry.fn --format json");
  expect(jerr.exitCode == 2 && contains(jerr.output, "\"error\""),
         "json mode reports errors as json", jerr.output);

  // the corpus invariant: every shipped program exits 0 or 1 via sem and check
  int corpusFiles = 0;
  for (const auto& entry : fs::directory_iterator(corpus)) {
    if (entry.path().extension() != ".oe") continue;
    ++corpusFiles;
    std::string extra = corpusFlags(entry.path());
    std::string f = entry.path().string();
    Result s = runCmd("sem " + f + reg + extra);
    expect(s.exitCode == 0 || s.exitCode == 1,
           "sem " + entry.path().filename().string() + " exits 0 or 1",
           "exit " + std::to_string(s.exitCode) + "\n" + s.output);
    Result c = runCmd("check " + f + reg + " --samples 30 --seed 5");
    expect(c.exitCode == 0 || c.exitCode == 1,
           "check " + entry.path().filename().string() + " exits 0 or 1",
           "exit " + std::to_string(c.exitCode) + "\n" + c.output);
  }
  expect(corpusFiles >= 15, "the corpus ships its example programs");

  if (failures == 0) std::printf("all cli checks passed\n");
  return failures == 0 ? 0 : 1;
}
