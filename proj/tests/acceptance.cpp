// One PASS/FAIL line per acceptance criterion. Criterion 11 runs the CLI
// binary given as argv[1] end to end.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#if defined(__unix__) || defined(__APPLE__)
#include <sys/wait.h>
#endif

#include "resbound/resbound.hpp"

namespace {

void print(int id, bool pass, double seconds, double limit, const std::string& name, const std::string& detail) {
  std::printf("criterion %2d: %s  (%.2fs, limit %.0fs)  %s -- %s\n", id, pass ? "PASS" : "FAIL", seconds, limit,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

int wait_status(int raw) {
#ifdef WIFEXITED
  if (WIFEXITED(raw)) return WEXITSTATUS(raw);
  return -1;
#else
  return raw;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  namespace orc = resbound::oracle;
  bool all = true;

  for (const auto& c : orc::run_criteria(orc::VerifyOptions{})) {
    all = all && c.pass;
    print(c.id, c.pass, c.seconds, c.limit_seconds, c.name, c.detail);
  }

  if (argc < 2) {
    print(11, false, 0.0, 300.0, "resbound verify exits 0", "no CLI path given");
    return 1;
  }
  const std::string cmd = std::string("\"") + argv[1] + "\" verify > /dev/null";
  const auto start = std::chrono::steady_clock::now();
  const int status = wait_status(std::system(cmd.c_str()));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = status == 0 && seconds < 300.0;
  all = all && ok;
  print(11, ok, seconds, 300.0, "resbound verify exits 0 in under 5 minutes", "exit status " + std::to_string(status));

  return all ? 0 : 1;
}
