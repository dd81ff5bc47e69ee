// Runs every acceptance criterion once and prints one line per criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "jetsym/selftest.hpp"

int main(int argc, char** argv) {
  jetsym::SelftestContext ctx;
  if (argc > 1) ctx.seed = std::strtoull(argv[1], nullptr, 0);

  const auto start = std::chrono::steady_clock::now();
  const auto& criteria = jetsym::acceptance_criteria();
  int failed = 0;
  std::size_t i = 0;
  for (const auto& c : criteria) {
    auto r = jetsym::run_property(c, ctx);
    ++i;
    if (i == criteria.size()) {
      // the last criterion also bounds the whole run
      const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (total >= jetsym::kSelftestBudgetSeconds) {
        r.pass = false;
        r.detail += "; total run " + std::to_string(total) + " s exceeds the budget";
      } else {
        r.detail += "; total run " + std::to_string(total) + " s";
      }
    }
    if (!r.pass) ++failed;
    std::printf("%-4s %2zu %-32s max_residual=%.3e time=%.2fs  %s\n", r.pass ? "PASS" : "FAIL", i, r.name.c_str(),
                r.max_residual, r.seconds, r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
