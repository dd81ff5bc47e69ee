// jetsym: batch front-end over problem files.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"
#include "jetsym/error.hpp"
#include "jetsym/selftest.hpp"

namespace {

using namespace jetsym;
using namespace jetsym::cli;

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> tol;
  std::string out;
  bool quiet = false;
  std::string file;
};

// flag > problem file > JETSYM_SEED > built-in default
OracleSettings settings_for(const Flags& f, const json& file_block) {
  OracleSettings s;
  if (const char* env = std::getenv("JETSYM_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 0);
    if (end && *end == '\0') s.seed = v;
    else std::cerr << "jetsym: ignoring malformed JETSYM_SEED=" << env << "\n";
  }
  if (file_block.is_object()) {
    if (file_block.contains("seed")) s.seed = file_block["seed"].get<std::uint64_t>();
    if (file_block.contains("trials")) s.trials = file_block["trials"].get<int>();
    if (file_block.contains("tol")) s.tol = file_block["tol"].get<double>();
  }
  if (f.seed) s.seed = *f.seed;
  if (f.trials) s.trials = *f.trials;
  if (f.tol) s.tol = *f.tol;
  return s;
}

json settings_json(const OracleSettings& s) { return {{"seed", s.seed}, {"trials", s.trials}, {"tol", s.tol}}; }

void emit(const json& report, const Flags& f) {
  const std::string text = report.dump(2) + "\n";
  if (!f.quiet) std::cout << text;
  if (!f.out.empty()) {
    std::ofstream o(f.out, std::ios::binary);
    if (!o) {
      std::cerr << "jetsym: cannot write " << f.out << "\n";
      return;
    }
    o << text;
  }
}

int run_problem(const std::string& subcommand, const Flags& f) {
  const auto start = std::chrono::steady_clock::now();
  try {
    Problem p = Problem::load(f.file);
    std::string op = subcommand;
    if (p.has("op")) {
      const std::string file_op = p.str_arg("op");
      if (op == "run") op = file_op;
      else if (file_op != op) p.fail("command", "op", "file says \"" + file_op + "\" but the subcommand is \"" + op + "\"");
    } else if (op == "run") {
      p.fail("command", "op", "missing \"op\"; needed by the run subcommand");
    }
    const OracleSettings s = settings_for(f, p.oracle_block());
    auto out = run_operation(op, p, Oracle(s));
    json report;
    json echo = p.command();
    echo["op"] = op;
    report["command"] = echo;
    report["claims"] = out.claims;
    report["result"] = out.result;
    if (!out.error.is_null()) report["error"] = out.error;
    report["passed"] = out.passed();
    report["oracle"] = settings_json(s);
    report["wall_clock_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    emit(report, f);
    if (!out.error.is_null()) std::cerr << "jetsym: " << out.error["code"].get<std::string>() << ": "
                                        << out.error["message"].get<std::string>() << "\n";
    return out.passed() ? 0 : 1;
  } catch (const InputError& e) {
    std::cerr << "jetsym: input error: " << e.what() << "\n";
    return 2;
  }
}

int run_selftest(const Flags& f) {
  SelftestContext ctx;
  ctx.seed = settings_for(f, json()).seed;
  const auto start = std::chrono::steady_clock::now();
  json rows = json::array();
  bool all = true;
  auto run = [&](const std::vector<Property>& ps) {
    for (const auto& p : ps) {
      auto r = run_property(p, ctx);
      all = all && r.pass;
      if (!f.quiet) {
        std::printf("%-4s %-12s %-34s %10.3e %7.2fs  %s\n", r.pass ? "PASS" : "FAIL", r.group.c_str(), r.name.c_str(),
                    r.max_residual, r.seconds, r.detail.c_str());
        std::fflush(stdout);
      }
      rows.push_back({{"name", r.name}, {"group", r.group}, {"pass", r.pass}, {"max_residual", r.max_residual},
                      {"detail", r.detail}});
    }
  };
  run(acceptance_criteria());
  run(module_properties());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_budget = secs < kSelftestBudgetSeconds;
  all = all && in_budget;
  if (!f.quiet)
    std::printf("%s  %zu properties, seed %llu, %.2f s%s\n", all ? "PASS" : "FAIL", rows.size(),
                static_cast<unsigned long long>(ctx.seed), secs, in_budget ? "" : " (over the time budget)");
  if (!f.out.empty()) {
    json report = {{"command", {{"op", "selftest"}}},
                   {"claims", rows},
                   {"passed", all},
                   {"oracle", {{"seed", ctx.seed}}},
                   {"wall_clock_ms", secs * 1000}};
    Flags quiet = f;
    quiet.quiet = true;
    emit(report, quiet);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jetsym: symmetry, prolongation and reduction checks on problem files"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", flags.seed, "oracle seed");
    sub->add_option("--trials", flags.trials, "oracle trials")->check(CLI::PositiveNumber);
    sub->add_option("--tol", flags.tol, "oracle tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "also write the report here");
    sub->add_flag("--quiet", flags.quiet, "no report on standard output");
  };

  auto* run = app.add_subcommand("run", "run the command block of a problem file");
  run->add_option("problem", flags.file, "problem file (JSON)")->required();
  add_common(run);
  run->callback([&] { chosen = "run"; });
  static const std::map<std::string, std::string> blurb{
      {"prolong", "prolongation coefficient tables (standard, lambda, mu, sigma)"},
      {"mch", "Maurer-Cartan residuals of a mu twist"},
      {"check-symmetry", "symmetry residuals of fields on an equation"},
      {"solve-ansatz", "solve determining equations in a coefficient ansatz"},
      {"invariants", "differential invariants by differentiation"},
      {"reduce", "reduce a scalar ODE with a pair of invariants"},
      {"reconstruct", "recover v from sampled w by quadrature"},
      {"gauge-verify", "twist from a gauge matrix and its commuting diagram"},
      {"variational", "Euler-Lagrange, variational symmetries, fluxes, conservation"},
      {"dynsys", "sigma-symmetries of a perturbed dynamical system"},
  };
  for (const auto& op : operations()) {
    auto* sub = app.add_subcommand(op, blurb.at(op));
    sub->add_option("problem", flags.file, "problem file (JSON)")->required();
    add_common(sub);
    sub->callback([&chosen, op] { chosen = op; });
  }
  auto* st = app.add_subcommand("selftest", "run every acceptance criterion and module property");
  add_common(st);
  st->callback([&] { chosen = "selftest"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (chosen == "selftest") return run_selftest(flags);
  return run_problem(chosen, flags);
}
