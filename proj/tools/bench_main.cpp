#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irkns/bench.hpp"
#include "irkns/errors.hpp"
#include "irkns/oracles.hpp"

namespace {

using namespace irkns;

struct CliOptions {
  RunConfig cfg;
  std::string tableau = "radauiia";
  std::string w_mode = "diag";
  std::string diag_solve = "exact";
  std::string lps = "auto";
  std::string out;
};

void add_run_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--tableau", o.tableau, "radauiia | gauss | lobattoiiic")
      ->check(CLI::IsMember({"radauiia", "radau", "gauss", "lobattoiiic", "lobatto"}));
  cmd->add_option("--stages,-s", o.cfg.s, "stage count")->check(CLI::Range(1, 5));
  cmd->add_option("--level,-l", o.cfg.level, "mesh refinement level")->check(CLI::Range(1, 8));
  cmd->add_option("--nu", o.cfg.nu, "viscosity")->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", o.cfg.gamma, "augmentation parameter")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--nt", o.cfg.n_t, "time steps (0 = auto rule)");
  cmd->add_option("-T,--final-time", o.cfg.T, "final time")->check(CLI::PositiveNumber);
  cmd->add_option("--w-mode", o.w_mode, "diag | full")
      ->check(CLI::IsMember({"diag", "full"}));
  cmd->add_option("--diag-solve", o.diag_solve, "exact | inexact")
      ->check(CLI::IsMember({"exact", "inexact"}));
  cmd->add_option("--lps", o.lps, "on | off | auto")
      ->check(CLI::IsMember({"on", "off", "auto"}));
  cmd->add_option("--krylov-rel", o.cfg.krylov_rel, "FGMRES relative tolerance");
  cmd->add_option("--krylov-max", o.cfg.krylov_max, "FGMRES iteration cap");
  cmd->add_option("--newton-rel", o.cfg.newton_rel, "Newton relative tolerance");
  cmd->add_option("--newton-max", o.cfg.newton_max, "Newton iteration cap");
  cmd->add_option("--seed", o.cfg.seed, "seed for randomized self-checks");
  cmd->add_option("--out,-o", o.out, "output basename (writes <out>.csv and <out>.json)");
}

RunConfig finalize(CliOptions& o, ProblemKind kind) {
  o.cfg.problem = kind;
  o.cfg.family = family_from_name(o.tableau);
  o.cfg.w_mode = o.w_mode == "diag" ? WMode::DiagMp : WMode::FullMp;
  o.cfg.diag_solve = o.diag_solve == "exact" ? DiagSolve::ExactLU : DiagSolve::InexactILUGmres;
  o.cfg.lps = o.lps == "auto" ? -1 : (o.lps == "on" ? 1 : 0);
  return o.cfg;
}

void print_row(const ResultRow& r) {
  std::vector<ResultRow> one{r};
  std::cout << results_csv(one);
}

int emit(const std::vector<ResultRow>& rows, const std::string& out) {
  if (!out.empty()) emit_results(rows, out + ".csv", out + ".json");
  return 0;
}

// key=value configuration blocks, one [run] per block.
std::vector<RunConfig> parse_sweep_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open sweep file " + path);

  std::vector<RunConfig> runs;
  CliOptions cur;
  std::string problem = "accuracy";
  bool open = false;

  auto close_block = [&]() {
    if (!open) return;
    runs.push_back(finalize(cur, problem == "cavity" ? ProblemKind::Cavity
                                                     : ProblemKind::Accuracy));
    cur = CliOptions{};
    problem = "accuracy";
  };

  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    if (line == "[run]") {
      close_block();
      open = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || !open)
      throw Error("sweep file " + path + ":" + std::to_string(lineno) +
                  ": expected key=value inside a [run] block");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    try {
      if (key == "problem") problem = val;
      else if (key == "tableau") cur.tableau = val;
      else if (key == "stages" || key == "s") cur.cfg.s = std::stoi(val);
      else if (key == "level" || key == "l") cur.cfg.level = std::stoi(val);
      else if (key == "nu") cur.cfg.nu = std::stod(val);
      else if (key == "gamma") cur.cfg.gamma = std::stod(val);
      else if (key == "nt") cur.cfg.n_t = std::stoi(val);
      else if (key == "T") cur.cfg.T = std::stod(val);
      else if (key == "w_mode") cur.w_mode = val;
      else if (key == "diag_solve") cur.diag_solve = val;
      else if (key == "lps") cur.lps = val;
      else if (key == "krylov_rel") cur.cfg.krylov_rel = std::stod(val);
      else if (key == "krylov_max") cur.cfg.krylov_max = std::stoi(val);
      else if (key == "newton_rel") cur.cfg.newton_rel = std::stod(val);
      else if (key == "newton_max") cur.cfg.newton_max = std::stoi(val);
      else if (key == "seed") cur.cfg.seed = static_cast<unsigned>(std::stoul(val));
      else throw Error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw Error("sweep file " + path + ":" + std::to_string(lineno) + ": bad value for " +
                  key);
    }
  }
  close_block();
  if (runs.empty()) throw Error("sweep file " + path + " contains no [run] blocks");
  return runs;
}

int run_verify() {
  const auto reports = run_identity_suite();
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("[%s] %-28s error %.3e  (tol %.0e)\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.error, r.tol);
    ok = ok && r.pass;
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"implicit Runge-Kutta Navier-Stokes benchmark harness"};
  app.require_subcommand(1);

  CliOptions acc_opts, cav_opts;
  auto* acc = app.add_subcommand("accuracy", "manufactured-solution accuracy run");
  add_run_flags(acc, acc_opts);
  auto* cav = app.add_subcommand("cavity", "lid-driven cavity robustness run");
  add_run_flags(cav, cav_opts);
  auto* ver = app.add_subcommand("verify", "dense-oracle identity suite");
  std::string sweep_path, sweep_out;
  auto* swp = app.add_subcommand("sweep", "run every [run] block of a config file");
  swp->add_option("file", sweep_path, "plain-text key=value config")->required();
  swp->add_option("--out,-o", sweep_out, "output basename");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 3;
  }

  try {
    if (ver->parsed()) return run_verify();
    std::vector<ResultRow> rows;
    std::string out;
    if (acc->parsed()) {
      rows.push_back(run_accuracy(finalize(acc_opts, ProblemKind::Accuracy)));
      out = acc_opts.out;
    } else if (cav->parsed()) {
      rows.push_back(run_cavity(finalize(cav_opts, ProblemKind::Cavity)));
      out = cav_opts.out;
    } else if (swp->parsed()) {
      for (const auto& cfg : parse_sweep_file(sweep_path))
        rows.push_back(cfg.problem == ProblemKind::Accuracy ? run_accuracy(cfg)
                                                            : run_cavity(cfg));
      out = sweep_out;
    }
    for (const auto& r : rows) print_row(r);
    for (const auto& r : rows)
      if (!r.all_converged) {
        std::cerr << "warning: at least one linear solve did not converge\n";
        return 2;
      }
    return emit(rows, out);
  } catch (const NewtonDiverged& e) {
    std::cerr << "solver divergence: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
