#pragma once

#include <string>
#include <utility>
#include <vector>

#include "irkns/al_precond.hpp"
#include "irkns/stage_system.hpp"
#include "irkns/tableau.hpp"

namespace irkns {

enum class ProblemKind { Accuracy, Cavity };

std::string to_string(ProblemKind p);

struct RunConfig {
  ProblemKind problem = ProblemKind::Accuracy;
  RKFamily family = RKFamily::RadauIIA;
  int s = 2;
  int level = 3;
  double nu = 1.0 / 50.0;
  double gamma = 1.0;
  double T = 2.0;
  int n_t = 0;   // 0 selects the dt <= h^(2/order) rule
  WMode w_mode = WMode::DiagMp;
  DiagSolve diag_solve = DiagSolve::ExactLU;
  int lps = -1;  // -1 auto (cavity with nu <= 1/100), 0 off, 1 on
  double krylov_rel = 1e-6;
  double krylov_abs = 1e-10;
  int krylov_max = 400;
  double newton_rel = 1e-5;
  int newton_max = 25;
  unsigned seed = 42;
};

struct ResultRow {
  std::string problem, family;
  int s = 0, level = 0;
  double nu = 0.0, gamma = 0.0;
  int n_t = 0;
  std::string w_mode, diag_solve;
  int lps = 0;
  long dof = 0;  // stage-system unknowns: s * (interior velocity + pressure)
  double avg_fgmres = 0.0, avg_newton = 0.0;
  double cpu_per_linear_iter = 0.0, cpu_per_step = 0.0;
  double u_error = 0.0, p_error = 0.0;
  bool has_errors = false;
  bool all_converged = true;
};

// Step-count rule n_t = ceil(T / h_u^(2/order)); cavity runs are rounded up
// to an even count so the lid-ramp kink at t = 1 lands on a step boundary.
int auto_step_count(const Rect& domain, int level, RKFamily family, int s, double T,
                    ProblemKind kind);

// Test problem on (0,1)^2 with constant exact pressure:
//   u = 1/2 e^(T-t) [sin(pi x) cos(pi y), -cos(pi x) sin(pi y)].
VectorField manufactured_velocity(double T);
VectorField manufactured_velocity_dt(double T);
ScalarField manufactured_pressure();
// Hand-derived forcing f = du/dt - nu lap(u) + (u . grad) u (grad p = 0).
VectorField manufactured_forcing(double nu, double T);

// Finite-difference residual check of the hardcoded forcing at `points`
// random space-time points; returns the largest absolute residual component.
double forcing_self_check(double nu, double T, unsigned seed, int points = 10);

ResultRow run_accuracy(const RunConfig& cfg);
ResultRow run_cavity(const RunConfig& cfg);

// Max over snapshots of the H1-seminorm velocity error and the L2 pressure
// error against nodal interpolants of the exact fields; both pressure fields
// are zero-mean normalized first.
std::pair<double, double> compute_errors(const SpatialOperators& ops,
                                         const std::vector<TimeState>& snapshots,
                                         const VectorField& u_exact,
                                         const ScalarField& p_exact);

std::string results_csv(std::vector<ResultRow> rows);  // sorted by (s, l, nu, gamma)
std::string results_json(const std::vector<ResultRow>& rows);
void emit_results(const std::vector<ResultRow>& rows, const std::string& csv_path,
                  const std::string& json_path);

}  // namespace irkns
