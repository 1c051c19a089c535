#include "irkns/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "irkns/errors.hpp"
#include "irkns/version.hpp"
#include "json.hpp"

namespace irkns {

namespace {

constexpr double kPi = 3.14159265358979323846;

int family_order(RKFamily family, int s) {
  switch (family) {
    case RKFamily::RadauIIA: return 2 * s - 1;
    case RKFamily::Gauss: return 2 * s;
    case RKFamily::LobattoIIIC: return 2 * s - 2;
  }
  return 1;
}

double mp_mean(const SpatialOperators& ops, const Vec& p) {
  const Vec ones = Vec::Ones(p.size());
  return ones.dot(ops.Mp * p) / ones.dot(ops.Mp * ones);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

}  // namespace

std::string to_string(ProblemKind p) {
  return p == ProblemKind::Accuracy ? "accuracy" : "cavity";
}

int auto_step_count(const Rect& domain, int level, RKFamily family, int s, double T,
                    ProblemKind kind) {
  const double h_u = domain.width() / double(1 << level) / 2.0;
  const double cap = std::pow(h_u, 2.0 / family_order(family, s));
  int n_t = std::max(1, static_cast<int>(std::ceil(T / cap - 1e-9)));
  while (T / n_t > cap * (1.0 + 1e-12)) ++n_t;
  if (kind == ProblemKind::Cavity && n_t % 2 != 0) ++n_t;
  return n_t;
}

VectorField manufactured_velocity(double T) {
  return [T](double x, double y, double t) -> std::array<double, 2> {
    const double a = 0.5 * std::exp(T - t);
    return {a * std::sin(kPi * x) * std::cos(kPi * y),
            -a * std::cos(kPi * x) * std::sin(kPi * y)};
  };
}

VectorField manufactured_velocity_dt(double T) {
  return [T](double x, double y, double t) -> std::array<double, 2> {
    const double a = -0.5 * std::exp(T - t);
    return {a * std::sin(kPi * x) * std::cos(kPi * y),
            -a * std::cos(kPi * x) * std::sin(kPi * y)};
  };
}

ScalarField manufactured_pressure() {
  return [](double, double, double) { return 1.0; };
}

VectorField manufactured_forcing(double nu, double T) {
  return [nu, T](double x, double y, double t) -> std::array<double, 2> {
    const double a = 0.5 * std::exp(T - t);
    const double c = 2.0 * kPi * kPi * nu - 1.0;
    const double q = 0.125 * kPi * std::exp(2.0 * (T - t));
    return {c * a * std::sin(kPi * x) * std::cos(kPi * y) + q * std::sin(2.0 * kPi * x),
            -c * a * std::cos(kPi * x) * std::sin(kPi * y) + q * std::sin(2.0 * kPi * y)};
  };
}

double forcing_self_check(double nu, double T, unsigned seed, int points) {
  const auto u = manufactured_velocity(T);
  const auto f = manufactured_forcing(nu, T);
  const double h = 1e-3;

  // Fourth-order central differences in each variable.
  auto d1 = [h](auto&& fn) {
    return (-fn(2.0 * h) + 8.0 * fn(h) - 8.0 * fn(-h) + fn(-2.0 * h)) / (12.0 * h);
  };
  auto d2 = [h](auto&& fn) {
    return (-fn(2.0 * h) + 16.0 * fn(h) - 30.0 * fn(0.0) + 16.0 * fn(-h) - fn(-2.0 * h)) /
           (12.0 * h * h);
  };

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> sp(0.05, 0.95), tm(0.0, T);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double x = sp(rng), y = sp(rng), t = tm(rng);
    for (int c = 0; c < 2; ++c) {
      auto uc = [&](double dx, double dy, double dt) {
        return u(x + dx, y + dy, t + dt)[static_cast<std::size_t>(c)];
      };
      const double ut = d1([&](double e) { return uc(0, 0, e); });
      const double lap =
          d2([&](double e) { return uc(e, 0, 0); }) + d2([&](double e) { return uc(0, e, 0); });
      const double ucx = d1([&](double e) { return uc(e, 0, 0); });
      const double ucy = d1([&](double e) { return uc(0, e, 0); });
      const auto uv = u(x, y, t);
      const double conv = uv[0] * ucx + uv[1] * ucy;
      const double res = f(x, y, t)[static_cast<std::size_t>(c)] - (ut - nu * lap + conv);
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

std::pair<double, double> compute_errors(const SpatialOperators& ops,
                                         const std::vector<TimeState>& snapshots,
                                         const VectorField& u_exact,
                                         const ScalarField& p_exact) {
  double ue = 0.0, pe = 0.0;
  for (const auto& snap : snapshots) {
    const Vec du = snap.u - interpolate_velocity(ops.spaces, u_exact, snap.t);
    ue = std::max(ue, std::sqrt(du.dot(ops.Ku * du)));

    Vec ph = snap.p;
    ph.array() -= mp_mean(ops, ph);
    Vec pi = interpolate_pressure(ops.spaces, p_exact, snap.t);
    pi.array() -= mp_mean(ops, pi);
    const Vec dp = ph - pi;
    pe = std::max(pe, std::sqrt(dp.dot(ops.Mp * dp)));
  }
  return {ue, pe};
}

namespace {

ResultRow make_row(const RunConfig& cfg, const SpatialOperators& ops, int n_t,
                   bool lps_on, const RunStats& stats) {
  ResultRow row;
  row.problem = to_string(cfg.problem);
  row.family = family_name(cfg.family);
  row.s = cfg.s;
  row.level = cfg.level;
  row.nu = cfg.nu;
  row.gamma = cfg.gamma;
  row.n_t = n_t;
  row.w_mode = to_string(cfg.w_mode);
  row.diag_solve = to_string(cfg.diag_solve);
  row.lps = lps_on ? 1 : 0;
  row.dof = static_cast<long>(cfg.s) * (ops.n_ui + ops.spaces.n_p);
  row.avg_fgmres = stats.avg_fgmres();
  row.avg_newton = stats.avg_newton();
  row.cpu_per_linear_iter = stats.cpu_per_linear_iter();
  row.cpu_per_step = stats.cpu_per_step();
  row.all_converged = stats.all_converged;
  return row;
}

LinearConfig make_linear_config(const RunConfig& cfg) {
  LinearConfig lin;
  lin.aug.gamma = cfg.gamma;
  lin.aug.w_mode = cfg.w_mode;
  lin.gs.mode = cfg.diag_solve;
  lin.krylov.rel_tol = cfg.krylov_rel;
  lin.krylov.abs_tol = cfg.krylov_abs;
  lin.krylov.max_iters = cfg.krylov_max;
  return lin;
}

}  // namespace

ResultRow run_accuracy(const RunConfig& cfg) {
  if (cfg.problem != ProblemKind::Accuracy)
    throw Error("run_accuracy called with a non-accuracy config");
  const double fd = forcing_self_check(cfg.nu, cfg.T, cfg.seed);
  if (fd >= 1e-6)
    throw Error("manufactured forcing self-check failed: residual " + std::to_string(fd));

  const ButcherTableau tab = make_tableau(cfg.family, cfg.s);
  const Rect domain{0.0, 0.0, 1.0, 1.0};
  auto [mesh, spaces] = build_mesh(domain, cfg.level);
  const SpatialOperators ops = build_operators(mesh, spaces);

  ProblemSpec prob;
  prob.domain = domain;
  prob.nu = cfg.nu;
  prob.T = cfg.T;
  prob.f = manufactured_forcing(cfg.nu, cfg.T);
  prob.g = manufactured_velocity(cfg.T);
  prob.gdot = manufactured_velocity_dt(cfg.T);
  prob.n_t = cfg.n_t > 0 ? cfg.n_t
                         : auto_step_count(domain, cfg.level, cfg.family, cfg.s, cfg.T,
                                           ProblemKind::Accuracy);
  prob.lps_enabled = cfg.lps == 1;  // default off for the smooth test problem

  TimeState init;
  init.u = interpolate_velocity(spaces, prob.g, 0.0);
  const Vec vb = interpolate_velocity(spaces, prob.gdot, 0.0);
  init.p = consistent_pressure(ops, init.u, prob.f, 0.0, cfg.nu, &vb);

  NewtonConfig ncfg;
  ncfg.rel_tol = cfg.newton_rel;
  ncfg.max_iters = cfg.newton_max;

  const StageSolver solver(ops, tab, prob.dt(), cfg.nu, make_linear_config(cfg));
  const TimeLoopResult res = time_loop(ops, tab, prob, init, ncfg,
                                       [&solver](const StageSystem& sys) { return solver(sys); },
                                       true);

  ResultRow row = make_row(cfg, ops, prob.n_t, prob.lps_enabled, res.stats);
  const auto [ue, pe] = compute_errors(ops, res.snapshots, prob.g, manufactured_pressure());
  row.u_error = ue;
  row.p_error = pe;
  row.has_errors = true;
  return row;
}

ResultRow run_cavity(const RunConfig& cfg) {
  if (cfg.problem != ProblemKind::Cavity)
    throw Error("run_cavity called with a non-cavity config");

  const ButcherTableau tab = make_tableau(cfg.family, cfg.s);
  const Rect domain{-1.0, -1.0, 1.0, 1.0};
  auto [mesh, spaces] = build_mesh(domain, cfg.level);
  const SpatialOperators ops = build_operators(mesh, spaces);

  const double lid_y = domain.by;
  ProblemSpec prob;
  prob.domain = domain;
  prob.nu = cfg.nu;
  prob.T = cfg.T;
  prob.f = nullptr;
  prob.g = [lid_y](double, double y, double t) -> std::array<double, 2> {
    if (y >= lid_y - 1e-12) return {std::min(t, 1.0), 0.0};
    return {0.0, 0.0};
  };
  prob.gdot = [lid_y](double, double y, double t) -> std::array<double, 2> {
    if (y >= lid_y - 1e-12 && t < 1.0) return {1.0, 0.0};
    return {0.0, 0.0};
  };
  prob.n_t = cfg.n_t > 0 ? cfg.n_t
                         : auto_step_count(domain, cfg.level, cfg.family, cfg.s, cfg.T,
                                           ProblemKind::Cavity);
  prob.lps_enabled = cfg.lps == -1 ? cfg.nu <= 1.0 / 100.0 + 1e-15 : cfg.lps == 1;

  TimeState init;
  init.u = Vec::Zero(spaces.n_u);
  init.p = consistent_pressure(ops, init.u, nullptr, 0.0, cfg.nu, nullptr);

  NewtonConfig ncfg;
  ncfg.rel_tol = cfg.newton_rel;
  ncfg.max_iters = cfg.newton_max;

  const StageSolver solver(ops, tab, prob.dt(), cfg.nu, make_linear_config(cfg));
  const TimeLoopResult res = time_loop(ops, tab, prob, init, ncfg,
                                       [&solver](const StageSystem& sys) { return solver(sys); },
                                       false);
  return make_row(cfg, ops, prob.n_t, prob.lps_enabled, res.stats);
}

std::string results_csv(std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.s != b.s) return a.s < b.s;
    if (a.level != b.level) return a.level < b.level;
    if (a.nu != b.nu) return a.nu < b.nu;
    return a.gamma < b.gamma;
  });
  std::ostringstream os;
  os << "problem,family,s,level,nu,gamma,n_t,w_mode,diag_solve,lps,dof,"
        "avg_fgmres_its,avg_newton_its,cpu_per_linear_iter,cpu_per_step,u_error,p_error\n";
  for (const auto& r : rows) {
    os << r.problem << ',' << r.family << ',' << r.s << ',' << r.level << ',' << fmt(r.nu)
       << ',' << fmt(r.gamma) << ',' << r.n_t << ',' << r.w_mode << ',' << r.diag_solve << ','
       << r.lps << ',' << r.dof << ',' << fmt(r.avg_fgmres) << ',' << fmt(r.avg_newton) << ','
       << fmt(r.cpu_per_linear_iter) << ',' << fmt(r.cpu_per_step) << ',';
    if (r.has_errors)
      os << fmt(r.u_error) << ',' << fmt(r.p_error);
    else
      os << ',';
    os << '\n';
  }
  return os.str();
}

std::string results_json(const std::vector<ResultRow>& rows) {
  nlohmann::json j;
  j["environment"] = {
      {"compiler", __VERSION__},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"version", kVersion},
      {"git_revision", kGitRevision},
  };
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o = {
        {"problem", r.problem},       {"family", r.family},
        {"s", r.s},                   {"level", r.level},
        {"nu", r.nu},                 {"gamma", r.gamma},
        {"n_t", r.n_t},               {"w_mode", r.w_mode},
        {"diag_solve", r.diag_solve}, {"lps", r.lps},
        {"dof", r.dof},               {"avg_fgmres_its", r.avg_fgmres},
        {"avg_newton_its", r.avg_newton},
        {"cpu_per_linear_iter", r.cpu_per_linear_iter},
        {"cpu_per_step", r.cpu_per_step},
        {"all_converged", r.all_converged},
    };
    if (r.has_errors) {
      o["u_error"] = r.u_error;
      o["p_error"] = r.p_error;
    }
    j["rows"].push_back(std::move(o));
  }
  return j.dump(2);
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& csv_path,
                  const std::string& json_path) {
  if (rows.empty()) throw Error("no result rows to emit");
  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    if (!os) throw IoError("cannot open " + csv_path);
    os << results_csv(rows);
    if (!os) throw IoError("failed writing " + csv_path);
  }
  if (!json_path.empty()) {
    std::ofstream os(json_path);
    if (!os) throw IoError("cannot open " + json_path);
    os << results_json(rows) << "\n";
    if (!os) throw IoError("failed writing " + json_path);
  }
}

}  // namespace irkns
