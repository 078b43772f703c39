#include "fkc/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fkc/criteria.hpp"
#include "fkc/errors.hpp"
#include "fkc/montecarlo.hpp"
#include "fkc/spectral.hpp"

namespace fkc::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string yes(bool b) { return b ? "yes" : "no"; }

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

spectral::Grid1D grid_of(const Scenario& sc) {
  const long n = sc.integer("n");
  if (n < 3 || n % 2 == 0) throw DomainError("grid: n must be odd and at least 3");
  return spectral::Grid1D(sc.number("L"), static_cast<int>(n));
}

montecarlo::PathConfig paths_of(const Scenario& sc) {
  montecarlo::PathConfig c;
  c.t = sc.number("t");
  c.dt = sc.number("dt");
  c.paths = sc.integer("paths");
  c.seed = static_cast<std::uint64_t>(sc.integer("seed"));
  c.eps = sc.number("eps");
  c.validate();
  return c;
}

TaskResult classify_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  criteria::TestOptions opt;
  opt.boundary_band = sc.number("band");
  const std::string scan = sc.get("delta_scan");
  if (scan != "yes" && scan != "no") throw ParseError("delta_scan must be yes or no");
  opt.delta_scan = scan == "yes";
  opt.delta_values = sc.numbers("deltas");
  const auto v = criteria::classify(spec, pot, opt);
  TaskResult r;
  r.columns = {"route", "path", "p", "iu", "is", "ih", "delta_stable", "inconclusive"};
  r.rows.push_back({v.route, v.path, num(v.fit.p), yes(v.iu), yes(v.is), yes(v.ih), yes(v.delta_stable),
                    yes(v.inconclusive)});
  r.summary_columns = r.columns;
  r.summary = r.rows.front();
  if (!v.notes.empty()) r.notes.push_back(v.notes);
  r.notes.push_back("flags are sufficient conditions: 'no' means the criterion is not met");
  return r;
}

TaskResult groundstate_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto op = spectral::assemble(spec, pot, grid_of(sc));
  const auto sol = spectral::ground_state(op);
  const auto b = spectral::groundstate_bounds_check(sol, spec, pot);
  TaskResult r;
  r.columns = {"x", "phi1", "envelope_ratio"};
  for (int i = 0; i < op.size(); ++i) {
    const double x = op.grid.x(i);
    std::string ratio = "";
    if (b.has_envelope) ratio = num(sol.phi(i, 0) / spectral::envelope(spec, pot, x));
    r.rows.push_back({num(x), num(sol.phi(i, 0)), ratio});
  }
  r.summary_columns = {"lambda1", "residual", "iterations", "c0", "envelope_min", "envelope_max"};
  r.summary = {num(sol.lambda1()), num(sol.residual), std::to_string(sol.iterations), num(b.c0),
               b.has_envelope ? num(b.envelope_min) : "", b.has_envelope ? num(b.envelope_max) : ""};
  r.notes.push_back("domain truncated to [-L, L] with killing outside");
  return r;
}

TaskResult heatkernel_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto op = spectral::assemble(spec, pot, grid_of(sc));
  const int kmax = static_cast<int>(sc.integer("kmax"));
  const auto sol = spectral::eigenpairs(op, kmax);
  const auto hk = spectral::heat_kernel(sol, sc.number("t"), kmax);
  const auto iu = spectral::iu_ratio(hk, sol);
  const long stride = sc.integer("stride");
  if (stride < 1) throw DomainError("heat kernel: stride must be positive");
  TaskResult r;
  r.columns = {"i", "j", "x", "y", "p"};
  for (int i = 0; i < op.size(); i += static_cast<int>(stride))
    for (int j = 0; j < op.size(); j += static_cast<int>(stride))
      r.rows.push_back({std::to_string(i), std::to_string(j), num(op.grid.x(i)), num(op.grid.x(j)), num(hk.p(i, j))});
  r.summary_columns = {"t", "modes", "truncation_error", "roundoff", "sup_ratio", "x_at", "y_at", "coverage"};
  r.summary = {num(hk.t),     std::to_string(hk.modes_used), num(hk.truncation_error), num(hk.roundoff),
               num(iu.sup),   num(iu.x_at),                  num(iu.y_at),             num(iu.coverage)};
  r.notes.push_back("the ratio sup is trend evidence on a truncated domain, not a proof of contractivity");
  return r;
}

TaskResult superpoincare_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto op = spectral::assemble(spec, pot, grid_of(sc));
  const auto w = criteria::phi_weight(spec, pot);
  std::vector<double> weight(op.size());
  for (int i = 0; i < op.size(); ++i) weight[i] = std::exp(w.log_inf(std::log(std::abs(op.grid.x(i)))));
  const long trials = sc.integer("trials");
  const auto seed = static_cast<std::uint64_t>(sc.integer("seed"));
  TaskResult r;
  r.columns = {"r", "s", "alpha", "trials", "violations", "max_ratio"};
  int total = 0;
  for (double radius : sc.numbers("r")) {
    for (double s : sc.numbers("s")) {
      const double a = criteria::alpha_rs(spec, w, radius, s);
      const auto rep = spectral::super_poincare_check(op, weight, radius, s, a, static_cast<int>(trials), seed);
      total += rep.violations;
      r.rows.push_back({num(radius), num(s), num(a), std::to_string(rep.trials), std::to_string(rep.violations),
                        num(rep.max_ratio)});
    }
  }
  r.summary_columns = {"pairs", "violations"};
  r.summary = {std::to_string(r.rows.size()), std::to_string(total)};
  return r;
}

TaskResult gnprobe_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  if (spec.family != kernels::KernelFamily::stable || pot.family != kernels::PotentialFamily::logpower)
    throw NotAvailable("g_n probe: needs the stable kernel with a logpower potential");
  const auto op = spectral::assemble(spec, pot, grid_of(sc));
  const auto sol = spectral::ground_state(op);
  const auto g = spectral::gn_probe(op, sol, pot.lambda, sc.numbers("n_values"));
  TaskResult r;
  r.columns = {"n", "mu_g2", "mu_abs_g_sq", "form", "r_n", "bound", "used"};
  for (const auto& p : g.points)
    r.rows.push_back({num(p.n), num(p.mu_g2), num(p.mu_g_sq), num(p.form), num(p.r_n), num(p.bound), yes(p.used)});
  r.summary_columns = {"slope", "mu_slope", "target", "c_r"};
  r.summary = {num(g.slope), num(g.mu_slope), num(spec.dim + 2.0 * spec.alpha), num(g.c_r)};
  return r;
}

TaskResult lyapunov_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto op = spectral::assemble(spec, pot, grid_of(sc));
  const auto rep = spectral::lyapunov_check(op, spec, pot, sc.number("c0"));
  TaskResult r;
  r.columns = {"x", "ratio"};
  for (int i = 0; i < op.size(); ++i)
    if (!std::isnan(rep.ratio[i])) r.rows.push_back({num(op.grid.x(i)), num(rep.ratio[i])});
  r.summary_columns = {"max_ratio", "range", "negative_tail", "negative_from"};
  r.summary = {num(rep.max_ratio), num(rep.range), yes(rep.negative_tail), num(rep.negative_from)};
  return r;
}

TaskResult simulate_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto cfg = paths_of(sc);
  const std::string obs = sc.get("observable");
  const double width = sc.number("width");
  std::function<double(double)> f;
  if (obs == "one") {
    f = [](double) { return 1.0; };
  } else if (obs == "bump") {
    f = [width](double y) {
      const double u = y / width;
      return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
    };
  } else {
    throw ParseError("observable must be one or bump");
  }
  TaskResult r;
  r.columns = {"x", "t", "N", "dt", "estimate", "stderr", "bias"};
  for (double x : sc.numbers("x")) {
    const auto e = montecarlo::feynman_kac(spec, pot, x, cfg.t, f, cfg);
    r.rows.push_back({num(x), num(cfg.t), std::to_string(e.n), num(cfg.dt), num(e.value), num(e.stderr_),
                      join(e.bias_notes, "; ")});
  }
  r.summary_columns = {"x", "estimate", "stderr"};
  r.summary = {r.rows.front()[0], r.rows.front()[4], r.rows.front()[5]};
  return r;
}

TaskResult ratiotest_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto cfg = paths_of(sc);
  const auto rep = montecarlo::iu_ratio_test(spec, pot, sc.numbers("x"), cfg.t, cfg);
  TaskResult r;
  r.columns = {"x", "t", "N", "dt", "numerator", "stderr", "lcb", "denominator", "ratio", "inconclusive"};
  for (const auto& p : rep.points)
    r.rows.push_back({num(p.x), num(cfg.t), std::to_string(p.numerator.n), num(cfg.dt), num(p.numerator.value),
                      num(p.numerator.stderr_), num(p.numerator_lcb), num(p.denominator), num(p.ratio),
                      yes(p.inconclusive)});
  r.summary_columns = {"growth", "monotone", "diverging"};
  r.summary = {num(rep.growth), yes(rep.monotone), yes(rep.diverging())};
  r.notes.push_back("diverging ratios refute intrinsic ultracontractivity empirically");
  return r;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string report_text(const Scenario& sc, const TaskResult& r, const std::string& status) {
  std::ostringstream out;
  out << sc.echo() << "\n";
  out << "# status: " << status << "\n";
  out << "# csv columns: " << join(r.columns, ",") << "\n";
  for (std::size_t i = 0; i < r.summary_columns.size() && i < r.summary.size(); ++i)
    out << "# " << r.summary_columns[i] << ": " << r.summary[i] << "\n";
  for (const auto& n : r.notes) out << "# note: " << n << "\n";
  return out.str();
}

void emit(const std::string& out_dir, const Scenario& sc, const std::string& name, const TaskResult& r,
          const std::string& status) {
  const fs::path dir = fs::path(out_dir) / sc.id;
  fs::create_directories(dir);
  write_atomic(dir / (name + ".csv"), to_csv(r.columns, r.rows));
  write_atomic(dir / "report.txt", report_text(sc, r, status));
}

// Runs `body`, mapping failures to exit codes and a report.
template <class Body>
int guarded(const std::string& config_path, const std::string& out_dir, std::ostream& log, Body body) {
  Scenario sc;
  try {
    sc = load_scenario(config_path);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return internal_error;
  }
  try {
    return body(sc);
  } catch (const AssumptionError& e) {
    log << "assumption failure " << e.condition() << ": " << e.what() << "\n";
    TaskResult r;
    r.notes.push_back(e.what());
    try {
      emit(out_dir, sc, sc.task, r, "assumption failure " + e.condition());
    } catch (const std::exception&) {
    }
    return assumption_failure;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return internal_error;
  }
}

}  // namespace

std::string to_csv(const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + field(v[i]);
    out += "\n";
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

TaskResult validate_task(const Scenario& sc) {
  const auto spec = build_kernel(sc);
  const auto pot = build_potential(sc);
  const auto rep = kernels::verify_assumptions(spec, pot);
  TaskResult r;
  r.columns = {"condition", "passed", "detail"};
  for (const auto* c : rep.checks()) r.rows.push_back({c->condition, yes(c->passed), c->detail});
  r.summary_columns = {"all_passed"};
  r.summary = {yes(rep.all_passed())};
  return r;
}

TaskResult run_task(const Scenario& sc) {
  if (sc.task == "classify") return classify_task(sc);
  if (sc.task == "validate") return validate_task(sc);
  if (sc.task == "groundstate") return groundstate_task(sc);
  if (sc.task == "heatkernel") return heatkernel_task(sc);
  if (sc.task == "superpoincare") return superpoincare_task(sc);
  if (sc.task == "gnprobe") return gnprobe_task(sc);
  if (sc.task == "lyapunov") return lyapunov_task(sc);
  if (sc.task == "simulate") return simulate_task(sc);
  if (sc.task == "ratiotest") return ratiotest_task(sc);
  throw ParseError("unknown task '" + sc.task + "'");
}

namespace {

// The validate task reports failures through its status rather than by throwing.
int finish_validation(const std::string& out_dir, const Scenario& sc, const TaskResult& r, std::ostream& log) {
  if (r.summary.front() == "yes") {
    emit(out_dir, sc, "validate", r, "ok");
    return ok;
  }
  std::string failed;
  for (const auto& row : r.rows)
    if (row[1] == "no") failed += (failed.empty() ? "" : " ") + row[0];
  log << "assumption failure " << failed << "\n";
  emit(out_dir, sc, "validate", r, "assumption failure " + failed);
  return assumption_failure;
}

}  // namespace

int run(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  return guarded(config_path, out_dir, log, [&](const Scenario& sc) {
    if (sc.task == "validate") return finish_validation(out_dir, sc, validate_task(sc), log);
    const auto r = run_task(sc);
    emit(out_dir, sc, sc.task, r, "ok");
    log << sc.id << "/" << sc.task << ".csv written\n";
    return static_cast<int>(ok);
  });
}

int validate(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  return guarded(config_path, out_dir, log, [&](const Scenario& sc) {
    Scenario v = sc;
    v.task = "validate";
    v.params.clear();
    return finish_validation(out_dir, v, validate_task(v), log);
  });
}

int sweep(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  return guarded(config_path, out_dir, log, [&](const Scenario& sc) {
    const auto points = expand_grid(sc);
    TaskResult all;
    for (const auto& a : sc.grid) all.columns.push_back(a.section + "." + a.key);
    all.columns.push_back("status");
    bool summary_known = false;
    int status = ok;
    std::vector<std::vector<std::string>> pending;
    for (const auto& point : points) {
      std::vector<std::string> row;
      for (const auto& a : sc.grid) {
        const Section& s = a.section == "kernel" ? point.kernel : a.section == "potential" ? point.potential : point.params;
        row.push_back(s.at(a.key));
      }
      try {
        const auto r = point.task == "validate" ? validate_task(point) : run_task(point);
        if (!summary_known) {
          all.summary_columns = r.summary_columns;
          summary_known = true;
        }
        row.push_back("ok");
        row.insert(row.end(), r.summary.begin(), r.summary.end());
      } catch (const AssumptionError& e) {
        row.push_back("assumption failure " + e.condition());
        status = assumption_failure;
      }
      pending.push_back(std::move(row));
    }
    all.columns.insert(all.columns.end(), all.summary_columns.begin(), all.summary_columns.end());
    for (auto& row : pending) {
      row.resize(all.columns.size());
      all.rows.push_back(std::move(row));
    }
    all.summary_columns = {"points"};
    all.summary = {std::to_string(points.size())};
    emit(out_dir, sc, sc.task, all, status == ok ? "ok" : "some points failed assumption checks");
    log << sc.id << "/" << sc.task << ".csv written (" << points.size() << " rows)\n";
    return status;
  });
}

}  // namespace fkc::cli
