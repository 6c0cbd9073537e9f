#include "cli_commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hysync/integrator.hpp"
#include "hysync/lyapunov.hpp"
#include "hysync/scenario_io.hpp"
#include "hysync/trace_io.hpp"

namespace hysync::cli {
namespace {

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string run_stem(const ScenarioConfig& sc) {
  std::string stem = sc.id + "_" + std::string(to_string(sc.coupling.family())) + "_k" + fmt(sc.kappa, "%.6g");
  for (char& c : stem)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  return stem;
}

void append_summary(const std::filesystem::path& file, const LyapunovReport& report) {
  const bool fresh = !std::filesystem::exists(file) || std::filesystem::file_size(file) == 0;
  std::ofstream os(file, std::ios::app);
  if (!os) throw std::runtime_error("cannot append to " + file.string());
  if (fresh) os << LyapunovReport::summary_header() << '\n';
  os << report.summary_row() << '\n';
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << text;
}

/// Mean max|theta_tilde| over the last 2/11 of the horizon ([9, 11] for t_end = 11).
double steady_state_mismatch(const SolutionTrace& trace, double t_end) {
  const double from = t_end * 9.0 / 11.0;
  double sum = 0.0;
  int count = 0;
  for (const TraceSample& s : trace.samples) {
    if (s.t < from || !s.event.empty()) continue;
    sum += s.mismatch_inf;
    ++count;
  }
  return count ? sum / count : trace.samples.back().mismatch_inf;
}

void report_nonconvergence(const LyapunovReport& r, std::ostream& out) {
  if (!r.converged())
    out << "note: no synchronization: max|theta_tilde| does not stay within " << fmt(r.reach_tolerance) << "\n";
}

struct Loaded {
  ScenarioConfig scenario;
  int code = kOk;
};

Loaded load(const RunManifest& m, std::ostream& err) {
  Loaded l;
  try {
    l.scenario = apply_overrides(load_scenario(m.scenario), m.overrides);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    l.code = kValidationFailure;
  }
  return l;
}

CouplingSpec rebuild_coupling(const CouplingSpec& current, const std::optional<std::string>& sigma, double delta) {
  if (sigma && sigma->rfind("table:", 0) == 0) return CouplingSpec::table_from_file(delta, sigma->substr(6));
  const SigmaFamily family = sigma ? parse_sigma_family(*sigma) : current.family();
  switch (family) {
    case SigmaFamily::Sign:
      return CouplingSpec::sign(delta);
    case SigmaFamily::Ramp:
      return CouplingSpec::ramp(delta);
    case SigmaFamily::SinePlusRamp:
      if (current.family() == SigmaFamily::SinePlusRamp && delta == current.delta())
        return CouplingSpec::sine_plus_ramp(delta, current.weight());
      return CouplingSpec::sine_plus_ramp(delta);
    case SigmaFamily::Table:
      if (current.family() != SigmaFamily::Table) throw CouplingError("--sigma table needs the form table:<path>");
      if (!current.table_path().empty()) return CouplingSpec::table_from_file(delta, current.table_path());
      return CouplingSpec::table(delta, current.table_abscissae(), current.table_values());
  }
  return current;
}

double parse_kappa_token(const std::string& token, const std::optional<double>& kstar) {
  const std::size_t pos = token.find("kstar");
  if (pos == std::string::npos) return std::stod(token);
  if (!kstar) throw std::invalid_argument("kappa_star undefined for this coupling (continuous at 0 or cyclic graph)");
  std::string factor = token.substr(0, pos);
  if (!factor.empty() && factor.back() == '*') factor.pop_back();
  return (factor.empty() ? 1.0 : std::stod(factor)) * (*kstar);
}

}  // namespace

std::filesystem::path default_out_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("HYSYNC_OUT"); env && *env) return env;
  return "hysync_out";
}

ScenarioConfig apply_overrides(ScenarioConfig sc, const Overrides& o) {
  if (o.sigma || o.delta) sc.coupling = rebuild_coupling(sc.coupling, o.sigma, o.delta.value_or(sc.coupling.delta()));
  if (o.kappa) sc.kappa = *o.kappa;
  if (o.no_coupling) sc.kappa = 0.0;
  IntegratorConfig& g = sc.integrator;
  if (o.step) {
    g.step_h = *o.step;
    g.event_tol = std::min(g.event_tol, g.step_h * 1e-4);
  }
  if (o.t_end) g.t_end = *o.t_end;
  if (o.sliding) g.sliding = *o.sliding;
  if (o.record_every) g.record_every = *o.record_every;
  if (o.seed) {
    sc.seed = *o.seed;
    resample_grid_params(sc);
  }
  sc.validate();
  return sc;
}

int cmd_run(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
  Loaded l = load(manifest, err);
  if (l.code != kOk) return l.code;
  const ScenarioConfig& sc = l.scenario;

  SolutionTrace trace;
  try {
    trace = simulate(sc);
  } catch (const IntegratorError& e) {
    err << "integrator: " << e.what() << "\n";
    return kIntegratorFailure;
  }
  const LyapunovReport report = audit_trace(trace, sc, sc.integrator);

  try {
    std::filesystem::create_directories(manifest.out_dir);
    const std::string stem = run_stem(sc);
    write_trace_csv(manifest.out_dir / (stem + ".trace.csv"), trace);
    write_text(manifest.out_dir / (stem + ".audit.txt"), report.to_text());
    if (manifest.radial) write_radial_csv(manifest.out_dir / (stem + ".radial.csv"), trace);
    append_summary(manifest.out_dir / "results.csv", report);
    out << "trace: " << (manifest.out_dir / (stem + ".trace.csv")).string() << "\n";
  } catch (const std::exception& e) {
    err << "output: " << e.what() << "\n";
    return kUsage;
  }
  out << report.to_text();
  report_nonconvergence(report, out);
  if (!report.passed()) {
    err << "audit failed for " << sc.id << "\n";
    return kAuditFailure;
  }
  return kOk;
}

int cmd_validate(const std::filesystem::path& path, std::optional<double> delta, std::ostream& out,
                 std::ostream& err) {
  SpecFile spec;
  try {
    spec = load_spec_file(path, delta.value_or(kPi / 4.0));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  bool ok = true;
  if (spec.coupling) {
    const CouplingSpec& c = *spec.coupling;
    const ValidationReport r = validate_property1(c, 10000);
    out << "coupling: " << to_string(c.family()) << "\n"
        << "delta: " << fmt(c.delta()) << "\n"
        << r.summary();
    if (r.passed()) {
      const auto mu = sector_mu(c);
      out << "c: " << fmt(sigma_sup_c(c)) << "\n"
          << "mu: " << (mu ? fmt(*mu) : std::string("n/a")) << "\n";
    }
    ok = ok && r.passed();
  }
  if (spec.graph) {
    const GeneralGraph& g = *spec.graph;
    const SpectrumReport s = lambda_min(g.incidence());
    out << "graph: " << g.num_nodes() << " nodes, " << g.num_edges() << " edges\n";
    if (spec.tree_error) {
      out << "tree: no (" << *spec.tree_error << ")\n";
      ok = false;
    } else {
      out << "tree: yes\n";
    }
    out << "lambda_min: " << fmt(s.lambda_min) << "\n";
    if (!s.diagnostic.empty()) out << "spectrum: " << s.diagnostic << "\n";
    ok = ok && s.positive;
  }
  out << "status: " << (ok ? "pass" : "fail") << "\n";
  return ok ? kOk : kValidationFailure;
}

int cmd_sweep(const SweepRequest& request, std::ostream& out, std::ostream& err) {
  if (request.kappas.empty() && request.sigmas.empty()) {
    out << "no variants: nothing to run\n";
    return kOk;
  }
  Loaded l = load(request.base, err);
  if (l.code != kOk) return l.code;
  const ScenarioConfig& base = l.scenario;

  struct Variant {
    std::string sigma;
    std::string kappa_token;
    ScenarioConfig scenario;
    std::string error;
    int code = kOk;
    std::optional<LyapunovReport> report;
    double steady = 0.0;
  };
  std::vector<Variant> variants;
  const std::vector<std::string> sigmas =
      request.sigmas.empty() ? std::vector<std::string>{std::string(to_string(base.coupling.family()))} : request.sigmas;
  const std::vector<std::string> kappas = request.kappas.empty() ? std::vector<std::string>{fmt(base.kappa, "%.17g")}
                                                                 : request.kappas;
  for (const std::string& s : sigmas) {
    for (const std::string& k : kappas) {
      Variant v;
      v.sigma = s;
      v.kappa_token = k;
      try {
        Overrides o;
        o.sigma = s;
        ScenarioConfig sc = apply_overrides(base, o);
        sc.kappa = parse_kappa_token(k, scenario_constants(sc).kappa_star);
        sc.validate();
        v.scenario = std::move(sc);
      } catch (const std::exception& e) {
        v.error = e.what();
        v.code = kValidationFailure;
      }
      variants.push_back(std::move(v));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < variants.size(); i = next++) {
      Variant& v = variants[i];
      if (v.code != kOk) continue;
      try {
        const SolutionTrace trace = simulate(v.scenario);
        v.report = audit_trace(trace, v.scenario, v.scenario.integrator);
        v.steady = steady_state_mismatch(trace, v.scenario.integrator.t_end);
        if (!v.report->passed()) v.code = kAuditFailure;
      } catch (const IntegratorError& e) {
        v.error = e.what();
        v.code = kIntegratorFailure;
      }
    }
  };
  unsigned threads = request.threads ? request.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(variants.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  int code = kOk;
  try {
    std::filesystem::create_directories(request.base.out_dir);
    std::ofstream csv(request.base.out_dir / "sweep.csv");
    if (!csv) throw std::runtime_error("cannot write sweep.csv");
    csv << "sigma,kappa,kappa_star,T,reach_time,bound_certified,steady_state_mismatch,final_mismatch,status,error\n";
    for (const Variant& v : variants) {
      csv << v.sigma << ',';
      if (v.report) {
        const LyapunovReport& r = *v.report;
        csv << fmt(r.kappa) << ',' << (r.constants.kappa_star ? fmt(*r.constants.kappa_star) : "") << ','
            << (r.constants.bound ? fmt(r.constants.bound->T) : "") << ',' << (r.reach_time ? fmt(*r.reach_time) : "")
            << ',' << (r.bound_certified() ? 1 : 0) << ',' << fmt(v.steady) << ',' << fmt(r.final_mismatch) << ','
            << (r.passed() ? "pass" : "fail") << ",\n";
      } else {
        csv << v.kappa_token << ",,,,,,,error," << '"' << v.error << "\"\n";
      }
    }
    for (const Variant& v : variants)
      if (v.report) append_summary(request.base.out_dir / "results.csv", *v.report);
  } catch (const std::exception& e) {
    err << "output: " << e.what() << "\n";
    return kUsage;
  }

  for (const Variant& v : variants) {
    if (!v.error.empty()) err << "variant sigma=" << v.sigma << " kappa=" << v.kappa_token << ": " << v.error << "\n";
    if (v.code == kIntegratorFailure || v.code == kValidationFailure) code = std::max(code, int(kIntegratorFailure));
    if (v.code == kAuditFailure && code == kOk) code = kAuditFailure;
  }

  std::map<std::string, std::vector<const Variant*>> by_sigma;
  for (const Variant& v : variants)
    if (v.report) by_sigma[v.sigma].push_back(&v);
  for (auto& [sigma, list] : by_sigma) {
    std::sort(list.begin(), list.end(), [](const Variant* a, const Variant* b) { return a->scenario.kappa < b->scenario.kappa; });
    out << "sweep[" << sigma << "]:";
    for (const Variant* v : list) out << " kappa=" << fmt(v->scenario.kappa, "%.6g") << " steady=" << fmt(v->steady, "%.6g");
    out << "\n";
    bool monotone = true;
    for (std::size_t k = 1; k < list.size(); ++k) monotone = monotone && list[k]->steady <= list[k - 1]->steady + 1e-12;
    out << "trend[" << sigma << "]: steady-state mismatch " << (monotone ? "nonincreasing" : "NOT monotone")
        << " in kappa\n";
    out << "certified[" << sigma << "]:";
    bool any = false;
    for (const Variant* v : list) {
      if (v->report->bound_certified()) {
        out << " kappa=" << fmt(v->scenario.kappa, "%.6g");
        any = true;
      }
    }
    out << (any ? "\n" : " none\n");
  }
  return code;
}

int cmd_audit(const std::filesystem::path& trace_path, const RunManifest& manifest, std::ostream& out,
              std::ostream& err) {
  Loaded l = load(manifest, err);
  if (l.code != kOk) return l.code;
  SolutionTrace trace;
  try {
    trace = read_trace_csv(trace_path, &l.scenario.graph);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  LyapunovReport report;
  try {
    report = audit_trace(trace, l.scenario, l.scenario.integrator);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  out << report.to_text();
  report_nonconvergence(report, out);
  return report.passed() ? kOk : kAuditFailure;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hysync: hybrid-coupling synchronization of heterogeneous phase oscillators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hysync 1.0.0");

  RunManifest manifest;
  std::optional<std::string> out_flag;
  std::optional<std::string> sliding;
  std::optional<double> validate_delta;
  std::string validate_path;
  std::string trace_path;
  SweepRequest sweep;

  auto add_scenario_options = [&](CLI::App* sub) {
    sub->add_option("--scenario", manifest.scenario, "Scenario TOML file")->required()->check(CLI::ExistingFile);
    sub->add_option("--sigma", manifest.overrides.sigma, "Coupling: sign, ramp, sine_plus_ramp or table:<path>");
    sub->add_option("--kappa", manifest.overrides.kappa, "Coupling gain");
    sub->add_option("--delta", manifest.overrides.delta, "Hysteresis half-width delta in (0, pi)");
    sub->add_option("--step", manifest.overrides.step, "Flow step h");
    sub->add_option("--t-end", manifest.overrides.t_end, "Final flow time");
    sub->add_option("--sliding", sliding, "Sliding treatment: chatter or eqctl")
        ->check(CLI::IsMember({"chatter", "eqctl", "equivalent_control"}));
    sub->add_option("--seed", manifest.overrides.seed, "Parameter seed (grid models)");
    sub->add_option("--record-every", manifest.overrides.record_every, "Keep every k-th flow sample");
    sub->add_flag("--no-coupling", manifest.overrides.no_coupling, "Set kappa = 0 (no communication layer)");
    sub->add_option("--out", out_flag, "Output directory")->envname("HYSYNC_OUT");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate a scenario, write its trace, audit and summary row");
  add_scenario_options(run);
  run->add_flag("--radial", manifest.radial, "Also write the polar phase plot data");

  CLI::App* validate = app.add_subcommand("validate", "Check a coupling spec or communication graph");
  validate->add_option("path", validate_path, "Coupling or graph TOML, or a two-column coupling table")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--delta", validate_delta, "delta for bare coupling tables (default pi/4)");

  CLI::App* sw = app.add_subcommand("sweep", "Run kappa / sigma variants of a scenario concurrently");
  add_scenario_options(sw);
  sw->add_option("--kappas", sweep.kappas, "Comma-separated gains; 'kstar' multiples allowed (2kstar)")->delimiter(',');
  sw->add_option("--sigmas", sweep.sigmas, "Comma-separated coupling families")->delimiter(',');
  sw->add_option("--threads", sweep.threads, "Worker threads (default: hardware concurrency)");

  CLI::App* audit = app.add_subcommand("audit", "Re-audit a trace CSV against its scenario");
  add_scenario_options(audit);
  audit->add_option("--trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (sliding) manifest.overrides.sliding = parse_sliding_mode(*sliding);
  manifest.out_dir = default_out_dir(out_flag);

  if (run->parsed()) return cmd_run(manifest, out, err);
  if (validate->parsed()) return cmd_validate(validate_path, validate_delta, out, err);
  if (sw->parsed()) {
    sweep.base = manifest;
    return cmd_sweep(sweep, out, err);
  }
  if (audit->parsed()) return cmd_audit(trace_path, manifest, out, err);
  return kUsage;
}

}  // namespace hysync::cli
