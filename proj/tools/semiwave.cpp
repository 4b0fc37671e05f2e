// semiwave: batch runner for the ray / Wigner-measure experiments.

#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semiwave/config.hpp"
#include "semiwave/counterexample.hpp"
#include "semiwave/errors.hpp"
#include "semiwave/hamiltonian.hpp"
#include "semiwave/helmholtz1d.hpp"
#include "semiwave/io.hpp"
#include "semiwave/parallel.hpp"
#include "semiwave/raymeasure.hpp"
#include "semiwave/wkb.hpp"

namespace fs = std::filesystem;
using namespace semiwave;

namespace {

/// Compact label for file and op names (%g), not for stored values.
std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

json report_json(const HypothesisReport& r) {
  json j{{"hypothesis", to_string(r.id)},
         {"verdict", to_string(r.verdict)},
         {"measure_estimate", r.measure_estimate},
         {"witnesses", r.witnesses.size()},
         {"counting_measure", r.counting_measure},
         {"null_singletons_measure", r.null_singletons_measure},
         {"convention", to_string(r.convention)},
         {"samples", r.samples},
         {"failed_integrations", r.failed_integrations},
         {"T_max", r.T_max},
         {"escape_radius", r.escape_radius}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

/// Run directory, log appenders and the per-task status.
class Run {
 public:
  explicit Run(Config cfg) : cfg_(std::move(cfg)) {
    dir_ = fs::path(cfg_.get("run.output_dir")) / cfg_.get("run.id");
    fs::create_directories(dir_);
    log_ = std::make_unique<JsonlWriter>(dir_ / "run_log.jsonl");
    timings_ = std::make_unique<JsonlWriter>(dir_ / "timings.jsonl");
  }

  const Config& cfg() const { return cfg_; }
  const fs::path& dir() const { return dir_; }

  /// Runs one task, logging its result or its error.
  template <typename F>
  void task(const std::string& op, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    json record{{"run_id", cfg_.get("run.id")}, {"config_hash", cfg_.hash()}, {"op", op}};
    try {
      json result = body();
      record["status"] = "ok";
      record["result"] = std::move(result);
      std::cout << op << ": ok\n";
    } catch (const ConfigError& e) {
      record["status"] = "config-error";
      record["error"] = e.what();
      std::cerr << op << ": " << e.what() << "\n";
      ++config_failures_;
    } catch (const std::exception& e) {
      record["status"] = "error";
      record["error"] = e.what();
      std::cerr << op << ": " << e.what() << "\n";
      ++failures_;
    }
    log_->append(record);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings_->append(json{{"op", op}, {"seconds", seconds}});
  }

  int exit_code() const {
    if (config_failures_ > 0) return 2;
    return failures_ == 0 ? 0 : 1;
  }

 private:
  Config cfg_;
  fs::path dir_;
  std::unique_ptr<JsonlWriter> log_;
  std::unique_ptr<JsonlWriter> timings_;
  int failures_ = 0;
  int config_failures_ = 0;
};

struct Problem {
  PotentialSpec pot;
  EnergySpec espec;
  SourceProfile profile;
  Vec base;
};

Problem problem_from(const Config& cfg) {
  Problem p;
  p.pot = potential_from(cfg);
  p.espec = energy_from(cfg, p.pot);
  p.profile = source_from(cfg, p.pot.dimension());
  p.base = source_base(cfg, p.pot.dimension());
  return p;
}

Observable main_observable(const Config& cfg, const Problem& p) {
  return observable_from(cfg, "observable", p.pot.dimension(), p.pot, p.espec.E0);
}

void cmd_flow(Run& run) {
  run.task("flow", [&] {
    const Config& cfg = run.cfg();
    const PotentialSpec pot = potential_from(cfg);
    const int n = pot.dimension();
    const auto xs = cfg.numbers("flow.x"), ks = cfg.numbers("flow.xi");
    if (static_cast<int>(xs.size()) != n || static_cast<int>(ks.size()) != n) {
      throw ConfigError("flow.x and flow.xi need " + std::to_string(n) + " values each");
    }
    const PhasePointd start(Eigen::Map<const Vec>(xs.data(), n), Eigen::Map<const Vec>(ks.data(), n));
    FlowOptions opts;
    opts.tol = cfg.number("flow.tol");
    opts.sample_dt = cfg.number("flow.sample_dt");
    const Trajectory traj = flow(pot, start, cfg.number("flow.t_end"), opts);

    std::vector<std::string> header{"t"};
    for (int i = 0; i < n; ++i) header.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) header.push_back("xi" + std::to_string(i));
    header.push_back("action");
    header.push_back("energy");
    CsvWriter csv(run.dir() / "trajectory.csv", header);
    const double p0 = 0.5 * start.xi.squaredNorm() + pot.value(start.x);
    double drift = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const auto& pt = traj.points[k];
      const double p = 0.5 * pt.xi.squaredNorm() + pot.value(pt.x);
      drift = std::max(drift, std::abs(p - p0));
      std::vector<double> row{traj.times[k]};
      for (int i = 0; i < n; ++i) row.push_back(pt.x(i));
      for (int i = 0; i < n; ++i) row.push_back(pt.xi(i));
      row.push_back(traj.action[k]);
      row.push_back(p);
      csv.row(row);
    }
    const double limit = cfg.number("flow.energy_tol") * (1.0 + std::abs(p0));
    if (drift > limit) {
      throw Error("energy drift " + format_number(drift) + " exceeds " + format_number(limit));
    }
    return json{{"potential", pot.id()},
                {"samples", traj.times.size()},
                {"turning_count", traj.turning_count},
                {"action", traj.action.back()},
                {"energy_drift", drift}};
  });
}

void cmd_check_hyp(Run& run) {
  const Config& cfg = run.cfg();
  const Problem p = problem_from(cfg);
  const auto convention = parse_singleton_convention(cfg.get("hypothesis.convention"));
  for (const auto& name : cfg.words("hypothesis.check")) {
    run.task("check-hyp " + name, [&] {
      json out{{"potential", p.pot.id()}};
      if (name == "H2") {
        out.update(report_json(check_nontrapping(
            p.pot, p.espec, cfg.number("hypothesis.escape_radius"), cfg.number("hypothesis.T_max"),
            cfg.integer("hypothesis.n_dirs"), cfg.integer("hypothesis.n_radii"))));
      } else if (name == "H5") {
        ReturnSetOptions opts;
        opts.escape_radius = cfg.number("hypothesis.escape_radius");
        opts.convention = convention;
        auto r = return_set_measure(p.pot, p.espec, p.base, p.base, cfg.number("hypothesis.T_max"),
                                    std::max(64, cfg.integer("hypothesis.n_dirs")), 0.0, opts);
        r.id = Hypothesis::H5;
        out.update(report_json(r));
      } else if (name == "H8") {
        const int n = p.pot.dimension();
        const auto other = cfg.numbers("hypothesis.second_source");
        if (static_cast<int>(other.size()) != n) {
          throw ConfigError("hypothesis.second_source: expected " + std::to_string(n) + " values");
        }
        const Vec x2 = Eigen::Map<const Vec>(other.data(), n);
        ReturnSetOptions opts;
        opts.convention = convention;
        json both = json::array();
        Verdict worst = Verdict::holds;
        for (int k = 0; k < 2; ++k) {
          auto r = return_set_measure(p.pot, p.espec, k == 0 ? p.base : x2, k == 0 ? x2 : p.base,
                                      cfg.number("hypothesis.T_max"), 64, 0.0, opts);
          r.id = Hypothesis::H8;
          if (r.verdict == Verdict::fails) worst = Verdict::fails;
          if (r.verdict == Verdict::inconclusive && worst == Verdict::holds) {
            worst = Verdict::inconclusive;
          }
          both.push_back(report_json(r));
        }
        out["hypothesis"] = "H8";
        out["verdict"] = to_string(worst);
        out["directions"] = both;
      } else {
        throw ConfigError("hypothesis.check: unknown hypothesis '" + name + "'");
      }
      std::cout << "  " << name << " " << out["verdict"].get<std::string>() << "\n";
      return out;
    });
  }
}

void cmd_ray_measure(Run& run) {
  run.task("ray-measure", [&] {
    const Config& cfg = run.cfg();
    const Problem p = problem_from(cfg);
    const Observable q = main_observable(cfg, p);
    const MeasurePairing m = pair(q, p.pot, p.espec, p.profile, p.base, rays_from(cfg));
    const int n = p.pot.dimension();
    std::vector<std::string> header;
    for (int i = 0; i < n; ++i) header.push_back("xi" + std::to_string(i));
    for (const char* c : {"weight", "integral", "t_cut", "tail_bound", "escaped"}) {
      header.emplace_back(c);
    }
    CsvWriter csv(run.dir() / "ray_directions.csv", header);
    for (const auto& d : m.directions) {
      std::vector<double> row(d.xi.data(), d.xi.data() + d.xi.size());
      row.insert(row.end(), {d.weight, d.integral, d.t_cut, d.tail_bound, d.escaped ? 1.0 : 0.0});
      csv.row(row);
    }
    std::cout << "  <q, mu> = " << format_number(m.value) << " +- "
              << format_number(m.error_estimate) << "\n";
    return json{{"observable", q.id()},         {"potential", p.pot.id()},
                {"h", nullptr},                 {"value", m.value},
                {"error_estimate", m.error_estimate}, {"t_cut", m.t_cut},
                {"nodes", m.nodes}};
  });
}

void cmd_solve(Run& run) {
  run.task("solve", [&] {
    const Config& cfg = run.cfg();
    const Problem p = problem_from(cfg);
    const double h = cfg.number("solve.h");
    const Grid1D grid = make_grid(p.pot, p.espec, p.profile, h, grid_from(cfg));
    const WaveField u = solve(p.pot, p.espec, p.profile, h, grid);
    if (cfg.flag("solve.write_field")) {
      CsvWriter csv(run.dir() / ("field_h" + short_number(h) + ".csv"), {"x", "re_u", "im_u"});
      for (long i = 0; i < grid.N; ++i) csv.row({grid.x(i), u.values(i).real(), u.values(i).imag()});
    }
    const auto eps = cfg.numbers("solve.eps");
    json masses = json::array();
    for (double e : eps) masses.push_back({{"eps", e}, {"mass", near_origin_mass(u, e)}});
    json out{{"potential", p.pot.id()},
             {"h", h},
             {"unknowns", u.unknowns},
             {"dx", grid.dx},
             {"relative_residual", u.relative_residual()},
             {"solver", u.solver},
             {"near_origin", masses}};
    if (eps.size() >= 2) out["near_origin_slope"] = near_origin_slope(u, eps);
    return out;
  });
}

void cmd_wigner(Run& run) {
  const Config& cfg = run.cfg();
  const Problem p = problem_from(cfg);
  const Observable q = main_observable(cfg, p);
  for (double h : p.espec.h_grid) {
    run.task("wigner h=" + short_number(h), [&] {
      const Grid1D grid = make_grid(p.pot, p.espec, p.profile, h, grid_from(cfg));
      const WaveField u = solve(p.pot, p.espec, p.profile, h, grid);
      const WignerPairing w = wigner_pair(q, u, wigner_from(cfg));
      std::cout << "  h = " << h << ": " << format_number(w.value) << "\n";
      return json{{"observable", q.id()}, {"potential", p.pot.id()}, {"h", h},
                  {"value", w.value},     {"imag", w.imag},           {"lags", w.lags},
                  {"band", w.band}};
    });
  }
}

void cmd_converge(Run& run) {
  run.task("converge", [&] {
    const Config& cfg = run.cfg();
    const Problem p = problem_from(cfg);
    const Observable q = main_observable(cfg, p);
    ConvergenceOptions opts;
    opts.grid = grid_from(cfg);
    opts.wigner = wigner_from(cfg);
    opts.rays = rays_from(cfg);
    opts.convention = parse_singleton_convention(cfg.get("hypothesis.convention"));
    const ConvergenceTable t = convergence_study(q, p.pot, p.espec, p.profile, p.espec.h_grid, opts);
    CsvWriter csv(run.dir() / "convergence.csv", {"h", "value", "ray_prediction", "abs_error"});
    json rows = json::array();
    for (const auto& r : t.rows) {
      csv.row({r.h, r.value, r.ray_prediction, r.abs_error});
      rows.push_back({{"h", r.h},
                      {"value", r.value},
                      {"abs_error", r.abs_error},
                      {"relative_residual", r.relative_residual},
                      {"status", r.status}});
      std::cout << "  h = " << r.h << "  value " << format_number(r.value) << "  |error| "
                << format_number(r.abs_error) << "\n";
    }
    return json{{"observable", q.id()},
                {"potential", p.pot.id()},
                {"ray_prediction", t.ray_prediction},
                {"rows", rows},
                {"extrapolated", t.extrapolated},
                {"observed_order", t.observed_order},
                {"monotone", t.monotone},
                {"notes", t.notes}};
  });
}

void cmd_mu1(Run& run) {
  run.task("mu1", [&] {
    const Config& cfg = run.cfg();
    const Problem p = problem_from(cfg);
    const Observable q = observable_from(cfg, "mu1", p.pot.dimension(), p.pot, p.espec.E0);
    const double h = cfg.number("mu1.h");
    const Grid1D grid = make_grid(p.pot, p.espec, p.profile, h, grid_from(cfg));
    const WaveField u = solve(p.pot, p.espec, p.profile, h, grid);
    const Mu1Check m = mu1_check(q, u, p.espec, p.pot, p.profile, wigner_from(cfg));
    std::cout << "  value " << format_number(m.value) << "  prediction "
              << format_number(m.prediction) << "\n";
    return json{{"observable", q.id()}, {"h", h}, {"value", m.value},
                {"prediction", m.prediction}, {"relative_error", m.relative_error}};
  });
}

void cmd_wkb_compare(Run& run) {
  run.task("wkb-compare", [&] {
    const Config& cfg = run.cfg();
    const Problem p = problem_from(cfg);
    const auto region = cfg.numbers("wkb.region");
    if (region.size() != 2 || !(region[0] < region[1])) {
      throw ConfigError("wkb.region: expected two increasing numbers");
    }
    ChartOptions opts;
    opts.through_caustics = cfg.flag("wkb.through_caustics");
    const LagrangianChart chart = build_chart(p.pot, p.espec, p.base, cfg.number("wkb.t_lo"),
                                              cfg.number("wkb.t_hi"), 2, opts);
    const auto& hs = p.espec.h_grid;
    const auto errors = parallel_map(hs.size(), [&](std::size_t i) {
      const Grid1D grid = make_grid(p.pot, p.espec, p.profile, hs[i], grid_from(cfg));
      const WaveField u = solve(p.pot, p.espec, p.profile, hs[i], grid);
      const WkbField w = wkb_field(chart, p.profile, p.espec, hs[i],
                                   grid_points_in(grid, region[0], region[1]));
      return relative_error(w, u);
    });
    CsvWriter csv(run.dir() / "wkb_error.csv", {"h", "relative_l2_error"});
    json rows = json::array();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      csv.row({hs[i], errors[i]});
      rows.push_back({{"h", hs[i]}, {"error", errors[i]}});
      std::cout << "  h = " << hs[i] << "  error " << format_number(errors[i]) << "\n";
    }
    json out{{"potential", p.pot.id()}, {"rows", rows}, {"warnings", chart.warnings}};
    if (hs.size() >= 2) {
      const std::size_t a = hs.size() - 2, b = hs.size() - 1;
      out["order"] = std::log(errors[a] / errors[b]) / std::log(hs[a] / hs[b]);
    }
    return out;
  });
}

void cmd_counterexample(Run& run) {
  run.task("counterexample", [&] {
    const Config& cfg = run.cfg();
    const Problem p = problem_from(cfg);
    const TwoBranchModel model = build_model(p.pot, p.espec, p.profile, -cfg.number("grid.half_width"));
    const Observable q = observable_from(cfg, "counterexample", 1, p.pot, p.espec.E0);
    const PairingParts parts = pairing_parts(model, q);

    const double lo = cfg.number("counterexample.inv_h_min");
    const double hi = cfg.number("counterexample.inv_h_max");
    const int samples = cfg.integer("counterexample.samples");
    if (!(lo > 0.0) || !(hi > lo) || samples < 5) {
      throw ConfigError("counterexample: need 0 < inv_h_min < inv_h_max and samples >= 5");
    }
    std::vector<double> hs;
    for (int i = 0; i < samples; ++i) hs.push_back(1.0 / (lo + (hi - lo) * i / (samples - 1)));
    ScanOptions scan;
    scan.grid = grid_from(cfg);
    scan.wigner = wigner_from(cfg);
    const OscillationFit fit = measure_oscillation(model, q, hs, scan);

    CsvWriter csv(run.dir() / "oscillation.csv", {"h", "inv_h", "value", "prediction"});
    for (std::size_t i = 0; i < hs.size(); ++i) {
      csv.row({hs[i], 1.0 / hs[i], fit.values[i], fit.predictions[i]});
    }

    const int K = cfg.integer("counterexample.subsequence");
    const double h_max = cfg.number("counterexample.h_max");
    json subsequences = json::object();
    for (double nu : {1.0, -1.0}) {
      const auto hk = subsequence_limits(model, nu, K, h_max);
      const auto values = pairing_scan(q, p.pot, p.espec, p.profile, hk, scan);
      json rows = json::array();
      for (std::size_t i = 0; i < hk.size(); ++i) {
        rows.push_back({{"h", hk[i]}, {"value", values[i]}, {"prediction", predicted_pairing(model, q, hk[i])}});
      }
      subsequences[nu > 0 ? "nu_plus" : "nu_minus"] = rows;
    }

    json summary{{"action", model.action},
                 {"xi0", model.xi0},
                 {"turning_point", model.turning_point},
                 {"maslov", model.maslov},
                 {"theta", model.theta},
                 {"mean_prediction", parts.mean},
                 {"gap_prediction", 4.0 * parts.cross},
                 {"omega", fit.omega},
                 {"omega_relative_error", fit.omega / model.action - 1.0},
                 {"fit_mean", fit.mean},
                 {"fit_amplitude", fit.amplitude},
                 {"fit_phase", fit.phase},
                 {"fit_residual", fit.residual},
                 {"fit_verdict", to_string(fit.verdict)},
                 {"subsequences", subsequences}};
    std::ofstream(run.dir() / "oscillation_fit.json") << summary.dump(2) << "\n";
    std::cout << "  omega " << format_number(fit.omega) << "  action "
              << format_number(model.action) << "\n";
    return summary;
  });
}

int cmd_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    std::cerr << "report: '" << dir.string() << "' is not a directory\n";
    return 1;
  }
  const auto records = read_jsonl(dir / "run_log.jsonl");
  if (records.empty()) {
    std::cout << "no records in " << dir.string() << ": empty table\n";
    return 0;
  }
  std::map<std::string, double> seconds;
  for (const auto& t : read_jsonl(dir / "timings.jsonl")) {
    seconds[t.value("op", "")] += t.value("seconds", 0.0);
  }
  CsvWriter csv(dir / "summary.csv", {"op", "status", "headline", "seconds"});
  std::cout << std::left << std::setw(28) << "op" << " " << std::setw(8) << "status" << "headline\n";
  int failures = 0;
  for (const auto& r : records) {
    const std::string op = r.value("op", "?");
    const std::string status = r.value("status", "?");
    std::string headline;
    if (status != "ok") {
      ++failures;
      headline = r.value("error", "");
    } else {
      const json& res = r["result"];
      for (const char* key : {"verdict", "value", "omega", "order", "near_origin_slope",
                              "relative_error", "extrapolated", "action"}) {
        if (res.contains(key)) {
          headline = std::string(key) + "=" +
                     (res[key].is_string() ? res[key].get<std::string>() : res[key].dump());
          break;
        }
      }
    }
    std::cout << std::left << std::setw(28) << op << " " << std::setw(8) << status << headline << "\n";
    csv.row(std::vector<std::string>{op, status, "\"" + headline + "\"",
                                     format_number(seconds.count(op) ? seconds[op] : 0.0)});
  }
  std::cout << records.size() << " record(s), " << failures << " failed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rays, Wigner pairings and the 1D Helmholtz solver for a concentrated source"};
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  int threads = -1;
  bool print_defaults = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_dir, "output directory (overrides run.output_dir)");
  app.add_option("--set", overrides, "section.key=value override")->take_all();
  app.add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  app.add_flag("--print-defaults", print_defaults, "print the default configuration and exit");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"flow", "integrate one Hamiltonian trajectory"},
      {"check-hyp", "H2 / H5 / H8 hypothesis reports"},
      {"ray-measure", "pair the observable with the ray measure"},
      {"solve", "direct 1D solve and near-origin mass"},
      {"wigner", "Wigner pairing of the solver field for each h"},
      {"converge", "convergence table of Wigner pairings against the ray value"},
      {"mu1", "near-source measure check"},
      {"wkb-compare", "WKB field against the solver"},
      {"counterexample", "oscillating pairing when the return set is not null"},
      {"report", "summarize a run directory"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) subs[name] = app.add_subcommand(name, help);
  std::string report_dir;
  subs["report"]->add_option("--dir", report_dir, "run directory (default: output_dir/run_id)");
  app.require_subcommand(0, 1);

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << Config::defaults_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 0;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    Config cfg = config_path.empty() ? Config() : Config::from_file(config_path);
    for (const auto& o : overrides) cfg.set(o);
    if (!out_dir.empty()) cfg.set("run.output_dir", out_dir);
    set_thread_count(threads >= 0 ? threads : cfg.integer("run.threads"));

    if (cmd == "report") {
      const fs::path dir = report_dir.empty()
                               ? fs::path(cfg.get("run.output_dir")) / cfg.get("run.id")
                               : fs::path(report_dir);
      return cmd_report(dir);
    }

    Run run(cfg);
    std::ofstream(run.dir() / "config.ini") << cfg.serialize();
    if (cmd == "flow") cmd_flow(run);
    else if (cmd == "check-hyp") cmd_check_hyp(run);
    else if (cmd == "ray-measure") cmd_ray_measure(run);
    else if (cmd == "solve") cmd_solve(run);
    else if (cmd == "wigner") cmd_wigner(run);
    else if (cmd == "converge") cmd_converge(run);
    else if (cmd == "mu1") cmd_mu1(run);
    else if (cmd == "wkb-compare") cmd_wkb_compare(run);
    else if (cmd == "counterexample") cmd_counterexample(run);
    return run.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
