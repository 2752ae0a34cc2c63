#pragma once

// Command-line front end: run, sweep, feasibility, figures.
//
// Exit codes
//   0  success
//   1  usage or parse error
//   2  validation error (nothing is written)
//   3  run failure or I/O error
//   4  feasibility search found no feasible point

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "twopoint/analysis.hpp"
#include "twopoint/errors.hpp"
#include "twopoint/figures.hpp"
#include "twopoint/io.hpp"
#include "twopoint/scenario_file.hpp"
#include "twopoint/sim.hpp"
#include "twopoint/svg.hpp"

namespace twopoint {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitRunFailure = 3,
  kExitInfeasible = 4,
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("error writing '" + path.string() + "'");
}

inline void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitRunFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
}

// "key=v1,v2,..." or "key=lo:hi:n".
inline std::pair<std::string, std::vector<double>> parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("grid '" + text + "' is not key=values");
  const std::string key = text.substr(0, eq);
  const std::string body = text.substr(eq + 1);
  std::vector<double> values;
  if (body.find(':') != std::string::npos) {
    const auto parts = split(body, ':');
    if (parts.size() != 3) throw ParseError("grid '" + text + "' range must be lo:hi:n");
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double n = to_double(parts[2]);
    if (n < 2 || n != std::floor(n) || n > 1e7) {
      throw ParseError("grid '" + text + "' needs an integer count >= 2");
    }
    values = FeasibilityGrid::linspace(lo, hi, static_cast<std::size_t>(n));
  } else {
    for (const auto& p : split(body, ',')) values.push_back(to_double(p));
  }
  if (values.empty()) throw ParseError("grid '" + text + "' has no values");
  return {key, values};
}

inline std::string axis_text(const std::string& key, const std::string& spec,
                             const std::vector<double>& values) {
  const std::string body = spec.substr(spec.find('=') + 1);
  std::string out = key + "=";
  if (body.find(':') != std::string::npos) {
    out += fmt(values.front()) + ":" + fmt(values.back()) + ":" + std::to_string(values.size());
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + fmt(values[i]);
  }
  return out;
}

}  // namespace detail

struct RunOptions {
  std::string scenario;
  std::vector<std::string> overrides;
  std::string out;  // empty: use the scenario's [output] directory
};

inline int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    ScenarioConfig cfg;
    try {
      cfg = load_scenario_file(opt.scenario, opt.overrides);
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return int(kExitUsage);
    }
    const RunRecord rec = simulate(cfg.scenario);

    const std::filesystem::path dir = opt.out.empty() ? cfg.output.directory : opt.out;
    const std::string stem = std::filesystem::path(opt.scenario).stem().string();
    detail::make_dir(dir);
    std::ostringstream metrics;
    write_metrics(metrics, rec);
    detail::write_file(dir / (stem + ".metrics.txt"), metrics.str());
    if (cfg.output.emit_csv) {
      std::ostringstream csv;
      write_run_csv(csv, rec);
      detail::write_file(dir / (stem + ".csv"), csv.str());
    }
    if (cfg.output.emit_svg) {
      std::ostringstream svg;
      write_svg_plot(svg, lateral_plot({rec}, {stem}));
      detail::write_file(dir / (stem + ".svg"), svg.str());
    }
    out << metrics.str();
    if (!rec.ok()) {
      err << "run " << to_string(rec.status) << ": " << rec.reason << '\n';
      return int(kExitRunFailure);
    }
    return int(kExitOk);
  });
}

struct SweepOptions {
  std::string scenario;
  std::vector<std::string> overrides;
  std::vector<std::string> grid;
  std::string out;
  unsigned threads = 0;
};

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    ScenarioConfig cfg;
    try {
      cfg = load_scenario_file(opt.scenario, opt.overrides);
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return int(kExitUsage);
    }
    if (opt.grid.empty()) throw ParseError("sweep needs at least one --grid axis");
    std::vector<SweepAxis> axes;
    for (const auto& g : opt.grid) {
      auto [key, values] = detail::parse_axis(g);
      axes.push_back({key, values});
    }
    validate_axes(axes);
    // Every axis value must give a valid scenario on its own before anything runs.
    for (const auto& a : axes) {
      for (double v : a.values) {
        Scenario sc = cfg.scenario;
        apply_parameter(sc, a.key, v);
        try {
          sc.validate();
        } catch (const ValidationError&) {
          throw;
        } catch (const Error& e) {
          throw ValidationError(a.key + "=" + fmt(v) + ": " + e.what());
        }
      }
    }

    const auto points = sweep(cfg.scenario, axes, opt.threads);
    std::ostringstream csv;
    write_sweep_csv(csv, axes, points);
    const std::filesystem::path dir = opt.out.empty() ? cfg.output.directory : opt.out;
    detail::make_dir(dir);
    detail::write_file(dir / "sweep.csv", csv.str());
    out << csv.str();
    const bool all_ok = std::all_of(points.begin(), points.end(), [](const SweepPoint& p) {
      return p.status == RunStatus::kCompleted;
    });
    if (!all_ok) {
      err << "some sweep points did not complete\n";
      return int(kExitRunFailure);
    }
    return int(kExitOk);
  });
}

struct FeasibilityOptions {
  FeasibilityInputs inputs;
  std::vector<std::string> grid;
  std::string out;
  std::size_t max_reports = 10;
};

inline const std::vector<std::string>& default_feasibility_grid() {
  static const std::vector<std::string> g = {"gamma=0.62:0.999:50", "lambda0=0.05:0.95:50",
                                             "k=0.01:0.2:50"};
  return g;
}

inline int cmd_feasibility(const FeasibilityOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const FeasibilityInputs& in = opt.inputs;
    auto positive = [](double v) { return v > 0.0 && !std::isnan(v); };
    if (!(positive(in.v) && std::isfinite(in.v) && positive(in.lane_width) &&
          std::isfinite(in.lane_width) && std::isfinite(in.kappa0) && positive(in.C1) &&
          positive(in.C2) && positive(in.C3))) {
      throw ParseError("v, W, C1, C2, C3 must be positive and kappa0 finite");
    }
    if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw ParseError("alpha must lie in (0, 1)");

    std::vector<std::string> specs = default_feasibility_grid();
    for (const auto& g : opt.grid) {
      const std::string key = g.substr(0, g.find('='));
      auto it = std::find_if(specs.begin(), specs.end(), [&](const std::string& s) {
        return s.substr(0, s.find('=')) == key;
      });
      if (it == specs.end()) throw ParseError("unknown feasibility axis '" + key + "'");
      *it = g;
    }
    FeasibilityGrid grid;
    std::vector<std::string> grid_text;
    for (const auto& s : specs) {
      auto [key, values] = detail::parse_axis(s);
      for (double v : values) {
        if (!std::isfinite(v)) throw ParseError("grid '" + s + "' has a non-finite value");
      }
      grid_text.push_back(detail::axis_text(key, s, values));
      if (key == "gamma") grid.gamma = values;
      if (key == "lambda0") grid.lambda0 = values;
      if (key == "k") grid.k = values;
    }
    for (double k : grid.k) {
      if (!(k > 0.0)) throw ParseError("grid k values must be positive");
    }

    const auto reports = find_feasible(in, grid);
    const std::size_t total = grid.gamma.size() * grid.lambda0.size() * grid.k.size();
    out << "feasible " << reports.size() << " of " << total << '\n';
    for (std::size_t i = 0; i < std::min(opt.max_reports, reports.size()); ++i) {
      write_feasibility_report(out, reports[i]);
    }
    if (!opt.out.empty()) {
      std::ostringstream csv;
      write_feasible_set(csv, in, grid_text, grid, reports);
      detail::make_dir(opt.out);
      detail::write_file(std::filesystem::path(opt.out) / "feasible_set.csv", csv.str());
    }
    return int(reports.empty() ? kExitInfeasible : kExitOk);
  });
}

inline int cmd_figures(const std::string& out_dir, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    std::vector<RunRecord> runs;
    std::vector<std::string> labels;
    for (double k : figure_gains()) {
      runs.push_back(run(lane_change_scenario(k)));
      labels.push_back(gain_label(k));
      if (!runs.back().ok()) {
        err << "lane change with " << labels.back() << " " << to_string(runs.back().status)
            << ": " << runs.back().reason << '\n';
        return int(kExitRunFailure);
      }
    }
    const RunRecord corner = run_corner(corner_scenario(0.5));
    if (!corner.ok()) {
      err << "corner run " << to_string(corner.status) << ": " << corner.reason << '\n';
      return int(kExitRunFailure);
    }
    const std::filesystem::path dir = out_dir;
    detail::make_dir(dir);
    std::ostringstream fig3, fig4, fig_corner;
    write_svg_plot(fig3, lateral_plot(runs, labels));
    write_svg_plot(fig4, lateral_rate_plot(runs, labels));
    write_svg_plot(fig_corner, corner_plot(corner, "vehicle (two-point)"));
    detail::write_file(dir / "fig3.svg", fig3.str());
    detail::write_file(dir / "fig4.svg", fig4.str());
    detail::write_file(dir / "corner.svg", fig_corner.str());
    for (std::size_t i = 0; i < runs.size(); ++i) {
      out << labels[i] << ": final_lateral=" << fmt(runs[i].metrics.final_lateral)
          << " lateral_rate_sign_changes=" << runs[i].metrics.lateral_rate_sign_changes << '\n';
    }
    out << "corner: kappa_e=" << fmt(corner.metrics.kappa_e.value_or(0.0))
        << " steady_lateral=" << fmt(corner.metrics.steady_lateral.value_or(0.0)) << '\n';
    out << "wrote fig3.svg fig4.svg corner.svg to " << dir.string() << '\n';
    return int(kExitOk);
  });
}

/// Parses argv-style arguments (without the program name) and dispatches.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-point steering planner: simulate, sweep and check parameters."};
  app.name("twopoint");
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario file");
  run_cmd->add_option("--scenario", run_opt.scenario, "Scenario file")->required();
  run_cmd->add_option("--set", run_opt.overrides, "Override section.key=value (repeatable)");
  run_cmd->add_option("--out", run_opt.out, "Output directory");

  SweepOptions sweep_opt;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep_cmd->add_option("--scenario", sweep_opt.scenario, "Scenario file")->required();
  sweep_cmd->add_option("--set", sweep_opt.overrides, "Override section.key=value (repeatable)");
  sweep_cmd->add_option("--grid", sweep_opt.grid, "Axis key=v1,v2,... or key=lo:hi:n")
      ->required();
  sweep_cmd->add_option("--out", sweep_opt.out, "Output directory");
  sweep_cmd->add_option("--threads", sweep_opt.threads, "Worker threads (0 = hardware)");

  FeasibilityOptions feas_opt;
  auto* feas_cmd = app.add_subcommand("feasibility", "Grid search for feasible parameters");
  feas_cmd->add_option("--v", feas_opt.inputs.v, "Speed, m/s")->required();
  feas_cmd->add_option("--W", feas_opt.inputs.lane_width, "Lane width, m")->required();
  feas_cmd->add_option("--kappa0", feas_opt.inputs.kappa0, "Corner curvature, 1/m")->required();
  feas_cmd->add_option("--C1", feas_opt.inputs.C1, "Bound on |dtheta|, rad")->required();
  feas_cmd->add_option("--C2", feas_opt.inputs.C2, "Bound on |dtheta_dot|, rad/s")->required();
  feas_cmd->add_option("--C3", feas_opt.inputs.C3, "Bound on steady lateral offset, m")
      ->required();
  feas_cmd->add_option("--alpha", feas_opt.inputs.alpha, "Near/far blend")
      ->capture_default_str();
  feas_cmd->add_option("--grid", feas_opt.grid, "gamma|lambda0|k = lo:hi:n or v1,v2,...");
  feas_cmd->add_option("--out", feas_opt.out, "Directory for feasible_set.csv");
  feas_cmd->add_option("--max-reports", feas_opt.max_reports, "Reports printed to stdout")
      ->capture_default_str();

  std::string fig_out;
  auto* fig_cmd = app.add_subcommand("figures", "Write lane-change and corner plots");
  fig_cmd->add_option("--out", fig_out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (*run_cmd) return cmd_run(run_opt, out, err);
  if (*sweep_cmd) return cmd_sweep(sweep_opt, out, err);
  if (*feas_cmd) return cmd_feasibility(feas_opt, out, err);
  return cmd_figures(fig_out, out, err);
}

}  // namespace twopoint
