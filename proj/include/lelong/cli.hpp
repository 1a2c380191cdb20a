#pragma once

// Command-line front end. Exit codes: 0 success, 1 quadrature non-convergence
// (partial reports still written), 2 configuration or output errors.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lelong/pipeline.hpp"

namespace lelong {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNonConvergence = 1;
inline constexpr int kExitConfig = 2;

inline constexpr const char* kOutDirEnv = "LELONG_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "lelong-out";

namespace detail {

inline std::string console_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline void print_table_brief(std::ostream& out, const Table& t, std::size_t max_rows = 12) {
  out << "[" << t.name << "]\n";
  for (const auto& h : t.headers) out << "  " << h;
  out << '\n';
  for (std::size_t r = 0; r < std::min(max_rows, t.rows.size()); ++r) {
    for (const auto& c : t.rows[r]) {
      out << "  ";
      if (const auto* d = std::get_if<double>(&c)) out << console_number(*d);
      else out << format_cell(c);
    }
    out << '\n';
  }
  if (t.rows.size() > max_rows) out << "  ... " << t.rows.size() - max_rows << " more rows\n";
}

}  // namespace detail

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format;
  bool refine = false;
  std::optional<double> tol;
  std::string lambda;
  std::vector<double> s0{1.0, 2.0, 10.0};
  std::string current;  // built-in current name for profile
};

inline ExperimentConfig resolve_config(const CliOptions& o) {
  ExperimentConfig cfg = o.config_path.empty() ? parse_config(json::object()) : load_config(o.config_path);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.visibility.seed = *o.seed;
  }
  if (o.tol) {
    cfg.tol.rel = *o.tol;
    try {
      cfg.tol.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--tol: ") + e.what());
    }
  }
  if (!o.lambda.empty()) cfg = with_lambda(cfg, 1.0, parse_lambda(o.lambda));
  if (!o.current.empty()) {
    bool found = false;
    for (const auto& [name, doc] : builtin_current_docs()) {
      if (name == o.current) {
        cfg.current_doc = doc;
        cfg.current = parse_current(doc, cfg.singularity());
        found = true;
      }
    }
    if (!found) throw ConfigError("--current: unknown built-in current '" + o.current + "' (bump, cauchy, algebraic)");
  }
  return cfg;
}

inline std::string resolve_out_dir(const CliOptions& o, const ExperimentConfig& cfg) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return kDefaultOutDir;
}

/// Parses argv, runs the subcommand, writes reports and prints a short summary.
inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Mass profiles, kernel bounds and recurrence indicators for harmonic currents near a hyperbolic singularity",
               "lelong"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  CliOptions o;
  app.add_option("--config", o.config_path, "experiment JSON config");
  app.add_option("--seed", o.seed, "seed for sampled quantities");
  app.add_option("--out", o.out_dir, std::string("output directory (default $") + kOutDirEnv + " or " + kDefaultOutDir + ")");
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--refine", o.refine, "repeat on refined grids or tolerances and report the drift");
  app.add_option("--tol", o.tol, "relative quadrature tolerance");
  app.add_option("--gamma-from-lambda", o.lambda, "eigenvalue ratio: i, 1+i, -1+i, a+bi or a,b");

  auto* profile = app.add_subcommand("profile", "mass profile G(r) and its kernel bound");
  profile->add_option("--current", o.current, "built-in current: bump, cauchy, algebraic");
  auto* kernel = app.add_subcommand("kernel-bound", "kernel values against the comparator on the (s, y) grid");
  auto* regimes = app.add_subcommand("regimes", "sampled Poisson-kernel regime constants");
  auto* oracle = app.add_subcommand("oracle", "exponential moment against its closed form");
  oracle->add_option("--s0", o.s0, "lower limits (>= 1)");
  auto* recurrence = app.add_subcommand("recurrence", "visibility, Poincare mass and pushforward checks");
  auto* all = app.add_subcommand("all", "the full default suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string command = "lelong";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" || a == "--config") {
      ++i;  // paths do not affect results
      continue;
    }
    command += " " + a;
  }

  ReportBundle bundle;
  std::string dir;
  std::string format;
  try {
    const ExperimentConfig cfg = resolve_config(o);
    dir = resolve_out_dir(o, cfg);
    format = o.format.empty() ? cfg.format : o.format;
    bundle = make_bundle(cfg, command);
    if (*oracle) {
      run_oracle(bundle, o.s0, {1e-12, 1e-15});
      for (const auto& row : bundle.tables.back().rows) {
        out << "s0 = " << detail::console_number(std::get<double>(row[0]))
            << "  computed " << detail::console_number(std::get<double>(row[1]))
            << "  expected " << detail::console_number(std::get<double>(row[2])) << '\n';
      }
    } else if (*profile) {
      Table summary = profile_summary_table();
      run_profile(bundle, cfg, cfg.current, "", o.refine, summary);
      bundle.tables.push_back(std::move(summary));
    } else if (*kernel) {
      Table summary = kernel_summary_table();
      run_kernel_bound(bundle, cfg, cfg.singularity().lambda(), "", o.refine, summary);
      bundle.tables.push_back(std::move(summary));
    } else if (*regimes) {
      run_regimes(bundle, cfg);
    } else if (*recurrence) {
      run_recurrence(bundle, cfg);
    } else if (*all) {
      run_all(bundle, cfg, o.refine);
    }
  } catch (const QuadratureError& e) {
    err << "lelong: numerical non-convergence: " << e.what() << '\n';
    bundle.converged = false;
    bundle.warn(e.what());
    if (dir.empty()) return kExitNonConvergence;
  } catch (const OutputError& e) {
    err << "lelong: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {  // ConfigError and argument validation
    err << "lelong: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "lelong: config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto written = emit_reports(bundle, dir, format);
    for (const auto& t : bundle.tables) {
      if (!*oracle) detail::print_table_brief(out, t);
    }
    for (const auto& w : bundle.warnings) err << "warning: " << w << '\n';
    out << "wrote " << written.size() << " file(s) to " << dir << '\n';
  } catch (const OutputError& e) {
    err << "lelong: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!bundle.converged) {
    err << "lelong: some quantities did not reach tolerance; reports are flagged partial\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

}  // namespace lelong
