#pragma once

// Module pipelines behind the CLI subcommands. Each appends its tables to a
// bundle, forwards module warnings and clears `converged` on partial results.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lelong/config.hpp"
#include "lelong/kernel.hpp"
#include "lelong/mass_profile.hpp"
#include "lelong/recurrence.hpp"
#include "lelong/report.hpp"

namespace lelong {

inline constexpr std::uint64_t kDefaultSeed = 42;

inline ReportBundle make_bundle(const ExperimentConfig& cfg, const std::string& command) {
  ReportBundle b;
  b.metadata = {config_hash(cfg), cfg.seed.value_or(kDefaultSeed), kVersion, command};
  return b;
}

/// Same experiment with the singularity replaced; the current is rebuilt so
/// that default labels follow the new fundamental annulus.
inline ExperimentConfig with_lambda(ExperimentConfig cfg, cplx mu, cplx lambda) {
  cfg.mu = mu;
  cfg.lambda = lambda;
  cfg.current = parse_current(cfg.current_doc, cfg.singularity());
  return cfg;
}

/// "i", "1+i", "-1+i", "2.5i", "a,b" or "a+bi" as a complex number with b > 0 expected.
inline cplx parse_lambda(std::string text) {
  text.erase(std::remove(text.begin(), text.end(), ' '), text.end());
  if (text.empty()) throw ConfigError("lambda: empty value");
  auto number = [&](const std::string& s, const char* what) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !std::isfinite(x)) throw ConfigError(std::string("lambda: cannot read ") + what + " in '" + text + "'");
    return x;
  };
  if (auto comma = text.find(','); comma != std::string::npos) {
    return {number(text.substr(0, comma), "real part"), number(text.substr(comma + 1), "imaginary part")};
  }
  if (text.back() != 'i') return {number(text, "real part"), 0.0};
  const std::string body = text.substr(0, text.size() - 1);
  // split at the last sign that is not an exponent sign or the leading sign
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return {0.0, number(body, "imaginary part")};
  return {number(body.substr(0, split), "real part"), number(body.substr(split), "imaginary part")};
}

inline std::string lambda_label(cplx l) {
  auto trim = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return std::string(buf);
  };
  std::string re = l.real() == 0.0 ? "" : trim(l.real());
  std::string im = l.imag() == 1.0 ? "i" : l.imag() == -1.0 ? "-i" : trim(l.imag()) + "i";
  if (!re.empty() && im.front() != '-') im = "+" + im;
  return re + im;
}

// ---------------------------------------------------------------------------
// oracle

inline void run_oracle(ReportBundle& b, const std::vector<double>& s0s, const Tolerance& tol) {
  Table t{"oracle", {"s0", "computed", "expected", "abs_error", "error_estimate"}, {}};
  for (double s0 : s0s) {
    const auto q = lemma_exp_oracle(s0, tol);
    const double expected = s0 / 2.0 + 0.25;
    if (!q.converged) {
      b.converged = false;
      b.warn("oracle at s0 = " + format_number(s0) + " did not reach tolerance");
    }
    t.add({s0, q.value, expected, std::abs(q.value - expected), q.error});
  }
  b.tables.push_back(std::move(t));
}

// ---------------------------------------------------------------------------
// profile

struct ProfileRun {
  MassProfile profile;
  std::vector<double> bound_ratio;
  std::vector<double> bound_ratio_refined;  // empty without refinement
};

inline const std::vector<std::string>& profile_summary_headers() {
  static const std::vector<std::string> h{"current",        "lambda",       "gamma",          "lelong_estimate",
                                          "decay_ratio",    "fit_intercept", "fit_slope",     "loglog_slope",
                                          "violations",     "bound_ratio_min", "bound_ratio_max", "refinement_drift"};
  return h;
}

/// Mass profile on the r grid, the G-bound table against the kernel pairing
/// and one summary row. With `refine`, the pairing ratio is recomputed at a
/// tenfold tighter tolerance and its relative drift reported.
inline ProfileRun run_profile(ReportBundle& b, const ExperimentConfig& cfg, const CurrentSpec& spec,
                              const std::string& label, bool refine, Table& summary) {
  const Singularity sing = cfg.singularity();
  if (!spec.integrable(sing)) {
    throw ConfigError("current: every noncompact profile needs decay exponent > 1/gamma = " +
                      format_number(1.0 / sing.gamma));
  }
  const std::string suffix = label.empty() ? "" : "_" + label;
  const std::string tag = label.empty() ? "" : label + ": ";
  ProfileRun run;
  run.profile = mass_profile(spec, sing, cfg.r_grid, cfg.tol);
  const auto& prof = run.profile;
  b.warn_all(prof.warnings, tag);
  for (const auto& row : prof.rows) b.converged = b.converged && row.mass.converged;

  Table mp{"mass_profile" + suffix, {"r", "F", "G", "F_err", "G_err", "monotone_violation"}, {}};
  for (const auto& row : prof.rows) {
    mp.add({row.r, row.mass.F, row.mass.G, row.mass.F_err, row.mass.G_err, row.monotone_violation});
  }
  b.tables.push_back(std::move(mp));

  const std::size_t n = cfg.r_grid.size();
  const auto pair = parallel_map<QuadResult>(n, [&](std::size_t i) {
    return kernel_pairing(spec, sing, -std::log(cfg.r_grid[i]), cfg.tol);
  });
  std::vector<MassValue> fine_G;
  std::vector<QuadResult> fine_pair;
  if (refine) {
    const Tolerance fine = cfg.tol.tightened(10.0);
    fine_G = parallel_map<MassValue>(n, [&](std::size_t i) { return mass_G(spec, sing, cfg.r_grid[i], fine); });
    fine_pair = parallel_map<QuadResult>(n, [&](std::size_t i) {
      return kernel_pairing(spec, sing, -std::log(cfg.r_grid[i]), fine);
    });
  }
  std::vector<std::string> gh{"r", "G", "pairing", "ratio", "G_err", "pairing_err", "intermediate_bound"};
  if (refine) {
    gh.push_back("ratio_refined");
    gh.push_back("refinement_drift");
  }
  Table gb{"g_bound" + suffix, gh, {}};
  double drift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = prof.rows[i].mass;
    const double ratio = pair[i].value > 0.0 ? m.G / pair[i].value : 0.0;
    run.bound_ratio.push_back(ratio);
    if (!pair[i].converged) {
      b.converged = false;
      b.warn(tag + "kernel pairing at r = " + format_number(cfg.r_grid[i]) + " did not reach tolerance");
    }
    std::vector<Cell> row{cfg.r_grid[i], m.G, pair[i].value, ratio, m.G_err, pair[i].error,
                          intermediate_bound(sing, pair[i].value)};
    if (refine) {
      const double rf = fine_pair[i].value > 0.0 ? fine_G[i].G / fine_pair[i].value : 0.0;
      const double d = ratio > 0.0 ? std::abs(rf - ratio) / ratio : 0.0;
      run.bound_ratio_refined.push_back(rf);
      drift = std::max(drift, d);
      row.push_back(rf);
      row.push_back(d);
      if (!fine_G[i].converged || !fine_pair[i].converged) {
        b.converged = false;
        b.warn(tag + "refined G bound at r = " + format_number(cfg.r_grid[i]) + " did not reach tolerance");
      }
    }
    gb.add(std::move(row));
  }
  b.tables.push_back(std::move(gb));

  const auto [lo, hi] = std::minmax_element(run.bound_ratio.begin(), run.bound_ratio.end());
  const double first = prof.rows.front().mass.G;
  summary.add({label.empty() ? std::string("config") : label, lambda_label(sing.lambda()), sing.gamma,
               prof.lelong_estimate, first > 0.0 ? prof.lelong_estimate / first : 0.0, prof.fit_intercept,
               prof.fit_slope, prof.loglog_slope.value_or(std::nan("")),
               static_cast<std::int64_t>(prof.violations.size()), *lo, *hi,
               refine ? drift : std::nan("")});
  return run;
}

inline Table profile_summary_table() { return {"profile_summary", profile_summary_headers(), {}}; }

// ---------------------------------------------------------------------------
// kernel-bound

inline Table kernel_summary_table() {
  return {"kernel_summary",
          {"lambda", "gamma", "empirical_c", "refined_c", "refinement_drift", "far_cells", "comparable_cells",
           "near_cells", "failed_cells", "decay_slope"},
          {}};
}

/// Least squares slope of log K_s(0) against log s over s in [8, 128]; nan with fewer than two cells.
inline double kernel_decay_slope(const KernelReport& rep) {
  std::vector<double> x, y;
  auto take = [&](const std::vector<KernelCell>& cells) {
    for (const auto& c : cells) {
      if (c.y == 0.0 && c.s >= 8.0 && c.s <= 128.0 && c.K > 0.0) {
        x.push_back(std::log(c.s));
        y.push_back(std::log(c.K));
      }
    }
  };
  take(rep.cells);
  if (x.size() < 2) return std::nan("");
  return least_squares(x, y).second;
}

inline KernelReport run_kernel_bound(ReportBundle& b, const ExperimentConfig& cfg, cplx lambda, const std::string& label,
                                     bool refine, Table& summary) {
  const Singularity sing = normalize_singularity(cfg.mu, lambda);
  const auto rep = main_bound_report(sing, cfg.s_grid, cfg.y_grid, cfg.tol, refine, cfg.thresholds.c2);
  const std::string tag = label.empty() ? "" : "lambda " + label + ": ";
  b.warn_all(rep.warnings, tag);
  if (rep.failed_cells > 0) b.converged = false;
  Table t{label.empty() ? "kernel" : "kernel_" + label, {"s", "y", "K", "K_err", "bound_ratio"}, {}};
  for (const auto* cells : {&rep.cells, &rep.refined_cells}) {
    for (const auto& c : *cells) t.add({c.s, c.y, c.K, c.K_err, c.bound_ratio});
  }
  b.tables.push_back(std::move(t));
  summary.add({lambda_label(lambda), sing.gamma, rep.empirical_c, rep.refined_c.value_or(std::nan("")),
               rep.refinement_drift.value_or(std::nan("")), static_cast<std::int64_t>(rep.far_cells),
               static_cast<std::int64_t>(rep.comparable_cells), static_cast<std::int64_t>(rep.near_cells),
               static_cast<std::int64_t>(rep.failed_cells), kernel_decay_slope(rep)});
  return rep;
}

// ---------------------------------------------------------------------------
// regimes

struct RegimeComparison {
  RegimeBand base;
  RegimeBand doubled;
  double sup_change = 0.0;  // relative change of the sup under doubled thresholds
  double inf_change = 0.0;
};

inline constexpr RegimePart kAllParts[] = {RegimePart::global_modulus, RegimePart::global_imaginary, RegimePart::far,
                                           RegimePart::near_origin,   RegimePart::diagonal,        RegimePart::boundary_strip};

inline double relative_change(double a, double b) { return a != 0.0 ? std::abs(b - a) / std::abs(a) : std::abs(b); }

inline std::vector<RegimeComparison> regime_comparisons(const Singularity& sing, std::size_t samples, std::uint64_t seed,
                                                        const RegimeThresholds& th) {
  return parallel_map<RegimeComparison>(std::size(kAllParts), [&](std::size_t i) {
    RegimeComparison c;
    c.base = regime_constant_sampler(sing, kAllParts[i], samples, seed, th);
    c.doubled = regime_constant_sampler(sing, kAllParts[i], samples, seed, th.doubled());
    c.sup_change = relative_change(c.base.sup_ratio, c.doubled.sup_ratio);
    c.inf_change = relative_change(c.base.inf_ratio, c.doubled.inf_ratio);
    return c;
  });
}

inline std::vector<RegimeComparison> run_regimes(ReportBundle& b, const ExperimentConfig& cfg) {
  const Singularity sing = cfg.singularity();
  const auto rows = regime_comparisons(sing, cfg.regime_samples, cfg.seed.value_or(kDefaultSeed), cfg.thresholds);
  Table t{"regimes",
          {"part", "gamma", "c2", "c3", "samples", "sup_ratio", "inf_ratio", "sup_ratio_doubled", "inf_ratio_doubled",
           "sup_change", "inf_change", "rejected", "no_root", "max_rho_residual"},
          {}};
  for (const auto& c : rows) {
    t.add({std::string(part_name(c.base.part)), sing.gamma, cfg.thresholds.c2, cfg.thresholds.c3,
           static_cast<std::int64_t>(c.base.samples), c.base.sup_ratio, c.base.inf_ratio, c.doubled.sup_ratio,
           c.doubled.inf_ratio, c.sup_change, c.inf_change, static_cast<std::int64_t>(c.base.rejected),
           static_cast<std::int64_t>(c.base.no_root), std::max(c.base.max_rho_residual, c.doubled.max_rho_residual)});
    if (c.base.no_root > 0) {
      b.warn(std::string(part_name(c.base.part)) + ": " + std::to_string(c.base.no_root) + " samples had no rho root");
    }
  }
  b.tables.push_back(std::move(t));
  return rows;
}

// ---------------------------------------------------------------------------
// recurrence

inline LeafUniformization config_uniformization(const ExperimentConfig& cfg) {
  const Singularity sing = cfg.singularity();
  return uniformize_at(sing, cplx(sing.annulus_mid(), 0.0), halfplane_to_sector(sing, cfg.recurrence_base));
}

inline RecurrenceReport run_recurrence(ReportBundle& b, const ExperimentConfig& cfg) {
  const auto uni = config_uniformization(cfg);
  const auto rep = recurrence_report(uni, cfg.targets, cfg.r_grid, cfg.visibility, cfg.R_grid);
  b.warn_all(rep.warnings);
  Table vis{"visibility", {"target", "r", "N", "N_err", "N_abs_log_r", "horizon"}, {}};
  for (const auto& row : rep.rows) {
    vis.add({row.target, row.value.r, row.value.N, row.value.error, row.scaled, row.value.horizon});
  }
  b.tables.push_back(std::move(vis));
  Table mr{"poincare_mass", {"R", "M_R", "M_R_minus_2piR"}, {}};
  for (const auto& [R, M] : rep.M_R) mr.add({R, M, M - 2.0 * std::numbers::pi * R});
  b.tables.push_back(std::move(mr));
  Table mc{"pushforward_mass", {"R", "mass", "error"}, {}};
  for (const auto& m : rep.mass_checks) mc.add({m.R, m.mass, m.error});
  b.tables.push_back(std::move(mc));
  Table sum{"recurrence_summary", {"M_R_deviation_range", "circle_factor_slope", "eta", "eta_finite_difference"}, {}};
  sum.add({rep.M_R_deviation_range, rep.circle_factor_slope, eta_local(uni), eta_finite_difference(uni)});
  b.tables.push_back(std::move(sum));
  return rep;
}

// ---------------------------------------------------------------------------
// all

inline const std::vector<cplx>& suite_lambdas() {
  static const std::vector<cplx> l{{0.0, 1.0}, {1.0, 1.0}, {-1.0, 1.0}};
  return l;
}

/// Oracle, kernel bound for the three suite ratios, profiles of the built-in
/// currents at the configured singularity, regime bands and recurrence.
inline void run_all(ReportBundle& b, const ExperimentConfig& cfg, bool refine) {
  run_oracle(b, {1.0, 2.0, 10.0}, cfg.tol);
  Table ks = kernel_summary_table();
  for (cplx l : suite_lambdas()) run_kernel_bound(b, cfg, l, lambda_label(l), refine, ks);
  b.tables.push_back(std::move(ks));
  Table ps = profile_summary_table();
  const Singularity sing = cfg.singularity();
  for (const auto& [name, doc] : builtin_current_docs()) {
    run_profile(b, cfg, parse_current(doc, sing, "builtin." + name), name, refine, ps);
  }
  b.tables.push_back(std::move(ps));
  run_regimes(b, cfg);
  run_recurrence(b, cfg);
}

}  // namespace lelong
