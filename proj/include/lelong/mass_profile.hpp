#pragma once

// Mass of the current in Euclidean balls around the singular point:
//   F(r) = int_{B_r} T ^ i dd^c |x|^2,  G(r) = F(r) / r^2,
// the kernel bound for G, and the decay profile g_s.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lelong/current.hpp"
#include "lelong/foliation.hpp"
#include "lelong/kernel.hpp"
#include "lelong/parallel.hpp"
#include "lelong/quadrature.hpp"

namespace lelong {

namespace detail {

/// Algebraic decay of the Poisson extension along max(t, v).
inline double extension_power(const Singularity& sing, const BoundaryProfile& h) {
  const double g = sing.gamma;
  const double beta = h.decay_exponent();
  if (std::isinf(beta)) return g + 1.0;
  if (beta == 1.0) return 0.99 * g;  // logarithmic correction
  return std::min(g + 1.0, g * beta);
}

/// Length scale of the boundary profile: beyond it the extension behaves like its tail.
inline double profile_scale(const BoundaryProfile& h) {
  if (auto R = h.support_bound()) return std::max(1.0, *R);
  switch (h.kind()) {
    case BoundaryProfile::Kind::cauchy:
    case BoundaryProfile::Kind::step: return std::abs(h.centre()) + h.width() + 1.0;
    default: return 1.0;
  }
}

/// Decay descriptor for an integrand over {min(t,v) >= s} whose algebraic rate
/// is known but whose constant is not: the amplitude is the largest sampled
/// ratio to the envelope, times a safety factor of 4.
template <class F>
DecayDescriptor sampled_decay(F&& f, double s, double p, double onset) {
  double amp = 0.0;
  for (int i = 0; i <= 24; ++i) {
    const double m = s + (i == 0 ? 1e-3 : 0.05 * std::pow(1.25, i - 1));
    for (int j = 0; j <= 80; ++j) {
      const double M = m * std::pow(10.0, j / 8.0);
      const double env = (1.0 + m) * std::exp(-2.0 * (m - s)) * std::pow(std::max(M, onset), -p);
      const double a = std::abs(f(M, m)) / env;
      const double b = std::abs(f(m, M)) / env;
      if (std::isfinite(a)) amp = std::max(amp, a);
      if (std::isfinite(b)) amp = std::max(amp, b);
    }
  }
  return {2.0, p, 4.0 * amp, onset};
}

/// Harmonic weight at the half-plane image of (t, v).
struct ExtensionEval {
  const Singularity& sing;
  const BoundaryProfile& h;
  Tolerance tol;

  double operator()(double t, double v) const {
    const auto W = power_map_tv(sing, t, v);
    return std::max(0.0, poisson_eval_result(h, W, tol).value);
  }
};

inline Tolerance extension_tol(const Tolerance& tol) { return {tol.rel / 10.0, tol.abs / 10.0, tol.max_evals}; }

}  // namespace detail

struct MassValue {
  double F = 0.0;
  double G = 0.0;
  double F_err = 0.0;
  double G_err = 0.0;
  bool converged = true;
};

/// G(r) = (2/b) e^{2s} int int_{e^{-2v} + e^{-2t} <= r^2} h(W) (e^{-2v} + |lambda|^2 e^{-2t}) dt dv
/// summed over nu, with s = -log r.
inline MassValue mass_G(const CurrentSpec& spec, const Singularity& sing, double r, const Tolerance& tol) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("mass: r must lie in (0, 1)");
  const double s = -std::log(r);
  const double lam2 = std::norm(sing.lambda());
  MassValue out;
  for (const auto& term : spec.terms(sing)) {
    const detail::ExtensionEval h{sing, term.profile, detail::extension_tol(tol)};
    auto f = [&](double t, double v) {
      return 2.0 / sing.b * h(t, v) * (std::exp(2.0 * (s - v)) + lam2 * std::exp(2.0 * (s - t)));
    };
    const double p = detail::extension_power(sing, term.profile);
    const double onset = std::max(s, detail::kappa(sing) * std::pow(2.0 * detail::profile_scale(term.profile), 1.0 / sing.gamma));
    WedgeLayout layout;
    // ball condition e^{-2 min} + e^{-2 max} <= e^{-2s}
    layout.inner_floor = [s](double m) {
      const double d = m - s;
      if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
      return std::max(m, s - 0.5 * std::log(-std::expm1(-2.0 * d)));
    };
    layout.outer_breaks = {s + 0.5 * std::log(2.0)};
    const auto decay = detail::sampled_decay(f, s, p, onset);
    const Tolerance t2{tol.rel, tol.abs / std::max(1.0, term.weight), tol.max_evals};
    const auto q = integrate_2d(f, s, decay, t2, layout);
    out.G += term.weight * q.value;
    out.G_err += term.weight * q.error;
    out.converged = out.converged && q.converged;
  }
  out.F = out.G * r * r;
  out.F_err = out.G_err * r * r;
  return out;
}

inline MassValue mass_F(const CurrentSpec& spec, const Singularity& sing, double r, const Tolerance& tol) {
  return mass_G(spec, sing, r, tol);
}

struct MassRow {
  double r = 0.0;
  MassValue mass;
  double monotone_violation = 0.0;  // G(r) - G(previous r) beyond the summed errors, when positive
};

struct MassProfile {
  std::vector<MassRow> rows;
  double lelong_estimate = 0.0;  // G at the smallest r
  // least squares G = intercept + slope * |log r|^{1-gamma}
  double fit_intercept = 0.0;
  double fit_slope = 0.0;
  // least squares slope of log G against log |log r| over the smaller half of the grid
  std::optional<double> loglog_slope;
  std::vector<std::pair<double, double>> violations;
  std::vector<std::string> warnings;
};

/// r_k = 2^{-k}, k = 1..count.
inline std::vector<double> default_r_grid(int count = 12) {
  std::vector<double> g;
  for (int k = 1; k <= count; ++k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

inline std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  const double slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  return {(sy - slope * sx) / n, slope};
}

inline MassProfile mass_profile(const CurrentSpec& spec, const Singularity& sing, const std::vector<double>& r_grid,
                                const Tolerance& tol) {
  if (r_grid.empty()) throw std::invalid_argument("mass_profile: empty r grid");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0.0 && r_grid[i] < 1.0)) throw std::invalid_argument("mass_profile: r values must lie in (0, 1)");
    if (i > 0 && !(r_grid[i] < r_grid[i - 1])) throw std::invalid_argument("mass_profile: r grid must be strictly decreasing");
  }
  MassProfile prof;
  const auto vals = parallel_map<MassValue>(r_grid.size(), [&](std::size_t i) { return mass_G(spec, sing, r_grid[i], tol); });
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    MassRow row{r_grid[i], vals[i]};
    if (i > 0) {
      const double excess = vals[i].G - vals[i - 1].G - (vals[i].G_err + vals[i - 1].G_err);
      if (excess > 0.0) {
        row.monotone_violation = excess;
        prof.violations.emplace_back(r_grid[i], excess);
      }
    }
    if (!vals[i].converged) prof.warnings.push_back("G(" + std::to_string(r_grid[i]) + ") did not reach tolerance");
    prof.rows.push_back(row);
  }
  prof.lelong_estimate = prof.rows.back().mass.G;
  std::vector<double> x, y;
  for (const auto& row : prof.rows) {
    x.push_back(std::pow(-std::log(row.r), 1.0 - sing.gamma));
    y.push_back(row.mass.G);
  }
  std::tie(prof.fit_intercept, prof.fit_slope) = least_squares(x, y);
  std::vector<double> lx, ly;
  for (std::size_t i = prof.rows.size() / 2; i < prof.rows.size(); ++i) {
    const auto& row = prof.rows[i];
    if (row.mass.G > 0.0) {
      lx.push_back(std::log(-std::log(row.r)));
      ly.push_back(std::log(row.mass.G));
    }
  }
  if (lx.size() >= 2) prof.loglog_slope = least_squares(lx, ly).second;
  if (!prof.violations.empty()) {
    prof.warnings.push_back(std::to_string(prof.violations.size()) + " monotonicity violations beyond quadrature error");
  }
  return prof;
}

/// g_s(y) = K_s(y) (1 + |y|)^{1 - 1/gamma}.
inline QuadResult g_profile(const Singularity& sing, double s, double y, const Tolerance& tol) {
  const auto k = kernel_K(sing, s, y, tol);
  return static_cast<const QuadResult&>(k).scaled(std::pow(1.0 + std::abs(y), 1.0 - 1.0 / sing.gamma));
}

struct GBound {
  double lhs = 0.0;  // G(r)
  double rhs = 0.0;  // sum over nu of int K_s(y) H(y) dy, s = -log r
  double lhs_err = 0.0;
  double rhs_err = 0.0;
  bool converged = true;

  double ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
};

/// int K_s(y) H(y) dy by Fubini: (pi/b) int int_{min(t,v) >= s} e^{2s - 2 min} h(W) dt dv.
inline QuadResult kernel_pairing(const CurrentSpec& spec, const Singularity& sing, double s, const Tolerance& tol) {
  QuadResult out;
  for (const auto& term : spec.terms(sing)) {
    const detail::ExtensionEval h{sing, term.profile, detail::extension_tol(tol)};
    auto f = [&](double t, double v) {
      return std::numbers::pi / sing.b * std::exp(2.0 * (s - std::min(t, v))) * h(t, v);
    };
    const double p = detail::extension_power(sing, term.profile);
    const double onset = std::max(s, detail::kappa(sing) * std::pow(2.0 * detail::profile_scale(term.profile), 1.0 / sing.gamma));
    const auto decay = detail::sampled_decay(f, s, p, onset);
    const Tolerance t2{tol.rel, tol.abs / std::max(1.0, term.weight), tol.max_evals};
    const auto q = integrate_2d(f, s, decay, t2);
    out += QuadResult(q).scaled(term.weight);
  }
  return out;
}

inline GBound bound_G_via_kernel(const CurrentSpec& spec, const Singularity& sing, double r, const Tolerance& tol) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("bound_G_via_kernel: r must lie in (0, 1)");
  const auto m = mass_G(spec, sing, r, tol);
  const auto k = kernel_pairing(spec, sing, -std::log(r), tol);
  return {m.G, k.value, m.G_err, k.error, m.converged && k.converged};
}

/// int g_s d chi = sum over nu of int K_s(y) H(y) dy, evaluated literally as a
/// y-integral of kernel values.
inline QuadResult chi_weighted_kernel(const CurrentSpec& spec, const Singularity& sing, double s, const Tolerance& tol) {
  QuadResult out;
  const double e = 1.0 / sing.gamma - 1.0;
  const Tolerance ktol{tol.rel / 10.0, tol.abs / 10.0, tol.max_evals};
  for (const auto& term : spec.terms(sing)) {
    const auto& H = term.profile;
    auto f = [&](double y) {
      const double hy = H(y);
      if (hy == 0.0) return 0.0;
      const double chi_density = hy * std::pow(1.0 + std::abs(y), e);
      return g_profile(sing, s, y, ktol).value * chi_density;
    };
    std::vector<double> br{0.0};
    for (double k : H.kinks()) br.push_back(k);
    Interval range = Interval::real_line();
    if (auto R = H.support_bound()) range = {-*R, *R};
    out += integrate_1d(f, range, tol, Options1d{br, detail::profile_scale(H)}).scaled(term.weight);
  }
  return out;
}

/// Pointwise majorant of G used on the way to the kernel bound:
/// G(r) <= (1 + |lambda|)^2 (2/pi) * kernel pairing.
inline double intermediate_bound(const Singularity& sing, double pairing) {
  const double k = 1.0 + sing.lambda_abs();
  return k * k * 2.0 / std::numbers::pi * pairing;
}

}  // namespace lelong
