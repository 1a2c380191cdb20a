#pragma once

// The singular kernel K_s(y), the bound it satisfies, and the pointwise
// estimates of the half-plane Poisson kernel in sector coordinates.
//
//   K_s(y) = (1/b) int_{min(t,v) >= s} e^{2s - 2 min(t,v)} V / (V^2 + (y - U)^2) dt dv,
//   U + iV = (u + iv)^gamma,  u = (t - a v) / b.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "lelong/foliation.hpp"
#include "lelong/parallel.hpp"
#include "lelong/quadrature.hpp"

namespace lelong {

/// V / (V^2 + (y - U)^2)
inline double poisson_kernel(double U, double V, double y) {
  const double d = y - U;
  return V / (V * V + d * d);
}

/// (1 + |y|)^{1/gamma}: the scale of max(t, v) at which U is comparable to y.
inline double y_scale(const Singularity& sing, double y) { return std::pow(1.0 + std::abs(y), 1.0 / sing.gamma); }

namespace detail {

inline double kappa(const Singularity& sing) { return std::max(1.0, sing.lambda_abs()); }
inline double iota(const Singularity& sing) { return std::min(1.0, 1.0 / sing.lambda_abs()); }

/// Point on the wedge line: min coordinate m, max coordinate M.
inline HalfPlanePoint wedge_point(const Singularity& sing, Wedge w, double m, double M) {
  return w == Wedge::v_min ? power_map_tv(sing, M, m) : power_map_tv(sing, m, M);
}

/// dU/dM along the wedge line.
inline double wedge_dU(const Singularity& sing, Wedge w, double m, double M) {
  const double t = w == Wedge::v_min ? M : m;
  const double v = w == Wedge::v_min ? m : M;
  const double u = sing.u_of(t, v);
  const double theta = std::clamp(std::atan2(v, u), 0.0, sing.sector_angle);
  const cplx d = std::polar(sing.gamma * std::pow(std::hypot(u, v), sing.gamma - 1.0), (sing.gamma - 1.0) * theta);
  // d tau / dM: (1/b) along v = m; (-a/b + i) along t = m.
  const cplx dtau = w == Wedge::v_min ? cplx(1.0 / sing.b, 0.0) : cplx(-sing.a / sing.b, 1.0);
  return (d * dtau).real();
}

/// Bisection for a sign change of g on [lo, hi] down to adjacent doubles.
template <class G>
double bisect_root(G&& g, double lo, double hi) {
  double glo = g(lo);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Values of the max coordinate on the wedge line through min coordinate m where
/// U = y, each followed by the points at +/- one Poisson half-width.
inline void kernel_crossings(const Singularity& sing, double y, Wedge w, double m, double lo, double hi,
                             std::vector<double>& out) {
  const double scan_hi = std::min(hi, 20.0 * detail::kappa(sing) * (std::pow(std::abs(y), 1.0 / sing.gamma) + m + 1.0));
  if (!(scan_hi > lo)) return;
  auto g = [&](double M) { return detail::wedge_point(sing, w, m, M).U - y; };
  const int n = std::max(16, static_cast<int>(std::ceil(std::log(scan_hi / lo) / 0.03)));
  const double ratio = std::pow(scan_hi / lo, 1.0 / n);
  double prev = lo;
  double gprev = g(prev);
  for (int k = 1; k <= n; ++k) {
    const double cur = k == n ? scan_hi : lo * std::pow(ratio, k);
    const double gcur = g(cur);
    if ((gcur > 0.0) != (gprev > 0.0)) {
      const double root = detail::bisect_root(g, prev, cur);
      const double V = detail::wedge_point(sing, w, m, root).V;
      const double dU = std::abs(detail::wedge_dU(sing, w, m, root));
      out.push_back(root);
      if (dU > 0.0) {
        const double width = V / dU;
        out.push_back(root - width);
        out.push_back(root + width);
      }
    }
    prev = cur;
    gprev = gcur;
  }
}

/// Envelope for the K_s integrand (see DecayDescriptor): exponential rate 2 in
/// the min coordinate and algebraic rate gamma + 1 in the max coordinate.
inline DecayDescriptor kernel_decay(const Singularity& sing, double s, double y) {
  const double g = sing.gamma;
  const double kap = detail::kappa(sing);
  const double iot = detail::iota(sing);
  const double inv_lam = std::max(1.0, 1.0 / sing.lambda_abs());
  const double p = g + 1.0;
  const double onset = std::max(s, kap * std::pow(2.0 * std::abs(y), 1.0 / g));
  // max >= onset: |W| >= 2|y|, so P <= 4V/|W|^2.
  const double amp_far = 2.0 * g * std::numbers::pi / sing.b * inv_lam * std::pow(kap, g + 1.0);
  // max < onset: P <= 1/V with V >= (2 gamma/pi) iota kappa^{1-gamma} max^{gamma-1} min.
  const double amp_near = (std::numbers::pi / (2.0 * g * iot)) * std::pow(kap, g - 1.0) * std::pow(onset, p) /
                          (std::pow(s, g) * (1.0 + s) * sing.b);
  return {2.0, p, std::max(amp_far, amp_near), onset};
}

/// K_s(y) in (t, v) coordinates. Integrand evaluations go through the polar
/// power map; inner breakpoints sit at the crossings U = y.
inline Quad2dResult kernel_K(const Singularity& sing, double s, double y, const Tolerance& tol) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("kernel_K: s must be positive");
  if (!std::isfinite(y)) throw DomainError("kernel_K: y must be finite");
  auto f = [&](double t, double v) {
    const auto W = detail::power_map_tv(sing, t, v);
    return std::exp(2.0 * (s - std::min(t, v))) * poisson_kernel(W.U, W.V, y) / sing.b;
  };
  WedgeLayout layout;
  const auto decay = kernel_decay(sing, s, y);
  layout.inner_breaks = [&](Wedge w, double m, std::vector<double>& out) {
    kernel_crossings(sing, y, w, m, m, std::numeric_limits<double>::max(), out);
  };
  return integrate_2d(f, s, decay, tol, layout);
}

/// K_s(y) in (u, v) coordinates with the principal complex power, as an
/// independent route: outer v in [s, inf), inner u in [(s - a v)/b, inf),
/// split where t = v.
inline QuadResult kernel_K_uv(const Singularity& sing, double s, double y, const Tolerance& tol) {
  if (!(s > 0.0)) throw DomainError("kernel_K_uv: s must be positive");
  const double a = sing.a;
  const double b = sing.b;
  const double g = sing.gamma;
  auto P = [&](double u, double v) {
    const cplx W = std::pow(cplx(u, v), g);
    return poisson_kernel(W.real(), W.imag(), y);
  };
  const Tolerance inner_tol{tol.rel / 4.0, tol.abs / 4.0, tol.max_evals};
  bool ok = true;
  std::size_t evals = 0;
  std::vector<double> br;
  auto outer = [&](double v) {
    const double u_lo = (s - a * v) / b;
    const double u_diag = v * (1.0 - a) / b;
    auto Uof = [&](double u) { return std::pow(cplx(u, v), g).real() - y; };
    // crossings on the left piece: uniform scan
    br.clear();
    const int n = 200;
    double prev = u_lo;
    double gprev = Uof(prev);
    for (int k = 1; k <= n; ++k) {
      const double cur = u_lo + (u_diag - u_lo) * k / n;
      const double gcur = Uof(cur);
      if ((gcur > 0.0) != (gprev > 0.0)) br.push_back(detail::bisect_root(Uof, prev, cur));
      prev = cur;
      gprev = gcur;
    }
    // right piece: U increases in u; expand a bracket from the diagonal
    if (Uof(u_diag) < 0.0) {
      double step = std::max(1.0, std::abs(u_diag));
      double hi = u_diag + step;
      while (Uof(hi) < 0.0) {
        step *= 2.0;
        hi = u_diag + step;
      }
      br.push_back(detail::bisect_root(Uof, u_diag, hi));
    }
    // the weight e^{2s - 2t} concentrates the left piece near t = s
    for (double dt = 0.25; s + dt < b * u_diag + a * v; dt *= 2.0) br.push_back((s + dt - a * v) / b);
    auto left = [&](double u) { return std::exp(2.0 * s - 2.0 * (b * u + a * v)) * P(u, v); };
    auto right = [&](double u) { return std::exp(2.0 * s - 2.0 * v) * P(u, v); };
    const QuadResult l = integrate_1d(left, {u_lo, u_diag}, inner_tol, Options1d{br, 1.0});
    const double scale = std::max({1.0, v, std::pow(std::abs(y), 1.0 / g)});
    const QuadResult r = integrate_1d(right, Interval::from(u_diag), inner_tol, Options1d{br, scale});
    ok = ok && l.converged && r.converged;
    evals += l.evaluations + r.evaluations;
    return l.value + r.value;
  };
  QuadResult res = integrate_1d(outer, Interval::from(s), tol, Options1d{{}, std::max(1.0, s)});
  res.evaluations += evals;
  res.converged = res.converged && ok;
  return res;
}

// ---------------------------------------------------------------------------
// Bound certification

/// (1 + |y|)^{1/gamma - 1} * min{1, ((1 + |y|)^{1/gamma} / s)^{gamma - 1}}
inline double kernel_comparator(const Singularity& sing, double s, double y) {
  const double Y = y_scale(sing, y);
  return std::pow(1.0 + std::abs(y), 1.0 / sing.gamma - 1.0) * std::min(1.0, std::pow(Y / s, sing.gamma - 1.0));
}

struct KernelCell {
  double s = 0.0;
  double y = 0.0;
  double K = 0.0;
  double K_err = 0.0;
  double bound_ratio = 0.0;
  bool converged = true;
};

struct KernelReport {
  double gamma = 0.0;
  std::vector<KernelCell> cells;
  double empirical_c = 0.0;  // max bound ratio on the base grid
  std::optional<double> refined_c;
  std::optional<double> refinement_drift;  // |refined_c - empirical_c| / empirical_c
  std::vector<KernelCell> refined_cells;   // cells added by refinement
  int far_cells = 0;                       // s >= c2 (1+|y|)^{1/gamma}
  int comparable_cells = 0;
  int near_cells = 0;                      // s <= (1+|y|)^{1/gamma} / c2
  int failed_cells = 0;
  std::vector<std::string> warnings;
};

/// Inserts the midpoint between consecutive entries: geometric for s, and in
/// sign(y) log(1 + |y|) for y.
inline std::vector<double> refine_s_grid(std::vector<double> g) {
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0) out.push_back(std::sqrt(g[i - 1] * g[i]));
    out.push_back(g[i]);
  }
  return out;
}

inline std::vector<double> refine_y_grid(std::vector<double> g) {
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  auto phi = [](double y) { return std::copysign(std::log1p(std::abs(y)), y); };
  auto inv = [](double p) { return std::copysign(std::expm1(std::abs(p)), p); };
  std::vector<double> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0) out.push_back(inv(0.5 * (phi(g[i - 1]) + phi(g[i]))));
    out.push_back(g[i]);
  }
  return out;
}

/// Default y grid: +/-{0, 1, 10, ..., 1e4}.
inline std::vector<double> default_y_grid() {
  std::vector<double> y{0.0};
  for (double v = 1.0; v <= 1e4; v *= 10.0) {
    y.push_back(v);
    y.push_back(-v);
  }
  std::sort(y.begin(), y.end());
  return y;
}

/// Default s grid: 2^0 .. 2^7.
inline std::vector<double> default_s_grid() {
  std::vector<double> s;
  for (int k = 0; k <= 7; ++k) s.push_back(std::ldexp(1.0, k));
  return s;
}

namespace detail {

inline std::vector<KernelCell> kernel_cells(const Singularity& sing, const std::vector<std::pair<double, double>>& sy,
                                            const Tolerance& tol) {
  return parallel_map<KernelCell>(sy.size(), [&](std::size_t i) {
    const auto [s, y] = sy[i];
    KernelCell c{s, y};
    try {
      const auto r = kernel_K(sing, s, y, tol);
      c.K = r.value;
      c.K_err = r.error;
      c.converged = r.converged;
    } catch (const QuadratureError& e) {
      c.K = e.best().value;
      c.K_err = e.best().error;
      c.converged = false;
    }
    c.bound_ratio = c.K / kernel_comparator(sing, s, y);
    return c;
  });
}

}  // namespace detail

/// K_s(y) and its ratio to the comparator on a grid; optionally repeated on
/// the factor-2 refined grids to measure the drift of the supremum.
inline KernelReport main_bound_report(const Singularity& sing, const std::vector<double>& s_grid,
                                      const std::vector<double>& y_grid, const Tolerance& tol, bool refine,
                                      double c2 = 4.0) {
  if (s_grid.empty() || y_grid.empty()) throw std::invalid_argument("main_bound_report: empty grid");
  for (double s : s_grid) {
    if (!(s > 0.0)) throw std::invalid_argument("main_bound_report: s values must be positive");
  }
  KernelReport rep;
  rep.gamma = sing.gamma;
  std::vector<std::pair<double, double>> sy;
  for (double s : s_grid) {
    for (double y : y_grid) sy.emplace_back(s, y);
  }
  rep.cells = detail::kernel_cells(sing, sy, tol);
  auto tally = [&](const KernelCell& c) {
    if (!c.converged) ++rep.failed_cells;
    const double Y = y_scale(sing, c.y);
    if (c.s >= c2 * Y) ++rep.far_cells;
    else if (c.s <= Y / c2) ++rep.near_cells;
    else ++rep.comparable_cells;
  };
  for (const auto& c : rep.cells) {
    tally(c);
    if (std::isfinite(c.bound_ratio)) rep.empirical_c = std::max(rep.empirical_c, c.bound_ratio);
  }
  if (refine) {
    const auto s2 = refine_s_grid(s_grid);
    const auto y2 = refine_y_grid(y_grid);
    std::vector<std::pair<double, double>> extra;
    for (double s : s2) {
      for (double y : y2) {
        const bool known = std::find(s_grid.begin(), s_grid.end(), s) != s_grid.end() &&
                           std::find(y_grid.begin(), y_grid.end(), y) != y_grid.end();
        if (!known) extra.emplace_back(s, y);
      }
    }
    rep.refined_cells = detail::kernel_cells(sing, extra, tol);
    double c = rep.empirical_c;
    for (const auto& cell : rep.refined_cells) {
      if (!cell.converged) ++rep.failed_cells;
      if (std::isfinite(cell.bound_ratio)) c = std::max(c, cell.bound_ratio);
    }
    rep.refined_c = c;
    rep.refinement_drift = rep.empirical_c > 0.0 ? std::abs(c - rep.empirical_c) / rep.empirical_c : 0.0;
  }
  if (rep.failed_cells > 0) {
    rep.warnings.push_back(std::to_string(rep.failed_cells) + " kernel cells did not reach tolerance");
  }
  return rep;
}

/// int_{s0}^inf s e^{2 s0 - 2 s} ds by quadrature; equals s0/2 + 1/4.
inline QuadResult lemma_exp_oracle(double s0, const Tolerance& tol) {
  if (!(s0 >= 1.0)) throw DomainError("lemma_exp_oracle: s0 must be >= 1");
  return integrate_1d([s0](double s) { return s * std::exp(2.0 * s0 - 2.0 * s); }, Interval::from(s0), tol);
}

// ---------------------------------------------------------------------------
// Pointwise Poisson-kernel regimes

struct RegimeThresholds {
  double c2 = 4.0;
  double c3 = 16.0;

  void validate() const {
    if (!(c2 > 1.0) || !(c3 > c2)) throw std::invalid_argument("regime thresholds need 1 < c2 < c3");
  }
  RegimeThresholds doubled() const { return {2.0 * c2, 2.0 * c3}; }
};

enum class Regime { far, near_origin, diagonal, boundary_strip, unclassified };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::far: return "far";
    case Regime::near_origin: return "near-origin";
    case Regime::diagonal: return "diagonal";
    case Regime::boundary_strip: return "boundary-strip";
    case Regime::unclassified: return "unclassified";
  }
  return "?";
}

/// First matching hypothesis, in the order far, near-origin, diagonal, boundary-strip.
inline Regime classify_regime(const Singularity& sing, double v, double t, double y, const RegimeThresholds& th) {
  th.validate();
  const double mn = std::min(v, t);
  const double mx = std::max(v, t);
  if (!(mn >= 1.0)) throw DomainError("classify_regime: requires min(v, t) >= 1");
  const double Y = y_scale(sing, y);
  const bool in_band = mx >= Y / th.c2 && mx <= th.c2 * Y;
  if (mx >= th.c2 * Y) return Regime::far;
  if (mx <= Y / th.c2) return Regime::near_origin;
  if (in_band && mn >= Y / th.c2) return Regime::diagonal;
  if (in_band && mn <= Y / th.c3) return Regime::boundary_strip;
  return Regime::unclassified;
}

/// No root of U = y on the requested branch.
class NoRootError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RhoResult {
  double rho = 0.0;       // max coordinate at the root (t on the v-min branch, v on the t-min branch)
  double u = 0.0;         // u at the root
  double residual = 0.0;  // |U - y| / (1 + |y|)
  bool in_band = false;   // c2^{-1} Y <= rho <= c2 Y
  bool precondition = false;  // 1 <= m <= Y / c3
};

/// Root of Re((u + iv)^gamma) = y along the line v = m with t >= v, reported
/// as rho = b u + a v. With `swapped`, the line is t = m with v >= t and rho = v.
inline RhoResult rho_solver(const Singularity& sing, double y, double m, const RegimeThresholds& th = {},
                            bool swapped = false) {
  th.validate();
  if (!(m > 0.0)) throw DomainError("rho_solver: min coordinate must be positive");
  const Wedge w = swapped ? Wedge::t_min : Wedge::v_min;
  auto g = [&](double M) { return detail::wedge_point(sing, w, m, M).U - y; };
  // U is monotone along the line from the diagonal outward: increasing for v = m, decreasing for t = m.
  const double g0 = g(m);
  if (swapped ? !(g0 > 0.0) : !(g0 < 0.0)) {
    throw NoRootError("rho_solver: no root of U = y on the " + std::string(swapped ? "t" : "v") +
                      "-min branch (y = " + std::to_string(y) + ", m = " + std::to_string(m) + ")");
  }
  double lo = m;
  double step = std::max(1.0, m);
  double hi = m + step;
  while ((g(hi) > 0.0) == (g0 > 0.0)) {
    lo = hi;
    step *= 2.0;
    hi = m + step;
    if (!std::isfinite(hi)) throw NoRootError("rho_solver: bracket expansion overflowed");
  }
  using boost::math::tools::bisect;
  auto term = [](double a, double b) { return std::abs(b - a) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b); };
  const auto br = bisect(g, lo, hi, term);
  double M = 0.5 * (br.first + br.second);
  if (std::abs(g(br.first)) < std::abs(g(M))) M = br.first;
  if (std::abs(g(br.second)) < std::abs(g(M))) M = br.second;
  RhoResult r;
  r.rho = M;
  const double t = swapped ? m : M;
  const double v = swapped ? M : m;
  r.u = sing.u_of(t, v);
  r.residual = std::abs(g(M)) / (1.0 + std::abs(y));
  const double Y = y_scale(sing, y);
  r.in_band = M >= Y / th.c2 && M <= th.c2 * Y;
  r.precondition = m >= 1.0 && m <= Y / th.c3;
  return r;
}

/// Pointwise comparisons of the Poisson kernel.
enum class RegimePart { global_modulus, global_imaginary, far, near_origin, diagonal, boundary_strip };

inline const char* part_name(RegimePart p) {
  switch (p) {
    case RegimePart::global_modulus: return "global-modulus";
    case RegimePart::global_imaginary: return "global-imaginary";
    case RegimePart::far: return "far";
    case RegimePart::near_origin: return "near-origin";
    case RegimePart::diagonal: return "diagonal";
    case RegimePart::boundary_strip: return "boundary-strip";
  }
  return "?";
}

/// The hypothesis set of a part is empty for the given thresholds.
class EmptyRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RegimeBand {
  RegimePart part{};
  double sup_ratio = 0.0;
  double inf_ratio = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::size_t rejected = 0;       // drawn points that failed the classification check
  std::size_t no_root = 0;        // boundary strip: rho undefined
  double max_rho_residual = 0.0;  // boundary strip only
};

/// Ratio of the exact value to the comparator of a part at (v, t, y).
/// Global comparisons: max^gamma / |W| and max^{gamma-1} min / V. Others: P / comparator.
inline double regime_ratio(const Singularity& sing, RegimePart part, double v, double t, double y,
                           const RegimeThresholds& th, double* rho_residual = nullptr) {
  const double mn = std::min(v, t);
  const double mx = std::max(v, t);
  const auto W = detail::power_map_tv(sing, t, v);
  const double P = poisson_kernel(W.U, W.V, y);
  const double g = sing.gamma;
  switch (part) {
    case RegimePart::global_modulus: return std::pow(mx, g) / std::hypot(W.U, W.V);
    case RegimePart::global_imaginary: return std::pow(mx, g - 1.0) * mn / W.V;
    case RegimePart::far: return P / (mn / std::pow(mx, g + 1.0));
    case RegimePart::near_origin: return P / (W.V / ((1.0 + std::abs(y)) * (1.0 + std::abs(y))));
    case RegimePart::diagonal: return P * (1.0 + std::abs(y));
    case RegimePart::boundary_strip: {
      const auto r = rho_solver(sing, y, mn, th, t < v);
      if (rho_residual) *rho_residual = r.residual;
      const double comp = std::pow(1.0 + std::abs(y), 1.0 / g - 1.0) * mn / (mn * mn + (mx - r.rho) * (mx - r.rho));
      return P / comp;
    }
  }
  return 0.0;
}

/// Extreme ratios over `count` seeded samples from the hypothesis set of `part`.
inline RegimeBand regime_constant_sampler(const Singularity& sing, RegimePart part, std::size_t count,
                                          std::uint64_t seed, const RegimeThresholds& th = {}) {
  th.validate();
  if (count < 100) throw std::invalid_argument("regime_constant_sampler: sample count must be >= 100");
  const double g = sing.gamma;
  Rng rng(seed);
  RegimeBand band;
  band.part = part;
  // log10(1 + |y|) uniform on [lmin, lmin + 6]
  auto draw_y = [&](double lmin) { return rng.sign() * (std::pow(10.0, rng.uniform(lmin, lmin + 6.0)) - 1.0); };
  auto place = [&](double mn, double mx, bool v_is_min) { return v_is_min ? std::pair{mn, mx} : std::pair{mx, mn}; };
  const Regime expected = part == RegimePart::far           ? Regime::far
                          : part == RegimePart::near_origin ? Regime::near_origin
                          : part == RegimePart::diagonal    ? Regime::diagonal
                                                            : Regime::boundary_strip;
  std::size_t attempts = 0;
  while (band.samples < count) {
    if (++attempts > 100 * count) throw EmptyRegimeError(std::string("no samples accepted for ") + part_name(part));
    double v = 1.0;
    double t = 1.0;
    double y = 0.0;
    switch (part) {
      case RegimePart::global_modulus:
      case RegimePart::global_imaginary: {
        const double mn = rng.log_uniform(1.0, 1e3);
        const double mx = mn * rng.log_uniform(1.0, 1e3);
        std::tie(v, t) = place(mn, mx, rng.sign() > 0);
        break;
      }
      case RegimePart::far: {
        y = draw_y(0.0);
        const double mx = th.c2 * y_scale(sing, y) * rng.log_uniform(1.0, 1e3);
        const double mn = rng.log_uniform(1.0, mx);
        std::tie(v, t) = place(mn, mx, rng.sign() > 0);
        break;
      }
      case RegimePart::near_origin: {
        y = draw_y(g * std::log10(th.c2));
        const double top = y_scale(sing, y) / th.c2;
        if (top < 1.0) continue;
        const double mx = rng.log_uniform(1.0, top);
        const double mn = rng.log_uniform(1.0, mx);
        std::tie(v, t) = place(mn, mx, rng.sign() > 0);
        break;
      }
      case RegimePart::diagonal: {
        y = draw_y(0.0);
        const double Y = y_scale(sing, y);
        v = rng.log_uniform(std::max(1.0, Y / th.c2), th.c2 * Y);
        t = rng.log_uniform(std::max(1.0, Y / th.c2), th.c2 * Y);
        break;
      }
      case RegimePart::boundary_strip: {
        y = draw_y(g * std::log10(th.c3));
        const double Y = y_scale(sing, y);
        if (Y / th.c3 < 1.0) continue;
        const double mn = rng.log_uniform(1.0, Y / th.c3);
        const double mx = rng.log_uniform(Y / th.c2, th.c2 * Y);
        // the root of U = y lies on the v-min line for y > 0 and on the t-min line for y < 0
        std::tie(v, t) = place(mn, mx, y > 0.0);
        break;
      }
    }
    if (part != RegimePart::global_modulus && part != RegimePart::global_imaginary &&
        classify_regime(sing, v, t, y, th) != expected) {
      ++band.rejected;
      continue;
    }
    double ratio = 0.0;
    try {
      double res = 0.0;
      ratio = regime_ratio(sing, part, v, t, y, th, &res);
      band.max_rho_residual = std::max(band.max_rho_residual, res);
    } catch (const NoRootError&) {
      ++band.no_root;
      continue;
    }
    band.sup_ratio = std::max(band.sup_ratio, ratio);
    band.inf_ratio = std::min(band.inf_ratio, ratio);
    ++band.samples;
  }
  return band;
}

}  // namespace lelong
