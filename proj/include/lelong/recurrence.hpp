#pragma once

// Leafwise Poincare-metric machinery in the local model. Curvature -1:
// ds = 2|d xi| / (1 - |xi|^2), area form 4 / (1 - |xi|^2)^2 dA, the circle of
// hyperbolic radius t has Euclidean radius tanh(t/2) and length 2 pi sinh t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lelong/foliation.hpp"
#include "lelong/parallel.hpp"
#include "lelong/quadrature.hpp"

namespace lelong {

/// Euclidean radius of the disc circle at hyperbolic distance t from 0.
inline double s_of_t(double t) {
  if (!(t >= 0.0)) throw DomainError("s_of_t: t must be >= 0");
  return std::tanh(0.5 * t);
}

/// Hyperbolic distance from 0 to radius s in [0, 1).
inline double hyperbolic_radius(double s) {
  if (!(s >= 0.0 && s < 1.0)) throw DomainError("hyperbolic_radius: s must lie in [0, 1)");
  return 2.0 * std::atanh(s);
}

/// Hyperbolic distance in the upper half plane.
inline double halfplane_distance(const HalfPlanePoint& p, const HalfPlanePoint& q) {
  const double dU = p.U - q.U;
  const double dV = p.V - q.V;
  return std::acosh(1.0 + (dU * dU + dV * dV) / (2.0 * p.V * q.V));
}

/// Hyperbolic distance in the unit disc.
inline double disc_distance(cplx p, cplx q) {
  const double num = std::norm(p - q);
  const double den = (1.0 - std::norm(p)) * (1.0 - std::norm(q));
  return std::acosh(1.0 + 2.0 * num / den);
}

/// Biholomorphism phi_a of the unit disc onto the leaf piece inside the bidisc,
/// with phi_a(0) = a: xi -> W = U_a + V_a i (1 + xi) / (1 - xi) -> W^{1/gamma} -> psi_alpha.
struct LeafUniformization {
  Singularity sing;
  cplx alpha;
  LeafPoint base;
  SectorPoint sector_base;
  HalfPlanePoint halfplane_base;

  /// Half-plane image of xi = s e^{i theta} with 1 - s supplied separately so
  /// that points near the unit circle keep their relative accuracy.
  HalfPlanePoint halfplane_polar(double one_minus_s, double theta) const {
    const double s = 1.0 - one_minus_s;
    const double half = std::sin(0.5 * theta);
    // 1 - xi = (1 - s) + s (1 - e^{i theta})
    const cplx d(one_minus_s + 2.0 * s * half * half, -s * std::sin(theta));
    // i (1 + xi) / (1 - xi) = i (2 - (1 - xi)) / (1 - xi)
    const cplx m = cplx(0.0, 1.0) * (2.0 - d) / d;
    // Im of the Mobius image is (1 - s^2) / |1 - xi|^2, exact in this form
    const double im = one_minus_s * (1.0 + s) / std::norm(d);
    return {halfplane_base.U + halfplane_base.V * m.real(), halfplane_base.V * im};
  }

  HalfPlanePoint halfplane_at(cplx xi) const {
    if (!(std::abs(xi) < 1.0)) throw DomainError("uniformization: xi must lie in the unit disc");
    return halfplane_polar(1.0 - std::abs(xi), std::arg(xi));
  }

  SectorPoint sector_at(cplx xi) const { return halfplane_to_sector(sing, halfplane_at(xi)); }
  LeafPoint point_at(cplx xi) const { return leaf_point(sing, alpha, sector_at(xi)); }

  /// Point on the circle of hyperbolic radius t.
  LeafPoint point_polar(double t, double theta) const {
    const double one_minus_s = 2.0 / (1.0 + std::exp(t));
    return leaf_point(sing, alpha, halfplane_to_sector(sing, halfplane_polar(one_minus_s, theta)));
  }
};

inline LeafUniformization uniformize_leaf(const Singularity& sing, cplx alpha, const LeafPoint& a) {
  if (!a.in_bidisc() || std::abs(a.z) == 0.0 || std::abs(a.w) == 0.0) {
    throw DomainError("uniformize_leaf: base point must lie in the punctured bidisc off the separatrices");
  }
  const SectorPoint zeta = sector_of_leaf_point(sing, a);
  if (!zeta.in_open_sector()) throw DomainError("uniformize_leaf: base point is outside the leaf piece over the sector");
  const LeafPoint check = leaf_point(sing, alpha, zeta);
  if (std::abs(check.z - a.z) > 1e-10 || std::abs(check.w - a.w) > 1e-10) {
    throw DomainError("uniformize_leaf: base point does not lie on the leaf with the given label");
  }
  return {sing, alpha, a, zeta, sector_to_halfplane(sing, zeta)};
}

/// Uniformization based at the leaf point over the sector point zeta.
inline LeafUniformization uniformize_at(const Singularity& sing, cplx alpha, const SectorPoint& zeta) {
  return uniformize_leaf(sing, alpha, leaf_point(sing, alpha, zeta));
}

/// Ambient point of the bidisc model.
struct AmbientPoint {
  cplx z;
  cplx w;
};

inline double ambient_distance(const LeafPoint& p, const AmbientPoint& x) {
  return std::hypot(std::abs(p.z - x.z), std::abs(p.w - x.w));
}

/// Fraction of the circle of hyperbolic radius t whose image lies in B(x, r),
/// on a uniform theta grid shifted by `shift` grid cells.
inline double circle_average(const LeafUniformization& uni, const AmbientPoint& x, double r, double t,
                             std::size_t n_theta, double shift = 0.0) {
  if (!(t >= 0.0)) throw DomainError("circle_average: t must be >= 0");
  if (!(r > 0.0)) throw DomainError("circle_average: r must be positive");
  if (n_theta < 8) throw std::invalid_argument("circle_average: need at least 8 theta nodes");
  if (t == 0.0) return ambient_distance(uni.base, x) < r ? 1.0 : 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_theta; ++k) {
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + shift) / static_cast<double>(n_theta);
    if (ambient_distance(uni.point_polar(t, theta), x) < r) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_theta);
}

struct VisibilityOptions {
  double horizon = 20.0;       // R
  std::size_t n_t = 256;       // trapezoid nodes on [0, R] (>= 64)
  std::size_t n_theta = 1024;  // uniform theta nodes (>= 256)
  std::size_t replicas = 8;    // independently shifted theta grids
  std::uint64_t seed = 42;

  void validate() const {
    if (!(horizon > 0.0) || horizon > 25.0) throw std::invalid_argument("visibility: horizon must lie in (0, 25]");
    if (n_t < 64) throw std::invalid_argument("visibility: need at least 64 t nodes");
    if (n_theta < 256) throw std::invalid_argument("visibility: need at least 256 theta nodes");
    if (replicas < 2) throw std::invalid_argument("visibility: need at least 2 replicas for an error bar");
  }
};

struct VisibilityValue {
  double r = 0.0;
  double N = 0.0;      // finite-horizon (1/R) int_0^R circle average dt
  double error = 0.0;  // standard error over the shifted theta grids
  double horizon = 0.0;
};

/// Finite-horizon visibility for every radius of `radii` from one set of
/// circle samples, so the values are exactly monotone in r.
inline std::vector<VisibilityValue> visibility_profile(const LeafUniformization& uni, const AmbientPoint& x,
                                                       const std::vector<double>& radii,
                                                       const VisibilityOptions& opt = {}) {
  opt.validate();
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("visibility: radii must be positive");
  }
  const std::size_t nr = radii.size();
  Rng rng(opt.seed);
  std::vector<double> shifts(opt.replicas);
  for (auto& s : shifts) s = rng.uniform();
  const double h = opt.horizon / static_cast<double>(opt.n_t - 1);
  // per t node: hit fraction per (replica, radius)
  const auto rows = parallel_map<std::vector<double>>(opt.n_t, [&](std::size_t i) {
    std::vector<double> hits(opt.replicas * nr, 0.0);
    const double t = h * static_cast<double>(i);
    for (std::size_t j = 0; j < opt.replicas; ++j) {
      for (std::size_t k = 0; k < opt.n_theta; ++k) {
        double d;
        if (i == 0) {
          d = ambient_distance(uni.base, x);
        } else {
          const double theta =
              2.0 * std::numbers::pi * (static_cast<double>(k) + shifts[j]) / static_cast<double>(opt.n_theta);
          d = ambient_distance(uni.point_polar(t, theta), x);
        }
        for (std::size_t q = 0; q < nr; ++q) {
          if (d < radii[q]) hits[j * nr + q] += 1.0;
        }
      }
    }
    for (auto& v : hits) v /= static_cast<double>(opt.n_theta);
    return hits;
  });
  std::vector<VisibilityValue> out(nr);
  for (std::size_t q = 0; q < nr; ++q) {
    std::vector<double> per_rep(opt.replicas, 0.0);
    for (std::size_t j = 0; j < opt.replicas; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < opt.n_t; ++i) {
        const double w = (i == 0 || i + 1 == opt.n_t) ? 0.5 : 1.0;
        sum += w * rows[i][j * nr + q];
      }
      per_rep[j] = sum * h / opt.horizon;
    }
    double mean = 0.0;
    for (double v : per_rep) mean += v;
    mean /= static_cast<double>(opt.replicas);
    double var = 0.0;
    for (double v : per_rep) var += (v - mean) * (v - mean);
    var /= static_cast<double>(opt.replicas - 1);
    out[q] = {radii[q], std::clamp(mean, 0.0, 1.0), std::sqrt(var / static_cast<double>(opt.replicas)), opt.horizon};
  }
  return out;
}

inline VisibilityValue visibility_N(const LeafUniformization& uni, const AmbientPoint& x, double r,
                                    const VisibilityOptions& opt = {}) {
  return visibility_profile(uni, x, {r}, opt).front();
}

/// sinh(t) log(1 / tanh(t/2)) = sinh(t) 2 atanh(e^{-t}): circle length over 2 pi
/// times the weight log(1/|xi|) on that circle.
inline double circle_factor(double t) {
  if (!(t > 0.0)) throw DomainError("circle_factor: t must be positive");
  return 2.0 * std::sinh(t) * std::atanh(std::exp(-t));
}

/// 1 - circle_factor(t) = sum_{k >= 1} 2 q^{2k} / (4k^2 - 1), q = e^{-t};
/// summed directly so that the deficit keeps relative accuracy for large t.
inline double circle_factor_deficit(double t) {
  if (!(t > 0.0)) throw DomainError("circle_factor: t must be positive");
  if (t < 1.0) return 1.0 - circle_factor(t);
  const double q2 = std::exp(-2.0 * t);
  double term = q2;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double add = 2.0 * term / (4.0 * k * k - 1.0);
    sum += add;
    if (add < 1e-18 * sum) break;
    term *= q2;
  }
  return sum;
}

/// M_R = int_{D_R} log(1/|xi|) omega_P = 2 pi int_0^R circle_factor(t) dt.
inline QuadResult M_of_R_result(double R, const Tolerance& tol) {
  if (!(R > 0.0)) throw DomainError("M_of_R: R must be positive");
  auto f = [](double t) { return t > 0.0 ? 2.0 * std::numbers::pi * circle_factor(t) : 0.0; };
  return integrate_1d(f, Interval{0.0, R}, tol);
}

inline double M_of_R(double R, const Tolerance& tol = {1e-10, 1e-13}) {
  return require_converged(M_of_R_result(R, tol), "M_of_R").value;
}

/// (1/M_R) int_{D_R} f(phi_a(xi)) log(1/|xi|) omega_P in hyperbolic polar
/// coordinates: (1/M_R) int_0^R sinh(t) log(1/s_t) int_0^{2 pi} f dtheta dt.
template <class F>
QuadResult m_aR_pushforward(const LeafUniformization& uni, double R, F&& f, const Tolerance& tol,
                            std::size_t n_theta = 512) {
  const double M = M_of_R(R);
  auto ring = [&](double t) {
    if (!(t > 0.0)) return 0.0;
    double avg = 0.0;
    for (std::size_t k = 0; k < n_theta; ++k) {
      const double theta = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n_theta);
      avg += f(uni.point_polar(t, theta));
    }
    return 2.0 * std::numbers::pi * circle_factor(t) * avg / static_cast<double>(n_theta);
  };
  return integrate_1d(ring, Interval{0.0, R}, tol).scaled(1.0 / M);
}

/// ||D phi_a(0)|| in the curvature -1 normalization: the Euclidean speed of
/// the leaf map times |d tau / dW| = |tau|^{1-gamma} / gamma times
/// |dW/dxi(0)| / 2 = V_a.
inline double eta_local(const LeafUniformization& uni) {
  const double speed = std::sqrt(leaf_speed_sq(uni.sing, uni.base));
  const double tau = std::abs(uni.sector_base.zeta());
  return speed * uni.halfplane_base.V * std::pow(tau, 1.0 - uni.sing.gamma) / uni.sing.gamma;
}

/// Central difference of phi_a at 0 along the real axis, halved.
inline double eta_finite_difference(const LeafUniformization& uni, double h = 1e-5) {
  const LeafPoint p = uni.point_at(cplx(h, 0.0));
  const LeafPoint m = uni.point_at(cplx(-h, 0.0));
  const double dz = std::abs(p.z - m.z) / (2.0 * h);
  const double dw = std::abs(p.w - m.w) / (2.0 * h);
  return 0.5 * std::hypot(dz, dw);
}

// ---------------------------------------------------------------------------
// Report

struct MassCheck {
  double R = 0.0;
  double mass = 0.0;
  double error = 0.0;
};

struct RecurrenceRow {
  std::string target;  // label of x
  VisibilityValue value;
  double scaled = 0.0;  // N |log r|
};

struct RecurrenceReport {
  std::vector<std::pair<double, double>> M_R;  // (R, M_R)
  double M_R_deviation_range = 0.0;            // range of M_R - 2 pi R over R in [10, 20]
  std::vector<MassCheck> mass_checks;
  std::vector<RecurrenceRow> rows;
  double circle_factor_slope = 0.0;  // slope of log(1 - circle_factor) vs t over [5, 15]
  std::vector<std::string> warnings;
};

struct RecurrenceTarget {
  std::string label;
  AmbientPoint x;
};

/// Default base point: the leaf point whose half-plane image is W = i.
inline LeafUniformization default_uniformization(const Singularity& sing, cplx alpha) {
  return uniformize_at(sing, alpha, halfplane_to_sector(sing, {0.0, 1.0}));
}

inline RecurrenceReport recurrence_report(const LeafUniformization& uni, const std::vector<RecurrenceTarget>& targets,
                                          const std::vector<double>& radii, const VisibilityOptions& opt,
                                          std::vector<double> mass_radii = {}) {
  RecurrenceReport rep;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int R = 1; R <= 20; ++R) {
    const double M = M_of_R(R);
    rep.M_R.emplace_back(R, M);
    if (R >= 10) {
      lo = std::min(lo, M - 2.0 * std::numbers::pi * R);
      hi = std::max(hi, M - 2.0 * std::numbers::pi * R);
    }
  }
  rep.M_R_deviation_range = hi - lo;
  if (mass_radii.empty()) mass_radii = {5.0, 10.0, opt.horizon};
  for (double R : mass_radii) {
    const auto m = m_aR_pushforward(uni, R, [](const LeafPoint&) { return 1.0; }, {1e-6, 1e-12}, 64);
    rep.mass_checks.push_back({R, m.value, m.error});
  }
  std::vector<double> ts, ls;
  for (double t = 5.0; t <= 15.0 + 1e-12; t += 0.5) {
    ts.push_back(t);
    ls.push_back(std::log(circle_factor_deficit(t)));
  }
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += ls[i];
    stt += ts[i] * ts[i];
    stl += ts[i] * ls[i];
  }
  const double n = static_cast<double>(ts.size());
  rep.circle_factor_slope = (n * stl - st * sl) / (n * stt - st * st);
  for (const auto& target : targets) {
    for (const auto& v : visibility_profile(uni, target.x, radii, opt)) {
      rep.rows.push_back({target.label, v, v.N * std::abs(std::log(v.r))});
    }
  }
  return rep;
}

}  // namespace lelong
