#pragma once

// Geometry of the linear foliation z' = mu z, w' = lambda w near a hyperbolic
// singular point: normalization, leaf parametrization and the conformal
// chain sector -> upper half plane.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lelong {

using cplx = std::complex<double>;

/// lambda/mu is real: the singular point is not hyperbolic.
class NonHyperbolicError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An argument lies outside the region where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Normalized singularity with lambda = a + ib, b > 0 and mu = 1.
struct Singularity {
  double a = 0.0;
  double b = 1.0;
  double gamma = 2.0;
  double sector_angle = std::numbers::pi / 2;
  bool flipped = false;  // z and w were exchanged during normalization

  cplx lambda() const { return {a, b}; }
  double lambda_abs() const { return std::hypot(a, b); }

  double t_of(double u, double v) const { return b * u + a * v; }
  double u_of(double t, double v) const { return (t - a * v) / b; }

  /// Inner radius e^{-2 pi b} of the fundamental annulus [e^{-2 pi b}, 1).
  double annulus_inner() const { return std::exp(-2.0 * std::numbers::pi * b); }
  /// Mid-annulus label e^{-pi b}.
  double annulus_mid() const { return std::exp(-std::numbers::pi * b); }

  bool in_annulus(cplx alpha) const {
    const double r = std::abs(alpha);
    return r >= annulus_inner() * (1.0 - 1e-12) && r < 1.0;
  }
};

inline Singularity normalize_singularity(cplx mu, cplx lambda) {
  if (mu == 0.0 || lambda == 0.0) {
    throw DomainError("normalize_singularity: mu and lambda must be nonzero");
  }
  const cplx q = lambda / mu;
  if (!(std::abs(q.imag()) > 1e-12 * std::abs(q))) {
    throw NonHyperbolicError("lambda/mu is real (" + std::to_string(q.real()) +
                             "); the singularity is not hyperbolic");
  }
  Singularity s;
  cplx l = q;
  if (q.imag() < 0.0) {
    l = 1.0 / q;
    s.flipped = true;
  }
  s.a = l.real();
  s.b = l.imag();
  // arctan(-b/a) on the (0, pi) branch; atan2(b, -a) gives pi/2 at a = 0.
  s.sector_angle = std::atan2(s.b, -s.a);
  s.gamma = std::numbers::pi / s.sector_angle;
  return s;
}

inline Singularity singularity_from_lambda(cplx lambda) {
  return normalize_singularity(1.0, lambda);
}

/// Leaf coordinate zeta = u + iv with t = b u + a v.
struct SectorPoint {
  double u = 0.0;
  double v = 0.0;
  double t = 0.0;

  cplx zeta() const { return {u, v}; }
  bool in_open_sector() const { return v > 0.0 && t > 0.0; }
};

inline SectorPoint sector_point(const Singularity& sing, double u, double v) {
  return {u, v, sing.t_of(u, v)};
}

inline SectorPoint sector_point_tv(const Singularity& sing, double t, double v) {
  return {sing.u_of(t, v), v, t};
}

struct HalfPlanePoint {
  double U = 0.0;
  double V = 1.0;

  cplx as_complex() const { return {U, V}; }
};

struct LeafPoint {
  cplx z;
  cplx w;
  cplx alpha;

  double norm() const { return std::hypot(std::abs(z), std::abs(w)); }
  bool in_bidisc() const { return std::abs(z) < 1.0 && std::abs(w) < 1.0; }
};

/// psi_alpha(zeta). Moduli are produced directly as |z| = e^{-v}, |w| = e^{-t}.
inline LeafPoint leaf_point(const Singularity& sing, cplx alpha, cplx zeta) {
  if (alpha == 0.0) throw DomainError("leaf_point: alpha must be nonzero");
  const double shift = std::log(std::abs(alpha)) / sing.b;
  const double x = zeta.real() + shift;
  const double v = zeta.imag();
  const double t = sing.t_of(zeta.real(), v);
  LeafPoint p;
  p.z = std::polar(std::exp(-v), x);
  p.w = std::polar(std::exp(-t), std::arg(alpha) + sing.a * x - sing.b * v);
  p.alpha = alpha;
  return p;
}

inline LeafPoint leaf_point(const Singularity& sing, cplx alpha, const SectorPoint& zeta) {
  return leaf_point(sing, alpha, zeta.zeta());
}

/// |psi'(zeta)|^2 = |z|^2 + |lambda|^2 |w|^2.
inline double leaf_speed_sq(const Singularity& sing, const LeafPoint& p) {
  return std::norm(p.z) + std::norm(sing.lambda()) * std::norm(p.w);
}

inline double leaf_speed_sq(const Singularity& sing, double v, double t) {
  return std::exp(-2.0 * v) + std::norm(sing.lambda()) * std::exp(-2.0 * t);
}

namespace detail {

/// tau^gamma in polar form with arg tau taken in (0, sector angle]. No validation.
inline HalfPlanePoint power_map(const Singularity& sing, double u, double v) {
  const double theta = std::clamp(std::atan2(v, u), 0.0, sing.sector_angle);
  const double rho = std::pow(std::hypot(u, v), sing.gamma);
  const double phi = sing.gamma * theta;
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

inline HalfPlanePoint power_map_tv(const Singularity& sing, double t, double v) {
  return power_map(sing, sing.u_of(t, v), v);
}

}  // namespace detail

inline HalfPlanePoint sector_to_halfplane(const Singularity& sing, const SectorPoint& zeta) {
  if (!zeta.in_open_sector()) {
    throw DomainError("sector_to_halfplane: point (u=" + std::to_string(zeta.u) +
                      ", v=" + std::to_string(zeta.v) + ") is outside the open sector");
  }
  return detail::power_map(sing, zeta.u, zeta.v);
}

inline SectorPoint halfplane_to_sector(const Singularity& sing, const HalfPlanePoint& p) {
  if (!(p.V > 0.0)) throw DomainError("halfplane_to_sector: V must be positive");
  const double r = std::pow(std::hypot(p.U, p.V), 1.0 / sing.gamma);
  const double theta = std::atan2(p.V, p.U) / sing.gamma;
  return sector_point(sing, r * std::cos(theta), r * std::sin(theta));
}

/// Recovers the sector coordinate of a leaf point from its moduli (u is
/// determined by |z| and |w|; the arguments are not consulted).
inline SectorPoint sector_of_leaf_point(const Singularity& sing, const LeafPoint& p) {
  const double v = -std::log(std::abs(p.z));
  const double t = -std::log(std::abs(p.w));
  return sector_point_tv(sing, t, v);
}

}  // namespace lelong
