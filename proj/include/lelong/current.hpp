#pragma once

// Directed harmonic currents in the singular flow box: a transversal measure
// on the fundamental annulus, nonnegative boundary profiles on the real line,
// and the leafwise harmonic weights obtained as Poisson integrals.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lelong/foliation.hpp"
#include "lelong/quadrature.hpp"

namespace lelong {

/// Invalid experiment input (malformed profile, measure or grid).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nonnegative boundary function on the real line.
class BoundaryProfile {
 public:
  enum class Kind { zero, constant, triangle, cauchy, algebraic, step, custom };

  static BoundaryProfile zero() { return BoundaryProfile(Kind::zero); }
  static BoundaryProfile constant(double height) {
    BoundaryProfile p(Kind::constant);
    p.height_ = nonneg(height, "constant height");
    return p;
  }
  /// height * max(0, 1 - |y - centre| / width)
  static BoundaryProfile triangle(double centre, double width, double height = 1.0) {
    BoundaryProfile p(Kind::triangle);
    p.centre_ = finite(centre, "triangle centre");
    p.width_ = positive(width, "triangle width");
    p.height_ = nonneg(height, "triangle height");
    return p;
  }
  /// height / (1 + ((y - centre) / width)^2)
  static BoundaryProfile cauchy(double centre, double width, double height = 1.0) {
    BoundaryProfile p(Kind::cauchy);
    p.centre_ = finite(centre, "cauchy centre");
    p.width_ = positive(width, "cauchy width");
    p.height_ = nonneg(height, "cauchy height");
    return p;
  }
  /// height * (1 + |y|)^{-beta}
  static BoundaryProfile algebraic(double beta, double height = 1.0) {
    BoundaryProfile p(Kind::algebraic);
    p.beta_ = positive(beta, "algebraic exponent");
    p.height_ = nonneg(height, "algebraic height");
    return p;
  }
  /// height on [edge, inf), zero before.
  static BoundaryProfile step(double edge, double height = 1.0) {
    BoundaryProfile p(Kind::step);
    p.centre_ = finite(edge, "step edge");
    p.height_ = nonneg(height, "step height");
    return p;
  }
  /// User function with declared decay exponent and optional support radius.
  /// Kinks listed in `breaks` are used as quadrature breakpoints.
  static BoundaryProfile custom(std::string name, std::function<double(double)> f, double decay,
                                std::optional<double> support = std::nullopt, std::vector<double> breaks = {}) {
    if (!f) throw ConfigError("custom profile: function is empty");
    BoundaryProfile p(Kind::custom);
    p.name_ = std::move(name);
    p.fn_ = std::move(f);
    p.beta_ = decay;
    p.support_ = support;
    p.breaks_ = std::move(breaks);
    return p;
  }

  Kind kind() const { return kind_; }
  double height() const { return height_; }
  double centre() const { return centre_; }
  double width() const { return width_; }
  const std::string& name() const { return name_; }

  double operator()(double y) const {
    switch (kind_) {
      case Kind::zero: return 0.0;
      case Kind::constant: return height_;
      case Kind::triangle: return height_ * std::max(0.0, 1.0 - std::abs(y - centre_) / width_);
      case Kind::cauchy: {
        const double x = (y - centre_) / width_;
        return height_ / (1.0 + x * x);
      }
      case Kind::algebraic: return height_ * std::pow(1.0 + std::abs(y), -beta_);
      case Kind::step: return y >= centre_ ? height_ : 0.0;
      case Kind::custom: return fn_(y);
    }
    return 0.0;
  }

  /// beta with H(y) = O((1 + |y|)^{-beta}); infinite for compact support.
  double decay_exponent() const {
    switch (kind_) {
      case Kind::zero:
      case Kind::triangle: return std::numeric_limits<double>::infinity();
      case Kind::constant:
      case Kind::step: return height_ == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      case Kind::cauchy: return height_ == 0.0 ? std::numeric_limits<double>::infinity() : 2.0;
      case Kind::algebraic: return height_ == 0.0 ? std::numeric_limits<double>::infinity() : beta_;
      case Kind::custom: return support_ ? std::numeric_limits<double>::infinity() : beta_;
    }
    return 0.0;
  }

  /// Radius R with H = 0 outside [-R, R], when known.
  std::optional<double> support_bound() const {
    switch (kind_) {
      case Kind::zero: return 0.0;
      case Kind::triangle: return std::abs(centre_) + width_;
      case Kind::custom: return support_;
      default: return height_ == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    }
  }

  bool is_zero() const { return kind_ == Kind::zero || (kind_ != Kind::custom && height_ == 0.0); }

  /// Points where H is not smooth.
  std::vector<double> kinks() const {
    switch (kind_) {
      case Kind::triangle: return {centre_ - width_, centre_, centre_ + width_};
      case Kind::algebraic: return {0.0};
      case Kind::step: return {centre_};
      case Kind::custom: return breaks_;
      default: return {};
    }
  }

  /// Same function up to the height factor.
  bool same_shape(const BoundaryProfile& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
      case Kind::zero:
      case Kind::constant: return true;
      case Kind::triangle:
      case Kind::cauchy: return centre_ == o.centre_ && width_ == o.width_;
      case Kind::algebraic: return beta_ == o.beta_;
      case Kind::step: return centre_ == o.centre_;
      case Kind::custom: return false;
    }
    return false;
  }

  BoundaryProfile scaled(double k) const {
    if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("profile scale must be finite and nonnegative");
    BoundaryProfile p = *this;
    if (kind_ == Kind::custom) {
      auto f = fn_;
      p.fn_ = [f, k](double y) { return k * f(y); };
    } else {
      p.height_ *= k;
    }
    return p;
  }

  /// Checks H >= 0 and boundedness of H(y) (1 + |y|)^beta on a log grid up to 1e6.
  void validate_decay() const {
    const double beta = std::isinf(decay_exponent()) ? 0.0 : decay_exponent();
    double near_max = 0.0;
    double far_max = 0.0;
    for (int sign : {-1, 1}) {
      for (int k = 0; k <= 240; ++k) {
        const double y = sign * (std::pow(10.0, k / 40.0) - 1.0);
        const double h = (*this)(y);
        if (!(h >= 0.0) || !std::isfinite(h)) {
          throw ConfigError("profile " + describe() + " is negative or non-finite at y = " + std::to_string(y));
        }
        const double w = h * std::pow(1.0 + std::abs(y), beta);
        if (std::abs(y) <= 10.0) near_max = std::max(near_max, w);
        else far_max = std::max(far_max, w);
      }
    }
    if (far_max > 10.0 * near_max + 1e-300 && far_max > 0.0) {
      throw ConfigError("profile " + describe() + " decays slower than its declared exponent");
    }
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::zero: return "zero";
      case Kind::constant: return "constant(" + std::to_string(height_) + ")";
      case Kind::triangle:
        return "triangle(centre=" + std::to_string(centre_) + ", width=" + std::to_string(width_) +
               ", height=" + std::to_string(height_) + ")";
      case Kind::cauchy:
        return "cauchy(centre=" + std::to_string(centre_) + ", width=" + std::to_string(width_) +
               ", height=" + std::to_string(height_) + ")";
      case Kind::algebraic: return "algebraic(beta=" + std::to_string(beta_) + ", height=" + std::to_string(height_) + ")";
      case Kind::step: return "step(edge=" + std::to_string(centre_) + ", height=" + std::to_string(height_) + ")";
      case Kind::custom: return "custom(" + name_ + ")";
    }
    return "?";
  }

 private:
  explicit BoundaryProfile(Kind k) : kind_(k) {}

  static double finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ConfigError(std::string(what) + " must be finite");
    return x;
  }
  static double positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive");
    return x;
  }
  static double nonneg(double x, const char* what) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be nonnegative");
    return x;
  }

  Kind kind_;
  double height_ = 1.0;
  double centre_ = 0.0;
  double width_ = 1.0;
  double beta_ = 0.0;
  std::optional<double> support_;
  std::vector<double> breaks_;
  std::string name_;
  std::function<double(double)> fn_;
};

// ---------------------------------------------------------------------------
// Poisson extension to the upper half plane

namespace detail {

// (1/pi) int_p^q (A + B y) V / (V^2 + (y - U)^2) dy for a linear piece.
inline double poisson_linear_piece(double A, double B, double p, double q, double U, double V) {
  const double xp = (p - U) / V;
  const double xq = (q - U) / V;
  const double datan = std::atan2(xq - xp, 1.0 + xp * xq);
  const double dlog = std::log1p((xq - xp) * (xq + xp) / (1.0 + xp * xp));
  return ((A + B * U) * datan + 0.5 * B * V * dlog) / std::numbers::pi;
}

// Triangle of half-width w centred at 0, seen from Z = X + iV with |Z| >= 64 w:
// P = -(1/pi) sum_j mu_j Im Z^{-(j+1)} over the even moments
// mu_{2k} = 2 height w^{2k+1} / ((2k+1)(2k+2)). The linear-piece formulas
// cancel to roundoff there; terms beyond j = 8 are below 64^{-10}.
inline double poisson_triangle_far(double height, double w, double X, double V) {
  const cplx inv = 1.0 / cplx(X, V);
  const cplx inv2 = inv * inv;
  cplx zp = inv;  // Z^{-(j+1)}
  double w_pow = w;
  double sum = 0.0;
  for (int k = 0; k <= 4; ++k) {
    const double mu = 2.0 * height * w_pow / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
    sum -= mu * zp.imag();
    zp *= inv2;
    w_pow *= w * w;
  }
  return std::max(0.0, sum / std::numbers::pi);
}

}  // namespace detail

/// (1/pi) int H(y) V / (V^2 + (y - U)^2) dy by quadrature in x = (y - U) / V.
inline QuadResult poisson_eval_numeric(const BoundaryProfile& h, const HalfPlanePoint& P, const Tolerance& tol) {
  if (!(P.V > 0.0)) throw DomainError("poisson_eval: V must be positive");
  if (h.is_zero()) return {0.0, 0.0, 1, true};
  if (auto R = h.support_bound(); R && std::hypot(P.U, P.V) > 4.0 * *R) {
    // far from a compact support U + V x cancels; integrate in y instead
    auto g = [&](double y) { return h(y) * P.V / (P.V * P.V + (y - P.U) * (y - P.U)); };
    const auto kinks = h.kinks();
    QuadResult r = integrate_1d(g, Interval{-*R, *R}, tol, Options1d{kinks, 1.0});
    return r.scaled(1.0 / std::numbers::pi);
  }
  std::vector<double> br{0.0};
  for (double k : h.kinks()) br.push_back((k - P.U) / P.V);
  auto f = [&](double x) { return h(P.U + P.V * x) / (1.0 + x * x); };
  Interval range = Interval::real_line();
  if (auto R = h.support_bound()) range = {(-*R - P.U) / P.V, (*R - P.U) / P.V};
  QuadResult r = integrate_1d(f, range, tol, Options1d{br, 1.0});
  return r.scaled(1.0 / std::numbers::pi);
}

/// Poisson extension of H at P: closed form for the built-in families with
/// one, quadrature otherwise. Nonnegative.
inline QuadResult poisson_eval_result(const BoundaryProfile& h, const HalfPlanePoint& P, const Tolerance& tol) {
  if (!(P.V > 0.0)) throw DomainError("poisson_eval: V must be positive");
  using K = BoundaryProfile::Kind;
  const double U = P.U;
  const double V = P.V;
  switch (h.kind()) {
    case K::zero: return {0.0, 0.0, 1, true};
    case K::constant: return {h.height(), 0.0, 1, true};
    case K::step: {
      // angle subtended by [edge, inf); atan2 keeps relative accuracy as the value tends to 0
      return {h.height() * std::atan2(V, h.centre() - U) / std::numbers::pi, 0.0, 1, true};
    }
    case K::cauchy: {
      const double s = h.width();
      const double d = U - h.centre();
      return {h.height() * s * (V + s) / ((V + s) * (V + s) + d * d), 0.0, 1, true};
    }
    case K::triangle: {
      const double c = h.centre();
      const double w = h.width();
      if (std::hypot(U - c, V) >= 64.0 * w) return {detail::poisson_triangle_far(h.height(), w, U - c, V), 0.0, 1, true};
      const double ht = h.height() / w;
      // rising piece: ht (y - c + w) on [c - w, c]; falling piece: ht (c + w - y) on [c, c + w]
      const double val = detail::poisson_linear_piece(ht * (w - c), ht, c - w, c, U, V) +
                         detail::poisson_linear_piece(ht * (c + w), -ht, c, c + w, U, V);
      return {std::max(0.0, val), 0.0, 1, true};
    }
    case K::algebraic:
    case K::custom: break;
  }
  QuadResult r = poisson_eval_numeric(h, P, tol);
  r.value = std::max(0.0, r.value);
  return r;
}

inline double poisson_eval(const BoundaryProfile& h, const HalfPlanePoint& P, const Tolerance& tol) {
  return require_converged(poisson_eval_result(h, P, tol), "poisson_eval").value;
}

// ---------------------------------------------------------------------------
// Currents

struct Atom {
  cplx alpha;
  double weight = 1.0;
  BoundaryProfile profile = BoundaryProfile::zero();
};

/// Absolutely continuous radial part of the transversal measure: density in
/// |alpha| on the fundamental annulus, with one profile for every label.
struct RadialMeasure {
  std::function<double(double)> density;
  BoundaryProfile profile = BoundaryProfile::zero();
};

/// Profile with its transversal weight; every computed quantity is linear in these.
struct WeightedProfile {
  double weight = 1.0;
  BoundaryProfile profile = BoundaryProfile::zero();
};

struct CurrentSpec {
  std::vector<Atom> atoms;
  std::optional<RadialMeasure> radial;
  bool aggregate = true;

  /// Single atom at the mid-annulus label.
  static CurrentSpec single(const Singularity& sing, BoundaryProfile profile, double weight = 1.0) {
    CurrentSpec c;
    c.atoms.push_back({cplx(sing.annulus_mid(), 0.0), weight, std::move(profile)});
    return c;
  }

  double radial_mass(const Singularity& sing) const {
    if (!radial) return 0.0;
    const auto r = integrate_1d(radial->density, {sing.annulus_inner(), 1.0}, {1e-10, 1e-14});
    return require_converged(r, "radial measure mass").value;
  }

  double total_mass(const Singularity& sing) const {
    double m = radial_mass(sing);
    for (const auto& a : atoms) m += a.weight;
    return m;
  }

  void validate(const Singularity& sing) const {
    if (atoms.empty() && !radial) throw ConfigError("current: transversal measure is empty");
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const auto& a = atoms[j];
      const std::string where = "current.atoms[" + std::to_string(j) + "]";
      if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw ConfigError(where + ".weight must be >= 0");
      if (!sing.in_annulus(a.alpha)) {
        throw ConfigError(where + ".alpha must satisfy e^{-2 pi b} <= |alpha| < 1 (|alpha| = " +
                          std::to_string(std::abs(a.alpha)) + ")");
      }
      a.profile.validate_decay();
    }
    if (radial) {
      if (!radial->density) throw ConfigError("current.radial: density is empty");
      for (int k = 0; k <= 64; ++k) {
        const double r = sing.annulus_inner() + (1.0 - sing.annulus_inner()) * k / 65.0;
        const double d = radial->density(r);
        if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("current.radial: density must be >= 0");
      }
      radial->profile.validate_decay();
    }
    const double m = total_mass(sing);
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("current: total transversal mass must be positive");
  }

  /// True when every profile has beta > 1/gamma or compact support.
  bool integrable(const Singularity& sing) const {
    for (const auto& t : terms(sing)) {
      if (!t.profile.support_bound() && !(t.profile.decay_exponent() > 1.0 / sing.gamma)) return false;
    }
    return true;
  }

  /// Profile attached to label alpha.
  const BoundaryProfile& profile_at(cplx alpha) const {
    for (const auto& a : atoms) {
      if (std::abs(a.alpha - alpha) <= 1e-12 * std::max(1.0, std::abs(alpha))) return a.profile;
    }
    if (radial) return radial->profile;
    throw DomainError("current: no profile attached to the requested label");
  }

  /// Weighted profiles for integration against nu. With aggregation, atoms of
  /// identical shape collapse into one term.
  std::vector<WeightedProfile> terms(const Singularity& sing) const {
    std::vector<WeightedProfile> out;
    auto push = [&](double w, const BoundaryProfile& p) {
      if (w == 0.0 || p.is_zero()) return;
      if (aggregate) {
        for (auto& t : out) {
          if (t.profile.same_shape(p)) {
            // fold the relative height into the weight; the stored profile keeps its own height
            const double ratio = unit_ratio(p, t.profile);
            if (ratio >= 0.0) {
              t.weight += w * ratio;
              return;
            }
          }
        }
      }
      out.push_back({w, p});
    };
    for (const auto& a : atoms) push(a.weight, a.profile);
    if (radial) push(radial_mass(sing), radial->profile);
    return out;
  }

 private:
  // p = ratio * q for same-shape built-in profiles; -1 when not expressible.
  static double unit_ratio(const BoundaryProfile& p, const BoundaryProfile& q) {
    if (p.kind() == BoundaryProfile::Kind::zero) return 0.0;
    if (q.height() == 0.0) return -1.0;
    return p.height() / q.height();
  }
};

/// h_alpha at psi_alpha(zeta): Poisson extension evaluated at the half-plane image of zeta.
inline double leaf_density(const CurrentSpec& spec, const Singularity& sing, cplx alpha, const SectorPoint& zeta,
                           const Tolerance& tol) {
  return poisson_eval(spec.profile_at(alpha), sector_to_halfplane(sing, zeta), tol);
}

struct IntegrabilityReport {
  double chi_mass = 0.0;
  double error = 0.0;
  bool converged = true;
  std::string note;
};

/// Total mass of chi = int int H_alpha(y) (1 + |y|)^{1/gamma - 1} dy dnu(alpha).
/// Divergent configurations report converged = false with the mass of
/// [-1e6, 1e6] as a lower bound.
inline IntegrabilityReport chi_mass(const CurrentSpec& spec, const Singularity& sing, const Tolerance& tol) {
  const double e = 1.0 / sing.gamma - 1.0;
  IntegrabilityReport rep;
  for (const auto& t : spec.terms(sing)) {
    const auto& h = t.profile;
    auto f = [&](double y) { return h(y) * std::pow(1.0 + std::abs(y), e); };
    std::vector<double> br{0.0};
    for (double k : h.kinks()) br.push_back(k);
    const bool finite = h.support_bound().has_value() || h.decay_exponent() > 1.0 / sing.gamma;
    Interval range = Interval::real_line();
    if (auto R = h.support_bound()) range = {-*R, *R};
    if (!finite) range = {-1e6, 1e6};
    double scale = 1.0;
    if (h.kind() == BoundaryProfile::Kind::cauchy || h.kind() == BoundaryProfile::Kind::triangle) {
      scale = h.width();
      br.push_back(h.centre());
    }
    const QuadResult q = integrate_1d(f, range, tol, Options1d{br, scale});
    rep.chi_mass += t.weight * q.value;
    rep.error += t.weight * q.error;
    if (!q.converged) {
      rep.converged = false;
      rep.note = "quadrature did not converge for " + h.describe();
    }
    if (!finite) {
      rep.converged = false;
      rep.note = "divergent: " + h.describe() + " decays no faster than (1+|y|)^{-1/gamma}; value is a lower bound";
    }
  }
  return rep;
}

}  // namespace lelong
