#pragma once

// Numerical integration used throughout the library: a global adaptive
// Gauss-Kronrod (21-point) driver, half-line transforms, iterated integration
// over wedge domains {min(t, v) >= s} with explicit tail control, and a seeded
// Monte Carlo estimator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lelong {

struct Tolerance {
  double rel = 1e-8;
  double abs = 1e-13;
  std::size_t max_evals = 2'000'000;  // per adaptive 1D pass

  void validate() const {
    if (!(rel > 0.0) || !(abs > 0.0)) {
      throw std::invalid_argument("tolerance: rel and abs must be positive");
    }
    if (max_evals < 100) throw std::invalid_argument("tolerance: max_evals must be >= 100");
  }

  Tolerance tightened(double factor) const {
    return {rel / factor, abs / factor, max_evals * 4};
  }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // error indicator, not a guarantee
  std::size_t evaluations = 0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    evaluations += o.evaluations;
    converged = converged && o.converged;
    return *this;
  }
  friend QuadResult operator+(QuadResult a, const QuadResult& b) { return a += b; }

  QuadResult scaled(double k) const { return {value * k, error * std::abs(k), evaluations, converged}; }
};

/// Quadrature did not reach its tolerance; carries the best estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadResult& best() const { return best_; }

 private:
  QuadResult best_;
};

inline const QuadResult& require_converged(const QuadResult& r, const std::string& context) {
  if (!r.converged) {
    throw QuadratureError(context + ": quadrature did not converge (value " +
                              std::to_string(r.value) + ", error " + std::to_string(r.error) + ")",
                          r);
  }
  return r;
}

/// Integration range; either end may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval real_line() {
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }
  static Interval from(double lo) { return {lo, std::numeric_limits<double>::infinity()}; }
};

struct Options1d {
  std::span<const double> breaks{};  // interior points where the integrand has structure
  double scale = 1.0;                // length scale for half-line transforms
};

namespace detail {

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  int piece = 0;
};

struct Gk21Rule {
  static constexpr int kPoints = 21;

  static const auto& nodes() { return boost::math::quadrature::gauss_kronrod<double, 21>::abscissa(); }
  static const auto& kronrod() { return boost::math::quadrature::gauss_kronrod<double, 21>::weights(); }
  static const auto& gauss() { return boost::math::quadrature::gauss<double, 10>::weights(); }

  // QUADPACK-style error scaling of |K21 - G10|.
  template <class G>
  static Segment apply(G& g, int piece, double a, double b) {
    const auto& x = nodes();
    const auto& wk = kronrod();
    const auto& wg = gauss();
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv1[10];
    double fv2[10];
    const double fc = g(piece, centre);
    double resk = fc * wk[0];
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (std::size_t i = 1; i < x.size(); ++i) {
      const double dx = half * x[i];
      const double f1 = g(piece, centre - dx);
      const double f2 = g(piece, centre + dx);
      fv1[i - 1] = f1;
      fv2[i - 1] = f2;
      resk += wk[i] * (f1 + f2);
      resabs += wk[i] * (std::abs(f1) + std::abs(f2));
      if (i % 2 == 1) resg += wg[i / 2] * (f1 + f2);
    }
    const double reskh = 0.5 * resk;
    double resasc = wk[0] * std::abs(fc - reskh);
    for (std::size_t i = 1; i < x.size(); ++i) {
      resasc += wk[i] * (std::abs(fv1[i - 1] - reskh) + std::abs(fv2[i - 1] - reskh));
    }
    const double hl = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= hl;
    resabs *= hl;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    if (!std::isfinite(resk)) err = std::numeric_limits<double>::infinity();
    return {a, b, resk * half, err, piece};
  }
};

/// Global adaptive bisection over a set of initial segments. `g(piece, x)`
/// evaluates the (already transformed) integrand of piece `piece`.
template <class G>
QuadResult adaptive_gk(G&& g, std::span<const Segment> initial, const Tolerance& tol) {
  auto worse = [](const Segment& l, const Segment& r) { return l.error < r.error; };
  std::vector<Segment> heap;
  heap.reserve(64);
  std::size_t evals = 0;
  double frozen_value = 0.0;
  double frozen_error = 0.0;

  for (const auto& s : initial) {
    heap.push_back(Gk21Rule::apply(g, s.piece, s.a, s.b));
    evals += Gk21Rule::kPoints;
  }
  std::make_heap(heap.begin(), heap.end(), worse);

  auto totals = [&] {
    double v = frozen_value;
    double e = frozen_error;
    for (const auto& s : heap) {
      v += s.value;
      e += s.error;
    }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  bool converged = false;
  std::size_t since_resum = 0;
  while (true) {
    if (error <= std::max(tol.abs, tol.rel * std::abs(value))) {
      converged = true;
      break;
    }
    if (heap.empty() || evals + 2 * Gk21Rule::kPoints > tol.max_evals) break;

    std::pop_heap(heap.begin(), heap.end(), worse);
    const Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const double width = std::abs(worst.b - worst.a);
    if (!(width > 1e-13 * std::max(1.0, std::abs(worst.a) + std::abs(worst.b))) || mid == worst.a ||
        mid == worst.b) {
      frozen_value += worst.value;
      frozen_error += worst.error;
      continue;
    }
    const Segment left = Gk21Rule::apply(g, worst.piece, worst.a, mid);
    const Segment right = Gk21Rule::apply(g, worst.piece, mid, worst.b);
    evals += 2 * Gk21Rule::kPoints;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
    if (++since_resum == 64) {
      std::tie(value, error) = totals();
      since_resum = 0;
    }
  }
  std::tie(value, error) = totals();
  if (!converged) converged = error <= std::max(tol.abs, tol.rel * std::abs(value));
  if (!std::isfinite(value)) converged = false;
  return {value, error, evals, converged};
}

/// Maps t in [0, 1) onto a half-line anchored at `anchor`; direction +1 or -1.
struct HalfLineMap {
  double anchor = 0.0;
  double scale = 1.0;
  int direction = 0;  // 0 = identity (finite piece)

  std::pair<double, double> operator()(double t) const {
    if (direction == 0) return {t, 1.0};
    const double q = 1.0 - t;
    return {anchor + direction * scale * t / q, scale / (q * q)};
  }
};

}  // namespace detail

/// Adaptive integral of f over a finite, half-infinite or full line. Infinite
/// ends are split at the breakpoints first, then each half-line is mapped to
/// [0, 1) by x = anchor +/- scale * t / (1 - t).
template <class F>
QuadResult integrate_1d(F&& f, Interval range, const Tolerance& tol, const Options1d& opts = {}) {
  tol.validate();
  if (!(opts.scale > 0.0)) throw std::invalid_argument("integrate_1d: scale must be positive");
  if (std::isnan(range.lo) || std::isnan(range.hi)) throw std::invalid_argument("integrate_1d: NaN bound");
  if (range.lo > range.hi) {
    QuadResult r = integrate_1d(f, Interval{range.hi, range.lo}, tol, opts);
    r.value = -r.value;
    return r;
  }

  std::vector<double> pts;
  pts.reserve(opts.breaks.size() + 2);
  for (double x : opts.breaks) {
    if (std::isfinite(x) && x > range.lo && x < range.hi) pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const bool lo_inf = std::isinf(range.lo);
  const bool hi_inf = std::isinf(range.hi);
  if (lo_inf && hi_inf && pts.empty()) pts.push_back(0.0);

  std::vector<detail::HalfLineMap> maps;
  std::vector<detail::Segment> segs;
  if (lo_inf) {
    maps.push_back({pts.front(), opts.scale, -1});
    segs.push_back({0.0, 1.0, 0.0, 0.0, static_cast<int>(maps.size() - 1)});
  } else {
    pts.insert(pts.begin(), range.lo);
  }
  if (!hi_inf) pts.push_back(range.hi);
  maps.push_back({});
  const int identity = static_cast<int>(maps.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    segs.push_back({pts[i], pts[i + 1], 0.0, 0.0, identity});
  }
  if (hi_inf) {
    maps.push_back({pts.back(), opts.scale, +1});
    segs.push_back({0.0, 1.0, 0.0, 0.0, static_cast<int>(maps.size() - 1)});
  }

  auto g = [&](int piece, double t) {
    const auto [x, jac] = maps[static_cast<std::size_t>(piece)](t);
    if (!std::isfinite(x)) return 0.0;
    return static_cast<double>(f(x)) * jac;
  };
  return detail::adaptive_gk(g, segs, tol);
}

// ---------------------------------------------------------------------------
// Wedge domains {(t, v) : min(t, v) >= s}

/// Which coordinate realizes min(t, v) on a half of the wedge domain.
enum class Wedge { v_min, t_min };

/// Envelope |f(t, v)| <= amplitude * (1 + min) * exp(-exp_rate (min - s)) *
/// max(max, onset)^{-alg_power}, used to place the truncation cuts.
struct DecayDescriptor {
  double exp_rate = 2.0;
  double alg_power = 0.0;
  double amplitude = 0.0;
  double onset = 0.0;

  void validate() const {
    if (!(exp_rate > 0.0) || !std::isfinite(exp_rate)) {
      throw std::invalid_argument("decay descriptor: exp_rate must be positive");
    }
    if (!(alg_power > 1.0) || !std::isfinite(alg_power)) {
      throw std::invalid_argument("decay descriptor: alg_power must exceed 1");
    }
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
      throw std::invalid_argument("decay descriptor: amplitude must be finite and nonnegative");
    }
    if (!(onset >= 0.0) || !std::isfinite(onset)) {
      throw std::invalid_argument("decay descriptor: onset must be finite and nonnegative");
    }
  }
};

/// Optional shape information for integrate_2d.
struct WedgeLayout {
  /// Lower limit of the max coordinate for a given min value m (clamped to >= m).
  std::function<double(double)> inner_floor;
  /// Max-coordinate values where the integrand has structure, for a given wedge and m.
  std::function<void(Wedge, double, std::vector<double>&)> inner_breaks;
  std::vector<double> outer_breaks;
};

struct Quad2dResult : QuadResult {
  double min_cut = 0.0;     // min coordinate integrated over [s, min_cut]
  double max_cut = 0.0;     // max coordinate integrated up to max_cut
  double tail_bound = 0.0;  // certified (envelope) bound on the discarded tails
};

namespace detail {

inline double exp_moment(double lo, double s, double rate) {
  // integral_{lo}^{inf} (1 + m) exp(-rate (m - s)) dm
  return std::exp(-rate * (lo - s)) * ((1.0 + lo) / rate + 1.0 / (rate * rate));
}

inline double alg_tail(double m, double onset, double p) {
  // integral_{m}^{inf} max(M, onset)^{-p} dM
  if (m < onset) return (onset - m) * std::pow(onset, -p) + std::pow(onset, 1.0 - p) / (p - 1.0);
  return std::pow(m, 1.0 - p) / (p - 1.0);
}

}  // namespace detail

/// Iterated integral of f(t, v) over {min(t, v) >= s}, split into the two
/// halves where v or t is the minimum. The min coordinate runs over
/// [s, s + L] with L = max(10, -log(abs)/exp_rate), extended while the
/// envelope bound of the discarded strip exceeds abs/2; the max coordinate is
/// integrated in log scale up to the cut where the algebraic tail drops below
/// abs/4. Tail bounds are added to the reported error.
template <class F>
Quad2dResult integrate_2d(F&& f, double s, const DecayDescriptor& decay, const Tolerance& tol,
                          const WedgeLayout& layout = {}) {
  tol.validate();
  decay.validate();
  if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("integrate_2d: s must be >= 0");

  const double r = decay.exp_rate;
  const double p = decay.alg_power;
  const double amp = decay.amplitude;

  double L = std::max(10.0, -std::log(tol.abs) / r);
  auto min_tail = [&](double len) {
    return 2.0 * amp * detail::alg_tail(s + len, decay.onset, p) * detail::exp_moment(s + len, s, r);
  };
  while (min_tail(L) > 0.5 * tol.abs && L < 400.0) L += 1.0;

  const double moment = detail::exp_moment(s, s, r);
  double max_cut = std::max({decay.onset, s + L + 1.0, 1.0});
  if (amp > 0.0) {
    const double need = std::pow(8.0 * amp * moment / ((p - 1.0) * tol.abs), 1.0 / (p - 1.0));
    max_cut = std::max(max_cut, need);
  }
  const double max_tail = amp > 0.0 ? 2.0 * amp * moment * std::pow(max_cut, 1.0 - p) / (p - 1.0) : 0.0;

  Tolerance inner_tol{tol.rel / 4.0, tol.abs / (8.0 * L), tol.max_evals};
  Tolerance outer_tol{tol.rel / 2.0, tol.abs / 4.0, tol.max_evals};

  std::size_t inner_evals = 0;
  bool inner_ok = true;
  std::vector<double> mbreaks;
  std::vector<double> xbreaks;

  auto wedge_integral = [&](Wedge wedge) {
    auto outer = [&](double m) -> double {
      double lo = m;
      if (layout.inner_floor) lo = std::max(m, layout.inner_floor(m));
      if (!(lo < max_cut)) return 0.0;
      xbreaks.clear();
      if (layout.inner_breaks) {
        mbreaks.clear();
        layout.inner_breaks(wedge, m, mbreaks);
        for (double M : mbreaks) {
          if (M > lo && M < max_cut) xbreaks.push_back(std::log(M / lo));
        }
      }
      auto inner = [&](double x) {
        const double M = lo * std::exp(x);
        const double val = wedge == Wedge::v_min ? f(M, m) : f(m, M);
        return val * M;
      };
      const QuadResult q = integrate_1d(inner, Interval{0.0, std::log(max_cut / lo)}, inner_tol,
                                        Options1d{xbreaks, 1.0});
      inner_evals += q.evaluations;
      inner_ok = inner_ok && q.converged;
      return q.value;
    };
    return integrate_1d(outer, Interval{s, s + L}, outer_tol, Options1d{layout.outer_breaks, 1.0});
  };

  // The inner integral over M >= lo uses lo > 0.
  if (!(s > 0.0) && !layout.inner_floor) {
    throw std::invalid_argument("integrate_2d: s = 0 requires an inner floor");
  }

  const QuadResult a = wedge_integral(Wedge::v_min);
  const QuadResult b = wedge_integral(Wedge::t_min);

  Quad2dResult out;
  out.value = a.value + b.value;
  out.tail_bound = min_tail(L) + max_tail;
  const double l1 = std::abs(a.value) + std::abs(b.value);
  // converged inner passes are each within max(abs_i, rel_i |value|)
  const double inner_err = inner_tol.rel * l1 + 2.0 * L * inner_tol.abs;
  out.error = a.error + b.error + inner_err + out.tail_bound;
  out.evaluations = a.evaluations + b.evaluations + inner_evals;
  out.converged = a.converged && b.converged && inner_ok && std::isfinite(out.value);
  out.min_cut = s + L;
  out.max_cut = max_cut;
  return out;
}

// ---------------------------------------------------------------------------
// Seeded sampling

/// 64-bit Mersenne Twister with platform-independent real conversions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) { return lo * std::exp(uniform() * std::log(hi / lo)); }
  int sign() { return (engine_() >> 63) != 0U ? 1 : -1; }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * 3.14159265358979323846 * u2);
    has_spare_ = true;
    return rad * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Sample mean of f over n draws of sampler(rng), with the standard error as
/// error indicator. Deterministic for a given seed.
template <class F, class Sampler>
QuadResult monte_carlo(F&& f, Sampler&& sampler, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("monte_carlo: n must be >= 1");
  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(f(sampler(rng)));
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n)), n, true};
}

}  // namespace lelong
