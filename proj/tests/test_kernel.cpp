#include <gtest/gtest.h>

#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <numbers>

#include "lelong/kernel.hpp"

using namespace lelong;

namespace {

const Tolerance kTol{1e-9, 1e-14};

// K_s(0) for lambda = i: e^{2s} E_1(2s).
double k_closed_form(double s) { return std::exp(2.0 * s) * boost::math::expint(1, 2.0 * s); }

// Composite midpoint rule on the (min, max) wedge pair with a cut at max = cut,
// Richardson-extrapolated in the grid step.
double k_grid_oracle(const Singularity& sing, double s, double y, double cut, int n) {
  auto pass = [&](int nn) {
    const double xmax = std::log(cut / s);
    const double hm = 12.0 / nn;  // min in [s, s + 12]
    const double hx = xmax / nn;
    double sum = 0.0;
    for (int i = 0; i < nn; ++i) {
      const double m = s + (i + 0.5) * hm;
      for (int j = 0; j < nn; ++j) {
        const double M = m * std::exp((j + 0.5) * hx * std::log(cut / m) / xmax);
        const double dM = M * hx * std::log(cut / m) / xmax;
        if (M < m) continue;
        for (int w = 0; w < 2; ++w) {
          const double t = w == 0 ? M : m;
          const double v = w == 0 ? m : M;
          const auto W = detail::power_map_tv(sing, t, v);
          sum += std::exp(2.0 * (s - m)) * W.V / (W.V * W.V + (y - W.U) * (y - W.U)) * hm * dM;
        }
      }
    }
    return sum / sing.b;
  };
  const double a = pass(n);
  const double b = pass(2 * n);
  return b + (b - a) / 3.0;
}

}  // namespace

TEST(KernelK, ClosedFormAtPurelyImaginaryEigenvalueRatio) {
  const auto sing = singularity_from_lambda({0.0, 1.0});
  EXPECT_NEAR(kernel_K(sing, 1.0, 0.0, kTol).value, 0.361328616888222584697, 1e-10);
  EXPECT_NEAR(kernel_K(sing, 8.0, 0.0, kTol).value, 0.0590081036085564361865, 1e-11);
  for (double s : {1.5, 3.0, 20.0, 64.0}) {
    const auto r = kernel_K(sing, s, 0.0, kTol);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, k_closed_form(s), 1e-9 * k_closed_form(s)) << "s=" << s;
    EXPECT_LE(std::abs(r.value - k_closed_form(s)), std::max(r.error, 1e-14) * 10.0);
  }
}

TEST(KernelK, MatchesGridOracle) {
  const auto sing = singularity_from_lambda({0.0, 1.0});
  // the cut at max = 200 drops a tail of order 1/200^2 relative to the whole
  const double cut = 200.0;
  const double oracle = k_grid_oracle(sing, 1.0, 0.0, cut, 400);
  const double exact = k_closed_form(1.0);
  EXPECT_NEAR(oracle, exact, 1e-3 * exact);
  EXPECT_NEAR(kernel_K(sing, 1.0, 0.0, kTol).value, oracle, 1e-3 * exact);
}

TEST(KernelK, TwoRoutesAgree) {
  for (cplx lam : {cplx(0, 1), cplx(1, 1), cplx(-1, 1), cplx(0.3, 2.0)}) {
    const auto sing = singularity_from_lambda(lam);
    for (double s : {1.0, 4.0, 32.0}) {
      for (double y : {-100.0, -1.0, 0.0, 2.5, 1e3}) {
        const double a = kernel_K(sing, s, y, kTol).value;
        const auto b = kernel_K_uv(sing, s, y, kTol);
        EXPECT_NEAR(a, b.value, 1e-6 * a) << "lambda=" << lam << " s=" << s << " y=" << y;
      }
    }
  }
}

TEST(KernelK, SymmetricInYForUnitImaginaryRatio) {
  // lambda = i: swapping t and v sends W to -conj(W)
  const auto sing = singularity_from_lambda({0.0, 1.0});
  for (double s : {1.0, 10.0}) {
    for (double y : {0.5, 7.0, 300.0}) {
      const double p = kernel_K(sing, s, y, kTol).value;
      const double m = kernel_K(sing, s, -y, kTol).value;
      EXPECT_NEAR(p, m, 1e-8 * p);
    }
  }
}

TEST(KernelK, PositiveEverywhereAndDecreasingInFarRegime) {
  // for s below the y scale the mass moves toward |W| ~ |y| and K_s(y) may grow with s
  for (cplx lam : {cplx(0, 1), cplx(1, 1), cplx(-1, 1)}) {
    const auto sing = singularity_from_lambda(lam);
    for (double y : {-50.0, 0.0, 50.0}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double s = 1.0; s <= 1024.0; s *= 2.0) {
        const double k = kernel_K(sing, s, y, kTol).value;
        EXPECT_GT(k, 0.0);
        if (s >= 4.0 * y_scale(sing, y)) {
          EXPECT_LT(k, prev) << "lambda=" << lam << " y=" << y << " s=" << s;
        }
        prev = k;
      }
    }
  }
}

TEST(KernelK, RejectsNonPositiveS) {
  const auto sing = singularity_from_lambda({0.0, 1.0});
  EXPECT_THROW(kernel_K(sing, 0.0, 0.0, kTol), DomainError);
  EXPECT_THROW(kernel_K(sing, -1.0, 0.0, kTol), DomainError);
}

TEST(KernelComparator, RegimesOfTheComparator) {
  const auto sing = singularity_from_lambda({0.0, 1.0});  // gamma = 2
  // s below the y scale: (1 + |y|)^{-1/2}
  EXPECT_NEAR(kernel_comparator(sing, 1.0, 99.0), 0.1, 1e-15);
  // s above: (1 + |y|)^{-1/2} (sqrt(1 + |y|) / s)
  EXPECT_NEAR(kernel_comparator(sing, 40.0, 99.0), 1.0 / 40.0, 1e-15);
  EXPECT_NEAR(kernel_comparator(sing, 8.0, 0.0), 1.0 / 8.0, 1e-15);
}

TEST(KernelReport, GridRefinementInsertsMidpoints) {
  const auto s2 = refine_s_grid({1.0, 4.0, 16.0});
  ASSERT_EQ(s2.size(), 5u);
  EXPECT_DOUBLE_EQ(s2[1], 2.0);
  EXPECT_DOUBLE_EQ(s2[3], 8.0);
  const auto y2 = refine_y_grid({-99.0, 0.0, 99.0});
  ASSERT_EQ(y2.size(), 5u);
  EXPECT_NEAR(y2[1], -9.0, 1e-12);
  EXPECT_NEAR(y2[3], 9.0, 1e-12);
  EXPECT_EQ(default_y_grid().size(), 11u);
  EXPECT_EQ(default_s_grid().size(), 8u);
}

TEST(KernelReport, SmallGridIsBoundedAndCountsCases) {
  const auto sing = singularity_from_lambda({0.0, 1.0});
  const auto rep = main_bound_report(sing, {1.0, 16.0, 128.0}, {-1e4, 0.0, 10.0, 1e4}, {1e-7, 1e-13}, false);
  EXPECT_EQ(rep.cells.size(), 12u);
  EXPECT_EQ(rep.failed_cells, 0);
  EXPECT_GT(rep.far_cells, 0);
  EXPECT_GT(rep.near_cells, 0);
  EXPECT_EQ(rep.far_cells + rep.near_cells + rep.comparable_cells, 12);
  EXPECT_GT(rep.empirical_c, 0.0);
  EXPECT_LT(rep.empirical_c, 10.0);
  for (const auto& c : rep.cells) EXPECT_NEAR(c.bound_ratio, c.K / kernel_comparator(sing, c.s, c.y), 1e-15);
  EXPECT_THROW(main_bound_report(sing, {}, {0.0}, kTol, false), std::invalid_argument);
}

TEST(ExpOracle, MatchesClosedForm) {
  for (double s0 : {1.0, 2.0, 10.0}) {
    const auto r = lemma_exp_oracle(s0, {1e-12, 1e-15});
    EXPECT_NEAR(r.value, s0 / 2.0 + 0.25, 1e-10 * s0);
  }
  EXPECT_THROW(lemma_exp_oracle(0.5, kTol), DomainError);
}

TEST(Regimes, ClassifyExamples) {
  const auto sing = singularity_from_lambda({0.0, 1.0});  // Y = sqrt(1 + |y|)
  const RegimeThresholds th;
  EXPECT_EQ(classify_regime(sing, 2.0, 50.0, 0.0, th), Regime::far);
  EXPECT_EQ(classify_regime(sing, 2.0, 5.0, 1e4 - 1.0, th), Regime::near_origin);  // Y = 100
  EXPECT_EQ(classify_regime(sing, 80.0, 120.0, 1e4 - 1.0, th), Regime::diagonal);
  EXPECT_EQ(classify_regime(sing, 2.0, 120.0, 1e4 - 1.0, th), Regime::boundary_strip);
  EXPECT_EQ(classify_regime(sing, 10.0, 120.0, 1e4 - 1.0, th), Regime::unclassified);
  EXPECT_THROW(classify_regime(sing, 0.5, 10.0, 0.0, th), DomainError);
  EXPECT_THROW(classify_regime(sing, 2.0, 10.0, 0.0, {4.0, 2.0}), std::invalid_argument);
}

TEST(RhoSolver, SquaringMap) {
  // lambda = i: U = u^2 - v^2 and rho = t = u; y = 3, v = 1 gives u = 2
  const auto sing = singularity_from_lambda({0.0, 1.0});
  const auto r = rho_solver(sing, 3.0, 1.0);
  EXPECT_NEAR(r.rho, 2.0, 1e-14);
  EXPECT_LT(r.residual, 1e-15);
  const auto sw = rho_solver(sing, -3.0, 1.0, {}, true);
  EXPECT_NEAR(sw.rho, 2.0, 1e-14);
}

TEST(RhoSolver, ResidualSmallAndMonotoneInY) {
  for (cplx lam : {cplx(0, 1), cplx(1, 1), cplx(-1, 1)}) {
    const auto sing = singularity_from_lambda(lam);
    double prev = 0.0;
    for (double y = 10.0; y < 1e7; y *= 3.0) {
      const auto r = rho_solver(sing, y, 1.0);
      EXPECT_LT(r.residual, 1e-10) << "lambda=" << lam << " y=" << y;
      EXPECT_GT(r.rho, prev);
      prev = r.rho;
      const double Y = y_scale(sing, y);
      if (y > 1e3) {
        EXPECT_TRUE(r.in_band);
      }
      EXPECT_EQ(r.precondition, 1.0 <= Y / 16.0);
    }
  }
}

TEST(RhoSolver, NoRootOnWrongBranch) {
  const auto sing = singularity_from_lambda({0.0, 1.0});
  EXPECT_THROW(rho_solver(sing, -5.0, 1.0), NoRootError);
  EXPECT_THROW(rho_solver(sing, 5.0, 1.0, {}, true), NoRootError);
  EXPECT_THROW(rho_solver(sing, 5.0, -1.0), DomainError);
}

TEST(RegimeSampler, DeterministicAndFinite) {
  const auto sing = singularity_from_lambda({1.0, 1.0});
  for (auto part : {RegimePart::global_modulus, RegimePart::global_imaginary, RegimePart::far, RegimePart::near_origin,
                    RegimePart::diagonal, RegimePart::boundary_strip}) {
    const auto a = regime_constant_sampler(sing, part, 500, 42);
    const auto b = regime_constant_sampler(sing, part, 500, 42);
    EXPECT_EQ(a.sup_ratio, b.sup_ratio) << part_name(part);
    EXPECT_EQ(a.inf_ratio, b.inf_ratio) << part_name(part);
    EXPECT_EQ(a.samples, 500u);
    EXPECT_TRUE(std::isfinite(a.sup_ratio) && a.sup_ratio > 0.0);
    EXPECT_TRUE(std::isfinite(a.inf_ratio) && a.inf_ratio > 0.0);
    EXPECT_LE(a.inf_ratio, a.sup_ratio);
  }
  EXPECT_THROW(regime_constant_sampler(sing, RegimePart::far, 10, 1), std::invalid_argument);
}

TEST(RegimeSampler, ModulusComparisonBounded) {
  // |W| = |tau|^gamma and |tau| is within a lambda-dependent factor of max(t, v)
  for (cplx lam : {cplx(0, 1), cplx(1, 1), cplx(-1, 1)}) {
    const auto sing = singularity_from_lambda(lam);
    const auto band = regime_constant_sampler(sing, RegimePart::global_modulus, 2000, 7);
    EXPECT_LT(band.sup_ratio / band.inf_ratio, 100.0) << "lambda=" << lam;
  }
}

TEST(RegimeSampler, StripResidualAtMachinePrecision) {
  for (cplx lam : {cplx(0, 1), cplx(1, 1), cplx(-1, 1)}) {
    const auto sing = singularity_from_lambda(lam);
    const auto band = regime_constant_sampler(sing, RegimePart::boundary_strip, 1000, 3);
    EXPECT_EQ(band.no_root, 0u);
    EXPECT_LT(band.max_rho_residual, 1e-12);
  }
}
