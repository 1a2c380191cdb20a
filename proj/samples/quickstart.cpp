// Mass profile of a compact bump current at lambda = i, its kernel bound and
// one visibility value, using the library directly.

#include <cmath>
#include <cstdio>

#include "lelong/lelong.hpp"

int main() {
  using namespace lelong;
  const Singularity sing = singularity_from_lambda({0.0, 1.0});
  const CurrentSpec bump = CurrentSpec::single(sing, BoundaryProfile::triangle(0.0, 1.0));
  const Tolerance tol{1e-6, 1e-12};

  std::printf("gamma = %g\n", sing.gamma);
  std::printf("%10s %14s %14s %10s\n", "r", "G(r)", "pairing", "ratio");
  for (int k : {1, 4, 8, 12}) {
    const double r = std::ldexp(1.0, -k);
    const GBound b = bound_G_via_kernel(bump, sing, r, tol);
    std::printf("%10.3g %14.8g %14.8g %10.6f\n", r, b.lhs, b.rhs, b.ratio());
  }

  const auto K = kernel_K(sing, 4.0, 0.0, tol);
  // lambda = i, y = 0: K_s(0) = e^{2s} E_1(2s) with E_1(x) = -Ei(-x)
  std::printf("K_4(0) = %.10g (closed form %.10g)\n", K.value, -std::exp(8.0) * std::expint(-8.0));

  const auto uni = default_uniformization(sing, cplx(sing.annulus_mid(), 0.0));
  VisibilityOptions opt;
  opt.horizon = 10.0;
  const auto N = visibility_N(uni, {0.0, 0.0}, 1.0 / 64.0, opt);
  std::printf("N(a, 0, 1/64) over horizon %g = %.6f +/- %.1g\n", N.horizon, N.N, N.error);
  return 0;
}
