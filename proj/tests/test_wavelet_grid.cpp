#include "squarelab/moments.hpp"
#include "squarelab/suites.hpp"
#include "squarelab/wavelet_grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace squarelab;

namespace {

std::vector<double> random_samples(Philox4x32& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = 2 * rng.uniform() - 1;
  return v;
}

}  // namespace

TEST(WaveletFilter, Orthonormality) {
  for (const auto& f : {WaveletFilter::haar(), WaveletFilter::db4(), WaveletFilter::db6()}) {
    const auto& h = f.lowpass;
    const auto g = f.highpass();
    EXPECT_NEAR(std::accumulate(h.begin(), h.end(), 0.0), std::sqrt(2.0), 1e-14) << f.name;
    EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 0.0, 1e-14) << f.name;
    for (std::size_t shift = 0; shift < h.size(); shift += 2) {
      double hh = 0, gg = 0, hg = 0;
      for (std::size_t k = 0; k + shift < h.size(); ++k) {
        hh += h[k] * h[k + shift];
        gg += g[k] * g[k + shift];
        hg += h[k] * g[k + shift];
      }
      EXPECT_NEAR(hh, shift == 0 ? 1.0 : 0.0, 1e-14) << f.name;
      EXPECT_NEAR(gg, shift == 0 ? 1.0 : 0.0, 1e-14) << f.name;
      EXPECT_NEAR(hg, 0.0, 1e-14) << f.name;
    }
    for (int m = 0; m < f.vanishing_moments; ++m) {
      double moment = 0;
      for (std::size_t k = 0; k < g.size(); ++k) moment += std::pow(static_cast<double>(k), m) * g[k];
      EXPECT_NEAR(moment, 0.0, 1e-12) << f.name << " moment " << m;
    }
  }
  EXPECT_THROW(WaveletFilter::by_name("db8"), Error);
}

TEST(Dwt, ReconstructionAndParseval) {
  Philox4x32 rng(51, 0);
  for (const auto& f : {WaveletFilter::haar(), WaveletFilter::db4(), WaveletFilter::db6()})
    for (int levels : {1, 4, 8}) {
      const GridSignal s(random_samples(rng, 256));
      const auto c = dwt_forward(s, f, levels);
      double energy = 0;
      for (double x : c) energy += x * x;
      EXPECT_NEAR(energy, s.energy(), 1e-10);
      const GridSignal back = dwt_inverse(c, f, levels);
      for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(back[i], s[i], 1e-10);
    }
}

TEST(Dwt, ConstantSignalHasNoDetails) {
  const GridSignal s(std::vector<double>(64, 1.0));
  for (const auto& f : {WaveletFilter::haar(), WaveletFilter::db4(), WaveletFilter::db6()}) {
    const auto c = dwt_forward(s, f, 6);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i], 0.0, 1e-12) << f.name;
    EXPECT_NEAR(c[0], 1.0, 1e-12);
  }
}

TEST(Dwt, HaarMatchesExactCoefficients) {
  Philox4x32 rng(52, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DyadicSet v = random_dyadic_set(rng, 5);
    const CoefficientMap exact = haar_coefficients(v);
    for (int g : {5, 7}) {
      const auto c = dwt_forward(GridSignal::indicator(v, g), WaveletFilter::haar(), g);
      EXPECT_NEAR(c[0], exact.mean().to_double(), 1e-12);
      for (const auto& i : complete_system(5))
        EXPECT_NEAR(c[coefficient_index(i, g, g)], exact.at(i).to_double(), 1e-12) << i.str();
    }
  }
  EXPECT_THROW(GridSignal::indicator(DyadicSet::parse("N=4;cells=0"), 3), Error);
}

TEST(Dwt, SynthesizedWaveletsAreOrthonormal) {
  const auto f = WaveletFilter::db4();
  const GridSignal a = synthesize_wavelet({2, 1}, f, 8, 8);
  const GridSignal b = synthesize_wavelet({2, 2}, f, 8, 8);
  const GridSignal c = synthesize_wavelet({3, 5}, f, 8, 8);
  EXPECT_NEAR(a.energy(), 1.0, 1e-12);
  double ab = 0, ac = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    ac += a[i] * c[i];
  }
  EXPECT_NEAR(ab / static_cast<double>(a.size()), 0.0, 1e-12);
  EXPECT_NEAR(ac / static_cast<double>(a.size()), 0.0, 1e-12);
}

TEST(SmoothSquareFunction, HaarMatchesExact) {
  Philox4x32 rng(53, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DyadicSet v = random_dyadic_set(rng, 4);
    for (bool mean : {false, true}) {
      const GridSignal s = smooth_square_function(v, WaveletFilter::haar(), 4, 4, mean);
      const StepFunction exact = dyadic_square_function(v, mean);
      for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], exact.values[static_cast<Eigen::Index>(i)].to_double(), 1e-10);
    }
  }
}

TEST(SmoothSquareFunction, LocalRatioStableUnderRefinement) {
  const DyadicSet half = DyadicSet::parse("N=1;cells=0");
  const double r12 = smooth_local_ratio(half, WaveletFilter::db4(), 12, 12);
  const double r13 = smooth_local_ratio(half, WaveletFilter::db4(), 13, 13);
  EXPECT_GT(r12, 0.0);
  EXPECT_NEAR(r12, r13, 5e-4 * r12);
  // The Haar ratio for the half interval is exact: mean 1/4 plus 1/4.
  EXPECT_NEAR(smooth_local_ratio(half, WaveletFilter::haar(), 6, 6), 0.5, 1e-12);
}

TEST(MonteCarlo, HaarWithinFourStandardErrors) {
  const DyadicSet v = DyadicSet::parse("N=3;cells=0,1,5");
  const HaarSystem s = complete_system(3);
  const PolyP chi = wavelet_moment_coefficients(s, v).polynomial();
  MonteCarloConfig cfg;
  cfg.exponent = 3;
  cfg.levels = 3;
  cfg.trials = 10000;
  cfg.seed = 99;
  for (const auto& [p, pq] : {std::pair{0.25, Rational(mpz_class(1), mpz_class(4))},
                              std::pair{0.5, Rational(mpz_class(1), mpz_class(2))},
                              std::pair{0.75, Rational(mpz_class(3), mpz_class(4))}}) {
    const MonteCarloEstimate m = chi_monte_carlo(v, WaveletFilter::haar(), s, p, cfg);
    EXPECT_EQ(m.trials, 10000u);
    EXPECT_LE(std::abs(m.estimate - poly_eval(chi, pq).to_double()), 4 * m.stderr_ + 1e-15) << p;
  }
}

TEST(MonteCarlo, DegenerateParameters) {
  const DyadicSet v = DyadicSet::parse("N=2;cells=0");
  const HaarSystem s = complete_system(2);
  MonteCarloConfig cfg;
  cfg.exponent = 2;
  cfg.levels = 2;
  cfg.trials = 100;
  EXPECT_EQ(chi_monte_carlo(v, WaveletFilter::haar(), s, 0.0, cfg).estimate, 0.0);
  const MonteCarloEstimate one = chi_monte_carlo(v, WaveletFilter::haar(), s, 1.0, cfg);
  EXPECT_NEAR(one.estimate, projection_cube_grid(v, WaveletFilter::haar(), s, 2, 2), 1e-14);
  EXPECT_NEAR(one.estimate, projection_cube_integral(s, v).to_double(), 1e-14);
  EXPECT_THROW(chi_monte_carlo(v, WaveletFilter::haar(), s, 1.5, cfg), Error);
  cfg.trials = 99;
  EXPECT_THROW(chi_monte_carlo(v, WaveletFilter::haar(), s, 0.5, cfg), Error);
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
  const DyadicSet v = DyadicSet::parse("N=3;mask=0x5b");
  MonteCarloConfig cfg;
  cfg.exponent = 8;
  cfg.levels = 8;
  cfg.trials = 500;
  cfg.seed = 3;
  const auto a = chi_monte_carlo(v, WaveletFilter::db4(), complete_system(3), 0.3, cfg);
  cfg.workers = 3;
  const auto b = chi_monte_carlo(v, WaveletFilter::db4(), complete_system(3), 0.3, cfg);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(MonteCarlo, HaarFitHasNoLinearTerm) {
  const DyadicSet v = DyadicSet::parse("N=3;cells=0,1,5");
  MonteCarloConfig cfg;
  cfg.exponent = 3;
  cfg.levels = 3;
  cfg.trials = 10000;
  cfg.seed = 5;
  const CubicFit fit = fit_chi_cubic(v, WaveletFilter::haar(), complete_system(3), cfg);
  EXPECT_LE(std::abs(fit.coeffs[0]), 4 * fit.stderrs[0] + 1e-12);
}
