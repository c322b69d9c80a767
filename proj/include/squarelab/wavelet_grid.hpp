// Binary64 wavelet transforms on a periodic grid over [0,1).
//
// A GridSignal of length G = 2^g holds values on the cells [i/G, (i+1)/G).
// Coefficients are L^2 inner products with periodized wavelets. After a
// transform of depth L the array holds the 2^{g-L} coarse scaling
// coefficients followed by detail levels g-L, ..., g-1; with L = g this is
// the heap layout of haar.hpp (mean first, then h_{j,k} at 2^j + k).

#pragma once

#include "squarelab/haar.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace squarelab {

struct WaveletFilter {
  std::string name;
  std::vector<double> lowpass;
  int vanishing_moments = 1;

  std::size_t support() const { return lowpass.size(); }
  /// g[k] = (-1)^{k+1} h[L-1-k]; for Haar this is (right - left)/sqrt 2.
  std::vector<double> highpass() const;

  static WaveletFilter haar();
  /// Daubechies, 2 vanishing moments, 4 taps.
  static WaveletFilter db4();
  /// Daubechies, 3 vanishing moments, 6 taps.
  static WaveletFilter db6();
  /// "haar", "db4" or "db6".
  static WaveletFilter by_name(std::string_view name);
};

class GridSignal {
 public:
  explicit GridSignal(std::vector<double> samples);
  /// Indicator of a dyadic set sampled at 2^g points. Throws
  /// Error("resolution mismatch") when the set is finer than the grid.
  static GridSignal indicator(const DyadicSet& set, int exponent);

  int exponent() const { return exponent_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<double>& samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  /// ∫ f^2.
  double energy() const;

 private:
  int exponent_ = 0;
  std::vector<double> samples_;
};

std::vector<double> dwt_forward(const GridSignal& signal, const WaveletFilter& filter, int levels);
GridSignal dwt_inverse(const std::vector<double>& coeffs, const WaveletFilter& filter, int levels);

/// Position of the coefficient of w_I in a depth-`levels` transform on 2^g points.
std::size_t coefficient_index(const DyadicInterval& interval, int exponent, int levels);
/// Samples of w_I on the grid.
GridSignal synthesize_wavelet(const DyadicInterval& interval, const WaveletFilter& filter, int exponent, int levels);

/// Samples of Σ_I <1_V, w_I>^2 w_I^2 over all detail coefficients, plus the
/// coarse scaling terms when `include_scaling`.
GridSignal smooth_square_function(const DyadicSet& set, const WaveletFilter& filter, int exponent, int levels,
                                  bool include_scaling = false);
/// ∫_V S^2 / |V| with the scaling terms included.
double smooth_local_ratio(const DyadicSet& set, const WaveletFilter& filter, int exponent, int levels);

struct MonteCarloEstimate {
  double estimate = 0;
  double stderr_ = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  int exponent = 0;
};

struct MonteCarloConfig {
  int exponent = 10;
  int levels = 10;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Selects the Philox stream family; fits use one per p.
  std::uint64_t stream_offset = 0;
};

/// E ∫ φ^3 for φ = Σ_{I in system} X_I <1_V, w_I> w_I with X_I ~ Bernoulli(p).
/// Throws Error("p outside [0,1]") and Error("at least 100 trials required").
MonteCarloEstimate chi_monte_carlo(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system,
                                   double p, const MonteCarloConfig& config);

/// ∫ φ^3 with every X_I = 1.
double projection_cube_grid(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system,
                            int exponent, int levels);

/// Cubic through the origin fitted to estimates at p = 1/4, 1/2, 3/4.
struct CubicFit {
  std::array<double, 3> coeffs{};  ///< W1, W2, W3
  std::array<double, 3> stderrs{};
  std::array<MonteCarloEstimate, 3> samples{};
};
CubicFit fit_chi_cubic(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system,
                       const MonteCarloConfig& config);

}  // namespace squarelab
