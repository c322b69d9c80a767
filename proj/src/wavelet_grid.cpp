#include "squarelab/wavelet_grid.hpp"

#include "squarelab/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <thread>

namespace squarelab {
namespace {

struct SparseTerm {
  std::vector<std::size_t> index;
  std::vector<double> value;
};

SparseTerm sparse(const GridSignal& s, double scale) {
  SparseTerm t;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != 0.0) {
      t.index.push_back(i);
      t.value.push_back(scale * s[i]);
    }
  return t;
}

void check_levels(int exponent, int levels) {
  if (levels < 0 || levels > exponent) throw Error("levels too deep");
}

// Samples of the basis function stored at `index` of a depth-`levels` transform.
GridSignal unit_synthesis(std::size_t index, const WaveletFilter& filter, int exponent, int levels) {
  std::vector<double> coeffs(std::size_t{1} << exponent, 0.0);
  coeffs.at(index) = 1.0;
  return dwt_inverse(coeffs, filter, levels);
}

// Σ_k c_k^2 b_k^2 where b_k is b_0 shifted by k * stride samples.
void add_squared_family(std::vector<double>& out, const GridSignal& first, const double* coeffs, std::size_t count,
                        std::size_t stride) {
  const SparseTerm support = sparse(first, 1.0);
  const std::size_t g = out.size();
  for (std::size_t k = 0; k < count; ++k) {
    const double c = coeffs[k];
    if (c == 0.0) continue;
    const double c2 = c * c;
    const std::size_t shift = k * stride;
    for (std::size_t m = 0; m < support.index.size(); ++m) {
      const double w = support.value[m];
      out[(support.index[m] + shift) % g] += c2 * w * w;
    }
  }
}

}  // namespace

std::vector<double> WaveletFilter::highpass() const {
  const std::size_t l = lowpass.size();
  std::vector<double> g(l);
  for (std::size_t k = 0; k < l; ++k) g[k] = ((k % 2 == 0) ? -1.0 : 1.0) * lowpass[l - 1 - k];
  return g;
}

WaveletFilter WaveletFilter::haar() { return {"haar", {M_SQRT1_2, M_SQRT1_2}, 1}; }

WaveletFilter WaveletFilter::db4() {
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * M_SQRT2;
  return {"db4", {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d}, 2};
}

WaveletFilter WaveletFilter::db6() {
  return {"db6",
          {0.33267055295008263, 0.8068915093110925, 0.45987750211849154, -0.13501102001025458,
           -0.08544127388202666, 0.035226291885709536},
          3};
}

WaveletFilter WaveletFilter::by_name(std::string_view name) {
  if (name == "haar") return haar();
  if (name == "db4") return db4();
  if (name == "db6") return db6();
  throw Error("unknown filter: " + std::string(name));
}

GridSignal::GridSignal(std::vector<double> samples) : samples_(std::move(samples)) {
  const std::size_t n = samples_.size();
  if (n == 0 || (n & (n - 1)) != 0) throw Error("grid length must be a power of two");
  exponent_ = std::countr_zero(n);
  for (double v : samples_)
    if (!std::isfinite(v)) throw Error("grid signal must be finite");
}

GridSignal GridSignal::indicator(const DyadicSet& set, int exponent) {
  if (set.resolution() > exponent) throw Error("resolution mismatch");
  const DyadicSet fine = set.refine(exponent);
  std::vector<double> s(fine.cell_count());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = fine.contains(i) ? 1.0 : 0.0;
  return GridSignal(std::move(s));
}

double GridSignal::energy() const {
  double sum = 0;
  for (double v : samples_) sum += v * v;
  return sum / static_cast<double>(samples_.size());
}

std::vector<double> dwt_forward(const GridSignal& signal, const WaveletFilter& filter, int levels) {
  check_levels(signal.exponent(), levels);
  const auto& h = filter.lowpass;
  const auto g = filter.highpass();
  const std::size_t taps = h.size();
  std::size_t n = signal.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out(n);
  std::vector<double> approx(n);
  for (std::size_t i = 0; i < n; ++i) approx[i] = signal[i] * scale;
  std::vector<double> next;
  for (int l = 0; l < levels; ++l) {
    const std::size_t half = n / 2;
    next.assign(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
      double a = 0, d = 0;
      for (std::size_t m = 0; m < taps; ++m) {
        const double x = approx[(2 * k + m) % n];
        a += h[m] * x;
        d += g[m] * x;
      }
      next[k] = a;
      out[half + k] = d;
    }
    approx.swap(next);
    n = half;
  }
  std::copy(approx.begin(), approx.begin() + static_cast<std::ptrdiff_t>(n), out.begin());
  return out;
}

GridSignal dwt_inverse(const std::vector<double>& coeffs, const WaveletFilter& filter, int levels) {
  const std::size_t total = coeffs.size();
  if (total == 0 || (total & (total - 1)) != 0) throw Error("grid length must be a power of two");
  check_levels(std::countr_zero(total), levels);
  const auto& h = filter.lowpass;
  const auto g = filter.highpass();
  const std::size_t taps = h.size();
  std::size_t n = total >> levels;
  std::vector<double> approx(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> next;
  while (n < total) {
    const std::size_t size = 2 * n;
    next.assign(size, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = approx[k];
      const double d = coeffs[n + k];
      for (std::size_t m = 0; m < taps; ++m) next[(2 * k + m) % size] += h[m] * a + g[m] * d;
    }
    approx.swap(next);
    n = size;
  }
  const double scale = std::sqrt(static_cast<double>(total));
  for (double& v : approx) v *= scale;
  return GridSignal(std::move(approx));
}

std::size_t coefficient_index(const DyadicInterval& interval, int exponent, int levels) {
  check_levels(exponent, levels);
  if (interval.level >= exponent) throw Error("below resolution");
  if (interval.level < exponent - levels) throw Error("interval coarser than the transform depth");
  return static_cast<std::size_t>(interval.heap());
}

GridSignal synthesize_wavelet(const DyadicInterval& interval, const WaveletFilter& filter, int exponent, int levels) {
  return unit_synthesis(coefficient_index(interval, exponent, levels), filter, exponent, levels);
}

GridSignal smooth_square_function(const DyadicSet& set, const WaveletFilter& filter, int exponent, int levels,
                                  bool include_scaling) {
  const GridSignal f = GridSignal::indicator(set, exponent);
  check_levels(exponent, levels);
  const std::vector<double> coeffs = dwt_forward(f, filter, levels);
  const std::size_t g = f.size();
  std::vector<double> out(g, 0.0);
  const int coarse = exponent - levels;
  if (include_scaling)
    add_squared_family(out, unit_synthesis(0, filter, exponent, levels), coeffs.data(), std::size_t{1} << coarse,
                       g >> coarse);
  for (int j = coarse; j < exponent; ++j) {
    const std::size_t first = std::size_t{1} << j;
    add_squared_family(out, unit_synthesis(first, filter, exponent, levels), coeffs.data() + first, first, g >> j);
  }
  return GridSignal(std::move(out));
}

double smooth_local_ratio(const DyadicSet& set, const WaveletFilter& filter, int exponent, int levels) {
  if (set.empty()) throw Error("empty set");
  const GridSignal s = smooth_square_function(set, filter, exponent, levels, true);
  const GridSignal v = GridSignal::indicator(set, exponent);
  double sum = 0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (v[i] != 0.0) {
      sum += s[i];
      ++inside;
    }
  return sum / static_cast<double>(inside);
}

namespace {

std::vector<SparseTerm> projection_terms(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system,
                                         int exponent, int levels) {
  const std::vector<double> coeffs = dwt_forward(GridSignal::indicator(set, exponent), filter, levels);
  std::vector<SparseTerm> terms;
  for (const auto& interval : system) {
    const double c = coeffs[coefficient_index(interval, exponent, levels)];
    terms.push_back(c == 0.0 ? SparseTerm{} : sparse(synthesize_wavelet(interval, filter, exponent, levels), c));
  }
  return terms;
}

double cube_integral(const std::vector<double>& phi) {
  double sum = 0;
  for (double v : phi) sum += v * v * v;
  return sum / static_cast<double>(phi.size());
}

}  // namespace

double projection_cube_grid(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system, int exponent,
                            int levels) {
  std::vector<double> phi(std::size_t{1} << exponent, 0.0);
  for (const auto& t : projection_terms(set, filter, system, exponent, levels))
    for (std::size_t m = 0; m < t.index.size(); ++m) phi[t.index[m]] += t.value[m];
  return cube_integral(phi);
}

MonteCarloEstimate chi_monte_carlo(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system,
                                   double p, const MonteCarloConfig& config) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("p outside [0,1]");
  if (config.trials < 100) throw Error("at least 100 trials required");
  const auto terms = projection_terms(set, filter, system, config.exponent, config.levels);
  const std::size_t g = std::size_t{1} << config.exponent;

  std::vector<double> values(config.trials);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::vector<double> phi(g);
    for (std::size_t trial = begin; trial < end; ++trial) {
      Philox4x32 rng(config.seed, config.stream_offset + trial);
      std::fill(phi.begin(), phi.end(), 0.0);
      for (const auto& t : terms) {
        if (!(rng.uniform() < p)) continue;
        for (std::size_t m = 0; m < t.index.size(); ++m) phi[t.index[m]] += t.value[m];
      }
      values[trial] = cube_integral(phi);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(config.trials)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(run_range, config.trials * w / workers, config.trials * (w + 1) / workers);
  }

  double sum = 0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(config.trials);
  double sq = 0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double variance = sq / static_cast<double>(config.trials - 1);
  return {mean, std::sqrt(variance / static_cast<double>(config.trials)), config.trials, config.seed, config.exponent};
}

CubicFit fit_chi_cubic(const DyadicSet& set, const WaveletFilter& filter, const HaarSystem& system,
                       const MonteCarloConfig& config) {
  static constexpr std::array<double, 3> kP = {0.25, 0.5, 0.75};
  CubicFit fit;
  Eigen::Matrix3d a;
  Eigen::Vector3d y;
  for (int i = 0; i < 3; ++i) {
    MonteCarloConfig c = config;
    c.stream_offset = config.stream_offset + (std::uint64_t{static_cast<unsigned>(i)} << 40);
    fit.samples[static_cast<std::size_t>(i)] = chi_monte_carlo(set, filter, system, kP[static_cast<std::size_t>(i)], c);
    const double p = kP[static_cast<std::size_t>(i)];
    a.row(i) << p, p * p, p * p * p;
    y[i] = fit.samples[static_cast<std::size_t>(i)].estimate;
  }
  const Eigen::Matrix3d inv = a.inverse();
  const Eigen::Vector3d w = inv * y;
  for (int k = 0; k < 3; ++k) {
    double var = 0;
    for (int i = 0; i < 3; ++i) {
      const double se = fit.samples[static_cast<std::size_t>(i)].stderr_;
      var += inv(k, i) * inv(k, i) * se * se;
    }
    fit.coeffs[static_cast<std::size_t>(k)] = w[k];
    fit.stderrs[static_cast<std::size_t>(k)] = std::sqrt(var);
  }
  return fit;
}

}  // namespace squarelab
