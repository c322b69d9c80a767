// Dyadic intervals on [0,1), Haar coefficients of indicator sets, the dyadic
// square function and the Haar shift operator.
//
// Coefficient vectors use the heap layout: entry 0 holds the mean and entry
// 2^j + k holds the coefficient of h_{j,k}, the Haar function of
// [k 2^-j, (k+1) 2^-j). The sign convention is
//   h_I = |I|^{-1/2} (1_{I+} - 1_{I-}),
// and the shift acts by T h_{I+} = h_{I-}, T h_{I-} = -h_{I+}.

#pragma once

#include "squarelab/martingale.hpp"
#include "squarelab/numeric.hpp"

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace squarelab {

struct DyadicInterval {
  int level = 0;
  std::uint64_t index = 0;

  static DyadicInterval from_heap(std::uint64_t heap);
  /// Parses "j:k".
  static DyadicInterval parse(std::string_view text);

  std::uint64_t heap() const { return (std::uint64_t{1} << level) + index; }
  DyadicInterval left_child() const { return {level + 1, 2 * index}; }    ///< I-
  DyadicInterval right_child() const { return {level + 1, 2 * index + 1}; }  ///< I+
  DyadicInterval parent() const { return {level - 1, index / 2}; }
  DyadicInterval sibling() const { return {level, index ^ 1}; }
  bool is_right_child() const { return (index & 1) != 0; }
  Rational length() const { return pow2(-level); }
  /// Range of resolution-N cells covered by the interval, [first, last).
  std::uint64_t first_cell(int resolution) const { return index << (resolution - level); }
  std::uint64_t last_cell(int resolution) const { return (index + 1) << (resolution - level); }
  bool contains(const DyadicInterval& other) const {
    return other.level >= level && (other.index >> (other.level - level)) == index;
  }
  std::string str() const;

  friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

using HaarSystem = std::vector<DyadicInterval>;
/// "0:0,1:0,2:3"
HaarSystem parse_system(std::string_view text);
/// All intervals of level < resolution, in heap order.
HaarSystem complete_system(int resolution);

/// A subset of [0,1) that is a union of resolution-N cells.
class DyadicSet {
 public:
  DyadicSet() = default;
  DyadicSet(int resolution, std::vector<bool> cells);

  /// "N=4;mask=0xA5C3" (bit i selects cell i) or "N=4;cells=0,2,5".
  static DyadicSet parse(std::string_view spec);
  static DyadicSet from_interval(int resolution, const DyadicInterval& interval);
  static DyadicSet from_mask(int resolution, std::uint64_t mask);

  int resolution() const { return resolution_; }
  std::size_t cell_count() const { return cells_.size(); }
  bool contains(std::size_t cell) const { return cells_.at(cell); }
  const std::vector<bool>& cells() const { return cells_; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  Rational measure() const;
  DyadicSet complement() const;
  /// Same set at a finer resolution.
  DyadicSet refine(int resolution) const;
  std::string mask_string() const;
  std::string str() const;

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> indicator() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(static_cast<Eigen::Index>(cells_.size()));
    for (std::size_t i = 0; i < cells_.size(); ++i) v[static_cast<Eigen::Index>(i)] = cells_[i] ? Scalar(1) : Scalar(0);
    return v;
  }

  friend bool operator==(const DyadicSet&, const DyadicSet&) = default;

 private:
  int resolution_ = 0;
  std::vector<bool> cells_;
};

/// Map I -> <f, h_I> for all I of level < N, plus the mean.
class CoefficientMap {
 public:
  explicit CoefficientMap(int resolution);
  CoefficientMap(int resolution, ScalarVector heap);

  int resolution() const { return resolution_; }
  const ExactScalar& mean() const { return data_[0]; }
  void set_mean(ExactScalar value) { data_[0] = std::move(value); }
  const ExactScalar& at(const DyadicInterval& interval) const;
  void set(const DyadicInterval& interval, ExactScalar value);
  const ScalarVector& heap() const { return data_; }
  /// mean^2 + sum of squared coefficients.
  ExactScalar sum_of_squares() const { return data_.squaredNorm(); }

  friend bool operator==(const CoefficientMap& a, const CoefficientMap& b) {
    return a.resolution_ == b.resolution_ && a.data_ == b.data_;
  }

 private:
  int resolution_;
  ScalarVector data_;
};

// ---------------------------------------------------------------------------
// Scalar-generic kernels. `cells` has 2^N entries (values on resolution-N
// cells); coefficient vectors use the heap layout.

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> haar_analysis(
    const Eigen::MatrixBase<Derived>& cells) {
  using Scalar = typename Derived::Scalar;
  using Ops = ScalarOps<Scalar>;
  const Eigen::Index n = cells.size();
  const int resolution = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(n)));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sums = cells;
  for (int j = resolution - 1; j >= 0; --j) {
    const Eigen::Index width = Eigen::Index{1} << j;
    const Scalar scale = Ops::sqrt2_pow(j) * Ops::dyadic(-resolution);
    for (Eigen::Index k = 0; k < width; ++k) {
      out[width + k] = scale * (sums[2 * k + 1] - sums[2 * k]);
      sums[k] = sums[2 * k] + sums[2 * k + 1];
    }
  }
  out[0] = sums[0] * Ops::dyadic(-resolution);
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> haar_synthesis(
    const Eigen::MatrixBase<Derived>& heap) {
  using Scalar = typename Derived::Scalar;
  using Ops = ScalarOps<Scalar>;
  const Eigen::Index n = heap.size();
  const int resolution = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(n)));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values(n);
  values[0] = heap[0];
  for (int j = 0; j < resolution; ++j) {
    const Eigen::Index width = Eigen::Index{1} << j;
    const Scalar height = Ops::sqrt2_pow(j);
    for (Eigen::Index k = width - 1; k >= 0; --k) {
      const Scalar step = heap[width + k] * height;
      const Scalar parent = values[k];
      values[2 * k] = parent - step;
      values[2 * k + 1] = parent + step;
    }
  }
  return values;
}

/// T on heap coefficients; the mean and h_{[0,1)} are annihilated.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> haar_shift(
    const Eigen::MatrixBase<Derived>& heap) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Constant(heap.size(), Scalar(0));
  for (Eigen::Index left = 2; left + 1 < heap.size(); left += 2) {
    out[left] = heap[left + 1];    // c(I+) lands on h_{I-}
    out[left + 1] = -heap[left];   // -c(I-) lands on h_{I+}
  }
  return out;
}

/// Cellwise sum over I of coeff(I)^2 |I|^{-1} 1_I (+ mean^2).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> square_function_cells(
    const Eigen::MatrixBase<Derived>& heap, bool include_mean) {
  using Scalar = typename Derived::Scalar;
  using Ops = ScalarOps<Scalar>;
  const Eigen::Index n = heap.size();
  const int resolution = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(n)));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Constant(
      n, include_mean ? Scalar(heap[0] * heap[0]) : Scalar(0));
  for (int j = 0; j < resolution; ++j) {
    const Eigen::Index width = Eigen::Index{1} << j;
    const Eigen::Index span = n >> j;
    const Scalar inv_length = Ops::dyadic(j);
    for (Eigen::Index k = 0; k < width; ++k) {
      const Scalar& c = heap[width + k];
      if (c == Scalar(0)) continue;
      const Scalar term = c * c * inv_length;
      for (Eigen::Index i = k * span; i < (k + 1) * span; ++i) out[i] += term;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact API.

/// <1_V, h_I> = 2^{j/2} (|I+ ∩ V| - |I- ∩ V|). Throws Error("below resolution").
ExactScalar haar_coefficient(const DyadicSet& set, const DyadicInterval& interval);
CoefficientMap haar_coefficients(const DyadicSet& set);

/// Cellwise square function of 1_V, exact.
StepFunction dyadic_square_function(const DyadicSet& set, bool include_mean = true);
/// ∫_V f for a cellwise function f.
ExactScalar integrate_over(const DyadicSet& set, const ScalarVector& cells);

CoefficientMap haar_shift_apply(const CoefficientMap& coeffs);

struct ShiftEnergy {
  ExactScalar inside;   ///< ∫_V (T f)^2
  ExactScalar total;    ///< ∫ (T f)^2
  ExactScalar pairing;  ///< <T f, f>
};

/// Energies of T 1_V. Throws Error("empty set").
ShiftEnergy shift_energy(const DyadicSet& set);

/// h_J for 1 <= level(J) <= N-1 in heap order; siblings are adjacent.
HaarSystem paired_basis(int resolution);
/// Matrix of T on paired_basis(N); column c is the image of basis vector c.
ScalarMatrix shift_matrix(int resolution);

}  // namespace squarelab
