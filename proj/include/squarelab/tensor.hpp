// Two-parameter dyadic objects on [0,1)^2: grid sets, rectangle
// coefficients, the biparameter square function and the tensor shift T (x) T.
//
// A grid set at resolution N has 2^N x 2^N cells; cell (i1, i2) covers
// [i1 2^-N, (i1+1) 2^-N) x [i2 2^-N, (i2+1) 2^-N) and is stored row-major at
// bit i1 2^N + i2. Coefficient grids are (2^N x 2^N) matrices indexed by heap
// positions in each coordinate, entry 0 standing for the constant function.

#pragma once

#include "squarelab/haar.hpp"
#include "squarelab/numeric.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace squarelab {

template <typename Scalar>
using Grid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class DyadicSet2D {
 public:
  static constexpr int kMaxResolution = 12;

  DyadicSet2D() = default;
  DyadicSet2D(int resolution, std::vector<bool> cells);

  /// "N=3;mask2d=0x..." (row-major) or "N=2;cells2d=0,5,10".
  static DyadicSet2D parse(std::string_view spec);
  static DyadicSet2D product(const DyadicSet& first, const DyadicSet& second);
  static DyadicSet2D from_mask(int resolution, std::uint64_t mask);

  int resolution() const { return resolution_; }
  std::size_t side() const { return std::size_t{1} << resolution_; }
  std::size_t cell_count() const { return cells_.size(); }
  bool contains(std::size_t i1, std::size_t i2) const { return cells_.at(i1 * side() + i2); }
  const std::vector<bool>& cells() const { return cells_; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  Rational measure() const;
  DyadicSet2D complement() const;
  std::string mask_string() const;
  std::string str() const;

  template <typename Scalar>
  Grid<Scalar> indicator() const {
    const auto n = static_cast<Eigen::Index>(side());
    Grid<Scalar> g(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        g(r, c) = cells_[static_cast<std::size_t>(r * n + c)] ? Scalar(1) : Scalar(0);
    return g;
  }

  friend bool operator==(const DyadicSet2D&, const DyadicSet2D&) = default;

 private:
  int resolution_ = 0;
  std::vector<bool> cells_;
};

/// <1_U, psi_{h1} (x) psi_{h2}> for heap indices h1, h2 (psi_0 = 1).
class RectCoefficientMap {
 public:
  RectCoefficientMap(int resolution, ScalarMatrix heap);

  int resolution() const { return resolution_; }
  /// Genuine Haar rectangle coefficient. Throws Error("below resolution").
  const ExactScalar& at(const DyadicInterval& first, const DyadicInterval& second) const;
  const ScalarMatrix& heap() const { return data_; }
  ExactScalar sum_of_squares() const { return data_.squaredNorm(); }

 private:
  int resolution_;
  ScalarMatrix data_;
};

// ---------------------------------------------------------------------------
// Separable kernels: the 1D kernel along x2 (rows), then along x1 (columns).

template <typename Derived>
Grid<typename Derived::Scalar> rect_analysis(const Eigen::MatrixBase<Derived>& cells) {
  Grid<typename Derived::Scalar> out(cells.rows(), cells.cols());
  for (Eigen::Index r = 0; r < cells.rows(); ++r) out.row(r) = haar_analysis(cells.row(r).transpose()).transpose();
  for (Eigen::Index c = 0; c < cells.cols(); ++c) out.col(c) = haar_analysis(out.col(c));
  return out;
}

template <typename Derived>
Grid<typename Derived::Scalar> rect_synthesis(const Eigen::MatrixBase<Derived>& heap) {
  Grid<typename Derived::Scalar> out(heap.rows(), heap.cols());
  for (Eigen::Index c = 0; c < heap.cols(); ++c) out.col(c) = haar_synthesis(heap.col(c));
  for (Eigen::Index r = 0; r < heap.rows(); ++r) out.row(r) = haar_synthesis(out.row(r).transpose()).transpose();
  return out;
}

/// T (x) T on a coefficient grid.
template <typename Derived>
Grid<typename Derived::Scalar> tensor_shift(const Eigen::MatrixBase<Derived>& heap) {
  Grid<typename Derived::Scalar> out(heap.rows(), heap.cols());
  for (Eigen::Index c = 0; c < heap.cols(); ++c) out.col(c) = haar_shift(heap.col(c));
  for (Eigen::Index r = 0; r < heap.rows(); ++r) out.row(r) = haar_shift(out.row(r).transpose()).transpose();
  return out;
}

/// Cellwise Σ_R coeff(R)^2 |R|^{-1} 1_R. Without mean terms only rectangles
/// with both sides genuine Haar intervals contribute.
template <typename Derived>
Grid<typename Derived::Scalar> biparameter_square_cells(const Eigen::MatrixBase<Derived>& heap, bool include_mean) {
  using Scalar = typename Derived::Scalar;
  using Ops = ScalarOps<Scalar>;
  const Eigen::Index n = heap.rows();
  Grid<Scalar> out = Grid<Scalar>::Constant(n, n, Scalar(0));
  for (Eigen::Index h1 = include_mean ? 0 : 1; h1 < n; ++h1) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row = heap.row(h1).transpose();
    if (!include_mean) row[0] = Scalar(0);
    bool any = false;
    for (Eigen::Index k = 0; k < n; ++k) any = any || !(row[k] == Scalar(0));
    if (!any) continue;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> along = square_function_cells(row, include_mean);
    Eigen::Index first = 0, last = n;
    Scalar inv_length = Scalar(1);
    if (h1 > 0) {
      const auto interval = DyadicInterval::from_heap(static_cast<std::uint64_t>(h1));
      const int resolution = static_cast<int>(std::countr_zero(static_cast<std::uint64_t>(n)));
      first = static_cast<Eigen::Index>(interval.first_cell(resolution));
      last = static_cast<Eigen::Index>(interval.last_cell(resolution));
      inv_length = Ops::dyadic(interval.level);
    }
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scaled = along * inv_length;
    for (Eigen::Index r = first; r < last; ++r) out.row(r) += scaled.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact API.

/// Direct summation over the cells of R. Throws Error("below resolution").
ExactScalar rect_coefficient(const DyadicSet2D& set, const DyadicInterval& first, const DyadicInterval& second);
/// All coefficients by the separable transform.
RectCoefficientMap rect_coefficients(const DyadicSet2D& set);

Grid<ExactScalar> biparameter_square_function(const DyadicSet2D& set, bool include_mean = true);
ExactScalar integrate_over(const DyadicSet2D& set, const Grid<ExactScalar>& cells);

/// Energies of (T (x) T) 1_U. Throws Error("empty set").
ShiftEnergy tensor_shift_energy(const DyadicSet2D& set);

/// (T (x) T) 1_U on grid cells by the separable path.
Grid<ExactScalar> tensor_shift_cells(const DyadicSet2D& set);
/// Dense 4^N x 4^N matrix of T (x) T acting on cell values (row-major
/// flattening). Limited to N <= 3.
ScalarMatrix tensor_shift_dense(int resolution);
/// (T (x) T) 1_U by the dense matrix.
Grid<ExactScalar> tensor_shift_dense_apply(const DyadicSet2D& set);

/// Matrix of T (x) T on paired_basis(N) (x) paired_basis(N), the Kronecker
/// square of shift_matrix(N).
ScalarMatrix tensor_shift_matrix(int resolution);

}  // namespace squarelab
