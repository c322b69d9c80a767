#include "squarelab/tensor.hpp"

#include "detail/spec_parse.hpp"

#include <algorithm>

namespace squarelab {
namespace {

ScalarMatrix kronecker(const ScalarMatrix& a, const ScalarMatrix& b) {
  ScalarMatrix out = ScalarMatrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (!a(i, j).is_zero()) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// T on cell values: synthesis . shift . analysis.
ScalarMatrix shift_on_cells(int resolution) {
  const Eigen::Index n = Eigen::Index{1} << resolution;
  ScalarMatrix m(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    ScalarVector e = ScalarVector::Zero(n);
    e[c] = 1;
    m.col(c) = haar_synthesis(haar_shift(haar_analysis(e)));
  }
  return m;
}

}  // namespace

DyadicSet2D::DyadicSet2D(int resolution, std::vector<bool> cells) : resolution_(resolution), cells_(std::move(cells)) {
  if (resolution < 0 || resolution > kMaxResolution) throw Error("2D resolution must be in 0..12");
  if (cells_.size() != side() * side()) throw Error("cell count must be 4^N");
}

DyadicSet2D DyadicSet2D::parse(std::string_view spec) {
  const auto parts = detail::split(detail::trim(spec), ';');
  if (parts.size() != 2) throw Error("malformed 2D set spec: " + std::string(spec));
  const auto head = detail::trim(parts[0]);
  if (!head.starts_with("N=")) throw Error("2D set spec must start with N=");
  const long long n = detail::parse_int(head.substr(2));
  if (n < 0 || n > kMaxResolution) throw Error("2D resolution must be in 0..12");
  const auto size = std::size_t{1} << (2 * n);
  auto body = detail::trim(parts[1]);
  std::string rewritten;
  if (body.starts_with("mask2d=")) rewritten = "mask=" + std::string(body.substr(7));
  else if (body.starts_with("cells2d=")) rewritten = "cells=" + std::string(body.substr(8));
  else throw Error("2D set spec needs mask2d= or cells2d=");
  return DyadicSet2D(static_cast<int>(n), detail::parse_membership(rewritten, size, "cells"));
}

DyadicSet2D DyadicSet2D::product(const DyadicSet& first, const DyadicSet& second) {
  if (first.resolution() != second.resolution()) throw Error("resolution mismatch");
  const std::size_t n = first.cell_count();
  std::vector<bool> cells(n * n);
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2) cells[i1 * n + i2] = first.contains(i1) && second.contains(i2);
  return DyadicSet2D(first.resolution(), std::move(cells));
}

DyadicSet2D DyadicSet2D::from_mask(int resolution, std::uint64_t mask) {
  if (resolution < 0 || resolution > kMaxResolution) throw Error("2D resolution must be in 0..12");
  std::vector<bool> cells(std::size_t{1} << (2 * resolution), false);
  for (std::size_t i = 0; i < cells.size() && i < 64; ++i) cells[i] = ((mask >> i) & 1) != 0;
  return DyadicSet2D(resolution, std::move(cells));
}

std::size_t DyadicSet2D::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), true));
}

Rational DyadicSet2D::measure() const {
  return Rational(mpz_class(static_cast<unsigned long>(count())), mpz_class(1)) * pow2(-2 * resolution_);
}

DyadicSet2D DyadicSet2D::complement() const {
  std::vector<bool> out(cells_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = !cells_[i];
  return DyadicSet2D(resolution_, std::move(out));
}

std::string DyadicSet2D::mask_string() const { return detail::format_hex_mask(cells_); }

std::string DyadicSet2D::str() const { return "N=" + std::to_string(resolution_) + ";mask2d=" + mask_string(); }

RectCoefficientMap::RectCoefficientMap(int resolution, ScalarMatrix heap) : resolution_(resolution), data_(std::move(heap)) {
  const Eigen::Index n = Eigen::Index{1} << resolution;
  if (data_.rows() != n || data_.cols() != n) throw Error("coefficient grid must be 2^N x 2^N");
}

const ExactScalar& RectCoefficientMap::at(const DyadicInterval& first, const DyadicInterval& second) const {
  if (first.level >= resolution_ || second.level >= resolution_) throw Error("below resolution");
  return data_(static_cast<Eigen::Index>(first.heap()), static_cast<Eigen::Index>(second.heap()));
}

ExactScalar rect_coefficient(const DyadicSet2D& set, const DyadicInterval& first, const DyadicInterval& second) {
  const int n = set.resolution();
  if (first.level >= n || second.level >= n) throw Error("below resolution");
  auto sign = [n](const DyadicInterval& interval, std::uint64_t cell) {
    return interval.right_child().first_cell(n) <= cell ? 1L : -1L;
  };
  long total = 0;
  for (auto i1 = first.first_cell(n); i1 < first.last_cell(n); ++i1)
    for (auto i2 = second.first_cell(n); i2 < second.last_cell(n); ++i2)
      if (set.contains(i1, i2)) total += sign(first, i1) * sign(second, i2);
  return ExactScalar::sqrt2_pow(first.level + second.level) * ExactScalar(Rational(total) * pow2(-2 * n));
}

RectCoefficientMap rect_coefficients(const DyadicSet2D& set) {
  return RectCoefficientMap(set.resolution(), rect_analysis(set.indicator<ExactScalar>()));
}

Grid<ExactScalar> biparameter_square_function(const DyadicSet2D& set, bool include_mean) {
  return biparameter_square_cells(rect_coefficients(set).heap(), include_mean);
}

ExactScalar integrate_over(const DyadicSet2D& set, const Grid<ExactScalar>& cells) {
  const auto n = static_cast<Eigen::Index>(set.side());
  if (cells.rows() != n || cells.cols() != n) throw Error("cell count mismatch");
  ExactScalar sum(0);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      if (set.contains(static_cast<std::size_t>(r), static_cast<std::size_t>(c))) sum += cells(r, c);
  return sum * ExactScalar(pow2(-2 * set.resolution()));
}

Grid<ExactScalar> tensor_shift_cells(const DyadicSet2D& set) {
  return rect_synthesis(tensor_shift(rect_coefficients(set).heap()));
}

ShiftEnergy tensor_shift_energy(const DyadicSet2D& set) {
  if (set.empty()) throw Error("empty set");
  const Grid<ExactScalar> image = tensor_shift_cells(set);
  ShiftEnergy e{ExactScalar(0), ExactScalar(0), ExactScalar(0)};
  const auto n = static_cast<Eigen::Index>(set.side());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const ExactScalar& g = image(r, c);
      if (g.is_zero()) continue;
      const ExactScalar sq = g * g;
      e.total += sq;
      if (set.contains(static_cast<std::size_t>(r), static_cast<std::size_t>(c))) {
        e.inside += sq;
        e.pairing += g;
      }
    }
  const ExactScalar cell_measure(pow2(-2 * set.resolution()));
  e.inside *= cell_measure;
  e.total *= cell_measure;
  e.pairing *= cell_measure;
  return e;
}

ScalarMatrix tensor_shift_dense(int resolution) {
  if (resolution < 0 || resolution > 3) throw Error("dense tensor oracle limited to N <= 3");
  const ScalarMatrix t = shift_on_cells(resolution);
  return kronecker(t, t);
}

Grid<ExactScalar> tensor_shift_dense_apply(const DyadicSet2D& set) {
  const ScalarMatrix m = tensor_shift_dense(set.resolution());
  const auto n = static_cast<Eigen::Index>(set.side());
  ScalarVector flat(n * n);
  for (Eigen::Index i = 0; i < n * n; ++i) flat[i] = set.cells()[static_cast<std::size_t>(i)] ? 1 : 0;
  const ScalarVector image = m * flat;
  Grid<ExactScalar> out(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(r, c) = image[r * n + c];
  return out;
}

ScalarMatrix tensor_shift_matrix(int resolution) {
  const ScalarMatrix m = shift_matrix(resolution);
  return kronecker(m, m);
}

}  // namespace squarelab
