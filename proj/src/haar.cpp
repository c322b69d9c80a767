#include "squarelab/haar.hpp"

#include "detail/spec_parse.hpp"

#include <algorithm>

namespace squarelab {
namespace {

constexpr int kMaxResolution = 24;

void check_resolution(int resolution) {
  if (resolution < 0 || resolution > kMaxResolution)
    throw Error("resolution must be in 0.." + std::to_string(kMaxResolution));
}

}  // namespace

DyadicInterval DyadicInterval::from_heap(std::uint64_t heap) {
  if (heap == 0) throw Error("heap index 0 is the mean, not an interval");
  const int level = 63 - std::countl_zero(heap);
  return {level, heap - (std::uint64_t{1} << level)};
}

DyadicInterval DyadicInterval::parse(std::string_view text) {
  const auto parts = detail::split(detail::trim(text), ':');
  if (parts.size() != 2) throw Error("malformed interval spec: " + std::string(text));
  const long long j = detail::parse_int(parts[0]);
  const long long k = detail::parse_int(parts[1]);
  if (j < 0 || j > 62 || k < 0 || static_cast<unsigned long long>(k) >= (1ULL << j))
    throw Error("interval out of range: " + std::string(text));
  return {static_cast<int>(j), static_cast<std::uint64_t>(k)};
}

std::string DyadicInterval::str() const { return std::to_string(level) + ":" + std::to_string(index); }

HaarSystem parse_system(std::string_view text) {
  HaarSystem out;
  text = detail::trim(text);
  if (text.empty()) return out;
  for (auto item : detail::split(text, ',')) {
    const auto interval = DyadicInterval::parse(item);
    if (std::find(out.begin(), out.end(), interval) != out.end())
      throw Error("duplicate interval in system: " + interval.str());
    out.push_back(interval);
  }
  return out;
}

HaarSystem complete_system(int resolution) {
  HaarSystem out;
  for (std::uint64_t h = 1; h < (std::uint64_t{1} << resolution); ++h) out.push_back(DyadicInterval::from_heap(h));
  return out;
}

DyadicSet::DyadicSet(int resolution, std::vector<bool> cells) : resolution_(resolution), cells_(std::move(cells)) {
  check_resolution(resolution);
  if (cells_.size() != (std::size_t{1} << resolution)) throw Error("cell count must be 2^N");
}

DyadicSet DyadicSet::parse(std::string_view spec) {
  const auto parts = detail::split(detail::trim(spec), ';');
  if (parts.size() != 2) throw Error("malformed dyadic set spec: " + std::string(spec));
  const auto head = detail::trim(parts[0]);
  if (!head.starts_with("N=")) throw Error("dyadic set spec must start with N=");
  const long long n = detail::parse_int(head.substr(2));
  if (n < 0 || n > kMaxResolution) throw Error("resolution must be in 0..24");
  const auto size = std::size_t{1} << n;
  return DyadicSet(static_cast<int>(n), detail::parse_membership(parts[1], size, "cells"));
}

DyadicSet DyadicSet::from_interval(int resolution, const DyadicInterval& interval) {
  if (interval.level > resolution) throw Error("below resolution");
  std::vector<bool> cells(std::size_t{1} << resolution, false);
  for (auto i = interval.first_cell(resolution); i < interval.last_cell(resolution); ++i) cells[i] = true;
  return DyadicSet(resolution, std::move(cells));
}

DyadicSet DyadicSet::from_mask(int resolution, std::uint64_t mask) {
  std::vector<bool> cells(std::size_t{1} << resolution, false);
  for (std::size_t i = 0; i < cells.size() && i < 64; ++i) cells[i] = ((mask >> i) & 1) != 0;
  return DyadicSet(resolution, std::move(cells));
}

std::size_t DyadicSet::count() const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), true)); }

Rational DyadicSet::measure() const {
  return Rational(mpz_class(static_cast<unsigned long>(count())), mpz_class(1)) * pow2(-resolution_);
}

DyadicSet DyadicSet::complement() const {
  std::vector<bool> out(cells_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = !cells_[i];
  return DyadicSet(resolution_, std::move(out));
}

DyadicSet DyadicSet::refine(int resolution) const {
  if (resolution < resolution_) throw Error("cannot refine to a coarser resolution");
  const int shift = resolution - resolution_;
  std::vector<bool> out(std::size_t{1} << resolution);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cells_[i >> shift];
  return DyadicSet(resolution, std::move(out));
}

std::string DyadicSet::mask_string() const { return detail::format_hex_mask(cells_); }

std::string DyadicSet::str() const { return "N=" + std::to_string(resolution_) + ";mask=" + mask_string(); }

CoefficientMap::CoefficientMap(int resolution)
    : resolution_(resolution), data_(ScalarVector::Zero(Eigen::Index{1} << resolution)) {
  check_resolution(resolution);
}

CoefficientMap::CoefficientMap(int resolution, ScalarVector heap) : resolution_(resolution), data_(std::move(heap)) {
  check_resolution(resolution);
  if (data_.size() != (Eigen::Index{1} << resolution)) throw Error("coefficient vector must have 2^N entries");
}

const ExactScalar& CoefficientMap::at(const DyadicInterval& interval) const {
  if (interval.level >= resolution_) throw Error("below resolution");
  return data_[static_cast<Eigen::Index>(interval.heap())];
}

void CoefficientMap::set(const DyadicInterval& interval, ExactScalar value) {
  if (interval.level >= resolution_) throw Error("below resolution");
  data_[static_cast<Eigen::Index>(interval.heap())] = std::move(value);
}

ExactScalar haar_coefficient(const DyadicSet& set, const DyadicInterval& interval) {
  const int n = set.resolution();
  if (interval.level >= n) throw Error("below resolution");
  const auto right = interval.right_child();
  const auto left = interval.left_child();
  long diff = 0;
  for (auto i = right.first_cell(n); i < right.last_cell(n); ++i) diff += set.contains(i) ? 1 : 0;
  for (auto i = left.first_cell(n); i < left.last_cell(n); ++i) diff -= set.contains(i) ? 1 : 0;
  return ExactScalar::sqrt2_pow(interval.level) * ExactScalar(Rational(diff) * pow2(-n));
}

CoefficientMap haar_coefficients(const DyadicSet& set) {
  return CoefficientMap(set.resolution(), haar_analysis(set.indicator<ExactScalar>()));
}

StepFunction dyadic_square_function(const DyadicSet& set, bool include_mean) {
  return {square_function_cells(haar_coefficients(set).heap(), include_mean), std::nullopt};
}

ExactScalar integrate_over(const DyadicSet& set, const ScalarVector& cells) {
  if (static_cast<std::size_t>(cells.size()) != set.cell_count()) throw Error("cell count mismatch");
  ExactScalar sum(0);
  for (std::size_t i = 0; i < set.cell_count(); ++i)
    if (set.contains(i)) sum += cells[static_cast<Eigen::Index>(i)];
  return sum * ExactScalar(pow2(-set.resolution()));
}

CoefficientMap haar_shift_apply(const CoefficientMap& coeffs) {
  return CoefficientMap(coeffs.resolution(), haar_shift(coeffs.heap()));
}

ShiftEnergy shift_energy(const DyadicSet& set) {
  if (set.empty()) throw Error("empty set");
  const ScalarVector image = haar_synthesis(haar_shift(haar_coefficients(set).heap()));
  const ExactScalar cell_measure(pow2(-set.resolution()));
  ShiftEnergy e{ExactScalar(0), ExactScalar(0), ExactScalar(0)};
  for (std::size_t i = 0; i < set.cell_count(); ++i) {
    const ExactScalar& g = image[static_cast<Eigen::Index>(i)];
    if (g.is_zero()) continue;
    const ExactScalar sq = g * g;
    e.total += sq;
    if (set.contains(i)) {
      e.inside += sq;
      e.pairing += g;
    }
  }
  e.inside *= cell_measure;
  e.total *= cell_measure;
  e.pairing *= cell_measure;
  return e;
}

HaarSystem paired_basis(int resolution) {
  HaarSystem out;
  for (std::uint64_t h = 2; h < (std::uint64_t{1} << resolution); ++h) out.push_back(DyadicInterval::from_heap(h));
  return out;
}

ScalarMatrix shift_matrix(int resolution) {
  if (resolution < 1) throw Error("resolution must be at least 1");
  const Eigen::Index dim = (Eigen::Index{1} << resolution) - 2;
  ScalarMatrix m = ScalarMatrix::Zero(dim, dim);
  for (Eigen::Index left = 0; left + 1 < dim; left += 2) {
    m(left, left + 1) = 1;   // T h_{I+} = h_{I-}
    m(left + 1, left) = -1;  // T h_{I-} = -h_{I+}
  }
  return m;
}

}  // namespace squarelab
