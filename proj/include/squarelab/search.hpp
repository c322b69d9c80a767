// Extremal set search over dyadic sets.
//
// Objectives (all ratios against the measure of the set):
//   mart-eta            ∫_V (S 1_V)^2 / |V|            minimize, 1D
//   shift-ratio         ∫_V (T 1_V)^2 / |V|            maximize, 1D
//   tensor-square-eta   ∫_U (S 1_U)^2 / |U|            minimize, 2D
//   tensor-shift-ratio  ∫_U ((T(x)T) 1_U)^2 / |U|      maximize, 2D
// Square functions include the mean terms, so the full set has ratio 1.

#pragma once

#include "squarelab/haar.hpp"
#include "squarelab/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squarelab {

enum class Direction { minimize, maximize };

struct Objective {
  std::string name;
  Direction direction = Direction::minimize;
  bool two_dimensional = false;
  /// A nonpositive optimum would contradict a lower-bound theorem.
  bool expects_positive = false;

  static Objective by_name(std::string_view name);
  static std::vector<Objective> all();

  /// Cells of a set at resolution N: 2^N or 4^N.
  std::size_t cell_count(int resolution) const;
  /// Exact ratio. Throws Error("empty set").
  ExactScalar evaluate(int resolution, const std::vector<bool>& cells) const;
  /// Binary64 rendition of the same ratio.
  double evaluate_float(int resolution, const std::vector<bool>& cells) const;
  /// True when `a` is strictly better than `b`.
  bool better(const ExactScalar& a, const ExactScalar& b) const {
    return direction == Direction::minimize ? a < b : a > b;
  }
  std::string set_spec(int resolution, const std::vector<bool>& cells) const;
};

struct TracePoint {
  std::uint64_t step = 0;
  std::string mask;
  ExactScalar value;
};

struct SearchReport {
  std::string objective;
  std::string direction;
  int resolution = 0;
  std::string mode;
  std::string best_mask;
  std::string best_set;
  ExactScalar best_value;
  double best_float = 0;
  bool verified = false;
  bool full_set = false;
  /// Ratio of the complement; absent when the best set is the full set.
  std::optional<ExactScalar> complement_value;
  bool counterexample = false;
  std::uint64_t visited = 0;
  std::optional<std::uint64_t> seed;
  std::vector<TracePoint> trace;

  nlohmann::json to_json() const;
};

inline constexpr std::size_t kMaxExhaustiveCells = 16;

/// Every nonempty subset; lowest mask wins ties. Throws Error("too many cells").
SearchReport exhaustive_search(const Objective& objective, int resolution, unsigned workers = 1);

struct AnnealSchedule {
  std::uint64_t iters = 20000;
  double t_start = 0.05;
  double t_end = 1e-4;
};

/// Single-cell-flip simulated annealing with geometric cooling and Metropolis
/// acceptance on binary64 values; the best set is re-evaluated exactly.
SearchReport anneal_search(const Objective& objective, int resolution, const AnnealSchedule& schedule,
                           std::uint64_t seed);

}  // namespace squarelab
