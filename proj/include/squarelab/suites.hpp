// Randomized invariant suites behind `squarelab verify` and the acceptance
// binary. Each check counts cases and failures; nothing is tolerated
// in the exact checks.

#pragma once

#include "squarelab/haar.hpp"
#include "squarelab/martingale.hpp"
#include "squarelab/random.hpp"
#include "squarelab/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squarelab {

struct SuiteOptions {
  std::optional<int> depth;           ///< tree depth / resolution bound
  std::optional<std::size_t> trials;  ///< random cases per check
  std::uint64_t seed = 7;
  unsigned workers = 1;
};

struct SuiteCheck {
  SuiteCheck() = default;
  explicit SuiteCheck(std::string check_name) : name(std::move(check_name)) {}

  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void record(bool ok, const std::string& what);
  bool passed() const { return cases > 0 && failures == 0; }
};

struct SuiteResult {
  std::string suite;
  std::vector<SuiteCheck> checks;
  nlohmann::json details = nlohmann::json::object();
  double seconds = 0;

  bool passed() const;
  const SuiteCheck* find(std::string_view name) const;
  nlohmann::json to_json() const;
};

/// martingale, wavelet, certificate, shift, plancherel, tensor, grid, search.
std::vector<std::string> suite_names();
/// Throws Error("unknown suite: ...").
SuiteResult run_suite(std::string_view name, const SuiteOptions& options);

// Generators shared with the tests.

/// Depth <= max_depth; each split draws a denominator q in 2..16 and
/// partitions it into 1-3 positive parts. Some leaves stop early.
FiltrationTree random_tree(Philox4x32& rng, int max_depth);
/// Each leaf joins with probability 1/2; never empty.
LeafSet random_leaf_set(Philox4x32& rng, const FiltrationTree& tree);
/// Never empty.
DyadicSet random_dyadic_set(Philox4x32& rng, int resolution);
DyadicSet2D random_dyadic_set_2d(Philox4x32& rng, int resolution);
/// Between 1 and max_size distinct intervals of level < resolution.
HaarSystem random_system(Philox4x32& rng, int resolution, std::size_t max_size);

}  // namespace squarelab
