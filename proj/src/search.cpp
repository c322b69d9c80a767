#include "squarelab/search.hpp"

#include "squarelab/martingale.hpp"
#include "squarelab/random.hpp"

#include "detail/spec_parse.hpp"

#include <cmath>
#include <thread>

namespace squarelab {
namespace {

enum class Kind { mart_eta, shift_ratio, tensor_square_eta, tensor_shift_ratio };

Kind kind_of(const std::string& name) {
  if (name == "mart-eta") return Kind::mart_eta;
  if (name == "shift-ratio") return Kind::shift_ratio;
  if (name == "tensor-square-eta") return Kind::tensor_square_eta;
  if (name == "tensor-shift-ratio") return Kind::tensor_shift_ratio;
  throw Error("unknown objective: " + name);
}

template <typename Scalar>
Scalar ratio_kernel(Kind kind, int resolution, const std::vector<bool>& cells) {
  std::size_t count = 0;
  for (bool b : cells) count += b ? 1 : 0;
  if (count == 0) throw Error("empty set");
  Scalar inside = Scalar(0);
  if (kind == Kind::mart_eta || kind == Kind::shift_ratio) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ind(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) ind[static_cast<Eigen::Index>(i)] = cells[i] ? Scalar(1) : Scalar(0);
    const auto heap = haar_analysis(ind);
    if (kind == Kind::mart_eta) {
      const auto s = square_function_cells(heap, true);
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i]) inside += s[static_cast<Eigen::Index>(i)];
    } else {
      const auto image = haar_synthesis(haar_shift(heap));
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i]) inside += image[static_cast<Eigen::Index>(i)] * image[static_cast<Eigen::Index>(i)];
    }
  } else {
    const auto n = static_cast<Eigen::Index>(std::size_t{1} << resolution);
    Grid<Scalar> ind(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) ind(r, c) = cells[static_cast<std::size_t>(r * n + c)] ? Scalar(1) : Scalar(0);
    const auto heap = rect_analysis(ind);
    Grid<Scalar> values;
    if (kind == Kind::tensor_square_eta) {
      values = biparameter_square_cells(heap, true);
    } else {
      values = rect_synthesis(tensor_shift(heap));
      values = values.cwiseProduct(values);
    }
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        if (cells[static_cast<std::size_t>(r * n + c)]) inside += values(r, c);
  }
  return inside / Scalar(static_cast<int>(count));
}

// The same ratio through the module-level APIs.
ExactScalar certify(Kind kind, int resolution, const std::vector<bool>& cells) {
  switch (kind) {
    case Kind::mart_eta: {
      if (resolution <= 10) {
        const FiltrationTree tree = FiltrationTree::equal_split(resolution);
        return local_energy(tree, LeafSet(cells), true).ratio;
      }
      const DyadicSet set(resolution, cells);
      return integrate_over(set, dyadic_square_function(set, true).values) / ExactScalar(set.measure());
    }
    case Kind::shift_ratio: {
      const DyadicSet set(resolution, cells);
      return shift_energy(set).inside / ExactScalar(set.measure());
    }
    case Kind::tensor_square_eta: {
      const DyadicSet2D set(resolution, cells);
      return integrate_over(set, biparameter_square_function(set, true)) / ExactScalar(set.measure());
    }
    case Kind::tensor_shift_ratio: {
      const DyadicSet2D set(resolution, cells);
      return tensor_shift_energy(set).inside / ExactScalar(set.measure());
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<bool> mask_cells(std::uint64_t mask, std::size_t n) {
  std::vector<bool> cells(n);
  for (std::size_t i = 0; i < n; ++i) cells[i] = ((mask >> i) & 1) != 0;
  return cells;
}

bool all_set(const std::vector<bool>& cells) {
  for (bool b : cells)
    if (!b) return false;
  return true;
}

void finish(SearchReport& report, const Objective& objective, const std::vector<bool>& best) {
  const Kind kind = kind_of(objective.name);
  report.objective = objective.name;
  report.direction = objective.direction == Direction::minimize ? "minimize" : "maximize";
  report.best_mask = detail::format_hex_mask(best);
  report.best_set = objective.set_spec(report.resolution, best);
  report.best_value = objective.evaluate(report.resolution, best);
  report.best_float = report.best_value.to_double();
  report.verified = certify(kind, report.resolution, best) == report.best_value;
  report.full_set = all_set(best);
  if (!report.full_set) {
    std::vector<bool> complement(best.size());
    for (std::size_t i = 0; i < best.size(); ++i) complement[i] = !best[i];
    report.complement_value = objective.evaluate(report.resolution, complement);
  }
  report.counterexample = objective.expects_positive && report.best_value.sign() <= 0;
}

struct ScanResult {
  std::uint64_t best_mask = 0;
  ExactScalar best_value;
  std::vector<TracePoint> improvements;
};

ScanResult scan(const Objective& objective, int resolution, std::uint64_t begin, std::uint64_t end) {
  const std::size_t n = objective.cell_count(resolution);
  ScanResult r;
  for (std::uint64_t mask = begin; mask < end; ++mask) {
    ExactScalar value = objective.evaluate(resolution, mask_cells(mask, n));
    if (r.best_mask == 0 || objective.better(value, r.best_value)) {
      r.best_mask = mask;
      r.best_value = value;
      r.improvements.push_back({mask, detail::format_hex_mask(mask_cells(mask, n)), std::move(value)});
    }
  }
  return r;
}

}  // namespace

Objective Objective::by_name(std::string_view name) {
  for (auto& o : all())
    if (o.name == name) return o;
  throw Error("unknown objective: " + std::string(name));
}

std::vector<Objective> Objective::all() {
  return {{"mart-eta", Direction::minimize, false, true},
          {"shift-ratio", Direction::maximize, false, false},
          {"tensor-square-eta", Direction::minimize, true, true},
          {"tensor-shift-ratio", Direction::maximize, true, false}};
}

std::size_t Objective::cell_count(int resolution) const {
  return std::size_t{1} << (two_dimensional ? 2 * resolution : resolution);
}

ExactScalar Objective::evaluate(int resolution, const std::vector<bool>& cells) const {
  if (cells.size() != cell_count(resolution)) throw Error("cell count mismatch");
  return ratio_kernel<ExactScalar>(kind_of(name), resolution, cells);
}

double Objective::evaluate_float(int resolution, const std::vector<bool>& cells) const {
  if (cells.size() != cell_count(resolution)) throw Error("cell count mismatch");
  return ratio_kernel<double>(kind_of(name), resolution, cells);
}

std::string Objective::set_spec(int resolution, const std::vector<bool>& cells) const {
  return "N=" + std::to_string(resolution) + (two_dimensional ? ";mask2d=" : ";mask=") + detail::format_hex_mask(cells);
}

nlohmann::json SearchReport::to_json() const {
  nlohmann::json j;
  j["objective"] = objective;
  j["direction"] = direction;
  j["resolution"] = resolution;
  j["mode"] = mode;
  j["best_mask"] = best_mask;
  j["best_set"] = best_set;
  j["best_ratio"] = {{"exact", best_value.compact()}, {"float", best_float}};
  j["verified"] = verified;
  j["full_set"] = full_set;
  j["complement_ratio"] = complement_value
      ? nlohmann::json{{"exact", complement_value->compact()}, {"float", complement_value->to_double()}}
      : nlohmann::json(nullptr);
  j["counterexample"] = counterexample;
  j["visited"] = visited;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["trace"] = nlohmann::json::array();
  for (const auto& t : trace) j["trace"].push_back({{"step", t.step}, {"mask", t.mask}, {"ratio", t.value.compact()}});
  return j;
}

SearchReport exhaustive_search(const Objective& objective, int resolution, unsigned workers) {
  if (resolution < 0) throw Error("resolution must be non-negative");
  const std::size_t n = objective.cell_count(resolution);
  if (n > kMaxExhaustiveCells) throw Error("too many cells");
  const std::uint64_t end = std::uint64_t{1} << n;
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, end - 1));

  std::vector<ScanResult> parts(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t b = 1 + (end - 1) * w / workers;
      const std::uint64_t e = 1 + (end - 1) * (w + 1) / workers;
      pool.emplace_back([&, w, b, e] { parts[w] = scan(objective, resolution, b, e); });
    }
  }

  // Replays the ascending-mask scan: an improvement in a later range counts
  // only if it beats everything before it.
  SearchReport report;
  report.resolution = resolution;
  report.mode = "exhaustive";
  report.visited = end - 1;
  std::uint64_t best = 0;
  ExactScalar best_value;
  for (auto& part : parts)
    for (auto& point : part.improvements)
      if (best == 0 || objective.better(point.value, best_value)) {
        best = point.step;
        best_value = point.value;
        report.trace.push_back(std::move(point));
      }
  finish(report, objective, mask_cells(best, n));
  return report;
}

SearchReport anneal_search(const Objective& objective, int resolution, const AnnealSchedule& schedule,
                           std::uint64_t seed) {
  const int limit = objective.two_dimensional ? 8 : 24;
  if (resolution < 0 || resolution > limit) throw Error("resolution out of range for annealing");
  if (!(schedule.t_start > 0 && schedule.t_end > 0)) throw Error("temperatures must be positive");
  const std::size_t n = objective.cell_count(resolution);
  Philox4x32 rng(seed, 0);

  std::vector<bool> current(n);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    current[i] = (rng.next_u32() & 1) != 0;
    count += current[i] ? 1 : 0;
  }
  if (count == 0) {
    current[0] = true;
    count = 1;
  }
  const double sign = objective.direction == Direction::minimize ? 1.0 : -1.0;
  double value = objective.evaluate_float(resolution, current);
  double best_value = value;
  std::vector<bool> best = current;
  std::vector<std::pair<std::uint64_t, std::vector<bool>>> improvements{{0, best}};

  SearchReport report;
  report.resolution = resolution;
  report.mode = "anneal";
  report.seed = seed;
  report.visited = 1;
  const double ratio = schedule.t_end / schedule.t_start;
  const double span = schedule.iters > 1 ? static_cast<double>(schedule.iters - 1) : 1.0;
  for (std::uint64_t k = 0; k < schedule.iters; ++k) {
    const double temperature = schedule.t_start * std::pow(ratio, static_cast<double>(k) / span);
    const auto cell = static_cast<std::size_t>(rng.below(n));
    current[cell] = !current[cell];
    const std::size_t next_count = current[cell] ? count + 1 : count - 1;
    if (next_count == 0) {
      current[cell] = !current[cell];
      continue;
    }
    const double candidate = objective.evaluate_float(resolution, current);
    ++report.visited;
    const double delta = sign * (candidate - value);
    if (delta <= 0 || rng.uniform() < std::exp(-delta / temperature)) {
      value = candidate;
      count = next_count;
      if (sign * (value - best_value) < 0) {
        best_value = value;
        best = current;
        improvements.emplace_back(k + 1, best);
      }
    } else {
      current[cell] = !current[cell];
    }
  }
  for (const auto& [step, cells] : improvements)
    report.trace.push_back({step, detail::format_hex_mask(cells), objective.evaluate(resolution, cells)});
  finish(report, objective, best);
  return report;
}

}  // namespace squarelab
