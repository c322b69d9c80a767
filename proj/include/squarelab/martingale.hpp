// Finite atom-based filtrations, conditional expectations, martingale
// differences and the martingale square function of indicator sets.

#pragma once

#include "squarelab/numeric.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace squarelab {

/// Builder node for a filtration tree. Masses are absolute probabilities.
struct TreeNode {
  Rational mass;
  std::vector<TreeNode> children;
  std::optional<int> leaf_id;
};

/// A filtration F_0 ⊂ F_1 ⊂ ... ⊂ F_L on finitely many leaves.
///
/// Leaves are stored in depth-first order. Every level-n atom covers a
/// contiguous range of leaves; leaves shallower than L are padded by unary
/// chains so that every level partitions all leaves.
class FiltrationTree {
 public:
  struct Atom {
    Rational mass;
    std::size_t first_leaf = 0;  ///< inclusive
    std::size_t last_leaf = 0;   ///< exclusive
  };

  /// Validates mass conservation, positivity and leaf ids.
  static FiltrationTree build(const TreeNode& root);
  /// Equal-split binary tree of the given depth: the dyadic model on [0,1).
  static FiltrationTree equal_split(int depth);
  /// Parses `{"mass": "p/q", "children": [...]}` with `"leaf_id"` on leaves.
  static FiltrationTree from_json(const nlohmann::json& j);

  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  std::size_t leaf_count() const { return leaf_masses_.size(); }
  std::span<const Atom> atoms(int level) const;
  const Rational& leaf_mass(std::size_t leaf) const { return leaf_masses_.at(leaf); }
  std::span<const Rational> leaf_masses() const { return leaf_masses_; }

  /// leaf_id of the leaf at depth-first position `leaf`.
  int leaf_id(std::size_t leaf) const { return leaf_ids_.at(leaf); }
  /// Depth-first position of the leaf carrying `id`.
  std::size_t position_of(int id) const;

  /// The conditional filtration on one atom, masses renormalized to 1 and
  /// levels shifted so that the atom becomes the root.
  FiltrationTree restrict_to(int level, std::size_t atom) const;

  nlohmann::json to_json() const;

 private:
  std::vector<std::vector<Atom>> levels_;
  std::vector<Rational> leaf_masses_;
  std::vector<int> leaf_ids_;
  std::vector<std::size_t> position_of_id_;
};

/// A set V given as a union of leaves.
class LeafSet {
 public:
  LeafSet() = default;
  /// Membership indexed by depth-first leaf position.
  explicit LeafSet(std::vector<bool> members) : members_(std::move(members)) {}

  /// Parses "leaves=0,3,7" or "mask=0x89" (bit i selects leaf_id i).
  static LeafSet parse(const FiltrationTree& tree, std::string_view spec);
  static LeafSet all(const FiltrationTree& tree);

  bool contains(std::size_t leaf) const { return members_.at(leaf); }
  std::size_t size() const { return members_.size(); }
  bool empty() const;
  const std::vector<bool>& members() const { return members_; }

  Rational probability(const FiltrationTree& tree) const;
  LeafSet complement() const;

 private:
  std::vector<bool> members_;
};

/// Real-valued function on leaves. `level`, when set, records that the
/// function is F_level-measurable.
struct StepFunction {
  ScalarVector values;
  std::optional<int> level;
};

StepFunction indicator(const FiltrationTree& tree, const LeafSet& set);
ExactScalar expectation(const FiltrationTree& tree, const StepFunction& f);
/// True when f is constant on every level-n atom.
bool is_measurable(const FiltrationTree& tree, const StepFunction& f, int level);

/// E(f | F_n). Throws Error("level out of range").
StepFunction conditional_expectation(const FiltrationTree& tree, const StepFunction& f, int level);

/// d_n = f_n - f_{n-1}. With include_root, d_0 = f_0 (f_{-1} = 0) and the
/// differences sum to 1_V; otherwise the n = 0 term is dropped.
std::vector<StepFunction> differences(const FiltrationTree& tree, const LeafSet& set,
                                      bool include_root = true);

/// Leafwise sum of squared differences.
StepFunction square_function(const FiltrationTree& tree, const LeafSet& set,
                             bool include_root = true);

struct LocalEnergy {
  ExactScalar energy;  ///< E 1_V (S 1_V)^2
  Rational pv;         ///< P(V)
  ExactScalar ratio;   ///< energy / P(V)
};

/// Throws Error("empty set") when P(V) = 0.
LocalEnergy local_energy(const FiltrationTree& tree, const LeafSet& set, bool include_root = true);

}  // namespace squarelab
