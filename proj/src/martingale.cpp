#include "squarelab/martingale.hpp"

#include "detail/spec_parse.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace squarelab {
namespace {

struct FlatLeaf {
  Rational mass;
  int depth = 0;
  std::optional<int> id;
};

// Depth-first collection of leaves and of every node's (depth, leaf range).
struct Collected {
  std::vector<FlatLeaf> leaves;
  std::vector<std::vector<FiltrationTree::Atom>> nodes_by_depth;
};

void collect(const TreeNode& node, int depth, Collected& out) {
  if (node.mass.sign() <= 0) throw Error("atom mass must be positive");
  const std::size_t first = out.leaves.size();
  if (node.children.empty()) {
    out.leaves.push_back({node.mass, depth, node.leaf_id});
  } else {
    Rational sum(0);
    for (const auto& child : node.children) {
      sum += child.mass;
      collect(child, depth + 1, out);
    }
    if (sum != node.mass) throw Error("children masses do not sum to parent mass");
  }
  if (out.nodes_by_depth.size() <= static_cast<std::size_t>(depth))
    out.nodes_by_depth.resize(static_cast<std::size_t>(depth) + 1);
  out.nodes_by_depth[static_cast<std::size_t>(depth)].push_back(
      {node.mass, first, out.leaves.size()});
}

TreeNode node_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("mass")) throw Error("tree node requires \"mass\"");
  TreeNode node;
  const auto& mass = j.at("mass");
  node.mass = mass.is_string() ? Rational::parse(mass.get<std::string>())
                               : Rational(mass.get<long>());
  if (j.contains("children"))
    for (const auto& child : j.at("children")) node.children.push_back(node_from_json(child));
  if (j.contains("leaf_id")) node.leaf_id = j.at("leaf_id").get<int>();
  return node;
}

TreeNode equal_split_node(const Rational& mass, int remaining, int& next_id) {
  TreeNode node{mass, {}, std::nullopt};
  if (remaining == 0) {
    node.leaf_id = next_id++;
    return node;
  }
  const Rational half = mass / Rational(2);
  node.children.push_back(equal_split_node(half, remaining - 1, next_id));
  node.children.push_back(equal_split_node(half, remaining - 1, next_id));
  return node;
}

}  // namespace

FiltrationTree FiltrationTree::build(const TreeNode& root) {
  if (root.mass != Rational(1)) throw Error("root mass must be 1");
  Collected c;
  collect(root, 0, c);

  FiltrationTree tree;
  const int depth = static_cast<int>(c.nodes_by_depth.size()) - 1;
  tree.levels_.resize(static_cast<std::size_t>(depth) + 1);
  // Nodes at depth n plus leaves shallower than n (unary padding), in leaf order.
  for (int n = 0; n <= depth; ++n) {
    auto& level = tree.levels_[static_cast<std::size_t>(n)];
    level = c.nodes_by_depth[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < c.leaves.size(); ++i)
      if (c.leaves[i].depth < n) level.push_back({c.leaves[i].mass, i, i + 1});
    std::sort(level.begin(), level.end(),
              [](const Atom& a, const Atom& b) { return a.first_leaf < b.first_leaf; });
  }

  const std::size_t n_leaves = c.leaves.size();
  const bool any_id = std::any_of(c.leaves.begin(), c.leaves.end(),
                                  [](const FlatLeaf& l) { return l.id.has_value(); });
  tree.position_of_id_.assign(n_leaves, n_leaves);
  for (std::size_t i = 0; i < n_leaves; ++i) {
    tree.leaf_masses_.push_back(c.leaves[i].mass);
    int id = static_cast<int>(i);
    if (any_id) {
      if (!c.leaves[i].id) throw Error("leaf_id missing on some leaves");
      id = *c.leaves[i].id;
    }
    if (id < 0 || static_cast<std::size_t>(id) >= n_leaves ||
        tree.position_of_id_[static_cast<std::size_t>(id)] != n_leaves)
      throw Error("leaf ids must be a permutation of 0..leaves-1");
    tree.leaf_ids_.push_back(id);
    tree.position_of_id_[static_cast<std::size_t>(id)] = i;
  }
  return tree;
}

FiltrationTree FiltrationTree::equal_split(int depth) {
  if (depth < 0) throw Error("depth must be non-negative");
  int next_id = 0;
  return build(equal_split_node(Rational(1), depth, next_id));
}

FiltrationTree FiltrationTree::from_json(const nlohmann::json& j) { return build(node_from_json(j)); }

std::span<const FiltrationTree::Atom> FiltrationTree::atoms(int level) const {
  if (level < 0 || level > depth()) throw Error("level out of range");
  return levels_[static_cast<std::size_t>(level)];
}

std::size_t FiltrationTree::position_of(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= position_of_id_.size())
    throw Error("unknown leaf_id " + std::to_string(id));
  return position_of_id_[static_cast<std::size_t>(id)];
}

FiltrationTree FiltrationTree::restrict_to(int level, std::size_t atom) const {
  const auto level_atoms = atoms(level);
  if (atom >= level_atoms.size()) throw Error("atom out of range");
  const Atom& root = level_atoms[atom];
  // Rebuild a TreeNode hierarchy from the level structure below the atom.
  std::function<TreeNode(int, const Atom&)> rebuild = [&](int n, const Atom& a) {
    TreeNode node{a.mass / root.mass, {}, std::nullopt};
    if (n == depth()) {
      node.leaf_id = static_cast<int>(a.first_leaf - root.first_leaf);
      return node;
    }
    for (const Atom& child : atoms(n + 1))
      if (child.first_leaf >= a.first_leaf && child.last_leaf <= a.last_leaf)
        node.children.push_back(rebuild(n + 1, child));
    return node;
  };
  return build(rebuild(level, root));
}

nlohmann::json FiltrationTree::to_json() const {
  std::function<nlohmann::json(int, const Atom&)> emit = [&](int n, const Atom& a) {
    nlohmann::json j;
    j["mass"] = a.mass.str();
    if (n == depth()) {
      j["leaf_id"] = leaf_ids_[a.first_leaf];
      return j;
    }
    j["children"] = nlohmann::json::array();
    for (const Atom& child : atoms(n + 1))
      if (child.first_leaf >= a.first_leaf && child.last_leaf <= a.last_leaf)
        j["children"].push_back(emit(n + 1, child));
    return j;
  };
  return emit(0, atoms(0).front());
}

LeafSet LeafSet::parse(const FiltrationTree& tree, std::string_view spec) {
  const std::vector<bool> by_id = detail::parse_membership(spec, tree.leaf_count());
  std::vector<bool> members(tree.leaf_count(), false);
  for (std::size_t id = 0; id < by_id.size(); ++id)
    if (by_id[id]) members[tree.position_of(static_cast<int>(id))] = true;
  return LeafSet(std::move(members));
}

LeafSet LeafSet::all(const FiltrationTree& tree) {
  return LeafSet(std::vector<bool>(tree.leaf_count(), true));
}

bool LeafSet::empty() const {
  return std::none_of(members_.begin(), members_.end(), [](bool b) { return b; });
}

Rational LeafSet::probability(const FiltrationTree& tree) const {
  if (members_.size() != tree.leaf_count()) throw Error("leaf set does not match tree");
  Rational p(0);
  for (std::size_t i = 0; i < members_.size(); ++i)
    if (members_[i]) p += tree.leaf_mass(i);
  return p;
}

LeafSet LeafSet::complement() const {
  std::vector<bool> out(members_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = !members_[i];
  return LeafSet(std::move(out));
}

StepFunction indicator(const FiltrationTree& tree, const LeafSet& set) {
  if (set.size() != tree.leaf_count()) throw Error("leaf set does not match tree");
  StepFunction f{ScalarVector(static_cast<Eigen::Index>(tree.leaf_count())), tree.depth()};
  for (std::size_t i = 0; i < set.size(); ++i)
    f.values[static_cast<Eigen::Index>(i)] = set.contains(i) ? 1 : 0;
  return f;
}

ExactScalar expectation(const FiltrationTree& tree, const StepFunction& f) {
  ExactScalar sum(0);
  for (std::size_t i = 0; i < tree.leaf_count(); ++i)
    sum += ExactScalar(tree.leaf_mass(i)) * f.values[static_cast<Eigen::Index>(i)];
  return sum;
}

bool is_measurable(const FiltrationTree& tree, const StepFunction& f, int level) {
  for (const auto& atom : tree.atoms(level))
    for (std::size_t i = atom.first_leaf + 1; i < atom.last_leaf; ++i)
      if (f.values[static_cast<Eigen::Index>(i)] != f.values[static_cast<Eigen::Index>(atom.first_leaf)])
        return false;
  return true;
}

StepFunction conditional_expectation(const FiltrationTree& tree, const StepFunction& f, int level) {
  StepFunction out{ScalarVector(f.values.size()), level};
  for (const auto& atom : tree.atoms(level)) {
    ExactScalar weighted(0);
    for (std::size_t i = atom.first_leaf; i < atom.last_leaf; ++i)
      weighted += ExactScalar(tree.leaf_mass(i)) * f.values[static_cast<Eigen::Index>(i)];
    weighted /= ExactScalar(atom.mass);
    for (std::size_t i = atom.first_leaf; i < atom.last_leaf; ++i)
      out.values[static_cast<Eigen::Index>(i)] = weighted;
  }
  return out;
}

std::vector<StepFunction> differences(const FiltrationTree& tree, const LeafSet& set,
                                      bool include_root) {
  const StepFunction f = indicator(tree, set);
  std::vector<StepFunction> out;
  StepFunction previous{ScalarVector::Zero(f.values.size()), 0};
  for (int n = 0; n <= tree.depth(); ++n) {
    StepFunction current = conditional_expectation(tree, f, n);
    if (n > 0 || include_root) out.push_back({current.values - previous.values, n});
    previous = std::move(current);
  }
  return out;
}

StepFunction square_function(const FiltrationTree& tree, const LeafSet& set, bool include_root) {
  StepFunction s{ScalarVector::Zero(static_cast<Eigen::Index>(tree.leaf_count())), std::nullopt};
  for (const auto& d : differences(tree, set, include_root))
    s.values += d.values.cwiseProduct(d.values);
  return s;
}

LocalEnergy local_energy(const FiltrationTree& tree, const LeafSet& set, bool include_root) {
  const Rational pv = set.probability(tree);
  if (pv.is_zero()) throw Error("empty set");
  const StepFunction s = square_function(tree, set, include_root);
  ExactScalar energy(0);
  for (std::size_t i = 0; i < tree.leaf_count(); ++i)
    if (set.contains(i)) energy += ExactScalar(tree.leaf_mass(i)) * s.values[static_cast<Eigen::Index>(i)];
  return {energy, pv, energy / ExactScalar(pv)};
}

}  // namespace squarelab
