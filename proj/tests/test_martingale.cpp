#include "squarelab/martingale.hpp"
#include "squarelab/suites.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace squarelab;

namespace {

Rational q(long n, long d) { return Rational(mpz_class(n), mpz_class(d)); }

FiltrationTree two_leaf() {
  std::ifstream f(SQUARELAB_DATA_DIR "/two_leaf.json");
  return FiltrationTree::from_json(nlohmann::json::parse(f));
}

// root -> {1/3 -> {1/6, 1/6}, 2/3 leaf}
FiltrationTree uneven() {
  return FiltrationTree::from_json(nlohmann::json::parse(R"({"mass": "1", "children": [
      {"mass": "1/3", "children": [{"mass": "1/6", "leaf_id": 0}, {"mass": "1/6", "leaf_id": 1}]},
      {"mass": "2/3", "leaf_id": 2}]})"));
}

}  // namespace

TEST(FiltrationTree, TwoLeafShape) {
  const FiltrationTree t = two_leaf();
  EXPECT_EQ(t.depth(), 1);
  EXPECT_EQ(t.leaf_count(), 2u);
  EXPECT_EQ(t.atoms(0).size(), 1u);
  EXPECT_EQ(t.atoms(1).size(), 2u);
  EXPECT_EQ(t.leaf_mass(1), q(1, 2));
}

TEST(FiltrationTree, RejectsBadMasses) {
  EXPECT_THROW(FiltrationTree::from_json(nlohmann::json::parse(
                   R"({"mass": "1", "children": [{"mass": "1/2", "leaf_id": 0}, {"mass": "1/3", "leaf_id": 1}]})")),
               Error);
  EXPECT_THROW(FiltrationTree::from_json(nlohmann::json::parse(
                   R"({"mass": "1", "children": [{"mass": "1", "leaf_id": 0}, {"mass": "0", "leaf_id": 1}]})")),
               Error);
  EXPECT_THROW(FiltrationTree::from_json(nlohmann::json::parse(R"({"mass": "1/2", "leaf_id": 0})")), Error);
}

TEST(FiltrationTree, ShallowLeavesArePadded) {
  const FiltrationTree t = uneven();
  EXPECT_EQ(t.depth(), 2);
  EXPECT_EQ(t.atoms(2).size(), 3u);
  EXPECT_EQ(t.atoms(1).size(), 2u);
}

TEST(FiltrationTree, RestrictionRenormalizes) {
  const FiltrationTree t = uneven().restrict_to(1, 0);
  EXPECT_EQ(t.depth(), 1);
  EXPECT_EQ(t.leaf_count(), 2u);
  EXPECT_EQ(t.leaf_mass(0), q(1, 2));
  EXPECT_THROW(uneven().restrict_to(1, 5), Error);
}

TEST(LeafSet, ParseForms) {
  const FiltrationTree t = uneven();
  EXPECT_EQ(LeafSet::parse(t, "leaves=0,2").probability(t), q(5, 6));
  EXPECT_EQ(LeafSet::parse(t, "mask=0x2").probability(t), q(1, 6));
  EXPECT_THROW(LeafSet::parse(t, "leaves=7"), Error);
}

TEST(ConditionalExpectation, RootLevelIsConstantHalf) {
  const FiltrationTree t = two_leaf();
  const LeafSet v = LeafSet::parse(t, "leaves=0");
  const StepFunction f0 = conditional_expectation(t, indicator(t, v), 0);
  EXPECT_EQ(f0.values[0], ExactScalar(q(1, 2)));
  EXPECT_EQ(f0.values[1], ExactScalar(q(1, 2)));
  EXPECT_THROW(conditional_expectation(t, indicator(t, v), 3), Error);
}

TEST(LocalEnergy, TwoLeafExample) {
  const FiltrationTree t = two_leaf();
  const LocalEnergy e = local_energy(t, LeafSet::parse(t, "leaves=0"));
  EXPECT_EQ(e.energy, ExactScalar(q(1, 4)));
  EXPECT_EQ(e.ratio, ExactScalar(q(1, 2)));
}

TEST(LocalEnergy, DyadicDepthTwoFirstCell) {
  const FiltrationTree t = FiltrationTree::equal_split(2);
  const LocalEnergy e = local_energy(t, LeafSet::parse(t, "leaves=0"));
  EXPECT_EQ(e.energy, ExactScalar(q(3, 32)));
  EXPECT_EQ(e.ratio, ExactScalar(q(3, 8)));
}

TEST(LocalEnergy, EmptySetThrows) {
  const FiltrationTree t = two_leaf();
  EXPECT_THROW(local_energy(t, LeafSet(std::vector<bool>{false, false})), Error);
}

TEST(MartingaleProperty, RandomTrees) {
  Philox4x32 rng(5, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const FiltrationTree t = random_tree(rng, 4);
    const LeafSet v = random_leaf_set(rng, t);
    const StepFunction f = indicator(t, v);
    const auto ds = differences(t, v, true);
    ASSERT_EQ(static_cast<int>(ds.size()), t.depth() + 1);

    ScalarVector sum = ScalarVector::Constant(f.values.size(), ExactScalar());
    for (const auto& d : ds) sum += d.values;
    EXPECT_EQ(sum, f.values);

    for (int n = 0; n <= t.depth(); ++n) {
      const StepFunction fn = conditional_expectation(t, f, n);
      EXPECT_TRUE(is_measurable(t, fn, n));
      EXPECT_EQ(expectation(t, fn), ExactScalar(v.probability(t)));
      for (int m = 0; m <= n; ++m)
        EXPECT_EQ(conditional_expectation(t, fn, m).values, conditional_expectation(t, f, m).values);
      if (n > 0) {
        const ScalarVector zero = ScalarVector::Constant(f.values.size(), ExactScalar());
        EXPECT_EQ(conditional_expectation(t, ds[static_cast<std::size_t>(n)], n - 1).values, zero);
      }
    }

    // The expected square function equals P(V) (orthogonality of increments).
    EXPECT_EQ(expectation(t, square_function(t, v, true)), ExactScalar(v.probability(t)));
    EXPECT_EQ(differences(t, v, false).size(), ds.size() - 1);
  }
}

TEST(TreeJson, RoundTrip) {
  Philox4x32 rng(6, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const FiltrationTree t = random_tree(rng, 4);
    const FiltrationTree back = FiltrationTree::from_json(t.to_json());
    EXPECT_EQ(back.to_json(), t.to_json());
    EXPECT_EQ(back.leaf_count(), t.leaf_count());
  }
}
