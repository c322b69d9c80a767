#include "squarelab/moments.hpp"
#include "squarelab/suites.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace squarelab;

namespace {

Rational q(long n, long d) { return Rational(mpz_class(n), mpz_class(d)); }

PolyP quad(const Rational& c1, const Rational& c2) {
  return PolyP({ExactScalar(), ExactScalar(c1), ExactScalar(c2), ExactScalar()});
}

template <typename Derived>
bool all_zero(const Eigen::MatrixBase<Derived>& m) {
  return (m.array() == ExactScalar()).all();
}

FiltrationTree tree_from(const char* text) { return FiltrationTree::from_json(nlohmann::json::parse(text)); }

FiltrationTree two_leaf() {
  std::ifstream f(SQUARELAB_DATA_DIR "/two_leaf.json");
  return FiltrationTree::from_json(nlohmann::json::parse(f));
}

const char* kUneven = R"({"mass": "1", "children": [
    {"mass": "1/3", "children": [{"mass": "1/6", "leaf_id": 0}, {"mass": "1/6", "leaf_id": 1}]},
    {"mass": "2/3", "leaf_id": 2}]})";

const char* kThreeLevel = R"({"mass": "1", "children": [
    {"mass": "1/5", "leaf_id": 0},
    {"mass": "3/10", "children": [{"mass": "1/10", "leaf_id": 1}, {"mass": "1/5", "leaf_id": 2}]},
    {"mass": "1/2", "children": [
        {"mass": "1/8", "leaf_id": 3},
        {"mass": "3/8", "children": [{"mass": "1/4", "leaf_id": 4}, {"mass": "1/8", "leaf_id": 5}]}]}]})";

void expect_both(const FiltrationTree& t, const char* set, bool root, const PolyP& expected) {
  const LeafSet v = LeafSet::parse(t, set);
  EXPECT_EQ(chi_exact_martingale(t, v, root), expected) << set;
  EXPECT_EQ(chi_enumeration(martingale_expansion(t, v, root)), expected) << set;
}

}  // namespace

// Frozen values below come from tools/oracle.py (cellwise brute force in sympy).

TEST(ChiMartingale, TwoLeaf) {
  const FiltrationTree t = two_leaf();
  expect_both(t, "leaves=0", true, quad(q(1, 8), q(3, 8)));
  expect_both(t, "leaves=0", false, PolyP());
  EXPECT_EQ(poly_eval(chi_exact_martingale(t, LeafSet::parse(t, "leaves=0")), Rational(1)), ExactScalar(q(1, 2)));
}

TEST(ChiMartingale, UnevenTree) {
  const FiltrationTree t = tree_from(kUneven);
  expect_both(t, "leaves=0,2", true, quad(q(41, 72), q(19, 72)));
  expect_both(t, "leaves=1", true, quad(q(1, 72), q(11, 72)));
  expect_both(t, "leaves=1", false, quad(q(1, 108), q(1, 12)));
}

TEST(ChiMartingale, ThreeLevelTree) {
  const FiltrationTree t = tree_from(kThreeLevel);
  expect_both(t, "leaves=1,3,4", true, quad(q(17561, 192000), q(73639, 192000)));
}

TEST(ChiMartingale, MomentsSplit) {
  const FiltrationTree t = two_leaf();
  const MomentCoefficients m = martingale_moments(t, LeafSet::parse(t, "leaves=0"));
  EXPECT_EQ(m.linear, ExactScalar(q(1, 8)));
  EXPECT_EQ(m.quadratic, ExactScalar(q(3, 8)));
  EXPECT_TRUE(m.cubic.is_zero());
}

TEST(ChiWavelet, KnownSystems) {
  const auto check = [](const char* system, const char* set, const PolyP& expected) {
    const HaarSystem s = parse_system(system);
    const DyadicSet v = DyadicSet::parse(set);
    EXPECT_EQ(wavelet_moment_coefficients(s, v).polynomial(), expected) << system;
    EXPECT_EQ(chi_enumeration(haar_expansion(s, v)), expected) << system;
  };
  check("0:0,1:0", "N=2;cells=0", quad(Rational(0), q(3, 32)));
  check("0:0,1:0,1:1", "N=2;cells=0,3", PolyP());
  check("1:1,2:0,2:2", "N=3;cells=0,1,5", quad(Rational(0), q(3, 64)));
  EXPECT_EQ(projection_cube_integral(parse_system("0:0,1:0"), DyadicSet::parse("N=2;cells=0")),
            ExactScalar(q(3, 32)));
}

TEST(ChiWavelet, TripleIntegrals) {
  // Nested chain [0,1) ⊃ [0,1/2): h_{[0,1)}^2 h_{[0,1/2)} integrates to zero,
  // h_{[0,1/2)}^2 h_{[0,1)} to -1 (h_{[0,1)} is -1 on the left half).
  EXPECT_TRUE(haar_triple_integral({0, 0}, {0, 0}, {1, 0}).is_zero());
  EXPECT_EQ(haar_triple_integral({1, 0}, {1, 0}, {0, 0}), ExactScalar(-1));
  EXPECT_TRUE(haar_triple_integral({1, 0}, {1, 1}, {0, 0}).is_zero());
  EXPECT_TRUE(haar_triple_integral({2, 1}, {2, 1}, {2, 1}).is_zero());
}

TEST(Bernoulli, CentralMoments) {
  EXPECT_TRUE(bernoulli_third_moment(q(1, 2)).is_zero());
  EXPECT_EQ(bernoulli_third_moment(q(1, 4)), ExactScalar(q(3, 32)));
  EXPECT_EQ(bernoulli_central_moment(q(1, 4), 2), q(3, 16));
  EXPECT_EQ(ExactScalar(bernoulli_central_moment(q(1, 3), 3)), bernoulli_third_moment(q(1, 3)));
}

TEST(VarianceIdentity, TwoLeafAtHalf) {
  const FiltrationTree t = two_leaf();
  const LeafSet v = LeafSet::parse(t, "leaves=0");
  const ScalarVector defect = variance_identity_check(martingale_expansion(t, v), indicator(t, v).values, q(1, 2));
  EXPECT_TRUE(all_zero(defect));
}

TEST(Certificate, TwoLeafExample) {
  const FiltrationTree t = two_leaf();
  const ProofCertificate c = proof_certificate(t, LeafSet::parse(t, "leaves=0"));
  EXPECT_EQ(c.pv, q(1, 2));
  EXPECT_EQ(c.residuals[0], ExactScalar(q(3, 4)));
  EXPECT_EQ(c.residuals[1], ExactScalar(q(3, 4)));
  EXPECT_EQ(c.residuals[2], ExactScalar(q(-3, 32)));
  EXPECT_TRUE(c.determinant.is_zero());
  EXPECT_EQ(c.rank, 2);
  ASSERT_EQ(c.dependency.size(), 3u);
  EXPECT_EQ(c.dependency[0], ExactScalar(1));
  EXPECT_EQ(c.dependency[1], ExactScalar(-2));
  EXPECT_EQ(c.dependency[2], ExactScalar(-8));
  EXPECT_FALSE(c.pv_recoverable);
  EXPECT_EQ(c.residual_scale, ExactScalar(q(3, 2)));
  EXPECT_TRUE(c.verified());
  EXPECT_THROW(proof_certificate(t, LeafSet(std::vector<bool>{false, false})), Error);
}

TEST(Certificate, FullSet) {
  const FiltrationTree t = tree_from(kUneven);
  const ProofCertificate c = proof_certificate(t, LeafSet::all(t));
  EXPECT_EQ(c.m1, ExactScalar(1));
  EXPECT_TRUE(c.m2.is_zero());
  EXPECT_EQ(c.residuals[0], ExactScalar(3));
  EXPECT_EQ(c.residuals[1], ExactScalar(3));
  EXPECT_EQ(c.residuals[2], ExactScalar(q(-3, 8)));
  EXPECT_TRUE(c.verified());
}

TEST(Certificate, SymmetricRemarkFailsBothWays) {
  const FiltrationTree t = two_leaf();
  const LeafSet v = LeafSet::parse(t, "leaves=0");
  const auto with_root = symmetric_remark_check(t, v, true);
  EXPECT_EQ(with_root.m1, ExactScalar(q(1, 8)));
  EXPECT_EQ(with_root.three_energy, ExactScalar(q(3, 4)));
  EXPECT_FALSE(with_root.holds());
  const auto without = symmetric_remark_check(t, v, false);
  EXPECT_TRUE(without.m2.is_zero());
  EXPECT_EQ(without.three_energy, ExactScalar(q(3, 8)));
  EXPECT_FALSE(without.holds());
}

TEST(DPrime, FirstQuarterMembership) {
  const DPrimeDiagnostics d = dprime_diagnostics(complete_system(2), DyadicSet::parse("N=2;cells=0"), q(1, 64));
  EXPECT_NE(std::find(d.members.begin(), d.members.end(), DyadicInterval{1, 0}), d.members.end());
  EXPECT_EQ(std::find(d.members.begin(), d.members.end(), DyadicInterval{1, 1}), d.members.end());
}

TEST(ExactLinearAlgebra, RankAndNullSpace) {
  ScalarMatrix m(3, 3);
  m << 1, 2, 0, 0, 3, 1, 1, 5, 1;
  EXPECT_EQ(exact_rank(m), 2);
  EXPECT_TRUE(exact_determinant(m).is_zero());
  const auto null = exact_left_null_space(m);
  ASSERT_EQ(null.size(), 1u);
  EXPECT_TRUE(all_zero(null[0].transpose() * m));
}

TEST(Enumeration, RejectsHugeExpansions) {
  EXPECT_THROW(chi_enumeration(haar_expansion(complete_system(5), DyadicSet::parse("N=5;cells=0,9,17"))), Error);
}

TEST(MomentsProperty, OracleAgreementOnRandomTrees) {
  Philox4x32 rng(31, 0);
  for (int trial = 0; trial < 80; ++trial) {
    const FiltrationTree t = random_tree(rng, 4);
    const LeafSet v = random_leaf_set(rng, t);
    for (bool root : {true, false}) {
      const Expansion e = martingale_expansion(t, v, root);
      const PolyP exact = chi_exact_martingale(t, v, root);
      EXPECT_EQ(exact, chi_enumeration(e, 1));
      EXPECT_EQ(chi_enumeration(e, 3), chi_enumeration(e, 1));
      EXPECT_TRUE(exact[0].is_zero());
      EXPECT_TRUE(exact[3].is_zero());
    }
    EXPECT_EQ(poly_eval(chi_exact_martingale(t, v, true), Rational(1)), ExactScalar(v.probability(t)));
    EXPECT_TRUE(proof_certificate(t, v).verified());
  }
}

TEST(MomentsProperty, HaarLinearTermVanishes) {
  Philox4x32 rng(32, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const DyadicSet v = random_dyadic_set(rng, n);
    const HaarSystem s = random_system(rng, n, 10);
    const MomentCoefficients w = wavelet_moment_coefficients(s, v);
    EXPECT_TRUE(w.linear.is_zero());
    EXPECT_EQ(w.polynomial(), chi_enumeration(haar_expansion(s, v)));
    EXPECT_EQ(poly_eval(w.polynomial(), Rational(1)), projection_cube_integral(s, v));
  }
}

TEST(MomentsProperty, VarianceIdentityAtSeveralP) {
  Philox4x32 rng(33, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const FiltrationTree t = random_tree(rng, 4);
    const LeafSet v = random_leaf_set(rng, t);
    for (const Rational& p : {q(1, 4), q(1, 2), q(3, 4)})
      EXPECT_TRUE(all_zero(variance_identity_check(martingale_expansion(t, v), indicator(t, v).values, p)));
  }
}
