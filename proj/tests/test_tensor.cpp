#include "squarelab/suites.hpp"
#include "squarelab/tensor.hpp"

#include <gtest/gtest.h>

using namespace squarelab;

namespace {

Rational q(long n, long d) { return Rational(mpz_class(n), mpz_class(d)); }

ExactScalar square_ratio(const DyadicSet2D& u) {
  return integrate_over(u, biparameter_square_function(u, true)) / ExactScalar(u.measure());
}

}  // namespace

TEST(DyadicSet2D, ParseForms) {
  const DyadicSet2D a = DyadicSet2D::parse("N=2;mask2d=0x8421");
  EXPECT_EQ(a.count(), 4u);
  EXPECT_TRUE(a.contains(3, 3));
  EXPECT_FALSE(a.contains(0, 1));
  EXPECT_EQ(DyadicSet2D::parse("N=2;cells2d=0,5,10,15"), a);
  EXPECT_EQ(DyadicSet2D::parse(a.str()), a);
  EXPECT_EQ(a.complement().measure(), q(3, 4));
  EXPECT_THROW(DyadicSet2D::parse("N=1;mask2d=0x10"), Error);
  EXPECT_THROW(DyadicSet2D::parse("N=1;mask=0x1"), Error);
}

TEST(RectCoefficient, QuarterSquare) {
  const DyadicSet2D u = DyadicSet2D::product(DyadicSet::parse("N=1;cells=0"), DyadicSet::parse("N=1;cells=0"));
  EXPECT_EQ(rect_coefficient(u, {0, 0}, {0, 0}), ExactScalar(q(1, 4)));
  EXPECT_EQ(rect_coefficients(u).at({0, 0}, {0, 0}), ExactScalar(q(1, 4)));
}

// Values checked against tools/oracle.py.
TEST(TensorShift, KnownSets) {
  const DyadicSet2D diagonal = DyadicSet2D::parse("N=2;mask2d=0x8421");
  const ShiftEnergy d = tensor_shift_energy(diagonal);
  EXPECT_EQ(d.inside, ExactScalar(q(1, 16)));
  EXPECT_EQ(d.total, ExactScalar(q(1, 8)));
  EXPECT_EQ(d.pairing, ExactScalar(q(1, 8)));
  EXPECT_EQ(square_ratio(diagonal), ExactScalar(q(3, 8)));

  const DyadicSet2D checker = DyadicSet2D::parse("N=2;mask2d=0xA5A5");
  const ShiftEnergy c = tensor_shift_energy(checker);
  EXPECT_EQ(c.inside, ExactScalar(q(1, 8)));
  EXPECT_EQ(c.total, ExactScalar(q(1, 4)));
  EXPECT_TRUE(c.pairing.is_zero());
  EXPECT_EQ(square_ratio(checker), ExactScalar(q(1, 2)));

  EXPECT_EQ(square_ratio(DyadicSet2D::parse("N=1;cells2d=0")), ExactScalar(q(1, 4)));
}

TEST(TensorShift, MatrixIsSymmetricInvolution) {
  for (int n = 1; n <= 3; ++n) {
    const ScalarMatrix m = tensor_shift_matrix(n);
    const Eigen::Index d = ((1 << n) - 2) * ((1 << n) - 2);
    ASSERT_EQ(m.rows(), d);
    EXPECT_EQ(m.transpose(), m);
    EXPECT_EQ(m * m, ScalarMatrix::Identity(d, d));
  }
}

TEST(TensorShift, RectanglesHaveNoInsideEnergy) {
  for (int n = 1; n <= 3; ++n)
    for (const auto& a : complete_system(n))
      for (const auto& b : complete_system(n)) {
        const DyadicSet2D u = DyadicSet2D::product(DyadicSet::from_interval(n, a), DyadicSet::from_interval(n, b));
        EXPECT_TRUE(tensor_shift_energy(u).inside.is_zero()) << a.str() << " x " << b.str();
      }
}

TEST(TensorProperty, DenseOracleAndPlancherel) {
  Philox4x32 rng(41, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(3));
    const DyadicSet2D u = random_dyadic_set_2d(rng, n);
    EXPECT_EQ(tensor_shift_cells(u), tensor_shift_dense_apply(u)) << u.str();
    EXPECT_EQ(rect_coefficients(u).sum_of_squares(), ExactScalar(u.measure()));
    EXPECT_EQ(rect_synthesis(rect_coefficients(u).heap()), u.indicator<ExactScalar>());
  }
  for (int n = 4; n <= 5; ++n) {
    const DyadicSet2D u = random_dyadic_set_2d(rng, n);
    EXPECT_EQ(rect_coefficients(u).sum_of_squares(), ExactScalar(u.measure()));
  }
}

TEST(TensorProperty, SeparableProducts) {
  Philox4x32 rng(42, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4));
    const DyadicSet a = random_dyadic_set(rng, n), b = random_dyadic_set(rng, n);
    const DyadicSet2D u = DyadicSet2D::product(a, b);
    const CoefficientMap ca = haar_coefficients(a), cb = haar_coefficients(b);
    const RectCoefficientMap cu = rect_coefficients(u);
    for (const auto& i : complete_system(n))
      for (const auto& j : complete_system(n)) EXPECT_EQ(cu.at(i, j), ca.at(i) * cb.at(j));
    // The direct formula agrees with the transform on a few rectangles.
    const auto sys = complete_system(n);
    EXPECT_EQ(rect_coefficient(u, sys.back(), sys.front()), cu.at(sys.back(), sys.front()));
  }
}

TEST(TensorProperty, FloatKernelsTrackExact) {
  Philox4x32 rng(43, 0);
  const DyadicSet2D u = random_dyadic_set_2d(rng, 4);
  const Grid<ExactScalar> exact = tensor_shift(rect_analysis(u.indicator<ExactScalar>()));
  const Grid<double> approx = tensor_shift(rect_analysis(u.indicator<double>()));
  for (Eigen::Index r = 0; r < exact.rows(); ++r)
    for (Eigen::Index c = 0; c < exact.cols(); ++c) EXPECT_NEAR(approx(r, c), exact(r, c).to_double(), 1e-13);
}
