#include "squarelab/numeric.hpp"
#include "squarelab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace squarelab;

namespace {

Rational q(long n, long d) { return Rational(mpz_class(n), mpz_class(d)); }

ExactScalar random_scalar(Philox4x32& rng) {
  auto part = [&] { return q(static_cast<long>(rng.below(41)) - 20, static_cast<long>(rng.below(12)) + 1); };
  return ExactScalar(part(), part());
}

}  // namespace

TEST(Rational, CanonicalForm) {
  EXPECT_EQ(q(6, -4).str(), "-3/2");
  EXPECT_EQ(Rational(0).str(), "0/1");
  EXPECT_EQ(Rational::parse("10/4"), q(5, 2));
  EXPECT_EQ(Rational::parse("-7"), Rational(-7));
  EXPECT_THROW(Rational::parse("1/0"), Error);
  EXPECT_THROW(Rational::parse("abc"), Error);
  EXPECT_THROW(Rational(1) / Rational(0), Error);
}

TEST(Rational, PowersOfTwo) {
  EXPECT_EQ(pow2(-3), q(1, 8));
  EXPECT_EQ(pow2(5), Rational(32));
  EXPECT_EQ(pow(q(2, 3), 3), q(8, 27));
}

TEST(ExactScalar, SqrtTwoSquaresToTwo) {
  const ExactScalar r2 = ExactScalar::sqrt2();
  EXPECT_EQ(r2 * r2, ExactScalar(Rational(2)));
  EXPECT_EQ(ExactScalar::sqrt2_pow(3), ExactScalar(Rational(0), Rational(2)));
  EXPECT_EQ(ExactScalar::sqrt2_pow(-2), ExactScalar(q(1, 2)));
  EXPECT_EQ(ExactScalar::sqrt2_pow(-1), ExactScalar(Rational(0), q(1, 2)));
}

TEST(ExactScalar, SignOfMixedElements) {
  EXPECT_EQ(ExactScalar(Rational(3), Rational(-2)).sign(), 1);   // 3 - 2.828
  EXPECT_EQ(ExactScalar(Rational(1), Rational(-1)).sign(), -1);  // 1 - 1.414
  EXPECT_EQ(ExactScalar(Rational(-3), Rational(2)).sign(), -1);
  EXPECT_EQ(ExactScalar(Rational(-1), Rational(1)).sign(), 1);
  EXPECT_EQ(ExactScalar().sign(), 0);
  EXPECT_LT(ExactScalar(q(7, 5)), ExactScalar::sqrt2());
  EXPECT_GT(ExactScalar(q(3, 2)), ExactScalar::sqrt2());
}

TEST(ExactScalar, TextRoundTrip) {
  const ExactScalar x(q(-3, 4), q(5, 7));
  EXPECT_EQ(x.str(), "-3/4+5/7*r2");
  EXPECT_EQ(ExactScalar::parse(x.str()), x);
  EXPECT_EQ(ExactScalar(q(1, 8)).compact(), "1/8");
  EXPECT_EQ(ExactScalar::parse("1/8"), ExactScalar(q(1, 8)));
  EXPECT_EQ(x.compact(), x.str());
  EXPECT_THROW(ExactScalar::parse("1/2+x"), Error);
}

TEST(ExactScalar, RoundedDoubleMatchesLibm) {
  EXPECT_EQ(ExactScalar::sqrt2().to_double(), std::sqrt(2.0));
  EXPECT_EQ(ExactScalar(q(1, 3)).to_double(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(ExactScalar(Rational(1), Rational(1)).to_double(), 1.0 + std::sqrt(2.0));
}

TEST(ExactScalar, DivisionByZero) { EXPECT_THROW(ExactScalar(Rational(1)) / ExactScalar(), Error); }

TEST(ExactScalarProperty, FieldAxioms) {
  Philox4x32 rng(11, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const ExactScalar x = random_scalar(rng), y = random_scalar(rng), z = random_scalar(rng);
    EXPECT_EQ((x + y) * z, x * z + y * z);
    EXPECT_EQ((x * y) * z, x * (y * z));
    if (!y.is_zero()) {
      EXPECT_EQ((x / y) * y, x);
    }
    EXPECT_EQ(x * x.conjugate(), ExactScalar(x.norm()));
    EXPECT_EQ((x - y).sign(), x < y ? -1 : (x == y ? 0 : 1));
    EXPECT_EQ(ExactScalar::parse(x.str()), x);
  }
}

TEST(ExactScalarProperty, OrderAgreesWithDoubles) {
  Philox4x32 rng(12, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const ExactScalar x = random_scalar(rng), y = random_scalar(rng);
    const double dx = x.to_double(), dy = y.to_double();
    if (std::abs(dx - dy) > 1e-9) EXPECT_EQ(x < y, dx < dy);
  }
}

TEST(PolyP, EvaluateAndCompare) {
  const PolyP chi({ExactScalar(), ExactScalar(q(1, 8)), ExactScalar(q(3, 8)), ExactScalar()});
  EXPECT_EQ(poly_eval(chi, Rational(1)), ExactScalar(q(1, 2)));
  EXPECT_EQ(poly_eval(chi, q(1, 2)), ExactScalar(q(5, 32)));
  EXPECT_TRUE((chi - chi).is_zero());
  EXPECT_TRUE(poly_equal(chi + chi, ExactScalar(Rational(2)) * chi));
}

TEST(EigenExact, MatrixProductsStayExact) {
  ScalarMatrix h(2, 2);
  const ExactScalar s = ExactScalar::sqrt2_pow(-1);
  h << s, s, s, -s;
  const ScalarMatrix id = h * h;
  EXPECT_EQ(id, ScalarMatrix::Identity(2, 2));
  EXPECT_EQ(h.transpose(), h);
}

TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32::encrypt(B{0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  Philox4x32 a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    differs = differs || x != c.next_u32();
  }
  EXPECT_TRUE(differs);
  Philox4x32 u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(u.below(7), 7u);
  }
}
