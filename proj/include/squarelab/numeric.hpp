// Exact scalar field Q(sqrt 2), arbitrary-precision rationals, and
// polynomials of degree <= 3 in the Bernoulli parameter p.
//
// Every exact computation in squarelab runs over ExactScalar. Haar
// normalizations |I|^{-1/2} = 2^{j/2} are the only source of irrationality,
// so adjoining sqrt 2 as a formal symbol keeps all of them exact.

#pragma once

#include <gmpxx.h>

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace squarelab {

/// Domain error raised by exact routines (zero denominators, empty sets,
/// out-of-range levels). The message is part of the contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical rational number backed by GMP. The denominator is always
/// positive and coprime to the numerator.
class Rational {
 public:
  Rational() = default;
  Rational(long value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(const mpz_class& num, const mpz_class& den);
  explicit Rational(const mpq_class& value);

  /// Parses "n/d" or "n".
  static Rational parse(std::string_view text);

  const mpq_class& get() const { return value_; }
  mpz_class numerator() const { return value_.get_num(); }
  mpz_class denominator() const { return value_.get_den(); }

  int sign() const { return sgn(value_); }
  bool is_zero() const { return sign() == 0; }

  /// "n/d" in canonical form; zero is "0/1".
  std::string str() const;
  /// Round-to-nearest binary64 rendition.
  double to_double() const;

  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.value_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class value_;
};

Rational pow(const Rational& base, unsigned exponent);
/// 2^k for any integer k.
Rational pow2(long k);
std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Element a + b*sqrt(2) of Q(sqrt 2). The pair (a, b) is unique.
class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(int value) : a_(value) {}  // NOLINT(google-explicit-constructor)
  ExactScalar(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  ExactScalar(Rational a, Rational b) : a_(std::move(a)), b_(std::move(b)) {}

  static ExactScalar sqrt2() { return {Rational(0), Rational(1)}; }
  /// sqrt(2)^k for any integer k, i.e. 2^{k/2}.
  static ExactScalar sqrt2_pow(long k);
  /// Parses the serialized form "n1/d1+n2/d2*r2" (a bare rational is accepted).
  static ExactScalar parse(std::string_view text);

  const Rational& rational_part() const { return a_; }
  const Rational& sqrt2_part() const { return b_; }
  bool is_rational() const { return b_.is_zero(); }
  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  /// Field norm a^2 - 2 b^2; zero only at zero.
  Rational norm() const { return a_ * a_ - Rational(2) * b_ * b_; }
  ExactScalar conjugate() const { return {a_, -b_}; }
  /// Exact sign of the real number a + b*sqrt(2).
  int sign() const;
  ExactScalar abs() const { return sign() < 0 ? -*this : *this; }

  /// "a+b*r2" with both parts as n/d.
  std::string str() const;
  /// Just "n/d" when rational, else str().
  std::string compact() const { return is_rational() ? a_.str() : str(); }
  double to_double() const;

  ExactScalar& operator+=(const ExactScalar& o);
  ExactScalar& operator-=(const ExactScalar& o);
  ExactScalar& operator*=(const ExactScalar& o);
  ExactScalar& operator/=(const ExactScalar& o);

  friend ExactScalar operator+(ExactScalar x, const ExactScalar& y) { return x += y; }
  friend ExactScalar operator-(ExactScalar x, const ExactScalar& y) { return x -= y; }
  friend ExactScalar operator*(ExactScalar x, const ExactScalar& y) { return x *= y; }
  friend ExactScalar operator/(ExactScalar x, const ExactScalar& y) { return x /= y; }
  friend ExactScalar operator-(const ExactScalar& x) { return {-x.a_, -x.b_}; }

  friend bool operator==(const ExactScalar& x, const ExactScalar& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }
  friend std::strong_ordering operator<=>(const ExactScalar& x, const ExactScalar& y) {
    const int s = (x - y).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  Rational a_;
  Rational b_;
};

std::ostream& operator<<(std::ostream& os, const ExactScalar& x);

/// Canonical scalar n1/d1 + (n2/d2) sqrt 2. Throws Error("zero denominator").
ExactScalar scalar_normalize(const mpz_class& n1, const mpz_class& d1,
                             const mpz_class& n2, const mpz_class& d2);

/// Polynomial c0 + c1 p + c2 p^2 + c3 p^3 with exact coefficients.
class PolyP {
 public:
  static constexpr int kMaxDegree = 3;
  using Coefficients = std::array<ExactScalar, kMaxDegree + 1>;

  PolyP() = default;
  explicit PolyP(Coefficients coeffs) : coeffs_(std::move(coeffs)) {}

  const ExactScalar& operator[](int k) const { return coeffs_.at(static_cast<std::size_t>(k)); }
  ExactScalar& operator[](int k) { return coeffs_.at(static_cast<std::size_t>(k)); }
  const Coefficients& coefficients() const { return coeffs_; }
  bool is_zero() const;

  PolyP& operator+=(const PolyP& o);
  PolyP& operator-=(const PolyP& o);
  friend PolyP operator+(PolyP a, const PolyP& b) { return a += b; }
  friend PolyP operator-(PolyP a, const PolyP& b) { return a -= b; }
  friend PolyP operator*(const ExactScalar& s, PolyP a);
  friend bool operator==(const PolyP& a, const PolyP& b) = default;

 private:
  Coefficients coeffs_{};
};

ExactScalar poly_eval(const PolyP& poly, const Rational& p);
bool poly_equal(const PolyP& a, const PolyP& b);
std::ostream& operator<<(std::ostream& os, const PolyP& poly);

using ScalarVector = Eigen::Matrix<ExactScalar, Eigen::Dynamic, 1>;
using ScalarMatrix = Eigen::Matrix<ExactScalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Scalar-generic helpers shared by the exact and binary64 code paths.
template <typename Scalar>
struct ScalarOps;

template <>
struct ScalarOps<ExactScalar> {
  static ExactScalar sqrt2_pow(long k) { return ExactScalar::sqrt2_pow(k); }
  static ExactScalar dyadic(long k) { return ExactScalar(pow2(k)); }
};

template <>
struct ScalarOps<double> {
  static double sqrt2_pow(long k);
  static double dyadic(long k);
};

}  // namespace squarelab

namespace Eigen {

template <>
struct NumTraits<squarelab::ExactScalar> : GenericNumTraits<squarelab::ExactScalar> {
  using Real = squarelab::ExactScalar;
  using NonInteger = squarelab::ExactScalar;
  using Literal = squarelab::ExactScalar;
  using Nested = squarelab::ExactScalar;

  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 32,
    MulCost = 96
  };

  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
