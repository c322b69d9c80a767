#include "squarelab/numeric.hpp"

#include <mpfr.h>

#include <cmath>
#include <ostream>

namespace squarelab {
namespace {

constexpr mpfr_prec_t kRenditionPrecision = 256;

// RAII holder for an mpfr_t at kRenditionPrecision.
class Mpfr {
 public:
  Mpfr() { mpfr_init2(value_, kRenditionPrecision); }
  ~Mpfr() { mpfr_clear(value_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return value_; }

 private:
  mpfr_t value_;
};

mpz_class parse_integer(std::string_view text) {
  if (text.empty()) throw Error("malformed rational: empty");
  mpz_class out;
  if (out.set_str(std::string(text), 10) != 0)
    throw Error("malformed rational: " + std::string(text));
  return out;
}

}  // namespace

Rational::Rational(const mpz_class& num, const mpz_class& den) {
  if (den == 0) throw Error("zero denominator");
  value_ = mpq_class(num, den);
  value_.canonicalize();
}

Rational::Rational(const mpq_class& value) : value_(value) { value_.canonicalize(); }

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text), mpz_class(1));
  return Rational(parse_integer(text.substr(0, slash)), parse_integer(text.substr(slash + 1)));
}

std::string Rational::str() const {
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

double Rational::to_double() const {
  Mpfr x;
  mpfr_set_q(x.get(), value_.get_mpq_t(), MPFR_RNDN);
  return mpfr_get_d(x.get(), MPFR_RNDN);
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw Error("division by zero");
  value_ /= o.value_;
  return *this;
}

Rational pow(const Rational& base, unsigned exponent) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get().get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get().get_den_mpz_t(), exponent);
  return Rational(num, den);
}

Rational pow2(long k) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k < 0 ? -k : k));
  return k < 0 ? Rational(mpz_class(1), p) : Rational(p, mpz_class(1));
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

ExactScalar ExactScalar::sqrt2_pow(long k) {
  // 2^{k/2}: even k is rational, odd k carries one sqrt 2.
  const long half = k >= 0 ? k / 2 : -((-k + 1) / 2);
  const long rem = k - 2 * half;  // 0 or 1
  return rem == 0 ? ExactScalar(pow2(half)) : ExactScalar(Rational(0), pow2(half));
}

ExactScalar ExactScalar::parse(std::string_view text) {
  constexpr std::string_view kSuffix = "*r2";
  if (text.size() < kSuffix.size() || text.substr(text.size() - kSuffix.size()) != kSuffix)
    return ExactScalar(Rational::parse(text));
  const auto body = text.substr(0, text.size() - kSuffix.size());
  // The separating '+' is the first '+' after the first character.
  const auto plus = body.find('+', 1);
  if (plus == std::string_view::npos) throw Error("malformed scalar: " + std::string(text));
  return {Rational::parse(body.substr(0, plus)), Rational::parse(body.substr(plus + 1))};
}

int ExactScalar::sign() const {
  const int sa = a_.sign();
  const int sb = b_.sign();
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  // Opposite signs: compare a^2 with 2 b^2.
  const int c = (a_ * a_ <=> Rational(2) * b_ * b_) < 0 ? -1 : 1;
  return c > 0 ? sa : sb;
}

std::string ExactScalar::str() const { return a_.str() + "+" + b_.str() + "*r2"; }

double ExactScalar::to_double() const {
  if (b_.is_zero()) return a_.to_double();
  Mpfr a, b, r;
  mpfr_set_q(a.get(), a_.get().get_mpq_t(), MPFR_RNDN);
  mpfr_set_q(b.get(), b_.get().get_mpq_t(), MPFR_RNDN);
  mpfr_sqrt_ui(r.get(), 2, MPFR_RNDN);
  mpfr_fma(r.get(), b.get(), r.get(), a.get(), MPFR_RNDN);
  return mpfr_get_d(r.get(), MPFR_RNDN);
}

ExactScalar& ExactScalar::operator+=(const ExactScalar& o) {
  a_ += o.a_;
  if (!o.b_.is_zero()) b_ += o.b_;
  return *this;
}

ExactScalar& ExactScalar::operator-=(const ExactScalar& o) {
  a_ -= o.a_;
  if (!o.b_.is_zero()) b_ -= o.b_;
  return *this;
}

ExactScalar& ExactScalar::operator*=(const ExactScalar& o) {
  if (b_.is_zero() && o.b_.is_zero()) {
    a_ *= o.a_;
    return *this;
  }
  // (a + b r)(c + d r) = (ac + 2bd) + (ad + bc) r
  Rational a = a_ * o.a_ + Rational(2) * b_ * o.b_;
  Rational b = a_ * o.b_ + b_ * o.a_;
  a_ = std::move(a);
  b_ = std::move(b);
  return *this;
}

ExactScalar& ExactScalar::operator/=(const ExactScalar& o) {
  const Rational n = o.norm();
  if (n.is_zero()) throw Error("division by zero");
  *this *= o.conjugate();
  a_ /= n;
  b_ /= n;
  return *this;
}

std::ostream& operator<<(std::ostream& os, const ExactScalar& x) { return os << x.str(); }

ExactScalar scalar_normalize(const mpz_class& n1, const mpz_class& d1, const mpz_class& n2,
                             const mpz_class& d2) {
  return {Rational(n1, d1), Rational(n2, d2)};
}

bool PolyP::is_zero() const {
  for (const auto& c : coeffs_)
    if (!c.is_zero()) return false;
  return true;
}

PolyP& PolyP::operator+=(const PolyP& o) {
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

PolyP& PolyP::operator-=(const PolyP& o) {
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

PolyP operator*(const ExactScalar& s, PolyP a) {
  for (auto& c : a.coeffs_) c *= s;
  return a;
}

ExactScalar poly_eval(const PolyP& poly, const Rational& p) {
  // Horner
  ExactScalar acc = poly[PolyP::kMaxDegree];
  for (int k = PolyP::kMaxDegree - 1; k >= 0; --k) {
    acc *= ExactScalar(p);
    acc += poly[k];
  }
  return acc;
}

bool poly_equal(const PolyP& a, const PolyP& b) { return a == b; }

std::ostream& operator<<(std::ostream& os, const PolyP& poly) {
  os << "[";
  for (int k = 0; k <= PolyP::kMaxDegree; ++k) os << (k ? ", " : "") << poly[k];
  return os << "]";
}

double ScalarOps<double>::sqrt2_pow(long k) {
  const long half = k >= 0 ? k / 2 : -((-k + 1) / 2);
  const double base = std::ldexp(1.0, static_cast<int>(half));
  return k - 2 * half == 0 ? base : base * std::sqrt(2.0);
}
double ScalarOps<double>::dyadic(long k) { return std::ldexp(1.0, static_cast<int>(k)); }

}  // namespace squarelab
