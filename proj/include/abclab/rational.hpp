#pragma once

// Reduced fractions p/q used as rotation numbers and interval endpoints.
// AbC denominators grow roughly like q_{n+1} ~ q_n^2, which leaves 64 bits
// after two or three stages, so the components are arbitrary precision.

#include <boost/multiprecision/cpp_int.hpp>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace abclab {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t p) : p_(p), q_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t p, std::int64_t q) : Rational(BigInt(p), BigInt(q)) {}
  Rational(BigInt p, BigInt q) : p_(std::move(p)), q_(std::move(q)) { normalize(); }

  /// Parses "p/q" or "p" (decimal, optional sign on p).
  static Rational parse(const std::string& s) {
    try {
      auto slash = s.find('/');
      if (slash == std::string::npos) return Rational(BigInt(s), BigInt(1));
      return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
    } catch (const std::domain_error&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed rational '" + s + "'");
    }
  }

  /// The rational written by the shortest decimal that round-trips to x,
  /// so 0.01 becomes 1/100 rather than the binary value of the double.
  static Rational from_decimal(double x) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite value");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
    std::string s(buf, res.ptr);
    auto e = s.find('e');
    int exp10 = std::stoi(s.substr(e + 1));
    std::string mant = s.substr(0, e);
    bool neg = !mant.empty() && mant[0] == '-';
    if (neg) mant.erase(0, 1);
    auto dot = mant.find('.');
    std::string digits = mant;
    if (dot != std::string::npos) {
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
      exp10 -= static_cast<int>(mant.size() - dot - 1);
    }
    BigInt p(digits);
    BigInt q = 1;
    BigInt ten = 10;
    if (exp10 >= 0) p *= boost::multiprecision::pow(ten, static_cast<unsigned>(exp10));
    else q = boost::multiprecision::pow(ten, static_cast<unsigned>(-exp10));
    return Rational(neg ? BigInt(-p) : p, q);
  }

  const BigInt& num() const { return p_; }
  const BigInt& den() const { return q_; }

  bool den_fits_int64() const { return q_ <= BigInt(INT64_MAX); }

  double to_double() const {
    return static_cast<double>(boost::multiprecision::cpp_rational(p_, q_).convert_to<long double>());
  }

  /// Representative in [0,1) of the class modulo 1.
  Rational mod1() const {
    BigInt r = p_ % q_;
    if (r < 0) r += q_;
    Rational out;
    out.p_ = std::move(r);
    out.q_ = q_;
    return out;
  }

  /// Value modulo 1 as a double. The reduction is exact, so huge numerators
  /// keep their fractional part.
  double frac_double() const { return mod1().to_double(); }

  /// Fractional part of k * (*this), computed exactly.
  double frac_of_multiple(std::int64_t k) const {
    BigInt r = (p_ * k) % q_;
    if (r < 0) r += q_;
    return Rational(r, q_).to_double();
  }

  Rational operator-() const {
    Rational out;
    out.p_ = -p_;
    out.q_ = q_;
    return out;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.p_ * b.q_ + b.p_ * a.q_, a.q_ * b.q_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.p_ * b.p_, a.q_ * b.q_); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.p_ == 0) throw std::domain_error("division by zero");
    return Rational(a.p_ * b.q_, a.q_ * b.p_);
  }

  friend bool operator==(const Rational& a, const Rational& b) { return a.p_ == b.p_ && a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    BigInt lhs = a.p_ * b.q_;
    BigInt rhs = b.p_ * a.q_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend Rational abs(const Rational& r) { return r.p_ < 0 ? -r : r; }

  std::string str() const { return p_.str() + "/" + q_.str(); }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  void normalize() {
    if (q_ == 0) throw std::domain_error("zero denominator");
    if (q_ < 0) {
      p_ = -p_;
      q_ = -q_;
    }
    BigInt g = boost::multiprecision::gcd(p_, q_);
    if (g > 1) {
      p_ /= g;
      q_ /= g;
    }
    if (p_ == 0) q_ = 1;
  }

  BigInt p_ = 0;
  BigInt q_ = 1;
};

/// Closed interval with rational endpoints.
struct RationalInterval {
  Rational lo;
  Rational hi;

  bool contains(const RationalInterval& inner) const { return lo <= inner.lo && inner.hi <= hi; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

}  // namespace abclab
