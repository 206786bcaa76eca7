#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <complex>
#include <cstdio>
#include <string>
#include <variant>

#include "traffic/errors.hpp"

namespace traffic {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Parses "3", "-7/4", "0.25", "1.5e-2" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  auto fail = [&] { throw ParseError("not a rational number: '" + text + "'"); };
  if (text.empty()) fail();
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) fail();
    return num / den;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  Integer digits = 0;
  int scale = 0;
  bool any = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (dot) --scale;
      any = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) fail();
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') fail();
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
    if (i >= text.size()) fail();
    int e = 0;
    for (; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i])) || e > 1000) fail();
      e = e * 10 + (text[i] - '0');
    }
    scale += eneg ? -e : e;
  }
  Rational r(digits);
  Integer ten_pow = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
  if (scale < 0) r /= Rational(ten_pow);
  if (scale > 0) r *= Rational(ten_pow);
  return negative ? -r : r;
}

inline Rational rational_pow(const Rational& base, unsigned exponent) {
  Rational out = 1;
  for (unsigned i = 0; i < exponent; ++i) out *= base;
  return out;
}

/// A scalar that stays an exact rational as long as every input was exact,
/// and degrades to a complex double otherwise.
class Value {
 public:
  Value() : v_(Rational(0)) {}
  Value(int x) : v_(Rational(x)) {}
  Value(long x) : v_(Rational(x)) {}
  Value(long long x) : v_(Rational(x)) {}
  Value(const Integer& x) : v_(Rational(x)) {}
  Value(const Rational& x) : v_(x) {}
  Value(double x) : v_(Complex(x, 0.0)) {}
  Value(const Complex& x) : v_(x) {}

  bool is_exact() const { return std::holds_alternative<Rational>(v_); }
  const Rational& rational() const {
    if (!is_exact()) throw ContractError("value is not exact");
    return std::get<Rational>(v_);
  }
  Complex to_complex() const {
    if (is_exact()) return {to_double(std::get<Rational>(v_)), 0.0};
    return std::get<Complex>(v_);
  }
  double real() const { return to_complex().real(); }
  bool is_zero() const { return is_exact() ? rational() == 0 : to_complex() == Complex(0.0, 0.0); }

  Value& operator+=(const Value& o) { return *this = *this + o; }
  Value& operator-=(const Value& o) { return *this = *this - o; }
  Value& operator*=(const Value& o) { return *this = *this * o; }

  friend Value operator+(const Value& a, const Value& b) {
    if (a.is_exact() && b.is_exact()) return Value(a.rational() + b.rational());
    return Value(a.to_complex() + b.to_complex());
  }
  friend Value operator-(const Value& a, const Value& b) {
    if (a.is_exact() && b.is_exact()) return Value(a.rational() - b.rational());
    return Value(a.to_complex() - b.to_complex());
  }
  friend Value operator*(const Value& a, const Value& b) {
    // Exact zero absorbs floats so indicator laws keep products exact.
    if (a.is_exact() && a.rational() == 0) return a;
    if (b.is_exact() && b.rational() == 0) return b;
    if (a.is_exact() && b.is_exact()) return Value(a.rational() * b.rational());
    return Value(a.to_complex() * b.to_complex());
  }
  friend Value operator-(const Value& a) {
    if (a.is_exact()) return Value(Rational(-a.rational()));
    return Value(-a.to_complex());
  }
  friend bool operator==(const Value& a, const Value& b) {
    if (a.is_exact() && b.is_exact()) return a.rational() == b.rational();
    return a.to_complex() == b.to_complex();
  }

  std::string str() const {
    if (is_exact()) return to_string(rational());
    Complex c = to_complex();
    if (c.imag() == 0.0) return format_double(c.real());
    return format_double(c.real()) + (c.imag() < 0 ? "-" : "+") + format_double(std::abs(c.imag())) + "i";
  }

 private:
  std::variant<Rational, Complex> v_;
};

}  // namespace traffic
