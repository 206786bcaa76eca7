#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "traffic/errors.hpp"
#include "traffic/random.hpp"
#include "traffic/value.hpp"

namespace traffic {

/// Distribution of a single matrix entry, with exact joint moments E[X^k conj(X)^l].
struct EntryLaw {
  enum class Kind { rademacher, gaussian, bernoulli, signed_bernoulli, dirac, complex_rademacher, complex_gaussian };

  Kind kind = Kind::rademacher;
  Rational param = 1;  // q for (signed) Bernoulli, the atom for dirac

  static EntryLaw rademacher() { return {Kind::rademacher, 1}; }
  static EntryLaw gaussian() { return {Kind::gaussian, 1}; }
  static EntryLaw bernoulli(const Rational& q) { return checked({Kind::bernoulli, q}); }
  static EntryLaw signed_bernoulli(const Rational& q) { return checked({Kind::signed_bernoulli, q}); }
  static EntryLaw dirac(const Rational& c) { return {Kind::dirac, c}; }
  static EntryLaw complex_rademacher() { return {Kind::complex_rademacher, 1}; }
  static EntryLaw complex_gaussian() { return {Kind::complex_gaussian, 1}; }

  bool is_real() const { return kind != Kind::complex_rademacher && kind != Kind::complex_gaussian; }
  bool is_symmetric() const { return kind != Kind::bernoulli && kind != Kind::dirac; }

  Complex draw(Rng& rng) const {
    switch (kind) {
      case Kind::rademacher:
        return (rng() >> 63) ? 1.0 : -1.0;
      case Kind::gaussian:
        return standard_normal(rng);
      case Kind::bernoulli:
        return uniform01(rng) < to_double(param) ? 1.0 : 0.0;
      case Kind::signed_bernoulli: {
        double sign = (rng() >> 63) ? 1.0 : -1.0;
        return uniform01(rng) < to_double(param) ? sign : 0.0;
      }
      case Kind::dirac:
        return to_double(param);
      case Kind::complex_rademacher: {
        double a = (rng() >> 63) ? 1.0 : -1.0;
        double b = (rng() >> 63) ? 1.0 : -1.0;
        return Complex(a, b) / std::sqrt(2.0);
      }
      case Kind::complex_gaussian: {
        double a = standard_normal(rng);
        double b = standard_normal(rng);
        return Complex(a, b) / std::sqrt(2.0);
      }
    }
    return 0.0;
  }

  /// E[X^k conj(X)^l], exact.
  Rational moment(int k, int l) const {
    if (k < 0 || l < 0) throw ContractError("negative moment order");
    int n = k + l;
    switch (kind) {
      case Kind::rademacher:
        return n % 2 == 0 ? 1 : 0;
      case Kind::gaussian:
        return n % 2 == 0 ? Rational(double_factorial(n - 1)) : Rational(0);
      case Kind::bernoulli:
        return n == 0 ? Rational(1) : param;
      case Kind::signed_bernoulli:
        return n == 0 ? Rational(1) : (n % 2 == 0 ? param : Rational(0));
      case Kind::dirac:
        return rational_pow(param, static_cast<unsigned>(n));
      case Kind::complex_rademacher: {
        // X = exp(i theta), theta uniform on pi/4 + (pi/2) Z.
        int d = k - l;
        if (((d % 4) + 4) % 4 != 0) return 0;
        return ((d / 4) % 2 == 0) ? 1 : -1;
      }
      case Kind::complex_gaussian: {
        if (k != l) return 0;
        Integer f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return Rational(f);
      }
    }
    return 0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::rademacher: return "rademacher";
      case Kind::gaussian: return "gaussian";
      case Kind::bernoulli: return "bernoulli:q=" + to_string(param);
      case Kind::signed_bernoulli: return "signed_bernoulli:q=" + to_string(param);
      case Kind::dirac: return "dirac:c=" + to_string(param);
      case Kind::complex_rademacher: return "complex_rademacher";
      case Kind::complex_gaussian: return "complex_gaussian";
    }
    return "?";
  }

  /// Inverse of name().
  static EntryLaw parse(const std::string& text) {
    auto colon = text.find(':');
    std::string head = text.substr(0, colon);
    Rational value = 1;
    if (colon != std::string::npos) {
      std::string arg = text.substr(colon + 1);
      auto eq = arg.find('=');
      value = parse_rational(eq == std::string::npos ? arg : arg.substr(eq + 1));
    }
    if (head == "rademacher") return rademacher();
    if (head == "gaussian") return gaussian();
    if (head == "bernoulli") return bernoulli(value);
    if (head == "signed_bernoulli") return signed_bernoulli(value);
    if (head == "dirac") return dirac(value);
    if (head == "complex_rademacher") return complex_rademacher();
    if (head == "complex_gaussian") return complex_gaussian();
    throw ParseError("unknown entry law '" + text + "'");
  }

  static Integer double_factorial(int n) {
    Integer r = 1;
    for (int i = n; i > 1; i -= 2) r *= i;
    return r;
  }

 private:
  static EntryLaw checked(EntryLaw law) {
    if (law.param < 0 || law.param > 1) throw ContractError("Bernoulli parameter must lie in [0, 1]");
    return law;
  }
};

}  // namespace traffic
