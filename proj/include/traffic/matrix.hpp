#pragma once

#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/value.hpp"

namespace traffic {

template <class S>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class S>
S conj_scalar(const S& x) {
  if constexpr (is_complex<S>::value) return std::conj(x);
  else return x;
}

template <class S>
bool is_zero_scalar(const S& x) {
  return x == S(0);
}

/// Square dense matrix, row-major.
template <class S>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(int n, const S& fill = S(0)) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

  static DenseMatrix identity(int n) {
    DenseMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  int size() const { return n_; }
  S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  S* data() { return a_.data(); }
  const S* data() const { return a_.data(); }
  const std::vector<S>& values() const { return a_; }

  /// Conjugate transpose.
  DenseMatrix adjoint() const {
    DenseMatrix m(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = conj_scalar((*this)(j, i));
    return m;
  }
  DenseMatrix transposed() const {
    DenseMatrix m(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = (*this)(j, i);
    return m;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    int n = a.n_;
    DenseMatrix c(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const S aik = a(i, k);
        if (is_zero_scalar(aik)) continue;
        for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  int n_ = 0;
  std::vector<S> a_;
};

using ComplexMatrix = DenseMatrix<Complex>;
using RealMatrix = DenseMatrix<double>;
using RationalMatrix = DenseMatrix<Rational>;

/// Named N x N matrices sharing the dimension N.
template <class S>
class MatrixFamily {
 public:
  MatrixFamily() = default;
  explicit MatrixFamily(int n) : n_(n) {
    if (n < 1) throw ContractError("matrix dimension must be positive");
  }

  int dimension() const { return n_; }

  void set(const std::string& variable, DenseMatrix<S> m) {
    if (m.size() != n_)
      throw ContractError("matrix '" + variable + "' has size " + std::to_string(m.size()) + ", expected " +
                          std::to_string(n_));
    m_[variable] = std::move(m);
  }
  bool has(const std::string& variable) const { return m_.count(variable) > 0; }
  const DenseMatrix<S>& get(const std::string& variable) const {
    auto it = m_.find(variable);
    if (it == m_.end()) throw ContractError("no matrix bound to variable '" + variable + "'");
    return it->second;
  }
  const std::map<std::string, DenseMatrix<S>>& matrices() const { return m_; }

 private:
  int n_ = 1;
  std::map<std::string, DenseMatrix<S>> m_;
};

using ComplexFamily = MatrixFamily<Complex>;
using RealFamily = MatrixFamily<double>;
using RationalFamily = MatrixFamily<Rational>;

template <class S>
bool is_real_family(const MatrixFamily<S>& f) {
  if constexpr (!is_complex<S>::value) return true;
  else {
    for (auto& [name, m] : f.matrices())
      for (auto& x : m.values())
        if (x.imag() != 0.0) return false;
    return true;
  }
}

inline RealFamily real_part(const ComplexFamily& f) {
  RealFamily out(f.dimension());
  for (auto& [name, m] : f.matrices()) {
    RealMatrix r(m.size());
    for (int i = 0; i < m.size(); ++i)
      for (int j = 0; j < m.size(); ++j) r(i, j) = m(i, j).real();
    out.set(name, std::move(r));
  }
  return out;
}

template <class S>
ComplexFamily to_complex_family(const MatrixFamily<S>& f) {
  ComplexFamily out(f.dimension());
  for (auto& [name, m] : f.matrices()) {
    ComplexMatrix c(m.size());
    for (int i = 0; i < m.size(); ++i)
      for (int j = 0; j < m.size(); ++j) {
        if constexpr (std::is_same_v<S, Rational>) c(i, j) = to_double(m(i, j));
        else c(i, j) = Complex(m(i, j));
      }
    out.set(name, std::move(c));
  }
  return out;
}

// Family container. Text form:
//   N,<n>
//   var,<name>
//   <n lines of 2n comma-separated numbers: re,im pairs, row-major>
//   ... more var blocks
// Binary form: "TRFM", u32 n, u32 count, then per matrix u32 name length,
// name bytes, n*n (re, im) little-endian doubles.

inline void write_family_text(std::ostream& out, const ComplexFamily& f) {
  out << "N," << f.dimension() << "\n";
  for (auto& [name, m] : f.matrices()) {
    out << "var," << name << "\n";
    for (int i = 0; i < m.size(); ++i) {
      for (int j = 0; j < m.size(); ++j)
        out << (j ? "," : "") << format_double(m(i, j).real()) << "," << format_double(m(i, j).imag());
      out << "\n";
    }
  }
}

inline void write_family_binary(std::ostream& out, const ComplexFamily& f) {
  auto u32 = [&](std::uint32_t x) { out.write(reinterpret_cast<const char*>(&x), 4); };
  out.write("TRFM", 4);
  u32(static_cast<std::uint32_t>(f.dimension()));
  u32(static_cast<std::uint32_t>(f.matrices().size()));
  for (auto& [name, m] : f.matrices()) {
    u32(static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (auto& x : m.values()) {
      double re = x.real(), im = x.imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
  }
}

inline ComplexFamily read_family_text(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) -> ParseError { return ParseError("family file: " + msg, line_no, 1); };
  if (!next_line() || line.rfind("N,", 0) != 0) throw fail("expected header 'N,<dimension>'");
  int n = 0;
  try {
    n = std::stoi(line.substr(2));
  } catch (...) {
    throw fail("bad dimension");
  }
  if (n < 1) throw fail("dimension must be positive");
  ComplexFamily f(n);
  while (next_line()) {
    if (line.rfind("var,", 0) != 0) throw fail("expected 'var,<name>'");
    std::string name = line.substr(4);
    if (name.empty()) throw fail("empty variable name");
    ComplexMatrix m(n);
    for (int i = 0; i < n; ++i) {
      if (!next_line()) throw fail("matrix '" + name + "' has too few rows");
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> nums;
      while (std::getline(ss, cell, ',')) {
        try {
          nums.push_back(std::stod(cell));
        } catch (...) {
          throw fail("bad number '" + cell + "'");
        }
      }
      if (static_cast<int>(nums.size()) != 2 * n) throw fail("row needs " + std::to_string(2 * n) + " numbers");
      for (int j = 0; j < n; ++j) m(i, j) = Complex(nums[2 * j], nums[2 * j + 1]);
    }
    f.set(name, std::move(m));
  }
  return f;
}

inline ComplexFamily read_family_binary(std::istream& in) {
  auto u32 = [&]() {
    std::uint32_t x = 0;
    if (!in.read(reinterpret_cast<char*>(&x), 4)) throw ParseError("family file: truncated binary data");
    return x;
  };
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "TRFM", 4) != 0) throw ParseError("family file: bad magic");
  int n = static_cast<int>(u32());
  std::uint32_t count = u32();
  if (n < 1 || n > 100000) throw ParseError("family file: bad dimension");
  ComplexFamily f(n);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t len = u32();
    if (len == 0 || len > 4096) throw ParseError("family file: bad variable name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw ParseError("family file: truncated binary data");
    ComplexMatrix m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double re = 0, im = 0;
        if (!in.read(reinterpret_cast<char*>(&re), 8) || !in.read(reinterpret_cast<char*>(&im), 8))
          throw ParseError("family file: truncated binary data");
        m(i, j) = Complex(re, im);
      }
    f.set(name, std::move(m));
  }
  return f;
}

/// Reads either container form, detected from the first bytes.
inline ComplexFamily read_family_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open family file '" + path + "'");
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, "TRFM", 4) == 0) return read_family_binary(in);
  return read_family_text(in);
}

inline void write_family_file(const std::string& path, const ComplexFamily& f, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write family file '" + path + "'");
  if (binary) write_family_binary(out, f);
  else write_family_text(out, f);
}

}  // namespace traffic
