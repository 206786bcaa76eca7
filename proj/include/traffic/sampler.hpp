#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "traffic/entry_law.hpp"
#include "traffic/errors.hpp"
#include "traffic/matrix.hpp"
#include "traffic/random.hpp"

namespace traffic {

/// Recipe for one random (or deterministic) N x N matrix.
struct EnsembleSpec {
  enum class Kind {
    wigner_real,
    wigner_complex,
    haar_unitary,
    uniform_permutation,
    all_ones_J,
    iid_entries,
    bernoulli_mask,
    diagonal_iid,
    deterministic,
    hadamard,      // entrywise product of independent samples of `parts`
    sum,           // sum of weights[k] * independent sample of parts[k]
    transpose_of,  // transpose of the matrix bound to `source` in the same family
  };

  Kind kind = Kind::deterministic;
  int N = 0;
  EntryLaw entry = EntryLaw::rademacher();
  std::optional<EntryLaw> diagonal;  // wigner diagonal law; defaults to `entry`
  double scale = 1.0;
  bool zero_diagonal = false;
  ComplexMatrix matrix;
  std::vector<EnsembleSpec> parts;
  std::vector<double> weights;
  std::string source;
};

namespace ensemble {

inline EnsembleSpec wigner_real(int N, EntryLaw entry = EntryLaw::rademacher(), std::optional<EntryLaw> diag = {}) {
  if (!entry.is_real() || (diag && !diag->is_real())) throw ContractError("real Wigner matrix needs real entry laws");
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::wigner_real;
  s.N = N;
  s.entry = entry;
  s.diagonal = diag;
  return s;
}

/// Off-diagonal entries (x + i y)/sqrt(2) with x, y drawn from the real law `entry`.
inline EnsembleSpec wigner_complex(int N, EntryLaw entry = EntryLaw::rademacher(), std::optional<EntryLaw> diag = {}) {
  if (!entry.is_real() || (diag && !diag->is_real())) throw ContractError("complex Wigner matrix takes real laws for x and y");
  EnsembleSpec s = wigner_real(N, entry, diag);
  s.kind = EnsembleSpec::Kind::wigner_complex;
  return s;
}

inline EnsembleSpec haar_unitary(int N) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::haar_unitary;
  s.N = N;
  return s;
}

inline EnsembleSpec uniform_permutation(int N) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::uniform_permutation;
  s.N = N;
  return s;
}

/// Entries 1/N when normalized, 1 otherwise.
inline EnsembleSpec all_ones(int N, bool normalized = true) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::all_ones_J;
  s.N = N;
  s.scale = normalized ? 1.0 / N : 1.0;
  return s;
}

inline EnsembleSpec iid_entries(int N, EntryLaw law, double scale = 1.0, bool zero_diagonal = false) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::iid_entries;
  s.N = N;
  s.entry = law;
  s.scale = scale;
  s.zero_diagonal = zero_diagonal;
  return s;
}

inline EnsembleSpec bernoulli_mask(int N, const Rational& q) {
  EnsembleSpec s = iid_entries(N, EntryLaw::bernoulli(q));
  s.kind = EnsembleSpec::Kind::bernoulli_mask;
  return s;
}

inline EnsembleSpec diagonal_iid(int N, EntryLaw law, double scale = 1.0) {
  EnsembleSpec s = iid_entries(N, law, scale);
  s.kind = EnsembleSpec::Kind::diagonal_iid;
  return s;
}

inline EnsembleSpec deterministic(ComplexMatrix m) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::deterministic;
  s.N = m.size();
  s.matrix = std::move(m);
  return s;
}

inline EnsembleSpec linear_combination(const std::vector<std::pair<double, EnsembleSpec>>& terms) {
  if (terms.empty()) throw ContractError("linear combination needs at least one term");
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::sum;
  s.N = terms.front().second.N;
  for (auto& [w, spec] : terms) {
    if (spec.N != s.N) throw ContractError("linear combination: dimension mismatch");
    s.weights.push_back(w);
    s.parts.push_back(spec);
  }
  return s;
}

inline EnsembleSpec transpose_of(const std::string& variable, int N) {
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::transpose_of;
  s.N = N;
  s.source = variable;
  return s;
}

}  // namespace ensemble

/// Entrywise product of independent samples of a and b.
inline EnsembleSpec hadamard_compose(const EnsembleSpec& a, const EnsembleSpec& b) {
  if (a.N != b.N) throw ContractError("hadamard_compose: dimension mismatch");
  EnsembleSpec s;
  s.kind = EnsembleSpec::Kind::hadamard;
  s.N = a.N;
  s.parts = {a, b};
  return s;
}

inline void validate(const EnsembleSpec& s) {
  if (s.N < 1) throw ContractError("ensemble dimension must be positive");
  using K = EnsembleSpec::Kind;
  if (s.kind == K::wigner_complex && !s.entry.is_symmetric())
    throw ContractError("complex Wigner matrix needs a symmetric entry law");
  if (s.kind == K::deterministic && s.matrix.size() != s.N) throw ContractError("deterministic matrix size mismatch");
  if (s.kind == K::transpose_of && s.source.empty()) throw ContractError("transpose_of needs a source variable");
  if ((s.kind == K::hadamard || s.kind == K::sum) && s.parts.empty())
    throw ContractError("composite ensemble without parts");
  for (auto& p : s.parts) {
    if (p.N != s.N) throw ContractError("composite ensemble: dimension mismatch");
    if (p.kind == K::transpose_of) throw ContractError("transpose_of cannot be nested");
    validate(p);
  }
}

inline ComplexMatrix to_dense(const Eigen::MatrixXcd& m) {
  int N = static_cast<int>(m.rows());
  ComplexMatrix out(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out(i, j) = m(i, j);
  return out;
}

/// Draws one matrix. transpose_of is resolved by sample_family.
inline ComplexMatrix sample(const EnsembleSpec& s, Rng& rng) {
  validate(s);
  const int N = s.N;
  using K = EnsembleSpec::Kind;
  ComplexMatrix m(N);
  switch (s.kind) {
    case K::wigner_real:
    case K::wigner_complex: {
      double norm = 1.0 / std::sqrt(static_cast<double>(N));
      EntryLaw diag = s.diagonal.value_or(s.entry);
      for (int i = 0; i < N; ++i) {
        m(i, i) = diag.draw(rng).real() * norm;
        for (int j = i + 1; j < N; ++j) {
          Complex x = s.entry.draw(rng);
          if (s.kind == K::wigner_complex) x = Complex(x.real(), s.entry.draw(rng).real()) / std::sqrt(2.0);
          m(i, j) = x * norm;
          m(j, i) = std::conj(x) * norm;
        }
      }
      return m;
    }
    case K::haar_unitary: {
      Eigen::MatrixXcd g(N, N);
      for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) g(i, j) = EntryLaw::complex_gaussian().draw(rng);
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
      Eigen::MatrixXcd q = qr.householderQ();
      const Eigen::MatrixXcd& r = qr.matrixQR();
      for (int j = 0; j < N; ++j) {
        Complex d = r(j, j);
        double a = std::abs(d);
        q.col(j) *= a > 0 ? d / a : Complex(1.0);
      }
      return to_dense(q);
    }
    case K::uniform_permutation: {
      std::vector<int> sigma(N);
      std::iota(sigma.begin(), sigma.end(), 0);
      for (int i = N - 1; i > 0; --i) {
        int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(sigma[i], sigma[j]);
      }
      for (int i = 0; i < N; ++i) m(i, sigma[i]) = 1.0;
      return m;
    }
    case K::all_ones_J:
      return ComplexMatrix(N, Complex(s.scale));
    case K::iid_entries:
    case K::bernoulli_mask:
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          m(i, j) = (s.zero_diagonal && i == j) ? Complex(0.0) : s.entry.draw(rng) * s.scale;
      return m;
    case K::diagonal_iid:
      for (int i = 0; i < N; ++i) m(i, i) = s.entry.draw(rng) * s.scale;
      return m;
    case K::deterministic:
      return s.matrix;
    case K::hadamard: {
      m = ComplexMatrix(N, Complex(1.0));
      for (auto& p : s.parts) {
        ComplexMatrix x = sample(p, rng);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) m(i, j) *= x(i, j);
      }
      return m;
    }
    case K::sum: {
      for (std::size_t k = 0; k < s.parts.size(); ++k) {
        ComplexMatrix x = sample(s.parts[k], rng);
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) m(i, j) += s.weights[k] * x(i, j);
      }
      return m;
    }
    case K::transpose_of:
      throw ContractError("transpose_of can only be sampled inside a family");
  }
  return m;
}

inline ComplexMatrix sample(const EnsembleSpec& s, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, 0);
  return sample(s, rng);
}

using SpecMap = std::map<std::string, EnsembleSpec>;
using Grouping = std::vector<std::vector<std::string>>;

/// One group per variable, in name order.
inline Grouping separate_groups(const SpecMap& specs) {
  Grouping g;
  for (auto& [name, s] : specs) g.push_back({name});
  return g;
}

/// Samples every variable; group k draws from stream (seed, k, replicate), so
/// different groups are independent and reproducible.
inline ComplexFamily sample_family(const SpecMap& specs, const Grouping& groups, std::uint64_t seed,
                                   std::uint64_t replicate) {
  if (specs.empty()) throw ContractError("no ensembles given");
  int N = specs.begin()->second.N;
  std::set<std::string> grouped;
  for (auto& g : groups)
    for (auto& v : g) {
      if (!specs.count(v)) throw ContractError("group mentions unknown variable '" + v + "'");
      if (!grouped.insert(v).second) throw ContractError("variable '" + v + "' appears in two groups");
    }
  for (auto& [v, s] : specs) {
    if (!grouped.count(v)) throw ContractError("variable '" + v + "' is not in any independence group");
    if (s.N != N) throw ContractError("all ensembles must share the dimension N");
  }
  ComplexFamily family(N);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    Rng rng = make_stream(seed, k, replicate);
    for (auto& v : groups[k]) {
      const auto& s = specs.at(v);
      if (s.kind != EnsembleSpec::Kind::transpose_of) family.set(v, sample(s, rng));
    }
  }
  for (auto& [v, s] : specs) {
    if (s.kind != EnsembleSpec::Kind::transpose_of) continue;
    if (!family.has(s.source)) throw ContractError("transpose_of refers to unknown variable '" + s.source + "'");
    family.set(v, family.get(s.source).transposed());
  }
  return family;
}

}  // namespace traffic
