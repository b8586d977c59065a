#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "chebgsee/mps.hpp"

namespace chebgsee {

struct PauliTerm {
  double coeff = 0.0;
  /// One label per site from {I, X, Y, Z}; labels[0] acts on site 0.
  std::string labels;
};

/// Real-weighted sum of Pauli strings, H = sum_i c_i P_i.
class PauliSum {
 public:
  PauliSum() = default;
  /// Throws ParameterError for empty strings, wrong lengths, bad labels or
  /// zero/non-finite coefficients.
  PauliSum(std::size_t n_sites, std::vector<PauliTerm> terms);

  std::size_t n_sites() const noexcept { return n_sites_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  /// Triangle-inequality bound on the operator norm: sum_i |c_i|.
  double coefficient_l1() const;

  /// Text format: one term per line, `coeff  LABELS`, blank lines and `#` comments ignored.
  static PauliSum parse(std::istream& in);
  static PauliSum parse(const std::string& text);
  std::string to_text() const;

 private:
  std::size_t n_sites_ = 0;
  std::vector<PauliTerm> terms_;
};

struct ModelMeta {
  std::string model;  // "tfim1d", "tfim2d", "pauli"
  std::size_t L = 0;
  double J = 0.0;
  double h = 0.0;
  std::string ordering;  // site ordering onto the chain
};

/// H_raw / scale with spec(H_raw / scale) inside [-1, 1].
struct NormalizedHamiltonian {
  Mpo mpo;           // already divided by scale
  PauliSum terms;    // raw (unscaled) terms, used by the dense oracle
  double scale = 1;  // upper bound on ||H_raw||
  ModelMeta meta;

  std::size_t n_sites() const noexcept { return mpo.size(); }
};

/// MPO of a single Pauli string times `coeff` (bond dimension 1).
Mpo pauli_string_mpo(const PauliTerm& term);

/// Sum-of-strings MPO (bond dimension = number of terms); with
/// `compress_tol > 0` the result is SVD-compressed, dropping operator Schmidt
/// values below `compress_tol * largest` at each cut.
Mpo paulisum_to_mpo(const PauliSum& ps, double compress_tol);

/// -J sum X_i X_{i+1} - h sum Z_i on an open chain, scaled by J(L-1) + hL.
NormalizedHamiltonian tfim_1d(std::size_t L, double J, double h);

/// -J sum_<ij> X_i X_j - h sum Z_i on an open L x L lattice, sites placed on
/// the chain in row-major snake order, scaled by J * edges + h * L^2.
NormalizedHamiltonian tfim_2d(std::size_t L, double J, double h);

/// Normalized Hamiltonian from an arbitrary Pauli sum, scaled by sum |c_i|.
NormalizedHamiltonian from_pauli_sum(PauliSum ps, double compress_tol = 1e-12);

/// Chain index of lattice site (row, col) under row-major snake ordering.
std::size_t snake_index(std::size_t L, std::size_t row, std::size_t col);

/// Nearest-neighbour edges of the open L x L lattice as chain-index pairs (i < j).
std::vector<std::pair<std::size_t, std::size_t>> lattice_edges(std::size_t L);

}  // namespace chebgsee
