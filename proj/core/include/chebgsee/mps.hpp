#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace chebgsee {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

inline constexpr std::size_t kPhysDim = 2;
inline constexpr std::size_t kUnboundedBond = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultDenseLimit = 20;

/// Rank-3 site tensor (left bond x physical x right bond), held as one
/// left x right matrix per physical index.
using SiteTensor = std::array<Matrix, kPhysDim>;

/// Rank-4 operator tensor (left bond x out x in x right bond), held as one
/// left x right matrix per physical pair at index `2 * out + in`.
using OpTensor = std::array<Matrix, kPhysDim * kPhysDim>;

inline constexpr std::size_t op_index(std::size_t out, std::size_t in) { return out * kPhysDim + in; }

/// Matrix product state on a chain of qubits.
///
/// The represented vector is `exp(log_norm) * contraction(sites)`. Keeping the
/// scale out of the tensors lets long recursions stay in range. Values are
/// immutable; every operation returns a new state.
class Mps {
 public:
  Mps() = default;

  /// Validates bond consistency; throws StructuralError on mismatch.
  explicit Mps(std::vector<SiteTensor> sites, double log_norm = 0.0,
               std::optional<std::size_t> ortho_center = std::nullopt);

  /// Product state from per-site amplitudes (a0, a1).
  static Mps product_state(std::span<const std::array<Complex, 2>> local_states);
  /// Computational basis state; `bits[0]` is site 0.
  static Mps basis_state(std::span<const int> bits);
  /// Normalized random state with uniform interior bond dimension, canonical at site 0.
  static Mps random(std::size_t n_sites, std::size_t bond_dim, std::uint64_t seed);

  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  const SiteTensor& site(std::size_t i) const { return sites_.at(i); }
  std::span<const SiteTensor> sites() const noexcept { return sites_; }

  /// Bond dimensions including the two boundary bonds (size() + 1 entries).
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond() const;

  std::optional<std::size_t> ortho_center() const noexcept { return center_; }
  double log_norm() const noexcept { return log_norm_; }

 private:
  std::vector<SiteTensor> sites_;
  double log_norm_ = 0.0;
  std::optional<std::size_t> center_;
};

/// Matrix product operator on a chain of qubits.
class Mpo {
 public:
  Mpo() = default;
  explicit Mpo(std::vector<OpTensor> sites);

  static Mpo identity(std::size_t n_sites);

  std::size_t size() const noexcept { return sites_.size(); }
  const OpTensor& site(std::size_t i) const { return sites_.at(i); }
  std::span<const OpTensor> sites() const noexcept { return sites_; }

  std::vector<std::size_t> bond_dims() const;
  /// Largest internal bond dimension; the factor by which apply_mpo inflates MPS bonds.
  std::size_t growth_factor() const;

  Mpo scaled(Complex factor) const;

 private:
  std::vector<OpTensor> sites_;
};

struct TruncReport {
  /// Squared norm discarded at each internal bond (size() - 1 entries), in absolute units.
  std::vector<double> discarded_weights;
  /// Global error ||psi - psi_truncated||.
  double error = 0.0;
  /// ||psi|| before truncation.
  double norm_before = 0.0;
  std::size_t max_bond_before = 0;
  std::size_t max_bond_after = 0;
};

struct Truncated {
  Mps state;
  TruncReport report;
};

/// <a|b>, contracted left to right.
Complex inner(const Mps& a, const Mps& b);
double norm(const Mps& psi);

/// Exact operator application; bond e becomes (mpo bond e) x (mps bond e).
Mps apply_mpo(const Mpo& op, const Mps& psi);

/// coeff_a * a + coeff_b * b by direct sum; interior bonds add.
Mps add(const Mps& a, const Mps& b, Complex coeff_a = 1.0, Complex coeff_b = 1.0);

Mps scale(const Mps& psi, Complex factor);

/// Mixed canonical form around `center`; the center tensor is normalized and
/// the norm moved into log_norm.
Mps canonicalize(const Mps& psi, std::size_t center);

/// One right-to-left orthogonalization followed by a single left-to-right SVD
/// sweep. Keeps at most `chi_max` singular values per bond and drops those
/// below `svd_tol * largest`. The result is canonical at the last site.
Truncated truncate(const Mps& psi, std::size_t chi_max, double svd_tol);

/// Full amplitude vector, site 0 as the most significant bit.
DenseVector to_dense(const Mps& psi, std::size_t dense_limit = kDefaultDenseLimit);

/// Exact MPS decomposition of a dense vector of length 2^n (left canonical,
/// singular values below `cutoff * largest` dropped).
Mps from_dense(const DenseVector& amplitudes, double cutoff = 1e-15);

/// max |sum_s A_s^dag A_s - I| at `site`.
double left_isometry_residual(const Mps& psi, std::size_t site);
/// max |sum_s A_s A_s^dag - I| at `site`.
double right_isometry_residual(const Mps& psi, std::size_t site);

/// <psi|op|psi> without forming op|psi>.
Complex expectation(const Mps& psi, const Mpo& op);

/// Dense 2^n x 2^n matrix of an MPO (small n only).
Matrix to_dense(const Mpo& op, std::size_t dense_limit = 10);

}  // namespace chebgsee
