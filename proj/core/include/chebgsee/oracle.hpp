#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chebgsee/chebyshev.hpp"
#include "chebgsee/hamiltonians.hpp"
#include "chebgsee/mps.hpp"

namespace chebgsee {

/// Largest system the oracle accepts (state vectors of 2^n amplitudes).
inline constexpr std::size_t kOracleMaxSites = 24;
/// Full matrices and eigendecompositions are only formed up to this size.
inline constexpr std::size_t kFullDiagSites = 10;

/// Dense limit from CHEBGSEE_DENSE_LIMIT, else `fallback`; clamped to kOracleMaxSites.
std::size_t dense_limit_from_env(std::size_t fallback = kDefaultDenseLimit);

/// Exact state-vector model of a normalized Hamiltonian, applied through
/// sparse Pauli action. Read-only after construction.
class DenseSystem {
 public:
  /// Throws CapacityError when n exceeds `limit`, NumericalError when the
  /// scaled spectrum leaves [-1, 1] (checked where the full matrix exists).
  explicit DenseSystem(const NormalizedHamiltonian& H, std::size_t limit = dense_limit_from_env());
  DenseSystem(const PauliSum& raw, double scale, std::size_t limit = dense_limit_from_env());

  std::size_t n_sites() const noexcept { return n_; }
  std::size_t dim() const noexcept { return std::size_t{1} << n_; }
  double scale() const noexcept { return scale_; }

  /// y = (H_raw / scale) x.
  void apply(const DenseVector& x, DenseVector& y) const;
  DenseVector apply(const DenseVector& x) const;

  bool has_full_spectrum() const noexcept { return eigenvalues_.has_value(); }
  /// Only when has_full_spectrum().
  const Eigen::VectorXd& eigenvalues() const;
  const Matrix& eigenvectors() const;
  Matrix matrix() const;

 private:
  struct Term {
    std::uint64_t xmask = 0;
    std::uint64_t zmask = 0;  // Z and Y positions
    Complex coeff;            // includes i^{#Y}
  };
  void build(const PauliSum& raw, std::size_t limit);

  std::size_t n_ = 0;
  double scale_ = 1.0;
  std::vector<Term> terms_;
  std::optional<Eigen::VectorXd> eigenvalues_;
  std::optional<Matrix> eigenvectors_;
};

struct GroundState {
  double energy = 0.0;
  DenseVector vector;
  std::size_t degeneracy = 1;  // from the full spectrum; 1 when found iteratively
};

inline constexpr double kDegeneracyTol = 1e-10;

GroundState dense_ground(const DenseSystem& sys);

/// Exact mu_0 ... mu_d by the dense three-term recurrence.
std::vector<double> dense_cheb_moments(const DenseSystem& sys, const DenseVector& psi, std::size_t d);

/// Calls `visit(k, t_k)` for k = 0 ... n with exact dense Chebyshev vectors.
void dense_cheb_vectors(const DenseSystem& sys, const DenseVector& psi, std::size_t n,
                        const std::function<void(std::size_t, const DenseVector&)>& visit);

/// |mu_k - mu~_k| elementwise; throws ParameterError on length mismatch.
std::vector<double> moment_error_profile(std::span<const double> exact, std::span<const double> approx);
std::vector<double> moment_error_profile(std::span<const double> exact, const MomentSequence& approx);

/// Norm of the projection of psi onto the ground eigenspace (degenerate
/// levels within kDegeneracyTol are included).
double overlap_chi(const DenseVector& psi, const DenseSystem& sys);
double overlap_chi(const Mps& psi, const DenseSystem& sys);

}  // namespace chebgsee
