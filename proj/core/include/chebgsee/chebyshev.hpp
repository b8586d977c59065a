#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "chebgsee/diagnostics.hpp"
#include "chebgsee/hamiltonians.hpp"
#include "chebgsee/mps.hpp"

namespace chebgsee {

struct ChebRunConfig {
  std::size_t chi_mps = 16;  // kUnboundedBond for exact runs
  std::size_t n_max = 100;   // Chebyshev vectors t_0 ... t_{n_max}
  double svd_tol = 1e-14;
  std::size_t checkpoint_every = 0;  // 0 disables checkpoints
  /// When false no SVD is applied at all and bonds grow as D_H D_{k-1} + D_{k-2}.
  bool compress = true;
  /// Largest bond allowed in the untruncated intermediate 2 H t_{k-1} - t_{k-2}.
  std::size_t max_intermediate_bond = 8192;
  /// Overlap and target degree for the truncation budget 3 pi chi^2 / (16 d^3).
  std::optional<double> overlap;
  std::optional<std::size_t> target_degree;
};

struct StepReport {
  std::size_t k = 0;
  double trunc_error = 0.0;   // ||t'_k - t~_k||
  double cos_error = 0.0;     // |1 - <t~_k|t'_k> / (||t~_k|| ||t'_k||)|
  double norm_before = 0.0;   // ||t'_k||
  std::size_t bond_before = 0;
  std::size_t bond_after = 0;
};

struct MomentSequence {
  std::vector<double> moments;        // mu_0 ... mu_{2 n_max} (or longer once extrapolated)
  std::vector<double> cosine_errors;  // per Chebyshev vector, index k; 0 at k = 0
  std::vector<double> trunc_errors;   // per Chebyshev vector, index k; 0 at k = 0
  std::vector<std::size_t> bonds;     // max bond of t~_k
  /// First index produced by extrapolation, if any.
  std::optional<std::size_t> split_index;

  std::size_t size() const noexcept { return moments.size(); }
  std::size_t computed() const noexcept { return split_index.value_or(moments.size()); }
};

/// Dimensions of the Chebyshev vectors when nothing is truncated:
/// D_0 = d0, D_1 = D_H d0, D_k = D_H D_{k-1} + D_{k-2}.
std::vector<std::size_t> bond_growth_trace(std::size_t growth_factor, std::size_t d0, std::size_t k);
std::vector<std::size_t> bond_growth_trace(const NormalizedHamiltonian& H, std::size_t d0, std::size_t k);

/// Truncation budget 3 pi chi^2 / (16 d^3).
double truncation_budget(double overlap, std::size_t degree);

/// t~_k = truncate(2 H t_{k-1} - t_{k-2}).
std::pair<Mps, StepReport> cheb_step(const Mpo& H, const Mps& t_prev, const Mps& t_prev2, const ChebRunConfig& cfg);

/// t~_1 = truncate(H t_0).
std::pair<Mps, StepReport> cheb_first_step(const Mpo& H, const Mps& t0, const ChebRunConfig& cfg);

/// mu_{2k} = 2 <t_k|t_k> - mu_0 and mu_{2k+1} = 2 <t_{k+1}|t_k> - mu_1.
std::pair<double, double> moments_from_vectors(const Mps& t_k, const Mps& t_k_plus_1, double mu0, double mu1,
                                               std::size_t k);

struct ChebRunHooks {
  DiagnosticsLog* log = nullptr;
  /// Checkpoint directory; with `resume` an existing checkpoint there is continued.
  std::optional<std::filesystem::path> checkpoint_dir;
  bool resume = false;
  /// Called with each finished Chebyshev vector t~_k (k = 0 ... n_max).
  std::function<void(std::size_t, const Mps&)> on_vector;
  /// Stop after this many vectors (used to emulate interruption).
  std::optional<std::size_t> stop_after;
};

/// Chebyshev recursion keeping only two vectors alive. Throws PreconditionError
/// unless ||psi0|| = 1 to 1e-10.
MomentSequence run_chebyshev(const NormalizedHamiltonian& H, const Mps& psi0, const ChebRunConfig& cfg,
                             const ChebRunHooks& hooks = {});
MomentSequence run_chebyshev(const Mpo& H, const Mps& psi0, const ChebRunConfig& cfg, const ChebRunHooks& hooks = {});

}  // namespace chebgsee
