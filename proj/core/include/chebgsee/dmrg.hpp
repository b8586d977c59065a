#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "chebgsee/hamiltonians.hpp"
#include "chebgsee/mps.hpp"

namespace chebgsee {

struct DmrgConfig {
  std::size_t chi_init = 2;
  std::size_t sweeps = 10;
  double conv_tol = 1e-10;  // energy change per sweep
  std::size_t local_eig_iters = 40;
  double svd_tol = 1e-14;
};

struct DmrgResult {
  Mps state;                          // normalized, canonical at site 0
  double energy = 0.0;                // <psi|H|psi>, normalized units
  std::vector<double> sweep_energies; // after each full sweep
  bool converged = false;
  std::size_t sweeps_run = 0;
};

/// Field-aligned product state: per site |0> or |1>, whichever lowers the
/// single-site Z terms (|0> when there are none).
Mps field_aligned_state(const NormalizedHamiltonian& H);

/// Two-site DMRG starting from field_aligned_state(H), bonds capped at chi_init.
/// Not converging within cfg.sweeps is reported through `converged`.
DmrgResult dmrg_ground(const NormalizedHamiltonian& H, const DmrgConfig& cfg = {});

/// Loads an MPS container and normalizes it; throws FormatError on bad input.
Mps load_guiding_state(const std::filesystem::path& path);

}  // namespace chebgsee
