#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace chebgsee {

/// y = A x for a Hermitian A.
using MatVec = std::function<void(const Eigen::VectorXcd& x, Eigen::VectorXcd& y)>;

struct LanczosOptions {
  std::size_t krylov_dim = 80;  // basis size per restart
  std::size_t max_restarts = 20;
  double tol = 1e-12;  // residual norm ||A y - theta y||
};

struct LanczosResult {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;
  std::size_t matvecs = 0;
  bool converged = false;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization,
/// restarting from the current Ritz vector.
LanczosResult lanczos_ground(const MatVec& apply, Eigen::VectorXcd start, const LanczosOptions& opts = {});

struct RitzPair {
  double value = 0.0;
  /// |<ritz vector | start>|^2 / ||start||^2.
  double weight = 0.0;
  double residual = 0.0;
};

/// Ritz values of the Krylov space grown from `start`, with the weight of
/// `start` on each. Stops early when the space becomes invariant.
std::vector<RitzPair> krylov_spectrum(const MatVec& apply, const Eigen::VectorXcd& start, std::size_t krylov_dim);

}  // namespace chebgsee
