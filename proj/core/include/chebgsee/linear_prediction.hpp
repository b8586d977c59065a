#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "chebgsee/chebyshev.hpp"

namespace chebgsee {

/// Autoregressive model mu_n = -sum_{j=1}^{n_fit} a_j mu_{n-j}.
struct LpModel {
  std::vector<double> ar_coeffs;  // a_1 ... a_{n_fit}
  std::size_t n_fit = 0;
  std::size_t window_start = 0;  // first fitted target index
  std::size_t window_end = 0;    // last fitted target index (inclusive)
  double ridge = 0.0;            // relative to the trace of the normal matrix
  bool stabilized = false;
  double residual_rms = 0.0;
  std::size_t reflected_roots = 0;
};

inline constexpr double kDefaultLpRidge = 1e-10;

/// Least-squares fit over the last `window` targets of `moments` (window = 0
/// means n_fit). Needs moments.size() >= 2 n_fit + 1 and window + n_fit <= size.
/// ridge = 0 on a rank-deficient system throws NumericalError.
LpModel fit_lp(std::span<const double> moments, std::size_t n_fit, double ridge = kDefaultLpRidge,
               std::size_t window = 0);
LpModel fit_lp(const MomentSequence& seq, std::size_t n_fit, double ridge = kDefaultLpRidge, std::size_t window = 0);

/// Roots of z^n + a_1 z^{n-1} + ... + a_n.
std::vector<std::complex<double>> companion_roots(const LpModel& model);

/// Reflects roots with |z| > 1 to z / |z|^2 and rebuilds the coefficients.
/// A model with no root outside the unit circle comes back unchanged.
LpModel stabilize(const LpModel& model);

/// Runs the recursion from the end of `moments` up to index d_target.
std::vector<double> extrapolate(std::span<const double> moments, const LpModel& model, std::size_t d_target);

/// Extends the computed prefix to index d_target and records split_index.
/// Throws ParameterError unless d_target >= seq.computed().
MomentSequence extrapolate(const MomentSequence& seq, const LpModel& model, std::size_t d_target);

}  // namespace chebgsee
