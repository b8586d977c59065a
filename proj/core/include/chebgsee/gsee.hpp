#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "chebgsee/chebyshev.hpp"
#include "chebgsee/diagnostics.hpp"
#include "chebgsee/filter.hpp"

namespace chebgsee {

/// Energy interval in normalized units. Raw energies are value * scale_back.
struct GseeResult {
  double lo = 0.0;
  double hi = 0.0;
  double c_star = 0.0;
  std::vector<std::pair<double, double>> c_trace;  // (x, C(x))
  double chi = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  std::size_t degree = 0;
  double scale_back = 1.0;
  double threshold = 0.0;  // chi^2 / 2
  std::size_t iterations = 0;

  double midpoint() const noexcept { return 0.5 * (lo + hi); }
};

/// Default filter precision for a given overlap.
inline double default_eta(double chi) { return chi * chi / 8.0; }

/// C(x) = a_0 mu_0 / 2 + sum_k a_k mu_k, in fixed summation order.
double cumulative_at(std::span<const double> moments, std::span<const double> coeffs);

/// C(x) for every family member. Throws ParameterError when a member needs
/// more moments than given.
std::vector<std::pair<double, double>> cumulative(std::span<const double> moments, const std::vector<ChebCoeffs>& family);

struct GseeOptions {
  std::optional<double> eta;  // default chi^2 / 8
  double scale_back = 1.0;
  DiagnosticsLog* log = nullptr;
};

/// Scan of x over {-1 + delta, ..., 1 - delta}; picks the x with C(x) closest to
/// chi^2 / 2 and returns [x - delta/2, x + delta/2]. Throws NumericalError if
/// every C(x) lies on one side of the threshold.
GseeResult estimate_energy(std::span<const double> moments, double chi, double delta, std::size_t d,
                           const GseeOptions& opts = {});
GseeResult estimate_energy(const MomentSequence& seq, double chi, double delta, std::size_t d,
                           const GseeOptions& opts = {});

/// Returns moments mu_0 ... mu_d (at least) for the requested degree d.
using MomentProvider = std::function<std::vector<double>(std::size_t d)>;

/// Interval shrinking from [-1, 1]: each test uses c = (l + r) / 2, delta = (r - l) / 3
/// and keeps the side consistent with C(c) against chi^2 / 2, until r - l <= 2 eps.
GseeResult binary_search_energy(const MomentProvider& provider, double chi, double eps, const GseeOptions& opts = {});

/// Exact iteration count of binary_search_energy for a given eps.
std::size_t binary_search_iterations(double eps);

}  // namespace chebgsee
