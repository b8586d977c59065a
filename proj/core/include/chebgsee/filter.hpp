#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chebgsee {

struct FilterMeta {
  double c = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  std::size_t degree = 0;
  double kappa = 0.0;
  /// Largest |P(x) - step(x)| outside the gap on the check grid; negative if not checked.
  double max_error = -1.0;
  /// Set when the degree is too small to reach 2 * eta outside the gap.
  std::string warning;
};

/// Chebyshev series P(x) = a_0 / 2 + sum_{k>=1} a_k T_k(x).
struct ChebCoeffs {
  std::vector<double> coeffs;
  FilterMeta meta;

  std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

enum class QualityCheck { Grid, Skip };

/// Sharpness of the erfc step: (2 / delta) * erfc^{-1}(2 eta).
double erfc_kappa(double delta, double eta);

/// Degree at which the erfc coefficients have decayed below eta / 10.
std::size_t filter_degree(double delta, double eta);

/// Interpolant of f(x) = erfc(kappa (x - c)) / 2 at d + 1 Chebyshev-Gauss nodes.
/// Requires c - delta/2 > -1, c + delta/2 < 1, 0 < eta < 1/2, d >= 2.
ChebCoeffs shifted_sign_cheb(double c, double delta, double eta, std::size_t d,
                             QualityCheck check = QualityCheck::Grid);

/// Clenshaw evaluation; throws DomainError for |x| > 1.
double eval_cheb(std::span<const double> coeffs, double x);
double eval_cheb(const ChebCoeffs& p, double x);

/// Max |P(x) - step_c(x)| over `points` equispaced samples of [-1, 1] outside the gap.
double step_error(const ChebCoeffs& p, std::size_t points = 10000);

/// Scan grid {-1 + delta, -1 + 2 delta, ..., 1 - delta}.
std::vector<double> scan_grid(double delta);

/// One filter per grid point with shared (delta, eta, d). Quality is grid-checked
/// once on the member closest to zero and copied into every meta.
std::vector<ChebCoeffs> cheb_family(double delta, double eta, std::size_t d, std::span<const double> grid);

/// Reusable coefficient generator for a fixed degree; holds an FFTW plan.
/// Not safe to share between threads.
class FilterBuilder {
 public:
  explicit FilterBuilder(std::size_t d);
  ~FilterBuilder();
  FilterBuilder(const FilterBuilder&) = delete;
  FilterBuilder& operator=(const FilterBuilder&) = delete;

  /// Writes d + 1 coefficients into `out` (resized).
  void build(double c, double kappa, std::vector<double>& out);
  std::size_t degree() const noexcept { return n_ - 1; }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  double* out_ = nullptr;
  void* plan_ = nullptr;
  std::vector<double> nodes_;
};

}  // namespace chebgsee
