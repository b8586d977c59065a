#include "chebgsee/filter.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <fftw3.h>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

// FFTW planning is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_filter_args(double c, double delta, double eta, std::size_t d) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("filter: delta must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 0.5)) throw ParameterError("filter: eta must lie in (0, 1/2)");
  if (d < 2) throw ParameterError("filter: degree must be at least 2");
  if (!(c - delta / 2 > -1.0 && c + delta / 2 < 1.0)) {
    throw ParameterError("filter: gap [c - delta/2, c + delta/2] must lie inside (-1, 1)");
  }
}

void grade(ChebCoeffs& p) {
  p.meta.max_error = step_error(p);
  if (p.meta.max_error > 2 * p.meta.eta) {
    p.meta.warning = "degree " + std::to_string(p.meta.degree) + " too small: max error " +
                     std::to_string(p.meta.max_error) + " exceeds 2*eta outside the gap";
  }
}

}  // namespace

double erfc_kappa(double delta, double eta) {
  if (!(delta > 0.0)) throw ParameterError("erfc_kappa: delta must be positive");
  if (!(eta > 0.0 && eta < 0.5)) throw ParameterError("erfc_kappa: eta must lie in (0, 1/2)");
  return (2.0 / delta) * boost::math::erfc_inv(2.0 * eta);
}

std::size_t filter_degree(double delta, double eta) {
  const double kappa = erfc_kappa(delta, eta);
  return static_cast<std::size_t>(std::ceil(2.0 * kappa * std::sqrt(std::log(10.0 / eta)))) + 1;
}

FilterBuilder::FilterBuilder(std::size_t d) : n_(d + 1) {
  if (d < 2) throw ParameterError("FilterBuilder: degree must be at least 2");
  in_ = fftw_alloc_real(n_);
  out_ = fftw_alloc_real(n_);
  {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_r2r_1d(static_cast<int>(n_), in_, out_, FFTW_REDFT10, FFTW_ESTIMATE);
  }
  nodes_.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    nodes_[j] = std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_));
  }
}

FilterBuilder::~FilterBuilder() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
  fftw_free(in_);
  fftw_free(out_);
}

void FilterBuilder::build(double c, double kappa, std::vector<double>& out) {
  for (std::size_t j = 0; j < n_; ++j) in_[j] = 0.5 * std::erfc(kappa * (nodes_[j] - c));
  // REDFT10: Y_k = 2 sum_j y_j cos(pi k (j + 1/2) / N), so a_k = Y_k / N.
  fftw_execute(static_cast<fftw_plan>(plan_));
  out.resize(n_);
  const double inv = 1.0 / static_cast<double>(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = out_[k] * inv;
}

ChebCoeffs shifted_sign_cheb(double c, double delta, double eta, std::size_t d, QualityCheck check) {
  check_filter_args(c, delta, eta, d);
  ChebCoeffs p;
  p.meta = FilterMeta{c, delta, eta, d, erfc_kappa(delta, eta), -1.0, {}};
  FilterBuilder builder(d);
  builder.build(c, p.meta.kappa, p.coeffs);
  if (check == QualityCheck::Grid) grade(p);
  return p;
}

double eval_cheb(std::span<const double> a, double x) {
  if (!(std::abs(x) <= 1.0)) throw DomainError("eval_cheb: |x| must not exceed 1");
  if (a.empty()) return 0.0;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = a.size() - 1; k >= 1; --k) {
    const double b0 = a[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return 0.5 * a[0] + x * b1 - b2;
}

double eval_cheb(const ChebCoeffs& p, double x) { return eval_cheb(std::span<const double>(p.coeffs), x); }

double step_error(const ChebCoeffs& p, std::size_t points) {
  const double lo = p.meta.c - p.meta.delta / 2;
  const double hi = p.meta.c + p.meta.delta / 2;
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    if (x > lo && x < hi) continue;
    const double target = x <= lo ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(eval_cheb(p, x) - target));
  }
  return worst;
}

std::vector<double> scan_grid(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("scan_grid: delta must lie in (0, 1)");
  const auto count = static_cast<std::size_t>(std::floor((2.0 - 2.0 * delta) / delta + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = -1.0 + delta * static_cast<double>(i + 1);
  return grid;
}

std::vector<ChebCoeffs> cheb_family(double delta, double eta, std::size_t d, std::span<const double> grid) {
  for (double c : grid) check_filter_args(c, delta, eta, d);
  std::vector<ChebCoeffs> family;
  if (grid.empty()) return family;
  family.reserve(grid.size());
  FilterBuilder builder(d);
  const double kappa = erfc_kappa(delta, eta);
  for (double c : grid) {
    ChebCoeffs p;
    p.meta = FilterMeta{c, delta, eta, d, kappa, -1.0, {}};
    builder.build(c, kappa, p.coeffs);
    family.push_back(std::move(p));
  }
  const auto probe = std::min_element(family.begin(), family.end(), [](const ChebCoeffs& a, const ChebCoeffs& b) {
    return std::abs(a.meta.c) < std::abs(b.meta.c);
  });
  grade(*probe);
  for (auto& p : family) {
    p.meta.max_error = probe->meta.max_error;
    p.meta.warning = probe->meta.warning;
  }
  return family;
}

}  // namespace chebgsee
