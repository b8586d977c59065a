#include "chebgsee/gsee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

void check_chi(double chi) {
  if (!(chi > 0.0 && chi <= 1.0)) throw ParameterError("gsee: chi must lie in (0, 1]");
}

double eta_for(const GseeOptions& opts, double chi) {
  const double eta = opts.eta.value_or(default_eta(chi));
  if (!(eta > 0.0 && eta < 0.5)) throw ParameterError("gsee: eta must lie in (0, 1/2)");
  return eta;
}

}  // namespace

double cumulative_at(std::span<const double> moments, std::span<const double> coeffs) {
  if (coeffs.empty()) return 0.0;
  if (coeffs.size() > moments.size()) {
    throw ParameterError("cumulative: filter degree " + std::to_string(coeffs.size() - 1) +
                         " exceeds available moment degree " + std::to_string(moments.size() - 1));
  }
  double c = 0.5 * coeffs[0] * moments[0];
  for (std::size_t k = 1; k < coeffs.size(); ++k) c += coeffs[k] * moments[k];
  return c;
}

std::vector<std::pair<double, double>> cumulative(std::span<const double> moments, const std::vector<ChebCoeffs>& family) {
  std::vector<std::pair<double, double>> out;
  out.reserve(family.size());
  for (const auto& p : family) out.emplace_back(p.meta.c, cumulative_at(moments, p.coeffs));
  return out;
}

GseeResult estimate_energy(std::span<const double> moments, double chi, double delta, std::size_t d,
                           const GseeOptions& opts) {
  check_chi(chi);
  const double eta = eta_for(opts, chi);
  if (d + 1 > moments.size()) {
    throw ParameterError("estimate_energy: degree " + std::to_string(d) + " needs " + std::to_string(d + 1) +
                         " moments, have " + std::to_string(moments.size()));
  }
  const auto grid = scan_grid(delta);
  const double kappa = erfc_kappa(delta, eta);

  if (opts.log) {
    const auto probe = shifted_sign_cheb(0.0, delta, eta, d);
    opts.log->append({"gsee", 0, "filter_max_error", probe.meta.max_error, ""});
    if (!probe.meta.warning.empty()) opts.log->warn("gsee", 0, "filter_quality", probe.meta.max_error, probe.meta.warning);
  }

  GseeResult r;
  r.chi = chi;
  r.delta = delta;
  r.eta = eta;
  r.degree = d;
  r.scale_back = opts.scale_back;
  r.threshold = 0.5 * chi * chi;
  r.c_trace.reserve(grid.size());

  FilterBuilder builder(d);
  std::vector<double> coeffs;
  bool below = false, above = false;
  double best = std::numeric_limits<double>::infinity();
  for (const double x : grid) {
    builder.build(x, kappa, coeffs);
    const double c = cumulative_at(moments, coeffs);
    r.c_trace.emplace_back(x, c);
    (c < r.threshold ? below : above) = true;
    const double gap = std::abs(c - r.threshold);
    if (gap < best) {
      best = gap;
      r.c_star = x;
    }
  }
  if (!(below && above)) {
    throw NumericalError(std::string("estimate_energy: ground state outside scanned window (every C(x) is ") +
                         (above ? "above" : "below") + " the threshold " + std::to_string(r.threshold) + ")");
  }
  r.lo = r.c_star - 0.5 * delta;
  r.hi = r.c_star + 0.5 * delta;
  r.iterations = 1;
  return r;
}

GseeResult estimate_energy(const MomentSequence& seq, double chi, double delta, std::size_t d, const GseeOptions& opts) {
  return estimate_energy(std::span<const double>(seq.moments), chi, delta, d, opts);
}

std::size_t binary_search_iterations(double eps) {
  if (!(eps > 0.0)) throw ParameterError("binary_search: eps must be positive");
  std::size_t it = 0;
  for (double w = 2.0; w > 2.0 * eps; w *= 2.0 / 3.0) ++it;
  return it;
}

GseeResult binary_search_energy(const MomentProvider& provider, double chi, double eps, const GseeOptions& opts) {
  check_chi(chi);
  if (!(eps > 0.0)) throw ParameterError("binary_search: eps must be positive");
  const double eta = eta_for(opts, chi);
  GseeResult r;
  r.chi = chi;
  r.eta = eta;
  r.scale_back = opts.scale_back;
  r.threshold = 0.5 * chi * chi;

  double l = -1.0, h = 1.0;
  while (h - l > 2.0 * eps) {
    const double c = 0.5 * (l + h);
    const double delta = (h - l) / 3.0;
    const std::size_t d = std::max<std::size_t>(filter_degree(delta, eta), 2);
    const auto moments = provider(d);
    const auto p = shifted_sign_cheb(c, delta, eta, d, QualityCheck::Skip);
    const double value = cumulative_at(moments, p.coeffs);
    r.c_trace.emplace_back(c, value);
    if (opts.log) opts.log->append({"gsee", r.iterations, "bisect_C", value, "c=" + std::to_string(c)});
    // Above threshold rules out "every eigenvalue >= c + delta/2".
    if (value > r.threshold) {
      h = c + 0.5 * delta;
    } else {
      l = c - 0.5 * delta;
    }
    r.degree = d;
    ++r.iterations;
  }
  r.lo = l;
  r.hi = h;
  r.delta = h - l;
  r.c_star = 0.5 * (l + h);
  return r;
}

}  // namespace chebgsee
