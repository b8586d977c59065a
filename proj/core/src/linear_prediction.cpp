#include "chebgsee/linear_prediction.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

constexpr double kReflectAbove = 1.0 + 1e-10;

// Swaps root r of c (c_0 z^n + c_1 z^{n-1} + ...) for r_new. Dividing from the
// constant term is the stable direction for |r| > 1. Expanding the whole polynomial
// from its roots is not an option at n ~ 200: binomial-sized coefficients cancel and
// the rebuilt recursion diverges.
void replace_root(std::vector<std::complex<double>>& c, std::complex<double> r, std::complex<double> r_new) {
  const std::size_t n = c.size() - 1;
  std::vector<std::complex<double>> q(n);
  q[n - 1] = -c[n] / r;
  for (std::size_t k = n - 1; k > 0; --k) q[k - 1] = (q[k] - c[k]) / r;
  c[0] = q[0];
  for (std::size_t k = 1; k < n; ++k) c[k] = q[k] - r_new * q[k - 1];
  c[n] = -r_new * q[n - 1];
}

}  // namespace

LpModel fit_lp(std::span<const double> moments, std::size_t n_fit, double ridge, std::size_t window) {
  if (n_fit == 0) throw ParameterError("fit_lp: n_fit must be positive");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ParameterError("fit_lp: ridge must be finite and non-negative");
  if (window == 0) window = n_fit;
  const std::size_t size = moments.size();
  if (size < 2 * n_fit + 1) {
    throw ParameterError("fit_lp: need at least " + std::to_string(2 * n_fit + 1) + " moments for n_fit = " +
                         std::to_string(n_fit) + ", have " + std::to_string(size));
  }
  if (window + n_fit > size) {
    throw ParameterError("fit_lp: window of " + std::to_string(window) + " targets does not fit in " +
                         std::to_string(size) + " moments");
  }

  const auto rows = static_cast<Eigen::Index>(window);
  const auto cols = static_cast<Eigen::Index>(n_fit);
  const std::size_t first = size - window;
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t n = first + static_cast<std::size_t>(r);
    b(r) = -moments[n];
    for (Eigen::Index j = 0; j < cols; ++j) A(r, j) = moments[n - 1 - static_cast<std::size_t>(j)];
  }

  Eigen::VectorXd a;
  if (ridge == 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double tol = s(0) * static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
    if (rows < cols || s(0) == 0.0 || s(cols - 1) <= tol) {
      throw NumericalError("fit_lp: normal equations are rank deficient; use ridge > 0");
    }
    a = svd.solve(b);
  } else {
    // Tikhonov term as extra rows: [A; sqrt(lambda) I] a = [b; 0].
    const double lambda = ridge * A.squaredNorm();
    Eigen::MatrixXd Aug(rows + cols, cols);
    Aug << A, std::sqrt(lambda) * Eigen::MatrixXd::Identity(cols, cols);
    Eigen::VectorXd bug(rows + cols);
    bug << b, Eigen::VectorXd::Zero(cols);
    a = Aug.colPivHouseholderQr().solve(bug);
  }
  if (!a.allFinite()) throw NumericalError("fit_lp: solution is not finite");

  LpModel m;
  m.ar_coeffs.assign(a.data(), a.data() + a.size());
  m.n_fit = n_fit;
  m.window_start = first;
  m.window_end = size - 1;
  m.ridge = ridge;
  m.residual_rms = (A * a - b).norm() / std::sqrt(static_cast<double>(rows));
  return m;
}

LpModel fit_lp(const MomentSequence& seq, std::size_t n_fit, double ridge, std::size_t window) {
  return fit_lp(std::span<const double>(seq.moments.data(), seq.computed()), n_fit, ridge, window);
}

std::vector<std::complex<double>> companion_roots(const LpModel& model) {
  const auto n = static_cast<Eigen::Index>(model.ar_coeffs.size());
  if (n == 0) return {};
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) C(0, j) = -model.ar_coeffs[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  if (es.info() != Eigen::Success) throw NumericalError("companion_roots: eigenvalue solver failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

LpModel stabilize(const LpModel& model) {
  LpModel out = model;
  out.stabilized = true;
  const auto roots = companion_roots(model);
  std::vector<std::complex<double>> c{1.0};
  c.insert(c.end(), model.ar_coeffs.begin(), model.ar_coeffs.end());
  std::size_t moved = 0;
  for (const auto& z : roots) {
    const double r = std::abs(z);
    if (r > kReflectAbove) {
      replace_root(c, z, z / (r * r));
      ++moved;
    }
  }
  if (moved > 0) {
    for (std::size_t j = 0; j < out.ar_coeffs.size(); ++j) out.ar_coeffs[j] = (c[j + 1] / c[0]).real();
    out.reflected_roots = model.reflected_roots + moved;
  }
  return out;
}

std::vector<double> extrapolate(std::span<const double> moments, const LpModel& model, std::size_t d_target) {
  const std::size_t p = model.ar_coeffs.size();
  if (moments.size() < p) throw ParameterError("extrapolate: fewer moments than model order");
  if (d_target < moments.size()) {
    throw ParameterError("extrapolate: target degree " + std::to_string(d_target) +
                         " must exceed the last available index " + std::to_string(moments.size() - 1));
  }
  std::vector<double> out(moments.begin(), moments.end());
  out.reserve(d_target + 1);
  for (std::size_t n = moments.size(); n <= d_target; ++n) {
    double v = 0.0;
    for (std::size_t j = 0; j < p; ++j) v -= model.ar_coeffs[j] * out[n - 1 - j];
    out.push_back(v);
  }
  return out;
}

MomentSequence extrapolate(const MomentSequence& seq, const LpModel& model, std::size_t d_target) {
  const std::size_t computed = seq.computed();
  MomentSequence out = seq;
  out.moments = extrapolate(std::span<const double>(seq.moments.data(), computed), model, d_target);
  out.split_index = computed;
  return out;
}

}  // namespace chebgsee
