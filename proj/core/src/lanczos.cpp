#include "chebgsee/lanczos.hpp"

#include <cmath>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

struct Krylov {
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis j and j + 1
  double last_beta = 0.0;    // norm of the residual after the final vector
  std::size_t matvecs = 0;
};

// Grows an orthonormal Krylov basis with two passes of Gram-Schmidt per step.
Krylov build_krylov(const MatVec& apply, const Eigen::VectorXcd& start, std::size_t dim) {
  Krylov k;
  const double n0 = start.norm();
  if (!(n0 > 0.0) || !std::isfinite(n0)) throw NumericalError("lanczos: start vector must be nonzero and finite");
  k.basis.push_back(start / n0);
  Eigen::VectorXcd w(start.size());
  const double tiny = 1e-13;
  for (std::size_t j = 0; j < dim; ++j) {
    apply(k.basis[j], w);
    ++k.matvecs;
    const double a = k.basis[j].dot(w).real();
    k.alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : k.basis) w -= q * q.dot(w);
    const double b = w.norm();
    k.last_beta = b;
    if (j + 1 == dim || b < tiny * std::max(1.0, std::abs(a))) break;
    k.beta.push_back(b);
    k.basis.push_back(w / b);
  }
  return k;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiagonal_eigen(const Krylov& k) {
  const auto m = static_cast<Eigen::Index>(k.alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t(i, i) = k.alpha[static_cast<std::size_t>(i)];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = k.beta[static_cast<std::size_t>(i)];
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t);
}

}  // namespace

LanczosResult lanczos_ground(const MatVec& apply, Eigen::VectorXcd start, const LanczosOptions& opts) {
  if (opts.krylov_dim < 1) throw ParameterError("lanczos: krylov_dim must be positive");
  LanczosResult res;
  const auto dim = static_cast<std::size_t>(start.size());
  for (std::size_t restart = 0; restart <= opts.max_restarts; ++restart) {
    const auto k = build_krylov(apply, start, std::min(opts.krylov_dim, dim));
    res.matvecs += k.matvecs;
    const auto es = tridiagonal_eigen(k);
    const Eigen::VectorXd s = es.eigenvectors().col(0);
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(start.size());
    for (std::size_t i = 0; i < k.basis.size(); ++i) y += s(static_cast<Eigen::Index>(i)) * k.basis[i];
    y.normalize();
    res.value = es.eigenvalues()(0);
    res.residual = std::abs(k.last_beta * s(s.size() - 1));
    res.vector = y;
    const bool invariant = k.alpha.size() < std::min(opts.krylov_dim, dim);
    if (res.residual <= opts.tol || invariant) {
      // Confirm with an explicit residual; the recurrence estimate can be optimistic.
      Eigen::VectorXcd hy(y.size());
      apply(y, hy);
      ++res.matvecs;
      res.residual = (hy - res.value * y).norm();
      if (res.residual <= std::max(opts.tol, 1e-13) * 10 || invariant) {
        res.converged = res.residual <= std::max(opts.tol, 1e-13) * 10;
        return res;
      }
    }
    start = y;
  }
  return res;
}

std::vector<RitzPair> krylov_spectrum(const MatVec& apply, const Eigen::VectorXcd& start, std::size_t krylov_dim) {
  const auto k = build_krylov(apply, start, std::min<std::size_t>(krylov_dim, static_cast<std::size_t>(start.size())));
  const auto es = tridiagonal_eigen(k);
  std::vector<RitzPair> out;
  const auto m = es.eigenvalues().size();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s0 = es.eigenvectors()(0, i);
    const double sm = es.eigenvectors()(m - 1, i);
    out.push_back({es.eigenvalues()(i), s0 * s0, std::abs(k.last_beta * sm)});
  }
  return out;
}

}  // namespace chebgsee
