#include "chebgsee/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "chebgsee/errors.hpp"
#include "chebgsee/lanczos.hpp"

namespace chebgsee {

namespace {

DenseVector seeded_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseVector v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = {g(rng), g(rng)};
  return v.normalized();
}

LanczosOptions options_for(std::size_t dim) {
  // Keep the Krylov basis under ~512 MiB.
  const std::size_t budget = (std::size_t{512} << 20) / (dim * sizeof(Complex));
  LanczosOptions opts;
  opts.krylov_dim = std::clamp<std::size_t>(budget, 20, 100);
  opts.max_restarts = 60;
  opts.tol = 1e-11;
  return opts;
}

}  // namespace

std::size_t dense_limit_from_env(std::size_t fallback) {
  std::size_t limit = fallback;
  if (const char* env = std::getenv("CHEBGSEE_DENSE_LIMIT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ParameterError(std::string("CHEBGSEE_DENSE_LIMIT must be a positive integer, got '") + env + "'");
    }
    limit = static_cast<std::size_t>(v);
  }
  return std::min(limit, kOracleMaxSites);
}

DenseSystem::DenseSystem(const NormalizedHamiltonian& H, std::size_t limit) : scale_(H.scale) {
  build(H.terms, limit);
}

DenseSystem::DenseSystem(const PauliSum& raw, double scale, std::size_t limit) : scale_(scale) {
  if (!(scale > 0.0)) throw ParameterError("DenseSystem: scale must be positive");
  build(raw, limit);
}

void DenseSystem::build(const PauliSum& raw, std::size_t limit) {
  n_ = raw.n_sites();
  if (n_ == 0 || raw.size() == 0) throw ParameterError("DenseSystem: empty Hamiltonian");
  if (n_ > std::min(limit, kOracleMaxSites)) {
    throw CapacityError("DenseSystem: " + std::to_string(n_) + " sites exceeds dense limit " +
                        std::to_string(std::min(limit, kOracleMaxSites)));
  }
  for (const auto& t : raw.terms()) {
    Term term;
    int n_y = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << (n_ - 1 - i);
      switch (t.labels[i]) {
        case 'X':
          term.xmask |= bit;
          break;
        case 'Y':
          term.xmask |= bit;
          term.zmask |= bit;
          ++n_y;
          break;
        case 'Z':
          term.zmask |= bit;
          break;
        default:
          break;
      }
    }
    static const Complex i_pow[4] = {1.0, Complex(0, 1), -1.0, Complex(0, -1)};
    term.coeff = (t.coeff / scale_) * i_pow[n_y % 4];
    terms_.push_back(term);
  }

  if (n_ <= kFullDiagSites) {
    const Matrix m = matrix();
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12) throw NumericalError("DenseSystem: Hamiltonian is not Hermitian (residual " + std::to_string(herm) + ")");
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
      if (es.info() != Eigen::Success) throw NumericalError("DenseSystem: eigendecomposition failed");
      eigenvalues_ = es.eigenvalues();
      eigenvectors_ = es.eigenvectors().cast<Complex>();
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(m);
      if (es.info() != Eigen::Success) throw NumericalError("DenseSystem: eigendecomposition failed");
      eigenvalues_ = es.eigenvalues();
      eigenvectors_ = es.eigenvectors();
    }
    const auto& ev = *eigenvalues_;
    if (ev(0) < -1.0 - 1e-12 || ev(ev.size() - 1) > 1.0 + 1e-12) {
      throw NumericalError("DenseSystem: scaled spectrum leaves [-1, 1]");
    }
  }
}

void DenseSystem::apply(const DenseVector& x, DenseVector& y) const {
  const auto dim = static_cast<std::uint64_t>(this->dim());
  if (static_cast<std::uint64_t>(x.size()) != dim) throw StructuralError("DenseSystem::apply: vector length mismatch");
  y.setZero(x.size());
  for (const auto& t : terms_) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      const Complex v = x(static_cast<Eigen::Index>(b));
      const bool odd = (std::popcount(b & t.zmask) & 1) != 0;
      y(static_cast<Eigen::Index>(b ^ t.xmask)) += odd ? -t.coeff * v : t.coeff * v;
    }
  }
}

DenseVector DenseSystem::apply(const DenseVector& x) const {
  DenseVector y;
  apply(x, y);
  return y;
}

const Eigen::VectorXd& DenseSystem::eigenvalues() const {
  if (!eigenvalues_) throw CapacityError("DenseSystem: full spectrum only kept up to " + std::to_string(kFullDiagSites) + " sites");
  return *eigenvalues_;
}

const Matrix& DenseSystem::eigenvectors() const {
  if (!eigenvectors_) throw CapacityError("DenseSystem: full spectrum only kept up to " + std::to_string(kFullDiagSites) + " sites");
  return *eigenvectors_;
}

Matrix DenseSystem::matrix() const {
  if (n_ > kFullDiagSites + 4) throw CapacityError("DenseSystem::matrix: too many sites for a dense matrix");
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix m(d, d);
  DenseVector e = DenseVector::Zero(d), col;
  for (Eigen::Index j = 0; j < d; ++j) {
    e(j) = 1.0;
    apply(e, col);
    m.col(j) = col;
    e(j) = 0.0;
  }
  return m;
}

GroundState dense_ground(const DenseSystem& sys) {
  GroundState g;
  if (sys.has_full_spectrum()) {
    const auto& ev = sys.eigenvalues();
    g.energy = ev(0);
    g.vector = sys.eigenvectors().col(0);
    g.degeneracy = 0;
    while (g.degeneracy < static_cast<std::size_t>(ev.size()) &&
           ev(static_cast<Eigen::Index>(g.degeneracy)) - ev(0) <= kDegeneracyTol) {
      ++g.degeneracy;
    }
    return g;
  }
  const MatVec mv = [&](const DenseVector& x, DenseVector& y) { sys.apply(x, y); };
  const auto res = lanczos_ground(mv, seeded_vector(sys.dim(), 0x5eed), options_for(sys.dim()));
  if (!res.converged) {
    throw NumericalError("dense_ground: Lanczos did not converge (residual " + std::to_string(res.residual) + ")");
  }
  g.energy = res.value;
  g.vector = res.vector;
  return g;
}

void dense_cheb_vectors(const DenseSystem& sys, const DenseVector& psi, std::size_t n,
                        const std::function<void(std::size_t, const DenseVector&)>& visit) {
  if (static_cast<std::size_t>(psi.size()) != sys.dim()) throw StructuralError("dense_cheb_vectors: length mismatch");
  DenseVector prev = psi;
  visit(0, prev);
  if (n == 0) return;
  DenseVector cur = sys.apply(prev);
  visit(1, cur);
  DenseVector next;
  for (std::size_t k = 2; k <= n; ++k) {
    sys.apply(cur, next);
    next = 2.0 * next - prev;
    visit(k, next);
    prev.swap(cur);
    cur.swap(next);
  }
}

std::vector<double> dense_cheb_moments(const DenseSystem& sys, const DenseVector& psi, std::size_t d) {
  std::vector<double> mu(d + 1);
  dense_cheb_vectors(sys, psi, d, [&](std::size_t k, const DenseVector& t) { mu[k] = psi.dot(t).real(); });
  return mu;
}

std::vector<double> moment_error_profile(std::span<const double> exact, std::span<const double> approx) {
  if (exact.size() != approx.size()) {
    throw ParameterError("moment_error_profile: lengths differ (" + std::to_string(exact.size()) + " vs " +
                         std::to_string(approx.size()) + ")");
  }
  std::vector<double> out(exact.size());
  for (std::size_t k = 0; k < exact.size(); ++k) out[k] = std::abs(exact[k] - approx[k]);
  return out;
}

std::vector<double> moment_error_profile(std::span<const double> exact, const MomentSequence& approx) {
  return moment_error_profile(exact, std::span<const double>(approx.moments));
}

double overlap_chi(const DenseVector& psi, const DenseSystem& sys) {
  if (static_cast<std::size_t>(psi.size()) != sys.dim()) throw StructuralError("overlap_chi: length mismatch");
  if (sys.has_full_spectrum()) {
    const auto g = dense_ground(sys);
    const auto& vecs = sys.eigenvectors();
    double w = 0.0;
    for (std::size_t i = 0; i < g.degeneracy; ++i) w += std::norm(vecs.col(static_cast<Eigen::Index>(i)).dot(psi));
    return std::sqrt(w);
  }
  // Started from psi, the ground Ritz vector converges to the normalized
  // projection of psi onto the ground eigenspace, degenerate or not.
  const double lambda0 = dense_ground(sys).energy;
  const MatVec mv = [&](const DenseVector& x, DenseVector& y) { sys.apply(x, y); };
  const DenseVector start = psi.normalized() + 1e-9 * seeded_vector(sys.dim(), 0xc41);
  const auto res = lanczos_ground(mv, start, options_for(sys.dim()));
  if (!res.converged || std::abs(res.value - lambda0) > 1e-8) {
    throw NumericalError("overlap_chi: ground eigenspace not resolved from the given state");
  }
  return std::abs(res.vector.dot(psi));
}

double overlap_chi(const Mps& psi, const DenseSystem& sys) {
  return overlap_chi(to_dense(psi, sys.n_sites()), sys);
}

}  // namespace chebgsee
