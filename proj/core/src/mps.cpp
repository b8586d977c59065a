#include "chebgsee/mps.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

std::size_t left_dim(const SiteTensor& t) { return static_cast<std::size_t>(t[0].rows()); }
std::size_t right_dim(const SiteTensor& t) { return static_cast<std::size_t>(t[0].cols()); }

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw StructuralError(std::string(op) + ": site count mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  }
}

// Rows ordered (s, left): row s * Dl + a.
Matrix stack_left(const SiteTensor& t) {
  const auto dl = t[0].rows();
  Matrix m(2 * dl, t[0].cols());
  m.topRows(dl) = t[0];
  m.bottomRows(dl) = t[1];
  return m;
}

SiteTensor unstack_left(const Matrix& m) {
  const auto dl = m.rows() / 2;
  return {m.topRows(dl), m.bottomRows(dl)};
}

// Columns ordered (s, right): column s * Dr + b.
Matrix stack_right(const SiteTensor& t) {
  const auto dr = t[0].cols();
  Matrix m(t[0].rows(), 2 * dr);
  m.leftCols(dr) = t[0];
  m.rightCols(dr) = t[1];
  return m;
}

SiteTensor unstack_right(const Matrix& m) {
  const auto dr = m.cols() / 2;
  return {m.leftCols(dr), m.rightCols(dr)};
}

struct ThinQr {
  Matrix q;
  Matrix r;
};

ThinQr thin_qr(const Matrix& m) {
  const auto k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

double frobenius(const SiteTensor& t) { return std::sqrt(t[0].squaredNorm() + t[1].squaredNorm()); }

// Sweeps the orthogonality center of `sites` to `center`, returning the norm
// of the center tensor (which is left unnormalized).
void move_center(std::vector<SiteTensor>& sites, std::size_t center) {
  for (std::size_t i = 0; i < center; ++i) {
    auto [q, r] = thin_qr(stack_left(sites[i]));
    sites[i] = unstack_left(q);
    for (auto& m : sites[i + 1]) m = r * m;
  }
  for (std::size_t i = sites.size() - 1; i > center; --i) {
    // M = L Q  <=>  M^dag = Q^dag L^dag
    auto [q, r] = thin_qr(stack_right(sites[i]).adjoint());
    sites[i] = unstack_right(q.adjoint());
    const Matrix l = r.adjoint();
    for (auto& m : sites[i - 1]) m = m * l;
  }
}

std::size_t exact_bond_cap(std::size_t bond, std::size_t n, std::size_t i) {
  const std::size_t depth = std::min(i, n - i);
  if (depth >= 63) return bond;
  return std::min<std::size_t>(bond, std::size_t{1} << depth);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mps

Mps::Mps(std::vector<SiteTensor> sites, double log_norm, std::optional<std::size_t> ortho_center)
    : sites_(std::move(sites)), log_norm_(log_norm), center_(ortho_center) {
  if (sites_.empty()) throw StructuralError("Mps: at least one site is required");
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const auto& t = sites_[i];
    if (t[0].rows() != t[1].rows() || t[0].cols() != t[1].cols()) {
      throw StructuralError("Mps: site " + std::to_string(i) + " has inconsistent physical slices");
    }
    if (i + 1 < sites_.size() && right_dim(t) != left_dim(sites_[i + 1])) {
      throw StructuralError("Mps: bond mismatch between sites " + std::to_string(i) + " and " +
                            std::to_string(i + 1));
    }
  }
  if (left_dim(sites_.front()) != 1 || right_dim(sites_.back()) != 1) {
    throw StructuralError("Mps: boundary bonds must have dimension 1");
  }
  if (center_ && *center_ >= sites_.size()) throw StructuralError("Mps: ortho center out of range");
  if (!std::isfinite(log_norm_)) throw StructuralError("Mps: log_norm must be finite");
}

Mps Mps::product_state(std::span<const std::array<Complex, 2>> local_states) {
  std::vector<SiteTensor> sites;
  sites.reserve(local_states.size());
  for (const auto& amp : local_states) {
    SiteTensor t{Matrix::Constant(1, 1, amp[0]), Matrix::Constant(1, 1, amp[1])};
    sites.push_back(std::move(t));
  }
  return Mps(std::move(sites));
}

Mps Mps::basis_state(std::span<const int> bits) {
  std::vector<std::array<Complex, 2>> local;
  local.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw ParameterError("basis_state: bits must be 0 or 1");
    local.push_back(b == 0 ? std::array<Complex, 2>{1.0, 0.0} : std::array<Complex, 2>{0.0, 1.0});
  }
  return product_state(local);
}

Mps Mps::random(std::size_t n_sites, std::size_t bond_dim, std::uint64_t seed) {
  if (n_sites == 0) throw ParameterError("Mps::random: n_sites must be positive");
  if (bond_dim == 0) throw ParameterError("Mps::random: bond_dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SiteTensor> sites(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const auto dl = static_cast<Eigen::Index>(exact_bond_cap(bond_dim, n_sites, i));
    const auto dr = static_cast<Eigen::Index>(exact_bond_cap(bond_dim, n_sites, i + 1));
    for (auto& m : sites[i]) {
      m.resize(dl, dr);
      for (Eigen::Index c = 0; c < dr; ++c)
        for (Eigen::Index r = 0; r < dl; ++r) m(r, c) = Complex(gauss(rng), gauss(rng));
    }
  }
  auto canon = canonicalize(Mps(std::move(sites)), 0);
  return Mps(std::vector<SiteTensor>(canon.sites().begin(), canon.sites().end()), 0.0, 0);
}

std::vector<std::size_t> Mps::bond_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(sites_.size() + 1);
  for (const auto& t : sites_) dims.push_back(left_dim(t));
  if (!sites_.empty()) dims.push_back(right_dim(sites_.back()));
  return dims;
}

std::size_t Mps::max_bond() const {
  const auto dims = bond_dims();
  return dims.empty() ? 0 : *std::max_element(dims.begin(), dims.end());
}

// ---------------------------------------------------------------------------
// Mpo

Mpo::Mpo(std::vector<OpTensor> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw StructuralError("Mpo: at least one site is required");
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const auto& t = sites_[i];
    for (const auto& m : t) {
      if (m.rows() != t[0].rows() || m.cols() != t[0].cols()) {
        throw StructuralError("Mpo: site " + std::to_string(i) + " has inconsistent slices");
      }
    }
    if (i + 1 < sites_.size() && t[0].cols() != sites_[i + 1][0].rows()) {
      throw StructuralError("Mpo: bond mismatch between sites " + std::to_string(i) + " and " +
                            std::to_string(i + 1));
    }
  }
  if (sites_.front()[0].rows() != 1 || sites_.back()[0].cols() != 1) {
    throw StructuralError("Mpo: boundary bonds must have dimension 1");
  }
}

Mpo Mpo::identity(std::size_t n_sites) {
  std::vector<OpTensor> sites(n_sites);
  for (auto& t : sites) {
    for (std::size_t o = 0; o < 2; ++o)
      for (std::size_t i = 0; i < 2; ++i) t[op_index(o, i)] = Matrix::Constant(1, 1, o == i ? 1.0 : 0.0);
  }
  return Mpo(std::move(sites));
}

std::vector<std::size_t> Mpo::bond_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& t : sites_) dims.push_back(static_cast<std::size_t>(t[0].rows()));
  dims.push_back(static_cast<std::size_t>(sites_.back()[0].cols()));
  return dims;
}

std::size_t Mpo::growth_factor() const {
  const auto dims = bond_dims();
  return *std::max_element(dims.begin(), dims.end());
}

Mpo Mpo::scaled(Complex factor) const {
  auto sites = sites_;
  for (auto& m : sites.front()) m *= factor;
  return Mpo(std::move(sites));
}

// ---------------------------------------------------------------------------
// Operations

Complex inner(const Mps& a, const Mps& b) {
  require_same_length(a.size(), b.size(), "inner");
  Matrix env = Matrix::Identity(1, 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& ta = a.site(i);
    const auto& tb = b.site(i);
    Matrix next = ta[0].adjoint() * (env * tb[0]);
    next.noalias() += ta[1].adjoint() * (env * tb[1]);
    env = std::move(next);
  }
  return env(0, 0) * std::exp(a.log_norm() + b.log_norm());
}

double norm(const Mps& psi) {
  const Mps unit(std::vector<SiteTensor>(psi.sites().begin(), psi.sites().end()));
  return std::sqrt(std::max(0.0, inner(unit, unit).real())) * std::exp(psi.log_norm());
}

Mps apply_mpo(const Mpo& op, const Mps& psi) {
  require_same_length(op.size(), psi.size(), "apply_mpo");
  std::vector<SiteTensor> out(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto& w = op.site(i);
    const auto& a = psi.site(i);
    const auto dl = a[0].rows(), dr = a[0].cols();
    const auto wl = w[0].rows(), wr = w[0].cols();
    for (std::size_t o = 0; o < 2; ++o) {
      Matrix m = Matrix::Zero(wl * dl, wr * dr);
      for (std::size_t in = 0; in < 2; ++in) {
        const auto& wm = w[op_index(o, in)];
        for (Eigen::Index x = 0; x < wl; ++x) {
          for (Eigen::Index y = 0; y < wr; ++y) {
            const Complex c = wm(x, y);
            if (c == Complex(0.0)) continue;
            m.block(x * dl, y * dr, dl, dr) += c * a[in];
          }
        }
      }
      out[i][o] = std::move(m);
    }
  }
  return Mps(std::move(out), psi.log_norm());
}

Mps add(const Mps& a, const Mps& b, Complex coeff_a, Complex coeff_b) {
  require_same_length(a.size(), b.size(), "add");
  const double ref = std::max(a.log_norm(), b.log_norm());
  const Complex ca = coeff_a * std::exp(a.log_norm() - ref);
  const Complex cb = coeff_b * std::exp(b.log_norm() - ref);
  const std::size_t n = a.size();
  std::vector<SiteTensor> out(n);
  if (n == 1) {
    for (std::size_t s = 0; s < 2; ++s) out[0][s] = ca * a.site(0)[s] + cb * b.site(0)[s];
    return Mps(std::move(out), ref);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ta = a.site(i);
    const auto& tb = b.site(i);
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& ma = ta[s];
      const auto& mb = tb[s];
      if (i == 0) {
        Matrix m(1, ma.cols() + mb.cols());
        m << ca * ma, cb * mb;
        out[i][s] = std::move(m);
      } else if (i + 1 == n) {
        Matrix m(ma.rows() + mb.rows(), 1);
        m << ma, mb;
        out[i][s] = std::move(m);
      } else {
        Matrix m = Matrix::Zero(ma.rows() + mb.rows(), ma.cols() + mb.cols());
        m.topLeftCorner(ma.rows(), ma.cols()) = ma;
        m.bottomRightCorner(mb.rows(), mb.cols()) = mb;
        out[i][s] = std::move(m);
      }
    }
  }
  return Mps(std::move(out), ref);
}

Mps scale(const Mps& psi, Complex factor) {
  const double mag = std::abs(factor);
  std::vector<SiteTensor> sites(psi.sites().begin(), psi.sites().end());
  if (mag == 0.0) {
    for (auto& m : sites.front()) m.setZero();
    return Mps(std::move(sites), 0.0, psi.ortho_center());
  }
  const Complex phase = factor / mag;
  for (auto& m : sites.front()) m *= phase;
  return Mps(std::move(sites), psi.log_norm() + std::log(mag), psi.ortho_center());
}

Mps canonicalize(const Mps& psi, std::size_t center) {
  if (center >= psi.size()) {
    throw ParameterError("canonicalize: center " + std::to_string(center) + " out of range for " +
                         std::to_string(psi.size()) + " sites");
  }
  std::vector<SiteTensor> sites(psi.sites().begin(), psi.sites().end());
  move_center(sites, center);
  double log_norm = psi.log_norm();
  const double nrm = frobenius(sites[center]);
  if (nrm > 0.0 && std::isfinite(nrm)) {
    for (auto& m : sites[center]) m /= nrm;
    log_norm += std::log(nrm);
  }
  return Mps(std::move(sites), log_norm, center);
}

Truncated truncate(const Mps& psi, std::size_t chi_max, double svd_tol) {
  if (chi_max < 1) throw ParameterError("truncate: chi_max must be at least 1");
  if (!(svd_tol >= 0.0)) throw ParameterError("truncate: svd_tol must be non-negative");
  Truncated result;
  result.report.max_bond_before = psi.max_bond();
  const Mps right = canonicalize(psi, 0);
  std::vector<SiteTensor> sites(right.sites().begin(), right.sites().end());
  const double base_log = right.log_norm();
  const double base_scale2 = std::exp(2.0 * base_log);
  result.report.norm_before = std::exp(base_log);
  double discarded_total = 0.0;
  result.report.discarded_weights.assign(sites.size() - 1, 0.0);

  for (std::size_t i = 0; i + 1 < sites.size(); ++i) {
    const Matrix m = stack_left(sites[i]);
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const auto full = static_cast<std::size_t>(sv.size());
    std::size_t keep = std::min(full, chi_max);
    if (full > 0 && sv(0) > 0.0) {
      const double cut = svd_tol * sv(0);
      std::size_t above = 0;
      while (above < full && sv(static_cast<Eigen::Index>(above)) > cut) ++above;
      keep = std::min(keep, std::max<std::size_t>(above, 1));
    }
    keep = std::max<std::size_t>(keep, 1);
    double dropped = 0.0;
    for (std::size_t j = keep; j < full; ++j) dropped += sv(j) * sv(j);
    result.report.discarded_weights[i] = dropped * base_scale2;
    discarded_total += dropped;

    const auto k = static_cast<Eigen::Index>(keep);
    sites[i] = unstack_left(svd.matrixU().leftCols(k));
    const Matrix carry = sv.head(k).cast<Complex>().asDiagonal() * svd.matrixV().leftCols(k).adjoint();
    for (auto& next : sites[i + 1]) next = carry * next;
  }

  const std::size_t last = sites.size() - 1;
  double log_norm = base_log;
  const double nrm = frobenius(sites[last]);
  if (nrm > 0.0 && std::isfinite(nrm)) {
    for (auto& m : sites[last]) m /= nrm;
    log_norm += std::log(nrm);
  }
  // Sequential truncations of a canonical state act as nested orthogonal
  // projectors, so the discarded weights add up to the exact squared error.
  result.report.error = std::exp(base_log) * std::sqrt(discarded_total);
  result.state = Mps(std::move(sites), log_norm, last);
  result.report.max_bond_after = result.state.max_bond();
  return result;
}

DenseVector to_dense(const Mps& psi, std::size_t dense_limit) {
  if (psi.size() > dense_limit || psi.size() >= 63) {
    throw CapacityError("to_dense: " + std::to_string(psi.size()) + " sites exceeds dense limit " +
                        std::to_string(dense_limit));
  }
  Matrix acc = Matrix::Identity(1, 1);
  for (const auto& t : psi.sites()) {
    Matrix next(acc.rows() * 2, t[0].cols());
    for (Eigen::Index p = 0; p < acc.rows(); ++p) {
      next.row(2 * p) = acc.row(p) * t[0];
      next.row(2 * p + 1) = acc.row(p) * t[1];
    }
    acc = std::move(next);
  }
  return acc.col(0) * std::exp(psi.log_norm());
}

Mps from_dense(const DenseVector& amplitudes, double cutoff) {
  const auto total = static_cast<std::size_t>(amplitudes.size());
  std::size_t n = 0;
  while ((std::size_t{1} << n) < total) ++n;
  if (total == 0 || (std::size_t{1} << n) != total || n == 0) {
    throw StructuralError("from_dense: length must be a power of two >= 2");
  }
  std::vector<SiteTensor> sites(n);
  // rest(a, column) with column = s * 2^(remaining-1) + tail
  Matrix rest = amplitudes.transpose();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto dl = rest.rows();
    const auto half = rest.cols() / 2;
    Matrix m(2 * dl, half);
    m.topRows(dl) = rest.leftCols(half);
    m.bottomRows(dl) = rest.rightCols(half);
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::Index keep = 1;
    while (keep < sv.size() && sv(keep) > cutoff * sv(0)) ++keep;
    sites[i] = unstack_left(svd.matrixU().leftCols(keep));
    rest = sv.head(keep).cast<Complex>().asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
  }
  sites[n - 1] = {rest.col(0), rest.col(1)};
  const double nrm = frobenius(sites[n - 1]);
  double log_norm = 0.0;
  if (nrm > 0.0) {
    for (auto& m : sites[n - 1]) m /= nrm;
    log_norm = std::log(nrm);
  }
  return Mps(std::move(sites), log_norm, n - 1);
}

double left_isometry_residual(const Mps& psi, std::size_t site) {
  const auto& t = psi.site(site);
  const Matrix g = t[0].adjoint() * t[0] + t[1].adjoint() * t[1];
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double right_isometry_residual(const Mps& psi, std::size_t site) {
  const auto& t = psi.site(site);
  const Matrix g = t[0] * t[0].adjoint() + t[1] * t[1].adjoint();
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

Complex expectation(const Mps& psi, const Mpo& op) {
  require_same_length(psi.size(), op.size(), "expectation");
  std::vector<Matrix> env{Matrix::Identity(1, 1)};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto& a = psi.site(i);
    const auto& w = op.site(i);
    const auto wl = w[0].rows(), wr = w[0].cols();
    const auto dr = a[0].cols();
    std::vector<Matrix> next(static_cast<std::size_t>(wr), Matrix::Zero(dr, dr));
    for (Eigen::Index x = 0; x < wl; ++x) {
      // ket-side partial products env[x] * A_in
      const Matrix& e = env[static_cast<std::size_t>(x)];
      const std::array<Matrix, 2> ea{e * a[0], e * a[1]};
      for (std::size_t o = 0; o < 2; ++o) {
        for (std::size_t in = 0; in < 2; ++in) {
          const auto& wm = w[op_index(o, in)];
          for (Eigen::Index y = 0; y < wr; ++y) {
            const Complex c = wm(x, y);
            if (c == Complex(0.0)) continue;
            next[static_cast<std::size_t>(y)].noalias() += c * (a[o].adjoint() * ea[in]);
          }
        }
      }
    }
    env = std::move(next);
  }
  return env[0](0, 0) * std::exp(2.0 * psi.log_norm());
}

Matrix to_dense(const Mpo& op, std::size_t dense_limit) {
  if (op.size() > dense_limit) {
    throw CapacityError("to_dense(Mpo): " + std::to_string(op.size()) + " sites exceeds dense limit " +
                        std::to_string(dense_limit));
  }
  // acc[w] is the partial operator over the sites seen so far with open bond w.
  std::vector<Matrix> acc{Matrix::Identity(1, 1)};
  for (const auto& w : op.sites()) {
    const auto wr = w[0].cols();
    const auto dim = acc[0].rows();
    std::vector<Matrix> next(static_cast<std::size_t>(wr), Matrix::Zero(2 * dim, 2 * dim));
    for (Eigen::Index x = 0; x < w[0].rows(); ++x) {
      for (std::size_t o = 0; o < 2; ++o) {
        for (std::size_t in = 0; in < 2; ++in) {
          for (Eigen::Index y = 0; y < wr; ++y) {
            const Complex c = w[op_index(o, in)](x, y);
            if (c == Complex(0.0)) continue;
            auto& dst = next[static_cast<std::size_t>(y)];
            for (Eigen::Index p = 0; p < dim; ++p)
              for (Eigen::Index q = 0; q < dim; ++q)
                dst(2 * p + static_cast<Eigen::Index>(o), 2 * q + static_cast<Eigen::Index>(in)) +=
                    c * acc[static_cast<std::size_t>(x)](p, q);
          }
        }
      }
    }
    acc = std::move(next);
  }
  return acc[0];
}

}  // namespace chebgsee
