#include "chebgsee/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chebgsee/errors.hpp"
#include "chebgsee/io.hpp"
#include "chebgsee/lanczos.hpp"

namespace chebgsee {

namespace {

constexpr std::size_t d2 = kPhysDim;

// Environment blocks, one matrix per MPO bond index. Left blocks are
// (bra x ket), right blocks are (ket x bra).
using Env = std::vector<Matrix>;

Env left_edge() { return {Matrix::Ones(1, 1)}; }
Env right_edge() { return {Matrix::Ones(1, 1)}; }

Env grow_left(const Env& L, const SiteTensor& A, const OpTensor& W) {
  const auto wl = W[0].rows(), wr = W[0].cols();
  const auto dr = A[0].cols();
  Env out(static_cast<std::size_t>(wr), Matrix::Zero(dr, dr));
  for (Eigen::Index w = 0; w < wl; ++w) {
    const Matrix& Lw = L[static_cast<std::size_t>(w)];
    if (Lw.cwiseAbs().maxCoeff() == 0.0) continue;
    std::array<Matrix, d2> LA = {Lw * A[0], Lw * A[1]};
    for (Eigen::Index v = 0; v < wr; ++v) {
      for (std::size_t s = 0; s < d2; ++s) {
        for (std::size_t t = 0; t < d2; ++t) {
          const Complex c = W[op_index(s, t)](w, v);
          if (c == 0.0) continue;
          out[static_cast<std::size_t>(v)].noalias() += c * (A[s].adjoint() * LA[t]);
        }
      }
    }
  }
  return out;
}

Env grow_right(const Env& R, const SiteTensor& B, const OpTensor& W) {
  const auto wl = W[0].rows(), wr = W[0].cols();
  const auto dl = B[0].rows();
  Env out(static_cast<std::size_t>(wl), Matrix::Zero(dl, dl));
  for (Eigen::Index v = 0; v < wr; ++v) {
    const Matrix& Rv = R[static_cast<std::size_t>(v)];
    if (Rv.cwiseAbs().maxCoeff() == 0.0) continue;
    std::array<Matrix, d2> BR = {B[0] * Rv, B[1] * Rv};
    for (Eigen::Index w = 0; w < wl; ++w) {
      for (std::size_t s = 0; s < d2; ++s) {
        for (std::size_t t = 0; t < d2; ++t) {
          const Complex c = W[op_index(s, t)](w, v);
          if (c == 0.0) continue;
          out[static_cast<std::size_t>(w)].noalias() += c * (BR[t] * B[s].adjoint());
        }
      }
    }
  }
  return out;
}

// Two-site wavefunction theta[s1][s2] of shape (Dl x Dr), flattened s1-major.
struct TwoSite {
  Eigen::Index dl = 0, dr = 0;

  Eigen::Index block() const { return dl * dr; }
  Eigen::Map<const Matrix> view(const Eigen::VectorXcd& v, std::size_t s1, std::size_t s2) const {
    return {v.data() + static_cast<Eigen::Index>(s1 * d2 + s2) * block(), dl, dr};
  }
  Eigen::Map<Matrix> view(Eigen::VectorXcd& v, std::size_t s1, std::size_t s2) const {
    return {v.data() + static_cast<Eigen::Index>(s1 * d2 + s2) * block(), dl, dr};
  }
};

void apply_two_site(const Env& L, const OpTensor& W1, const OpTensor& W2, const Env& R, const TwoSite& shape,
                    const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
  const auto w0 = W1[0].rows(), w1 = W1[0].cols(), w2 = W2[0].cols();
  y.setZero(x.size());
  // Y[m][s1'][s2] = sum_{w, s1} W1_{s1' s1}(w, m) L[w] theta[s1][s2]
  std::vector<std::array<Matrix, d2 * d2>> Y(static_cast<std::size_t>(w1));
  for (auto& blk : Y)
    for (auto& m : blk) m = Matrix::Zero(shape.dl, shape.dr);
  for (Eigen::Index w = 0; w < w0; ++w) {
    const Matrix& Lw = L[static_cast<std::size_t>(w)];
    if (Lw.cwiseAbs().maxCoeff() == 0.0) continue;
    std::array<Matrix, d2 * d2> X;
    bool have = false;
    for (Eigen::Index m = 0; m < w1; ++m) {
      for (std::size_t so = 0; so < d2; ++so) {
        for (std::size_t si = 0; si < d2; ++si) {
          const Complex c = W1[op_index(so, si)](w, m);
          if (c == 0.0) continue;
          if (!have) {
            for (std::size_t a = 0; a < d2; ++a)
              for (std::size_t b = 0; b < d2; ++b) X[a * d2 + b].noalias() = Lw * shape.view(x, a, b);
            have = true;
          }
          for (std::size_t s2 = 0; s2 < d2; ++s2) Y[static_cast<std::size_t>(m)][so * d2 + s2] += c * X[si * d2 + s2];
        }
      }
    }
  }
  // out[s1'][s2'] = sum_{m, s2, v} W2_{s2' s2}(m, v) Y[m][s1'][s2] R[v]
  for (Eigen::Index v = 0; v < w2; ++v) {
    const Matrix& Rv = R[static_cast<std::size_t>(v)];
    if (Rv.cwiseAbs().maxCoeff() == 0.0) continue;
    std::array<Matrix, d2 * d2> Z;
    for (auto& m : Z) m = Matrix::Zero(shape.dl, shape.dr);
    bool any = false;
    for (Eigen::Index m = 0; m < w1; ++m) {
      for (std::size_t so = 0; so < d2; ++so) {
        for (std::size_t si = 0; si < d2; ++si) {
          const Complex c = W2[op_index(so, si)](m, v);
          if (c == 0.0) continue;
          any = true;
          for (std::size_t s1 = 0; s1 < d2; ++s1) Z[s1 * d2 + so] += c * Y[static_cast<std::size_t>(m)][s1 * d2 + si];
        }
      }
    }
    if (!any) continue;
    for (std::size_t a = 0; a < d2; ++a)
      for (std::size_t b = 0; b < d2; ++b) shape.view(y, a, b).noalias() += Z[a * d2 + b] * Rv;
  }
}

Eigen::VectorXcd merge(const SiteTensor& A, const SiteTensor& B, TwoSite& shape) {
  shape.dl = A[0].rows();
  shape.dr = B[0].cols();
  Eigen::VectorXcd theta(4 * shape.block());
  for (std::size_t a = 0; a < d2; ++a)
    for (std::size_t b = 0; b < d2; ++b) shape.view(theta, a, b) = A[a] * B[b];
  return theta;
}

// theta -> U S V^dag, kept singular values absorbed left or right.
void split(const Eigen::VectorXcd& theta, const TwoSite& shape, std::size_t chi, double svd_tol, bool absorb_right,
           SiteTensor& A, SiteTensor& B) {
  Matrix m(2 * shape.dl, 2 * shape.dr);
  for (std::size_t a = 0; a < d2; ++a)
    for (std::size_t b = 0; b < d2; ++b)
      m.block(static_cast<Eigen::Index>(a) * shape.dl, static_cast<Eigen::Index>(b) * shape.dr, shape.dl, shape.dr) =
          shape.view(theta, a, b);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const auto full = static_cast<std::size_t>(sv.size());
  std::size_t keep = std::min(full, chi);
  std::size_t above = 0;
  while (above < full && sv(static_cast<Eigen::Index>(above)) > svd_tol * sv(0)) ++above;
  keep = std::max<std::size_t>(1, std::min(keep, above));
  const auto k = static_cast<Eigen::Index>(keep);
  Eigen::VectorXd s = sv.head(k);
  s /= s.norm();
  Matrix U = svd.matrixU().leftCols(k);
  Matrix Vh = svd.matrixV().leftCols(k).adjoint();
  if (absorb_right) {
    Vh = s.asDiagonal() * Vh;
  } else {
    U = U * s.asDiagonal();
  }
  for (std::size_t a = 0; a < d2; ++a) A[a] = U.middleRows(static_cast<Eigen::Index>(a) * shape.dl, shape.dl);
  for (std::size_t b = 0; b < d2; ++b) B[b] = Vh.middleCols(static_cast<Eigen::Index>(b) * shape.dr, shape.dr);
}

}  // namespace

Mps field_aligned_state(const NormalizedHamiltonian& H) {
  const std::size_t n = H.n_sites();
  std::vector<double> zfield(n, 0.0);
  for (const auto& t : H.terms.terms()) {
    std::size_t pos = n, count = 0;
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
      if (t.labels[i] != 'I') {
        ++count;
        pos = i;
      }
    }
    if (count == 1 && t.labels[pos] == 'Z') zfield[pos] += t.coeff;
  }
  std::vector<int> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = zfield[i] > 0.0 ? 1 : 0;
  return Mps::basis_state(bits);
}

DmrgResult dmrg_ground(const NormalizedHamiltonian& H, const DmrgConfig& cfg) {
  if (cfg.chi_init < 1) throw ParameterError("dmrg: chi_init must be at least 1");
  if (cfg.sweeps < 1) throw ParameterError("dmrg: sweeps must be at least 1");
  if (cfg.local_eig_iters < 2) throw ParameterError("dmrg: local_eig_iters must be at least 2");
  if (!(cfg.conv_tol >= 0.0)) throw ParameterError("dmrg: conv_tol must be non-negative");
  const std::size_t n = H.n_sites();
  if (n == 0) throw ParameterError("dmrg: empty Hamiltonian");
  const Mpo& mpo = H.mpo;

  DmrgResult res;
  if (n == 1) {
    const Matrix h = to_dense(mpo, 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const DenseVector g = es.eigenvectors().col(0);
    res.state = Mps::product_state(std::vector<std::array<Complex, 2>>{{g(0), g(1)}});
    res.energy = es.eigenvalues()(0);
    res.sweep_energies = {res.energy};
    res.converged = true;
    res.sweeps_run = 1;
    return res;
  }

  const Mps start = canonicalize(field_aligned_state(H), 0);
  std::vector<SiteTensor> sites(start.sites().begin(), start.sites().end());

  std::vector<Env> left(n), right(n);
  left[0] = left_edge();
  right[n - 1] = right_edge();
  for (std::size_t i = n - 1; i > 0; --i) right[i - 1] = grow_right(right[i], sites[i], mpo.site(i));

  LanczosOptions lopts;
  lopts.krylov_dim = cfg.local_eig_iters;
  lopts.max_restarts = 4;
  lopts.tol = 1e-12;

  auto optimize = [&](std::size_t i, bool absorb_right) {
    TwoSite shape;
    Eigen::VectorXcd theta = merge(sites[i], sites[i + 1], shape);
    const Env& L = left[i];
    const Env& R = right[i + 1];
    const MatVec mv = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      apply_two_site(L, mpo.site(i), mpo.site(i + 1), R, shape, x, y);
    };
    if (theta.norm() == 0.0) theta.setOnes();
    theta.normalize();
    auto energy_of = [&](const Eigen::VectorXcd& v) {
      Eigen::VectorXcd hv;
      mv(v, hv);
      return v.dot(hv).real() / v.squaredNorm();
    };
    const double e_old = energy_of(theta);
    const auto lr = lanczos_ground(mv, theta, lopts);
    SiteTensor a, b;
    split(lr.vector, shape, cfg.chi_init, cfg.svd_tol, absorb_right, a, b);
    TwoSite trial_shape;
    // Truncation can undo the local gain; the previous pair always fits in chi_init.
    if (energy_of(merge(a, b, trial_shape)) <= e_old) {
      sites[i] = std::move(a);
      sites[i + 1] = std::move(b);
    } else {
      split(theta, shape, cfg.chi_init, cfg.svd_tol, absorb_right, sites[i], sites[i + 1]);
    }
  };

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      optimize(i, true);
      left[i + 1] = grow_left(left[i], sites[i], mpo.site(i));
    }
    for (std::size_t i = n - 1; i > 0; --i) {
      optimize(i - 1, false);
      right[i - 1] = grow_right(right[i], sites[i], mpo.site(i));
    }
    const Mps current(sites, 0.0, 0);
    const double e = expectation(current, mpo).real() / std::pow(norm(current), 2);
    res.sweep_energies.push_back(e);
    ++res.sweeps_run;
    if (std::abs(previous - e) < cfg.conv_tol) {
      res.converged = true;
      break;
    }
    previous = e;
  }
  res.state = canonicalize(Mps(std::move(sites), 0.0), 0);
  res.state = Mps(std::vector<SiteTensor>(res.state.sites().begin(), res.state.sites().end()), 0.0, 0);
  res.energy = expectation(res.state, mpo).real();
  return res;
}

Mps load_guiding_state(const std::filesystem::path& path) {
  const Mps raw = load_mps(path);
  if (raw.empty()) throw FormatError("guiding state has no sites", 0);
  const Mps c = canonicalize(raw, 0);
  if (!std::isfinite(c.log_norm())) throw NumericalError("guiding state has zero or non-finite norm");
  return Mps(std::vector<SiteTensor>(c.sites().begin(), c.sites().end()), 0.0, 0);
}

}  // namespace chebgsee
