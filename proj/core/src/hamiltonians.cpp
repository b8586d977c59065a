#include "chebgsee/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include "chebgsee/errors.hpp"

namespace chebgsee {

namespace {

using Local = Eigen::Matrix2cd;

Local pauli(char label) {
  Local m;
  switch (label) {
    case 'I':
      m << 1, 0, 0, 1;
      break;
    case 'X':
      m << 0, 1, 1, 0;
      break;
    case 'Y':
      m << 0, Complex(0, -1), Complex(0, 1), 0;
      break;
    case 'Z':
      m << 1, 0, 0, -1;
      break;
    default:
      throw ParameterError(std::string("unknown Pauli label '") + label + "'");
  }
  return m;
}

void put(OpTensor& t, Eigen::Index row, Eigen::Index col, const Local& op, Complex coeff) {
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t i = 0; i < 2; ++i)
      t[op_index(o, i)](row, col) += coeff * op(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
}

struct Coupling {
  std::size_t i, j;  // i < j
  double coeff;
  char op_i, op_j;
};

struct OnSite {
  std::size_t site;
  double coeff;
  char op;
};

// Finite-state-automaton MPO for on-site terms plus two-body couplings with
// identity strings in between. Channels at each bond: [start, open sources..., done],
// one open channel per source site that still has a partner to the right.
Mpo automaton_mpo(std::size_t n, const std::vector<OnSite>& fields, const std::vector<Coupling>& couplings) {
  const Local id = pauli('I');
  // last partner index per source
  std::map<std::size_t, std::size_t> last_target;
  for (const auto& c : couplings) {
    if (c.i >= c.j || c.j >= n) throw ParameterError("automaton_mpo: coupling sites out of order");
    auto& lt = last_target[c.i];
    lt = std::max(lt, c.j);
  }
  // open sources crossing bond k (between site k and k+1)
  std::vector<std::vector<std::size_t>> open(n);
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (const auto& [src, tgt] : last_target)
      if (src <= k && tgt > k) open[k].push_back(src);

  auto channel_of = [&](std::size_t bond, std::size_t src) -> Eigen::Index {
    const auto& v = open[bond];
    const auto it = std::find(v.begin(), v.end(), src);
    return static_cast<Eigen::Index>(1 + (it - v.begin()));
  };

  std::vector<OpTensor> sites(n);
  for (std::size_t k = 0; k < n; ++k) {
    const bool has_left = k > 0;
    const bool has_right = k + 1 < n;
    const Eigen::Index wl = has_left ? static_cast<Eigen::Index>(open[k - 1].size() + 2) : 1;
    const Eigen::Index wr = has_right ? static_cast<Eigen::Index>(open[k].size() + 2) : 1;
    auto& t = sites[k];
    for (auto& m : t) m = Matrix::Zero(wl, wr);
    const Eigen::Index l_start = 0;
    const Eigen::Index l_done = has_left ? wl - 1 : 0;
    const Eigen::Index r_start = 0;
    const Eigen::Index r_done = has_right ? wr - 1 : 0;

    if (has_right) put(t, l_start, r_start, id, 1.0);
    if (has_left) put(t, l_done, r_done, id, 1.0);
    for (const auto& f : fields)
      if (f.site == k) put(t, l_start, r_done, pauli(f.op), f.coeff);
    if (has_right) {
      const auto it = last_target.find(k);
      if (it != last_target.end()) {
        char op_here = 0;
        for (const auto& c : couplings)
          if (c.i == k) {
            if (op_here != 0 && op_here != c.op_i) {
              throw ParameterError("automaton_mpo: mixed source operators at one site are not supported");
            }
            op_here = c.op_i;
          }
        put(t, l_start, channel_of(k, k), pauli(op_here), 1.0);
      }
    }
    if (has_left) {
      for (std::size_t src : open[k - 1]) {
        const Eigen::Index from = channel_of(k - 1, src);
        for (const auto& c : couplings)
          if (c.i == src && c.j == k) put(t, from, r_done, pauli(c.op_j), c.coeff);
        if (has_right && last_target[src] > k) put(t, from, channel_of(k, src), id, 1.0);
      }
    }
  }
  return Mpo(std::move(sites));
}

struct ScaledOp {
  std::vector<OpTensor> sites;
  double log_scale = 0.0;
};

double op_norm(const OpTensor& t) {
  double s = 0.0;
  for (const auto& m : t) s += m.squaredNorm();
  return std::sqrt(s);
}

// Rows ordered (phys pair, left).
Matrix stack_op_left(const OpTensor& t) {
  const auto wl = t[0].rows();
  Matrix m(4 * wl, t[0].cols());
  for (std::size_t p = 0; p < 4; ++p) m.middleRows(static_cast<Eigen::Index>(p) * wl, wl) = t[p];
  return m;
}

OpTensor unstack_op_left(const Matrix& m) {
  const auto wl = m.rows() / 4;
  OpTensor t;
  for (std::size_t p = 0; p < 4; ++p) t[p] = m.middleRows(static_cast<Eigen::Index>(p) * wl, wl);
  return t;
}

Matrix stack_op_right(const OpTensor& t) {
  const auto wr = t[0].cols();
  Matrix m(t[0].rows(), 4 * wr);
  for (std::size_t p = 0; p < 4; ++p) m.middleCols(static_cast<Eigen::Index>(p) * wr, wr) = t[p];
  return m;
}

OpTensor unstack_op_right(const Matrix& m) {
  const auto wr = m.cols() / 4;
  OpTensor t;
  for (std::size_t p = 0; p < 4; ++p) t[p] = m.middleCols(static_cast<Eigen::Index>(p) * wr, wr);
  return t;
}

// Left-orthogonalize with QR, then sweep right-to-left truncating small
// operator Schmidt values. The overall scale is redistributed evenly.
Mpo compress_mpo(const Mpo& op, double tol) {
  std::vector<OpTensor> sites(op.sites().begin(), op.sites().end());
  const std::size_t n = sites.size();
  if (n == 1) return op;
  double log_scale = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Matrix m = stack_op_left(sites[i]);
    Eigen::HouseholderQR<Matrix> qr(m);
    const auto k = std::min(m.rows(), m.cols());
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const double rn = r.norm();
    if (rn > 0.0) {
      r /= rn;
      log_scale += std::log(rn);
    }
    sites[i] = unstack_op_left(q);
    for (auto& x : sites[i + 1]) x = r * x;
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    const Matrix m = stack_op_right(sites[i]);
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::Index keep = 1;
    while (keep < sv.size() && sv(keep) > tol * sv(0)) ++keep;
    sites[i] = unstack_op_right(svd.matrixV().leftCols(keep).adjoint());
    const Matrix carry = svd.matrixU().leftCols(keep) * sv.head(keep).cast<Complex>().asDiagonal();
    double cn = carry.norm();
    Matrix c = carry;
    if (cn > 0.0) {
      c /= cn;
      log_scale += std::log(cn);
    }
    for (auto& x : sites[i - 1]) x = x * c;
  }
  const double n0 = op_norm(sites[0]);
  if (n0 > 0.0) {
    for (auto& x : sites[0]) x /= n0;
    log_scale += std::log(n0);
  }
  const double per_site = std::exp(log_scale / static_cast<double>(n));
  for (auto& t : sites)
    for (auto& x : t) x *= per_site;
  return Mpo(std::move(sites));
}

std::vector<PauliTerm> scaled_terms(const std::vector<OnSite>& fields, const std::vector<Coupling>& couplings,
                                    std::size_t n) {
  std::vector<PauliTerm> terms;
  for (const auto& c : couplings) {
    std::string s(n, 'I');
    s[c.i] = c.op_i;
    s[c.j] = c.op_j;
    terms.push_back({c.coeff, s});
  }
  for (const auto& f : fields) {
    std::string s(n, 'I');
    s[f.site] = f.op;
    terms.push_back({f.coeff, s});
  }
  return terms;
}

NormalizedHamiltonian build_ising(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  double J, double h, ModelMeta meta) {
  if (!std::isfinite(J) || !std::isfinite(h)) throw ParameterError("TFIM: J and h must be finite");
  const double scale = std::abs(J) * static_cast<double>(edges.size()) + std::abs(h) * static_cast<double>(n);
  if (!(scale > 0.0)) throw ParameterError("TFIM: J and h cannot both vanish");
  std::vector<Coupling> raw_c;
  std::vector<OnSite> raw_f;
  if (J != 0.0)
    for (auto [i, j] : edges) raw_c.push_back({std::min(i, j), std::max(i, j), -J, 'X', 'X'});
  if (h != 0.0)
    for (std::size_t i = 0; i < n; ++i) raw_f.push_back({i, -h, 'Z'});
  auto scaled_c = raw_c;
  auto scaled_f = raw_f;
  for (auto& c : scaled_c) c.coeff /= scale;
  for (auto& f : scaled_f) f.coeff /= scale;

  NormalizedHamiltonian out;
  out.mpo = automaton_mpo(n, scaled_f, scaled_c);
  out.terms = PauliSum(n, scaled_terms(raw_f, raw_c, n));
  out.scale = scale;
  out.meta = std::move(meta);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PauliSum

PauliSum::PauliSum(std::size_t n_sites, std::vector<PauliTerm> terms) : n_sites_(n_sites), terms_(std::move(terms)) {
  if (n_sites_ == 0) throw ParameterError("PauliSum: n_sites must be positive");
  for (const auto& t : terms_) {
    if (t.labels.size() != n_sites_) {
      throw ParameterError("PauliSum: string '" + t.labels + "' has length " + std::to_string(t.labels.size()) +
                           ", expected " + std::to_string(n_sites_));
    }
    for (char c : t.labels)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw ParameterError(std::string("PauliSum: unknown label '") + c + "'");
      }
    if (!std::isfinite(t.coeff) || t.coeff == 0.0) throw ParameterError("PauliSum: coefficients must be finite and nonzero");
  }
}

double PauliSum::coefficient_l1() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coeff);
  return s;
}

PauliSum PauliSum::parse(std::istream& in) {
  std::vector<PauliTerm> terms;
  std::string line;
  std::size_t n = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string coeff_text, labels, extra;
    if (!(ls >> coeff_text)) continue;
    if (!(ls >> labels) || (ls >> extra)) {
      throw ParameterError("PauliSum::parse: line " + std::to_string(lineno) + " must be `coeff LABELS`");
    }
    double coeff = 0.0;
    try {
      std::size_t used = 0;
      coeff = std::stod(coeff_text, &used);
      if (used != coeff_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParameterError("PauliSum::parse: bad coefficient on line " + std::to_string(lineno));
    }
    if (n == 0) n = labels.size();
    terms.push_back({coeff, labels});
  }
  if (terms.empty()) throw ParameterError("PauliSum::parse: no terms");
  return PauliSum(n, std::move(terms));
}

PauliSum PauliSum::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

std::string PauliSum::to_text() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& t : terms_) out << t.coeff << ' ' << t.labels << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Builders

Mpo pauli_string_mpo(const PauliTerm& term) {
  std::vector<OpTensor> sites(term.labels.size());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    for (auto& m : sites[k]) m = Matrix::Zero(1, 1);
    put(sites[k], 0, 0, pauli(term.labels[k]), k == 0 ? term.coeff : 1.0);
  }
  return Mpo(std::move(sites));
}

Mpo paulisum_to_mpo(const PauliSum& ps, double compress_tol) {
  if (ps.size() == 0) throw ParameterError("paulisum_to_mpo: empty Pauli sum");
  const std::size_t n = ps.n_sites();
  const auto m = static_cast<Eigen::Index>(ps.size());
  std::vector<OpTensor> sites(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Index wl = k == 0 ? 1 : m;
    const Eigen::Index wr = k + 1 == n ? 1 : m;
    for (auto& x : sites[k]) x = Matrix::Zero(wl, wr);
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto& term = ps.terms()[static_cast<std::size_t>(t)];
      const Eigen::Index row = k == 0 ? 0 : t;
      const Eigen::Index col = k + 1 == n ? 0 : t;
      put(sites[k], row, col, pauli(term.labels[k]), k == 0 ? term.coeff : 1.0);
    }
  }
  Mpo op(std::move(sites));
  if (compress_tol > 0.0) return compress_mpo(op, compress_tol);
  return op;
}

std::size_t snake_index(std::size_t L, std::size_t row, std::size_t col) {
  return row * L + (row % 2 == 0 ? col : L - 1 - col);
}

std::vector<std::pair<std::size_t, std::size_t>> lattice_edges(std::size_t L) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t r = 0; r < L; ++r) {
    for (std::size_t c = 0; c < L; ++c) {
      const auto here = snake_index(L, r, c);
      if (c + 1 < L) {
        const auto right = snake_index(L, r, c + 1);
        edges.emplace_back(std::min(here, right), std::max(here, right));
      }
      if (r + 1 < L) {
        const auto down = snake_index(L, r + 1, c);
        edges.emplace_back(std::min(here, down), std::max(here, down));
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

NormalizedHamiltonian tfim_1d(std::size_t L, double J, double h) {
  if (L < 2) throw ParameterError("tfim_1d: L must be at least 2");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < L; ++i) edges.emplace_back(i, i + 1);
  return build_ising(L, edges, J, h, ModelMeta{"tfim1d", L, J, h, "chain"});
}

NormalizedHamiltonian tfim_2d(std::size_t L, double J, double h) {
  if (L < 2) throw ParameterError("tfim_2d: L must be at least 2");
  return build_ising(L * L, lattice_edges(L), J, h, ModelMeta{"tfim2d", L, J, h, "row-major-snake"});
}

NormalizedHamiltonian from_pauli_sum(PauliSum ps, double compress_tol) {
  if (ps.size() == 0) throw ParameterError("from_pauli_sum: empty Pauli sum");
  NormalizedHamiltonian out;
  out.scale = ps.coefficient_l1();
  out.mpo = paulisum_to_mpo(ps, compress_tol).scaled(1.0 / out.scale);
  out.meta = ModelMeta{"pauli", ps.n_sites(), 0.0, 0.0, "chain"};
  out.terms = std::move(ps);
  return out;
}

}  // namespace chebgsee
