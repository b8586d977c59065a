#include "chebgsee/chebyshev.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "chebgsee/errors.hpp"
#include "chebgsee/io.hpp"

namespace chebgsee {

namespace {

constexpr const char* kStage = "chebyshev";

void validate(const ChebRunConfig& cfg) {
  if (cfg.chi_mps < 1) throw ParameterError("chebyshev: chi_mps must be at least 1");
  if (cfg.n_max < 1) throw ParameterError("chebyshev: n_max must be at least 1");
  if (!(cfg.svd_tol >= 0.0)) throw ParameterError("chebyshev: svd_tol must be non-negative");
  if (cfg.overlap && !(*cfg.overlap > 0.0 && *cfg.overlap <= 1.0)) {
    throw ParameterError("chebyshev: overlap must lie in (0, 1]");
  }
}

std::size_t combined_bond(const Mpo& H, const Mps& t_prev, const Mps* t_prev2) {
  const auto wd = H.bond_dims();
  const auto pd = t_prev.bond_dims();
  std::size_t worst = 0;
  for (std::size_t e = 0; e < pd.size(); ++e) {
    std::size_t d = wd[e] * pd[e];
    if (t_prev2 != nullptr && e > 0 && e + 1 < pd.size()) d += t_prev2->bond_dims()[e];
    worst = std::max(worst, d);
  }
  return worst;
}

std::pair<Mps, StepReport> finish_step(Mps raw, std::size_t k, const ChebRunConfig& cfg) {
  StepReport rep;
  rep.k = k;
  rep.bond_before = raw.max_bond();
  if (!cfg.compress) {
    rep.norm_before = norm(raw);
    rep.bond_after = rep.bond_before;
    return {std::move(raw), rep};
  }
  auto tr = truncate(raw, cfg.chi_mps, cfg.svd_tol);
  rep.trunc_error = tr.report.error;
  rep.norm_before = tr.report.norm_before;
  rep.bond_after = tr.state.max_bond();
  const double kept = norm(tr.state);
  if (kept > 0.0 && rep.norm_before > 0.0) {
    const Complex overlap = inner(tr.state, raw);
    rep.cos_error = std::abs(1.0 - overlap / (kept * rep.norm_before));
  }
  return {std::move(tr.state), rep};
}

void check_capacity(std::size_t bond, const ChebRunConfig& cfg, std::size_t k) {
  if (bond > cfg.max_intermediate_bond) {
    throw CapacityError("chebyshev: step " + std::to_string(k) + " needs intermediate bond " + std::to_string(bond) +
                        " above the limit " + std::to_string(cfg.max_intermediate_bond));
  }
}

struct Checkpoint {
  std::size_t k = 0;
  MomentSequence seq;
  Mps t_prev, t_cur;
};

nlohmann::json config_json(const ChebRunConfig& cfg) {
  return {{"chi_mps", cfg.chi_mps == kUnboundedBond ? nlohmann::json(nullptr) : nlohmann::json(cfg.chi_mps)},
          {"n_max", cfg.n_max},
          {"svd_tol", cfg.svd_tol},
          {"compress", cfg.compress}};
}

void write_checkpoint(const std::filesystem::path& dir, std::size_t k, const MomentSequence& seq, const Mps& t_prev,
                      const Mps& t_cur, const ChebRunConfig& cfg) {
  std::filesystem::create_directories(dir);
  save_mps(dir / "t_prev.mps.tmp", t_prev, {{"k", std::to_string(k - 1)}});
  save_mps(dir / "t_cur.mps.tmp", t_cur, {{"k", std::to_string(k)}});
  nlohmann::json j;
  j["k"] = k;
  j["config"] = config_json(cfg);
  j["moments"] = std::vector<double>(seq.moments.begin(), seq.moments.begin() + static_cast<std::ptrdiff_t>(2 * k + 1));
  j["cosine_errors"] = seq.cosine_errors;
  j["trunc_errors"] = seq.trunc_errors;
  j["bonds"] = seq.bonds;
  {
    std::ofstream out(dir / "checkpoint.json.tmp");
    out << j.dump();
    if (!out) throw ParameterError("chebyshev: cannot write checkpoint in " + dir.string());
  }
  std::filesystem::rename(dir / "t_prev.mps.tmp", dir / "t_prev.mps");
  std::filesystem::rename(dir / "t_cur.mps.tmp", dir / "t_cur.mps");
  std::filesystem::rename(dir / "checkpoint.json.tmp", dir / "checkpoint.json");
}

std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& dir, const ChebRunConfig& cfg) {
  const auto meta = dir / "checkpoint.json";
  if (!std::filesystem::exists(meta)) return std::nullopt;
  nlohmann::json j;
  try {
    std::ifstream in(meta);
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("chebyshev: unreadable checkpoint: ") + e.what(), 0);
  }
  if (j.at("config") != config_json(cfg)) {
    throw ParameterError("chebyshev: checkpoint in " + dir.string() + " was written with a different configuration");
  }
  Checkpoint cp;
  cp.k = j.at("k").get<std::size_t>();
  if (cp.k < 1 || cp.k > cfg.n_max) throw FormatError("chebyshev: checkpoint step out of range", 0);
  cp.seq.moments = j.at("moments").get<std::vector<double>>();
  cp.seq.cosine_errors = j.at("cosine_errors").get<std::vector<double>>();
  cp.seq.trunc_errors = j.at("trunc_errors").get<std::vector<double>>();
  cp.seq.bonds = j.at("bonds").get<std::vector<std::size_t>>();
  if (cp.seq.moments.size() != 2 * cp.k + 1 || cp.seq.cosine_errors.size() != cp.k + 1) {
    throw FormatError("chebyshev: checkpoint arrays do not match its step", 0);
  }
  cp.t_prev = load_mps(dir / "t_prev.mps");
  cp.t_cur = load_mps(dir / "t_cur.mps");
  return cp;
}

void record(const ChebRunHooks& hooks, const StepReport& rep, std::optional<double> budget) {
  if (hooks.log == nullptr) return;
  if (budget && rep.trunc_error > *budget) {
    hooks.log->warn(kStage, rep.k, "trunc_budget_exceeded", rep.trunc_error,
                    "truncation error above the degree/overlap budget; run continues");
  }
}

}  // namespace

std::vector<std::size_t> bond_growth_trace(std::size_t growth_factor, std::size_t d0, std::size_t k) {
  std::vector<std::size_t> out;
  out.push_back(d0);
  if (k >= 1) out.push_back(growth_factor * d0);
  for (std::size_t i = 2; i <= k; ++i) out.push_back(growth_factor * out[i - 1] + out[i - 2]);
  return out;
}

std::vector<std::size_t> bond_growth_trace(const NormalizedHamiltonian& H, std::size_t d0, std::size_t k) {
  return bond_growth_trace(H.mpo.growth_factor(), d0, k);
}

double truncation_budget(double overlap, std::size_t degree) {
  if (degree == 0) throw ParameterError("truncation_budget: degree must be positive");
  const double d = static_cast<double>(degree);
  return 3.0 * std::numbers::pi * overlap * overlap / (16.0 * d * d * d);
}

std::pair<Mps, StepReport> cheb_first_step(const Mpo& H, const Mps& t0, const ChebRunConfig& cfg) {
  validate(cfg);
  if (H.size() != t0.size()) throw StructuralError("cheb_first_step: site count mismatch");
  check_capacity(combined_bond(H, t0, nullptr), cfg, 1);
  return finish_step(apply_mpo(H, t0), 1, cfg);
}

std::pair<Mps, StepReport> cheb_step(const Mpo& H, const Mps& t_prev, const Mps& t_prev2, const ChebRunConfig& cfg) {
  validate(cfg);
  if (H.size() != t_prev.size() || H.size() != t_prev2.size()) throw StructuralError("cheb_step: site count mismatch");
  check_capacity(combined_bond(H, t_prev, &t_prev2), cfg, 0);
  return finish_step(add(apply_mpo(H, t_prev), t_prev2, 2.0, -1.0), 0, cfg);
}

std::pair<double, double> moments_from_vectors(const Mps& t_k, const Mps& t_k_plus_1, double mu0, double mu1,
                                               std::size_t k) {
  if (k < 1) throw ParameterError("moments_from_vectors: k must be at least 1");
  const double even = 2.0 * inner(t_k, t_k).real() - mu0;
  const double odd = 2.0 * inner(t_k_plus_1, t_k).real() - mu1;
  return {even, odd};
}

MomentSequence run_chebyshev(const NormalizedHamiltonian& H, const Mps& psi0, const ChebRunConfig& cfg,
                             const ChebRunHooks& hooks) {
  return run_chebyshev(H.mpo, psi0, cfg, hooks);
}

MomentSequence run_chebyshev(const Mpo& H, const Mps& psi0, const ChebRunConfig& cfg, const ChebRunHooks& hooks) {
  validate(cfg);
  if (H.size() != psi0.size()) throw StructuralError("run_chebyshev: site count mismatch");
  const double n0 = norm(psi0);
  if (std::abs(n0 - 1.0) > 1e-10) {
    throw PreconditionError("run_chebyshev: initial state must be normalized (norm " + std::to_string(n0) + ")");
  }
  std::optional<double> budget;
  if (cfg.overlap && cfg.target_degree) {
    budget = truncation_budget(*cfg.overlap, *cfg.target_degree);
    if (hooks.log) hooks.log->warn(kStage, 0, "trunc_budget", *budget, "per-step truncation error budget");
  }

  MomentSequence seq;
  Mps t_prev, t_cur;
  std::size_t k = 0;
  std::optional<Checkpoint> cp;
  if (hooks.resume && hooks.checkpoint_dir) cp = read_checkpoint(*hooks.checkpoint_dir, cfg);
  double mu0 = 0.0, mu1 = 0.0;
  if (cp) {
    seq = std::move(cp->seq);
    t_prev = std::move(cp->t_prev);
    t_cur = std::move(cp->t_cur);
    k = cp->k;
    mu0 = seq.moments[0];
    mu1 = seq.moments[1];
    seq.moments.resize(2 * cfg.n_max + 1, 0.0);
  } else {
    seq.moments.assign(2 * cfg.n_max + 1, 0.0);
    t_prev = psi0;
    if (hooks.on_vector) hooks.on_vector(0, t_prev);
    seq.cosine_errors.push_back(0.0);
    seq.trunc_errors.push_back(0.0);
    seq.bonds.push_back(psi0.max_bond());
    auto [t1, rep] = cheb_first_step(H, t_prev, cfg);
    record(hooks, rep, budget);
    t_cur = std::move(t1);
    k = 1;
    if (hooks.on_vector) hooks.on_vector(1, t_cur);
    seq.cosine_errors.push_back(rep.cos_error);
    seq.trunc_errors.push_back(rep.trunc_error);
    seq.bonds.push_back(t_cur.max_bond());
    mu0 = inner(t_prev, t_prev).real();
    mu1 = inner(t_prev, t_cur).real();
    seq.moments[0] = mu0;
    seq.moments[1] = mu1;
    seq.moments[2] = 2.0 * inner(t_cur, t_cur).real() - mu0;
    if (cfg.checkpoint_every > 0 && hooks.checkpoint_dir && k % cfg.checkpoint_every == 0) {
      write_checkpoint(*hooks.checkpoint_dir, k, seq, t_prev, t_cur, cfg);
    }
  }

  while (k < cfg.n_max) {
    if (hooks.stop_after && k >= *hooks.stop_after) {
      seq.moments.resize(2 * k + 1);
      return seq;
    }
    auto [next, rep] = cheb_step(H, t_cur, t_prev, cfg);
    ++k;
    rep.k = k;
    record(hooks, rep, budget);
    if (hooks.on_vector) hooks.on_vector(k, next);
    seq.cosine_errors.push_back(rep.cos_error);
    seq.trunc_errors.push_back(rep.trunc_error);
    seq.bonds.push_back(next.max_bond());
    seq.moments[2 * k - 1] = 2.0 * inner(next, t_cur).real() - mu1;
    seq.moments[2 * k] = 2.0 * inner(next, next).real() - mu0;
    t_prev = std::move(t_cur);
    t_cur = std::move(next);
    if (cfg.checkpoint_every > 0 && hooks.checkpoint_dir && k % cfg.checkpoint_every == 0) {
      write_checkpoint(*hooks.checkpoint_dir, k, seq, t_prev, t_cur, cfg);
    }
  }
  return seq;
}

}  // namespace chebgsee
