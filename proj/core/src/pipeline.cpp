#include "chebgsee/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "chebgsee/artifacts.hpp"
#include "chebgsee/errors.hpp"
#include "chebgsee/io.hpp"
#include "chebgsee/linear_prediction.hpp"
#include "chebgsee/oracle.hpp"

namespace chebgsee {

using nlohmann::json;

namespace {

const char* kind_name(Error::Kind k) {
  switch (k) {
    case Error::Kind::Structural:
      return "structural";
    case Error::Kind::Parameter:
      return "parameter";
    case Error::Kind::Precondition:
      return "precondition";
    case Error::Kind::Domain:
      return "domain";
    case Error::Kind::Format:
      return "format";
    case Error::Kind::Capacity:
      return "capacity";
    case Error::Kind::Numerical:
      return "numerical";
  }
  return "unknown";
}

class Manifest {
 public:
  Manifest(std::filesystem::path path, const RunConfig& cfg, const std::string& hash) : path_(std::move(path)) {
    j_["config"] = to_json(cfg);
    j_["config_hash"] = hash;
    j_["stages"] = json::array();
    j_["results"] = json::object();
  }

  json& results() { return j_["results"]; }
  json& root() { return j_; }

  template <class F>
  void stage(const std::string& name, DiagnosticsLog& log, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    try {
      fn();
    } catch (const Error& e) {
      fail(name, kind_name(e.kind()), e.what(), seconds(), log);
      throw;
    } catch (const std::exception& e) {
      fail(name, "internal", e.what(), seconds(), log);
      throw;
    }
    j_["stages"].push_back({{"name", name}, {"status", "ok"}, {"seconds", seconds()}});
    write();
  }

  void write() const { write_json(path_, j_); }

 private:
  void fail(const std::string& name, const std::string& kind, const std::string& what, double secs, DiagnosticsLog& log) {
    j_["stages"].push_back({{"name", name}, {"status", "failed"}, {"seconds", secs}});
    j_["error"] = {{"stage", name}, {"kind", kind}, {"message", what}};
    log.warn(name, 0, "error", 0.0, what);
    write();
  }

  std::filesystem::path path_;
  json j_;
};

void write_diagnostics(const std::filesystem::path& path, const DiagnosticsLog& log, const std::string& hash) {
  std::ofstream out(path, std::ios::binary);
  out << "# config_hash=" << hash << '\n';
  log.write_csv(out);
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

RunSummary run_pipeline(const RunConfig& cfg, const PipelineOptions& opts) {
  validate(cfg);
  RunSummary s;
  s.dir = cfg.output_dir;
  s.config_hash = config_hash(cfg);
  std::filesystem::create_directories(s.dir);
  const auto& dir = s.dir;
  const auto& hash = s.config_hash;

  DiagnosticsLog log;
  Manifest manifest(dir / "manifest.json", cfg, hash);
  manifest.write();
  struct Flush {
    std::filesystem::path p;
    const DiagnosticsLog& log;
    const std::string& hash;
    ~Flush() {
      try {
        write_diagnostics(p, log, hash);
      } catch (...) {
      }
    }
  } flush{dir / "diagnostics.csv", log, hash};

  const std::size_t oracle_limit = opts.oracle_limit.value_or(dense_limit_from_env(kPipelineOracleSites));
  NormalizedHamiltonian H;
  manifest.stage("model", log, [&] {
    H = build_model(cfg.model);
    manifest.root()["model"] = {{"n_sites", H.n_sites()},
                                {"scale", H.scale},
                                {"terms", H.terms.size()},
                                {"mpo_bond", H.mpo.growth_factor()},
                                {"ordering", H.meta.ordering}};
    if (!cfg.gsee.chi && H.n_sites() > oracle_limit) {
      throw ParameterError("gsee.chi must be given for systems beyond the oracle limit (" +
                           std::to_string(oracle_limit) + " sites)");
    }
  });
  const bool have_oracle = H.n_sites() <= oracle_limit;

  Mps psi;
  manifest.stage("init", log, [&] {
    json info;
    if (cfg.guiding_state) {
      psi = load_guiding_state(*cfg.guiding_state);
      if (psi.size() != H.n_sites()) throw StructuralError("guiding state has the wrong number of sites");
      info["source"] = cfg.guiding_state->string();
    } else {
      const auto r = dmrg_ground(H, cfg.init);
      psi = r.state;
      info["source"] = "dmrg";
      info["converged"] = r.converged;
      info["sweeps_run"] = r.sweeps_run;
      info["sweep_energies"] = r.sweep_energies;
      for (std::size_t i = 0; i < r.sweep_energies.size(); ++i) log.append({"init", i + 1, "sweep_energy", r.sweep_energies[i], ""});
    }
    s.init_energy = expectation(psi, H.mpo).real();
    info["energy"] = s.init_energy;
    info["energy_raw"] = s.init_energy * H.scale;
    info["max_bond"] = psi.max_bond();
    info["config_hash"] = hash;
    save_mps(dir / "init.mps", psi, {{"config_hash", hash}, {"energy", std::to_string(s.init_energy)}});
    write_json(dir / "init.json", info);
    manifest.results()["init_energy"] = s.init_energy;
  });

  std::optional<DenseSystem> oracle;
  if (have_oracle) {
    manifest.stage("oracle", log, [&] {
      oracle.emplace(H, oracle_limit);
      const auto g = dense_ground(*oracle);
      s.lambda0 = g.energy;
      s.chi = overlap_chi(psi, *oracle);
      manifest.results()["lambda0"] = g.energy;
      manifest.results()["lambda0_raw"] = g.energy * H.scale;
      manifest.results()["chi_oracle"] = s.chi;
      json info = json::parse(std::ifstream(dir / "init.json"));
      info["chi"] = s.chi;
      write_json(dir / "init.json", info);
    });
  }
  if (cfg.gsee.chi) s.chi = *cfg.gsee.chi;

  const std::size_t available = cfg.lp ? cfg.lp->d_target : 2 * cfg.moments.n_max;
  const std::size_t degree = cfg.gsee.degree.value_or(available);

  manifest.stage("moments", log, [&] {
    ChebRunConfig mc = cfg.moments;
    mc.overlap = s.chi;
    mc.target_degree = degree;
    ChebRunHooks hooks;
    hooks.log = &log;
    if (mc.checkpoint_every > 0) hooks.checkpoint_dir = dir / "checkpoints";
    hooks.resume = opts.resume;
    s.moments = run_chebyshev(H, psi, mc, hooks);
    write_moments_csv(dir / "moments.csv", s.moments, hash);
    manifest.results()["max_bond"] = *std::max_element(s.moments.bonds.begin(), s.moments.bonds.end());
    if (oracle) {
      const auto exact = dense_cheb_moments(*oracle, to_dense(psi, oracle->n_sites()), s.moments.size() - 1);
      write_plain_moments_csv(dir / "oracle_moments.csv", exact, hash);
      const auto err = moment_error_profile(exact, s.moments);
      manifest.results()["max_moment_error"] = *std::max_element(err.begin(), err.end());
      manifest.results()["median_moment_error"] = median(err);
    }
  });

  if (cfg.lp) {
    manifest.stage("extrapolate", log, [&] {
      const std::size_t n_fit = cfg.lp->n_fit ? cfg.lp->n_fit : cfg.moments.n_max;
      LpModel model = fit_lp(s.moments, n_fit, cfg.lp->ridge, cfg.lp->window);
      if (cfg.lp->stabilize) model = stabilize(model);
      log.append({"extrapolate", 0, "lp_residual_rms", model.residual_rms, ""});
      log.append({"extrapolate", 0, "lp_reflected_roots", static_cast<double>(model.reflected_roots), ""});
      s.moments = extrapolate(s.moments, model, cfg.lp->d_target);
      write_extrapolated_csv(dir / "extrapolated.csv", s.moments, hash);
      manifest.results()["lp"] = to_json(model);
    });
  }

  manifest.stage("gsee", log, [&] {
    const double delta = cfg.gsee.delta.value_or(1.0 / static_cast<double>(degree));
    GseeOptions go;
    go.eta = cfg.gsee.eta;
    go.scale_back = H.scale;
    go.log = &log;
    s.gsee = estimate_energy(s.moments, s.chi, delta, degree, go);
    json j = to_json(s.gsee);
    j["config_hash"] = hash;
    if (s.lambda0) {
      j["oracle_lambda0"] = *s.lambda0;
      j["contains_oracle_lambda0"] = s.gsee.lo <= *s.lambda0 && *s.lambda0 <= s.gsee.hi;
    }
    write_json(dir / "gsee.json", j);
    write_cumulative_csv(dir / "cumulative.csv", s.gsee.c_trace, hash);
    manifest.results()["gsee"] = to_json(s.gsee);
  });
  return s;
}

CompareReport compare_runs(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                           const std::filesystem::path& out_dir) {
  auto moments_of = [](const std::filesystem::path& d) {
    return std::filesystem::exists(d / "extrapolated.csv") ? read_moments_csv(d / "extrapolated.csv")
                                                           : read_moments_csv(d / "moments.csv");
  };
  const MomentSequence a = moments_of(run_a), b = moments_of(run_b);
  CompareReport rep;
  rep.common_moments = std::min(a.size(), b.size());

  std::vector<double> diffs(rep.common_moments);
  {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "moment_diff.csv");
    out << "k,mu_a,mu_b,diff\n";
    char buf[160];
    for (std::size_t k = 0; k < rep.common_moments; ++k) {
      diffs[k] = std::abs(a.moments[k] - b.moments[k]);
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, a.moments[k], b.moments[k], diffs[k]);
      out << buf;
    }
  }
  rep.max_moment_diff = diffs.empty() ? 0.0 : *std::max_element(diffs.begin(), diffs.end());
  rep.median_moment_diff = median(diffs);

  auto oracle_median = [](const std::filesystem::path& d, const MomentSequence& m) -> std::optional<double> {
    if (!std::filesystem::exists(d / "oracle_moments.csv")) return std::nullopt;
    const auto exact = read_moments_csv(d / "oracle_moments.csv");
    const std::size_t n = std::min(exact.size(), m.computed());
    std::vector<double> e(n);
    for (std::size_t k = 0; k < n; ++k) e[k] = std::abs(exact.moments[k] - m.moments[k]);
    return median(e);
  };
  rep.median_oracle_diff_a = oracle_median(run_a, a);
  rep.median_oracle_diff_b = oracle_median(run_b, b);

  json ja = read_json(run_a / "gsee.json"), jb = read_json(run_b / "gsee.json");
  if (std::filesystem::exists(run_a / "cumulative.csv") && std::filesystem::exists(run_b / "cumulative.csv")) {
    const auto ca = read_cumulative_csv(run_a / "cumulative.csv");
    const auto cb = read_cumulative_csv(run_b / "cumulative.csv");
    if (ca.size() != cb.size()) throw ParameterError("compare: cumulative scans use different grids");
    std::ofstream out(out_dir / "cumulative_overlay.csv");
    out << "x,C_a,C_b\n";
    char buf[160];
    for (std::size_t i = 0; i < ca.size(); ++i) {
      if (std::abs(ca[i].first - cb[i].first) > 1e-12) throw ParameterError("compare: cumulative scans use different grids");
      rep.max_cumulative_diff = std::max(rep.max_cumulative_diff, std::abs(ca[i].second - cb[i].second));
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", ca[i].first, ca[i].second, cb[i].second);
      out << buf;
    }
  }

  // Energy against degree with delta = 1 / d, each run with its own chi.
  const std::size_t top = rep.common_moments - 1;
  for (std::size_t d = 25; d <= top; d *= 2) rep.degrees.push_back(d);
  if (top >= 2 && (rep.degrees.empty() || rep.degrees.back() != top)) rep.degrees.push_back(top);
  auto energy = [](const MomentSequence& m, double chi, std::size_t d) {
    try {
      return estimate_energy(std::span<const double>(m.moments.data(), d + 1), chi, 1.0 / static_cast<double>(d), d)
          .midpoint();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::quiet_NaN();
    } catch (const ParameterError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const double chi_a = ja.at("chi").get<double>(), chi_b = jb.at("chi").get<double>();
  {
    std::ofstream out(out_dir / "energy_vs_degree.csv");
    out << "degree,energy_a,energy_b\n";
    char buf[160];
    for (const auto d : rep.degrees) {
      rep.energy_a.push_back(energy(a, chi_a, d));
      rep.energy_b.push_back(energy(b, chi_b, d));
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", d, rep.energy_a.back(), rep.energy_b.back());
      out << buf;
    }
  }

  auto maybe = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  write_json(out_dir / "compare.json", {{"run_a", run_a.string()},
                                         {"run_b", run_b.string()},
                                         {"common_moments", rep.common_moments},
                                         {"max_moment_diff", rep.max_moment_diff},
                                         {"median_moment_diff", rep.median_moment_diff},
                                         {"median_oracle_diff_a", maybe(rep.median_oracle_diff_a)},
                                         {"median_oracle_diff_b", maybe(rep.median_oracle_diff_b)},
                                         {"max_cumulative_diff", rep.max_cumulative_diff},
                                         {"gsee_a", ja},
                                         {"gsee_b", jb}});
  return rep;
}

}  // namespace chebgsee
