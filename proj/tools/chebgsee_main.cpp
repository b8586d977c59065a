#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "chebgsee/artifacts.hpp"
#include "chebgsee/config.hpp"
#include "chebgsee/dmrg.hpp"
#include "chebgsee/errors.hpp"
#include "chebgsee/filter.hpp"
#include "chebgsee/gsee.hpp"
#include "chebgsee/io.hpp"
#include "chebgsee/linear_prediction.hpp"
#include "chebgsee/oracle.hpp"
#include "chebgsee/pipeline.hpp"

namespace fs = std::filesystem;
using namespace chebgsee;
using nlohmann::json;

namespace {

void add_model_flags(CLI::App* cmd, ModelSpec& m) {
  cmd->add_option("--model", m.model, "tfim1d, tfim2d or pauli_file")
      ->check(CLI::IsMember({"tfim1d", "tfim2d", "pauli_file"}))
      ->capture_default_str();
  cmd->add_option("--L", m.L, "chain length, or side of the square lattice")->capture_default_str();
  cmd->add_option("--J", m.J, "ZZ coupling")->capture_default_str();
  cmd->add_option("--h", m.h, "transverse field")->capture_default_str();
  cmd->add_option("--pauli-file", m.path, "Pauli-sum text file (model pauli_file)");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Hash of the settings that determine a stand-alone subcommand's output.
std::string hash_of(const json& j) { return fnv1a_hex(j.dump()); }

struct PrepareInit {
  ModelSpec model;
  DmrgConfig dmrg;
  fs::path out = "init";

  void run() const {
    const auto H = build_model(model);
    const auto hash = hash_of({{"model", to_json(model)}, {"chi_init", dmrg.chi_init}, {"sweeps", dmrg.sweeps}});
    const auto r = dmrg_ground(H, dmrg);
    fs::create_directories(out);
    save_mps(out / "init.mps", r.state, {{"config_hash", hash}});
    json info = {{"energy", r.energy},
                 {"energy_raw", r.energy * H.scale},
                 {"converged", r.converged},
                 {"sweeps_run", r.sweeps_run},
                 {"max_bond", r.state.max_bond()},
                 {"config_hash", hash}};
    const std::size_t limit = dense_limit_from_env(kPipelineOracleSites);
    if (H.n_sites() <= limit) {
      const DenseSystem sys(H, limit);
      info["chi"] = overlap_chi(r.state, sys);
      info["lambda0"] = dense_ground(sys).energy;
    }
    write_json(out / "init.json", info);
    std::cout << info.dump(2) << '\n';
  }
};

struct FilterPoly {
  double c = 0.0, delta = 0.1, eta = 0.01;
  std::optional<std::size_t> degree;
  fs::path out = "filter.csv";

  void run() const {
    const std::size_t d = degree.value_or(filter_degree(delta, eta));
    const auto p = shifted_sign_cheb(c, delta, eta, d);
    const auto hash = hash_of({{"c", c}, {"delta", delta}, {"eta", eta}, {"degree", d}});
    write_coeffs_csv(out, p, hash);
    json meta = to_json(p.meta);
    meta["config_hash"] = hash;
    auto meta_path = out;
    write_json(meta_path.replace_extension(".json"), meta);
    std::cout << meta.dump(2) << '\n';
  }
};

struct Moments {
  fs::path config;
  std::optional<fs::path> out;
  std::optional<fs::path> state;
  bool resume = false;

  void run() const {
    RunConfig cfg = load_run_config(config);
    if (out) cfg.output_dir = *out;
    if (state) cfg.guiding_state = *state;
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto hash = config_hash(cfg);
    const auto H = build_model(cfg.model);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    Mps psi;
    if (cfg.guiding_state) {
      psi = load_guiding_state(*cfg.guiding_state);
      if (psi.size() != H.n_sites()) throw StructuralError("guiding state has the wrong number of sites");
    } else {
      psi = dmrg_ground(H, cfg.init).state;
    }
    DiagnosticsLog log;
    ChebRunHooks hooks;
    hooks.log = &log;
    if (cfg.moments.checkpoint_every > 0) hooks.checkpoint_dir = dir / "checkpoints";
    hooks.resume = resume;
    const auto seq = run_chebyshev(H, psi, cfg.moments, hooks);
    write_moments_csv(dir / "moments.csv", seq, hash);
    {
      std::ofstream diag(dir / "diagnostics.csv", std::ios::binary);
      diag << "# config_hash=" << hash << '\n';
      log.write_csv(diag);
    }
    const json manifest = {{"config", to_json(cfg)},
                           {"config_hash", hash},
                           {"model", {{"n_sites", H.n_sites()}, {"scale", H.scale}}},
                           {"chi_init", cfg.init.chi_init},
                           {"chi_mps", to_json(cfg.moments)["chi_mps"]},
                           {"n_max", cfg.moments.n_max},
                           {"max_bond", seq.bonds.empty() ? 0 : *std::max_element(seq.bonds.begin(), seq.bonds.end())},
                           {"wall_seconds", seconds_since(t0)}};
    write_json(dir / "manifest.json", manifest);
    std::cout << "wrote " << seq.size() << " moments to " << (dir / "moments.csv").string() << '\n';
  }
};

struct Extrapolate {
  fs::path in;
  fs::path out = "extrapolated.csv";
  std::size_t n_fit = 0;
  std::size_t window = 0;
  double ridge = kDefaultLpRidge;
  std::size_t d_target = 0;
  bool no_stabilize = false;

  void run() const {
    std::string hash;
    const auto seq = read_moments_csv(in, &hash);
    const std::size_t nf = n_fit ? n_fit : seq.computed() / 2;
    LpModel model = fit_lp(seq, nf, ridge, window);
    if (!no_stabilize) model = stabilize(model);
    const auto ext = extrapolate(seq, model, d_target);
    write_extrapolated_csv(out, ext, hash);
    json meta = to_json(model);
    meta["config_hash"] = hash;
    meta["d_target"] = d_target;
    auto meta_path = out;
    write_json(meta_path.replace_extension(".json"), meta);
    std::cout << "extrapolated " << ext.computed() << " -> " << ext.size() << " moments, residual rms "
              << model.residual_rms << '\n';
  }
};

struct Gsee {
  fs::path in;
  fs::path out = ".";
  double chi = 0.0;
  std::optional<double> delta;
  std::optional<std::size_t> degree;
  std::optional<double> eta;
  double scale = 1.0;

  void run() const {
    std::string hash;
    const auto seq = read_moments_csv(in, &hash);
    const std::size_t d = degree.value_or(seq.size() - 1);
    GseeOptions opts;
    opts.eta = eta;
    opts.scale_back = scale;
    const auto r = estimate_energy(seq, chi, delta.value_or(1.0 / static_cast<double>(d)), d, opts);
    json j = to_json(r);
    j["config_hash"] = hash;
    fs::create_directories(out);
    write_json(out / "gsee.json", j);
    write_cumulative_csv(out / "cumulative.csv", r.c_trace, hash);
    std::cout << j.dump(2) << '\n';
  }
};

struct Oracle {
  ModelSpec model;
  std::optional<fs::path> state;
  std::size_t degree = 0;
  fs::path out = "oracle";

  void run() const {
    const auto H = build_model(model);
    const DenseSystem sys(H);
    const auto g = dense_ground(sys);
    json j = {{"n_sites", H.n_sites()},
              {"scale", H.scale},
              {"lambda0", g.energy},
              {"lambda0_raw", g.energy * H.scale},
              {"degeneracy", g.degeneracy}};
    if (sys.has_full_spectrum()) {
      const auto& ev = sys.eigenvalues();
      j["spectrum"] = std::vector<double>(ev.data(), ev.data() + ev.size());
    }
    std::string hash = hash_of({{"model", to_json(model)}, {"degree", degree}});
    fs::create_directories(out);
    if (state) {
      const Mps psi = load_guiding_state(*state);
      if (psi.size() != H.n_sites()) throw StructuralError("state has the wrong number of sites");
      const auto v = to_dense(psi, sys.n_sites());
      j["chi"] = overlap_chi(v, sys);
      if (degree > 0) write_plain_moments_csv(out / "oracle_moments.csv", dense_cheb_moments(sys, v, degree), hash);
    } else if (degree > 0) {
      throw ParameterError("--degree needs --state");
    }
    j["config_hash"] = hash;
    write_json(out / "oracle.json", j);
    json shown = j;
    shown.erase("spectrum");
    std::cout << shown.dump(2) << '\n';
  }
};

struct Run {
  fs::path config;
  std::optional<fs::path> out;
  bool resume = false;

  void run() const {
    RunConfig cfg = load_run_config(config);
    if (out) cfg.output_dir = *out;
    PipelineOptions opts;
    opts.resume = resume;
    const auto s = run_pipeline(cfg, opts);
    json j = {{"dir", s.dir.string()}, {"config_hash", s.config_hash}, {"chi", s.chi}, {"gsee", to_json(s.gsee)}};
    if (s.lambda0) j["lambda0"] = *s.lambda0;
    std::cout << j.dump(2) << '\n';
  }
};

struct Compare {
  fs::path a, b;
  fs::path out = "compare";

  void run() const {
    const auto rep = compare_runs(a, b, out);
    std::cout << "common moments " << rep.common_moments << ", max diff " << rep.max_moment_diff << ", median diff "
              << rep.median_moment_diff << ", max C diff " << rep.max_cumulative_diff << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chebyshev tensor-network ground-state energy estimation"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  PrepareInit prep;
  auto* c_prep = app.add_subcommand("prepare-init", "DMRG guiding state");
  add_model_flags(c_prep, prep.model);
  c_prep->add_option("--chi-init", prep.dmrg.chi_init, "bond dimension")->capture_default_str();
  c_prep->add_option("--sweeps", prep.dmrg.sweeps, "maximum sweeps")->capture_default_str();
  c_prep->add_option("--out", prep.out, "output directory")->capture_default_str();

  FilterPoly fp;
  auto* c_fp = app.add_subcommand("filter-poly", "Chebyshev coefficients of the shifted sign filter");
  c_fp->add_option("--c", fp.c, "step position")->capture_default_str();
  c_fp->add_option("--delta", fp.delta, "gap width")->capture_default_str();
  c_fp->add_option("--eta", fp.eta, "accuracy")->capture_default_str();
  c_fp->add_option("--degree", fp.degree, "degree (default from delta and eta)");
  c_fp->add_option("--out", fp.out, "coefficient CSV; metadata goes next to it as .json")->capture_default_str();

  Moments mom;
  auto* c_mom = app.add_subcommand("moments", "Chebyshev moments from a run config");
  c_mom->add_option("--config", mom.config, "run config JSON")->required()->check(CLI::ExistingFile);
  c_mom->add_option("--out", mom.out, "run directory (overrides output_dir)");
  c_mom->add_option("--state", mom.state, "guiding state container (skips DMRG)");
  c_mom->add_flag("--resume", mom.resume, "continue from checkpoints");

  Extrapolate ex;
  auto* c_ex = app.add_subcommand("extrapolate", "linear-prediction extension of a moment CSV");
  c_ex->add_option("--in", ex.in, "moments CSV")->required()->check(CLI::ExistingFile);
  c_ex->add_option("--out", ex.out, "extended CSV")->capture_default_str();
  c_ex->add_option("--n-fit", ex.n_fit, "model order (default half the moments)");
  c_ex->add_option("--window", ex.window, "fit targets (default n-fit)");
  c_ex->add_option("--ridge", ex.ridge, "relative ridge")->capture_default_str();
  c_ex->add_option("--d-target", ex.d_target, "highest moment index")->required();
  c_ex->add_flag("--no-stabilize", ex.no_stabilize, "keep roots outside the unit circle");

  Gsee gs;
  auto* c_gs = app.add_subcommand("gsee", "energy interval from a moment CSV");
  c_gs->add_option("--in", gs.in, "moments CSV")->required()->check(CLI::ExistingFile);
  c_gs->add_option("--out", gs.out, "output directory")->capture_default_str();
  c_gs->add_option("--chi", gs.chi, "overlap lower bound")->required();
  c_gs->add_option("--delta", gs.delta, "resolution (default 1/degree)");
  c_gs->add_option("--degree", gs.degree, "filter degree (default all moments)");
  c_gs->add_option("--eta", gs.eta, "filter accuracy (default chi^2/8)");
  c_gs->add_option("--scale", gs.scale, "Hamiltonian scale for raw energies")->capture_default_str();

  Oracle orc;
  auto* c_orc = app.add_subcommand("oracle", "exact dense reference values");
  add_model_flags(c_orc, orc.model);
  c_orc->add_option("--state", orc.state, "state container for overlap and moments");
  c_orc->add_option("--degree", orc.degree, "exact moments up to this index")->capture_default_str();
  c_orc->add_option("--out", orc.out, "output directory")->capture_default_str();

  Run run;
  auto* c_run = app.add_subcommand("run", "full pipeline from a run config");
  c_run->add_option("--config", run.config, "run config JSON")->required()->check(CLI::ExistingFile);
  c_run->add_option("--out", run.out, "run directory (overrides output_dir)");
  c_run->add_flag("--resume", run.resume, "continue the moment stage from checkpoints");

  Compare cmp;
  auto* c_cmp = app.add_subcommand("compare", "compare two run directories");
  c_cmp->add_option("run_a", cmp.a)->required()->check(CLI::ExistingDirectory);
  c_cmp->add_option("run_b", cmp.b)->required()->check(CLI::ExistingDirectory);
  c_cmp->add_option("--out", cmp.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*c_prep) prep.run();
    else if (*c_fp) fp.run();
    else if (*c_mom) mom.run();
    else if (*c_ex) ex.run();
    else if (*c_gs) gs.run();
    else if (*c_orc) orc.run();
    else if (*c_run) run.run();
    else if (*c_cmp) cmp.run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
