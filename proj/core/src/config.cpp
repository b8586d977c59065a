#include "chebgsee/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "chebgsee/errors.hpp"

namespace chebgsee {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ParameterError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ParameterError("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = v;
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError("config: " + what);
}

}  // namespace

NormalizedHamiltonian build_model(const ModelSpec& spec) {
  if (spec.model == "tfim1d") return tfim_1d(spec.L, spec.J, spec.h);
  if (spec.model == "tfim2d") return tfim_2d(spec.L, spec.J, spec.h);
  if (spec.model == "pauli_file") {
    std::ifstream in(spec.path);
    if (!in) throw ParameterError("config: cannot open Pauli file '" + spec.path.string() + "'");
    return from_pauli_sum(PauliSum::parse(in));
  }
  throw ParameterError("config: unknown model '" + spec.model + "' (expected tfim1d, tfim2d or pauli_file)");
}

nlohmann::json to_json(const ModelSpec& spec) {
  json j = {{"model", spec.model}, {"L", spec.L}, {"J", spec.J}, {"h", spec.h}};
  if (spec.model == "pauli_file") j["path"] = spec.path.string();
  return j;
}

nlohmann::json to_json(const ChebRunConfig& cfg) {
  return {{"chi_mps", cfg.chi_mps == kUnboundedBond ? json("inf") : json(cfg.chi_mps)},
          {"n_max", cfg.n_max},
          {"svd_tol", cfg.svd_tol},
          {"checkpoint_every", cfg.checkpoint_every},
          {"max_intermediate_bond", cfg.max_intermediate_bond}};
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  j["model"] = to_json(cfg.model);
  j["init"] = {{"chi_init", cfg.init.chi_init},
               {"sweeps", cfg.init.sweeps},
               {"conv_tol", cfg.init.conv_tol},
               {"local_eig_iters", cfg.init.local_eig_iters},
               {"guiding_state", cfg.guiding_state ? json(cfg.guiding_state->string()) : json(nullptr)}};
  j["moments"] = to_json(cfg.moments);
  if (cfg.lp) {
    j["lp"] = {{"n_fit", cfg.lp->n_fit},
               {"window", cfg.lp->window},
               {"ridge", cfg.lp->ridge},
               {"d_target", cfg.lp->d_target},
               {"stabilize", cfg.lp->stabilize}};
  } else {
    j["lp"] = nullptr;
  }
  j["gsee"] = {{"chi", opt(cfg.gsee.chi)},
               {"delta", opt(cfg.gsee.delta)},
               {"degree", opt(cfg.gsee.degree)},
               {"eta", opt(cfg.gsee.eta)}};
  j["output_dir"] = cfg.output_dir.string();
  j["seed"] = cfg.seed;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"model", "init", "moments", "lp", "gsee", "output_dir", "seed"}, "config");
  RunConfig cfg;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"model", "L", "J", "h", "path"}, "model");
    read(m, "model", cfg.model.model);
    read(m, "L", cfg.model.L);
    read(m, "J", cfg.model.J);
    read(m, "h", cfg.model.h);
    std::string path;
    read(m, "path", path);
    cfg.model.path = path;
  }
  if (j.contains("init")) {
    const auto& m = j.at("init");
    reject_unknown(m, {"chi_init", "sweeps", "conv_tol", "local_eig_iters", "guiding_state"}, "init");
    read(m, "chi_init", cfg.init.chi_init);
    read(m, "sweeps", cfg.init.sweeps);
    read(m, "conv_tol", cfg.init.conv_tol);
    read(m, "local_eig_iters", cfg.init.local_eig_iters);
    std::optional<std::string> g;
    read_opt(m, "guiding_state", g);
    if (g) cfg.guiding_state = *g;
  }
  if (j.contains("moments")) {
    const auto& m = j.at("moments");
    reject_unknown(m, {"chi_mps", "n_max", "svd_tol", "checkpoint_every", "max_intermediate_bond"}, "moments");
    if (m.contains("chi_mps") && m.at("chi_mps").is_string()) {
      require(m.at("chi_mps") == "inf", "moments.chi_mps must be a positive integer or \"inf\"");
      cfg.moments.chi_mps = kUnboundedBond;
    } else {
      long long chi = static_cast<long long>(cfg.moments.chi_mps);
      read(m, "chi_mps", chi);
      require(chi >= 0, "moments.chi_mps must be a positive integer or \"inf\"");
      cfg.moments.chi_mps = static_cast<std::size_t>(chi);
    }
    read(m, "n_max", cfg.moments.n_max);
    read(m, "svd_tol", cfg.moments.svd_tol);
    read(m, "checkpoint_every", cfg.moments.checkpoint_every);
    read(m, "max_intermediate_bond", cfg.moments.max_intermediate_bond);
  }
  if (j.contains("lp") && !j.at("lp").is_null()) {
    const auto& m = j.at("lp");
    reject_unknown(m, {"n_fit", "window", "ridge", "d_target", "stabilize"}, "lp");
    LpSettings lp;
    read(m, "n_fit", lp.n_fit);
    read(m, "window", lp.window);
    read(m, "ridge", lp.ridge);
    read(m, "d_target", lp.d_target);
    read(m, "stabilize", lp.stabilize);
    cfg.lp = lp;
  }
  if (j.contains("gsee")) {
    const auto& m = j.at("gsee");
    reject_unknown(m, {"chi", "delta", "degree", "eta"}, "gsee");
    read_opt(m, "chi", cfg.gsee.chi);
    read_opt(m, "delta", cfg.gsee.delta);
    read_opt(m, "degree", cfg.gsee.degree);
    read_opt(m, "eta", cfg.gsee.eta);
  }
  std::string out = cfg.output_dir.string();
  read(j, "output_dir", out);
  cfg.output_dir = out;
  read(j, "seed", cfg.seed);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open '" + path.string() + "'");
  try {
    return run_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParameterError("config: '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  const auto& m = cfg.model;
  require(m.model == "tfim1d" || m.model == "tfim2d" || m.model == "pauli_file",
          "model.model must be tfim1d, tfim2d or pauli_file");
  if (m.model != "pauli_file") {
    require(m.L >= (m.model == "tfim2d" ? 2u : 1u), "model.L too small");
    require(std::isfinite(m.J) && std::isfinite(m.h), "model.J and model.h must be finite");
    require(m.J != 0.0 || m.h != 0.0, "model.J and model.h cannot both be zero");
  } else {
    require(!m.path.empty(), "model.path is required for pauli_file");
  }
  require(cfg.init.chi_init >= 1, "init.chi_init must be at least 1");
  require(cfg.init.sweeps >= 1, "init.sweeps must be at least 1");
  require(cfg.init.local_eig_iters >= 2, "init.local_eig_iters must be at least 2");
  require(cfg.init.conv_tol >= 0.0, "init.conv_tol must be non-negative");
  require(cfg.moments.chi_mps >= 1, "moments.chi_mps must be at least 1");
  require(cfg.moments.n_max >= 1, "moments.n_max must be at least 1");
  require(cfg.moments.svd_tol >= 0.0, "moments.svd_tol must be non-negative");

  std::size_t available = 2 * cfg.moments.n_max;
  if (cfg.lp) {
    const std::size_t n_fit = cfg.lp->n_fit ? cfg.lp->n_fit : cfg.moments.n_max;
    require(2 * n_fit + 1 <= available + 1, "lp.n_fit needs at least 2 n_fit + 1 computed moments");
    require(n_fit + (cfg.lp->window ? cfg.lp->window : n_fit) <= available + 1, "lp.window too long for the moments");
    require(cfg.lp->ridge >= 0.0, "lp.ridge must be non-negative");
    require(cfg.lp->d_target > available, "lp.d_target must exceed 2 n_max");
    available = cfg.lp->d_target;
  }
  const auto& g = cfg.gsee;
  if (g.chi) require(*g.chi > 0.0 && *g.chi <= 1.0, "gsee.chi must lie in (0, 1]");
  if (g.degree) require(*g.degree >= 2 && *g.degree <= available, "gsee.degree must lie in [2, highest moment index]");
  if (g.delta) require(*g.delta > 0.0 && *g.delta < 1.0, "gsee.delta must lie in (0, 1)");
  if (g.eta) require(*g.eta > 0.0 && *g.eta < 0.5, "gsee.eta must lie in (0, 1/2)");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  return fnv1a_hex(j.dump());
}

}  // namespace chebgsee
