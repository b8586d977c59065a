#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "chebgsee/chebyshev.hpp"
#include "chebgsee/dmrg.hpp"
#include "chebgsee/hamiltonians.hpp"

namespace chebgsee {

struct ModelSpec {
  std::string model = "tfim1d";  // tfim1d | tfim2d | pauli_file
  std::size_t L = 10;
  double J = 1.0;
  double h = 1.0;
  std::filesystem::path path;  // pauli_file only
};

struct LpSettings {
  std::size_t n_fit = 0;  // 0: half of the computed moments
  std::size_t window = 0;  // 0: n_fit targets
  double ridge = 1e-10;
  std::size_t d_target = 0;
  bool stabilize = true;
};

struct GseeSettings {
  std::optional<double> chi;     // default: oracle overlap when the system is small enough
  std::optional<double> delta;   // default 1 / degree
  std::optional<std::size_t> degree;  // default: highest available moment
  std::optional<double> eta;     // default chi^2 / 8
};

struct RunConfig {
  ModelSpec model;
  DmrgConfig init;
  std::optional<std::filesystem::path> guiding_state;  // skip DMRG and load this state
  ChebRunConfig moments;
  std::optional<LpSettings> lp;
  GseeSettings gsee;
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 0;
};

/// Builds the normalized Hamiltonian named by `spec`.
NormalizedHamiltonian build_model(const ModelSpec& spec);

/// Throws ParameterError on any value a later stage would reject.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys take defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical JSON without output_dir, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(const std::string& bytes);

nlohmann::json to_json(const ChebRunConfig& cfg);
nlohmann::json to_json(const ModelSpec& spec);

}  // namespace chebgsee
