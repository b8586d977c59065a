#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chebgsee/chebyshev.hpp"
#include "chebgsee/filter.hpp"
#include "chebgsee/gsee.hpp"
#include "chebgsee/linear_prediction.hpp"

namespace chebgsee {

// Every CSV starts with a "# config_hash=<hex>" line. Values use %.17g so a
// write/read cycle is exact.

/// `k,mu,cos_err,trunc_err`; the error columns of row k belong to Chebyshev
/// vector ceil(k / 2), the last vector the moment depends on.
void write_moments_csv(const std::filesystem::path& path, const MomentSequence& seq, const std::string& hash);
/// `k,mu,source` with source computed|lp.
void write_extrapolated_csv(const std::filesystem::path& path, const MomentSequence& seq, const std::string& hash);
/// `k,mu`.
void write_plain_moments_csv(const std::filesystem::path& path, const std::vector<double>& mu, const std::string& hash);
/// `x,C`.
void write_cumulative_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& trace,
                          const std::string& hash);
/// `k,a_k`.
void write_coeffs_csv(const std::filesystem::path& path, const ChebCoeffs& p, const std::string& hash);

/// Reads any of the moment CSV layouts above. Rows must be k = 0, 1, 2, ...
/// Throws ParameterError on malformed files.
MomentSequence read_moments_csv(const std::filesystem::path& path, std::string* hash = nullptr);
std::vector<std::pair<double, double>> read_cumulative_csv(const std::filesystem::path& path);

nlohmann::json to_json(const GseeResult& r);
nlohmann::json to_json(const FilterMeta& m);
nlohmann::json to_json(const LpModel& m);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace chebgsee
