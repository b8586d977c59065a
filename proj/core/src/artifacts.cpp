#include "chebgsee/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "chebgsee/errors.hpp"

namespace chebgsee {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, const std::string& hash) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write '" + path.string() + "'");
  if (!hash.empty()) out << "# config_hash=" << hash << '\n';
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParameterError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return v;
}

struct Table {
  std::string hash;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# config_hash=";
      if (line.rfind(key, 0) == 0) t.hash = line.substr(key.size());
      continue;
    }
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw ParameterError(path.string() + ":" + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                           " columns");
    }
    t.rows.push_back(std::move(cells));
    t.line_no.push_back(n);
  }
  if (t.header.empty()) throw ParameterError("'" + path.string() + "' has no header");
  return t;
}

std::ptrdiff_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

}  // namespace

void write_moments_csv(const std::filesystem::path& path, const MomentSequence& seq, const std::string& hash) {
  auto out = open_out(path, hash);
  out << "k,mu,cos_err,trunc_err\n";
  for (std::size_t k = 0; k < seq.computed(); ++k) {
    const std::size_t v = (k + 1) / 2;
    const double ce = v < seq.cosine_errors.size() ? seq.cosine_errors[v] : 0.0;
    const double te = v < seq.trunc_errors.size() ? seq.trunc_errors[v] : 0.0;
    out << k << ',' << num(seq.moments[k]) << ',' << num(ce) << ',' << num(te) << '\n';
  }
}

void write_extrapolated_csv(const std::filesystem::path& path, const MomentSequence& seq, const std::string& hash) {
  auto out = open_out(path, hash);
  out << "k,mu,source\n";
  for (std::size_t k = 0; k < seq.size(); ++k)
    out << k << ',' << num(seq.moments[k]) << ',' << (k < seq.computed() ? "computed" : "lp") << '\n';
}

void write_plain_moments_csv(const std::filesystem::path& path, const std::vector<double>& mu, const std::string& hash) {
  auto out = open_out(path, hash);
  out << "k,mu\n";
  for (std::size_t k = 0; k < mu.size(); ++k) out << k << ',' << num(mu[k]) << '\n';
}

void write_cumulative_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& trace,
                          const std::string& hash) {
  auto out = open_out(path, hash);
  out << "x,C\n";
  for (const auto& [x, c] : trace) out << num(x) << ',' << num(c) << '\n';
}

void write_coeffs_csv(const std::filesystem::path& path, const ChebCoeffs& p, const std::string& hash) {
  auto out = open_out(path, hash);
  out << "k,a_k\n";
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) out << k << ',' << num(p.coeffs[k]) << '\n';
}

MomentSequence read_moments_csv(const std::filesystem::path& path, std::string* hash) {
  const Table t = read_table(path);
  const auto ck = column(t, "k"), cmu = column(t, "mu");
  if (ck < 0 || cmu < 0) throw ParameterError("'" + path.string() + "' lacks k and mu columns");
  const auto cce = column(t, "cos_err"), cte = column(t, "trunc_err"), csrc = column(t, "source");
  MomentSequence seq;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const double k = parse_double(row[static_cast<std::size_t>(ck)], path, t.line_no[r]);
    if (k != static_cast<double>(r)) {
      throw ParameterError(path.string() + ":" + std::to_string(t.line_no[r]) + ": expected k = " + std::to_string(r));
    }
    seq.moments.push_back(parse_double(row[static_cast<std::size_t>(cmu)], path, t.line_no[r]));
    if (csrc >= 0 && row[static_cast<std::size_t>(csrc)] == "lp" && !seq.split_index) seq.split_index = r;
    if (cce >= 0 && cte >= 0 && r % 2 == 0) {
      seq.cosine_errors.push_back(parse_double(row[static_cast<std::size_t>(cce)], path, t.line_no[r]));
      seq.trunc_errors.push_back(parse_double(row[static_cast<std::size_t>(cte)], path, t.line_no[r]));
    }
  }
  if (seq.moments.empty()) throw ParameterError("'" + path.string() + "' has no moments");
  if (hash) *hash = t.hash;
  return seq;
}

std::vector<std::pair<double, double>> read_cumulative_csv(const std::filesystem::path& path) {
  const Table t = read_table(path);
  const auto cx = column(t, "x"), cc = column(t, "C");
  if (cx < 0 || cc < 0) throw ParameterError("'" + path.string() + "' lacks x and C columns");
  std::vector<std::pair<double, double>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.emplace_back(parse_double(t.rows[r][static_cast<std::size_t>(cx)], path, t.line_no[r]),
                     parse_double(t.rows[r][static_cast<std::size_t>(cc)], path, t.line_no[r]));
  }
  return out;
}

nlohmann::json to_json(const GseeResult& r) {
  return {{"interval", {r.lo, r.hi}},
          {"c_star", r.c_star},
          {"chi", r.chi},
          {"delta", r.delta},
          {"eta", r.eta},
          {"degree", r.degree},
          {"threshold", r.threshold},
          {"iterations", r.iterations},
          {"scale_back", r.scale_back},
          {"energy_raw", {{"lo", r.lo * r.scale_back}, {"hi", r.hi * r.scale_back}, {"mid", r.midpoint() * r.scale_back}}}};
}

nlohmann::json to_json(const FilterMeta& m) {
  json j = {{"c", m.c}, {"delta", m.delta}, {"eta", m.eta}, {"degree", m.degree}, {"kappa", m.kappa}};
  j["max_error"] = m.max_error >= 0.0 ? json(m.max_error) : json(nullptr);
  j["warning"] = m.warning.empty() ? json(nullptr) : json(m.warning);
  return j;
}

nlohmann::json to_json(const LpModel& m) {
  return {{"n_fit", m.n_fit},
          {"window", {m.window_start, m.window_end}},
          {"ridge", m.ridge},
          {"stabilized", m.stabilized},
          {"reflected_roots", m.reflected_roots},
          {"residual_rms", m.residual_rms},
          {"ar_coeffs", m.ar_coeffs}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParameterError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace chebgsee
