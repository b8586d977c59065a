#include "chebgsee/diagnostics.hpp"

#include <algorithm>
#include <cstdio>

namespace chebgsee {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void DiagnosticsLog::append(DiagnosticRecord rec) {
  std::lock_guard lock(mutex_);
  records_.push_back(std::move(rec));
}

void DiagnosticsLog::warn(const std::string& stage, std::size_t step, const std::string& key, double value,
                          std::string note) {
  append({stage, step, key, value, std::move(note)});
}

std::vector<DiagnosticRecord> DiagnosticsLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t DiagnosticsLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::size_t DiagnosticsLog::count(const std::string& key) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const DiagnosticRecord& r) { return r.key == key; }));
}

void DiagnosticsLog::write_csv(std::ostream& out) const {
  out << "stage,step,key,value,note\n";
  char buf[64];
  for (const auto& r : snapshot()) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << csv_escape(r.stage) << ',' << r.step << ',' << csv_escape(r.key) << ',' << buf << ','
        << csv_escape(r.note) << '\n';
  }
}

}  // namespace chebgsee
