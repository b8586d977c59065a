#pragma once

#include <cstddef>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace chebgsee {

struct DiagnosticRecord {
  std::string stage;  // "chebyshev", "lp", "gsee", ...
  std::size_t step = 0;
  std::string key;
  double value = 0.0;
  std::string note;
};

/// Append-only record channel. Writers append under a lock; readers take a
/// snapshot, so inspection is safe while a run is still emitting.
class DiagnosticsLog {
 public:
  void append(DiagnosticRecord rec);
  void warn(const std::string& stage, std::size_t step, const std::string& key, double value, std::string note);
  std::vector<DiagnosticRecord> snapshot() const;
  std::size_t size() const;
  std::size_t count(const std::string& key) const;

  /// CSV with header `stage,step,key,value,note`.
  void write_csv(std::ostream& out) const;

 private:
  mutable std::mutex mutex_;
  std::vector<DiagnosticRecord> records_;
};

}  // namespace chebgsee
