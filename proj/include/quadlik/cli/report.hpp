#pragma once

#include "quadlik/core.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace quadlik::cli {

using ReportValue = std::variant<std::string, long long, double, std::vector<double>>;

/// Flat, insertion-ordered key–value record. Keys are unique.
class ReportRecord {
 public:
  void set(const std::string& key, std::string value) { put(key, std::move(value)); }
  void set(const std::string& key, const char* value) { put(key, std::string(value)); }
  void set(const std::string& key, long long value) { put(key, value); }
  void set(const std::string& key, int value) { put(key, static_cast<long long>(value)); }
  void set(const std::string& key, bool value) { put(key, static_cast<long long>(value)); }
  void set(const std::string& key, double value) { put(key, value); }
  void set(const std::string& key, std::vector<double> value) { put(key, std::move(value)); }
  void set(const std::string& key, const Vector& value);
  /// Row-major entries under `key`, dimensions under `key` + "_rows"/"_cols".
  void set_matrix(const std::string& key, const Matrix& value);

  bool contains(const std::string& key) const;
  const ReportValue& at(const std::string& key) const;
  const std::vector<std::pair<std::string, ReportValue>>& entries() const { return entries_; }

 private:
  void put(const std::string& key, ReportValue value);
  std::vector<std::pair<std::string, ReportValue>> entries_;
};

/// 17 significant digits; non-finite values as NaN / Infinity / -Infinity.
std::string format_real(double v);

struct SpillFile {
  std::string path;
  std::string contents;
};

struct RenderedReport {
  std::string json;
  std::string text;
  std::vector<SpillFile> spills;
};

/// Arrays longer than spill_threshold are written to `<out_path>.<key>.csv`
/// (one column) and replaced by that file name. Without an output path
/// nothing spills.
RenderedReport render(const ReportRecord& record, const std::optional<std::string>& out_path,
                      std::size_t spill_threshold = 64);

}  // namespace quadlik::cli
