#include "quadlik/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace quadlik::cli {

void ReportRecord::put(const std::string& key, ReportValue value) {
  if (contains(key)) throw std::logic_error("ReportRecord: duplicate key " + key);
  entries_.emplace_back(key, std::move(value));
}

void ReportRecord::set(const std::string& key, const Vector& value) {
  set(key, std::vector<double>(value.data(), value.data() + value.size()));
}

void ReportRecord::set_matrix(const std::string& key, const Matrix& value) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(value.size()));
  for (Eigen::Index i = 0; i < value.rows(); ++i)
    for (Eigen::Index j = 0; j < value.cols(); ++j) flat.push_back(value(i, j));
  set(key, std::move(flat));
  set(key + "_rows", static_cast<long long>(value.rows()));
  set(key + "_cols", static_cast<long long>(value.cols()));
}

bool ReportRecord::contains(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const ReportValue& ReportRecord::at(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw std::out_of_range("ReportRecord: no key " + key);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

// JSON has no non-finite numbers; they become strings.
std::string json_real(double v) {
  return std::isfinite(v) ? format_real(v) : json_string(format_real(v));
}

}  // namespace

RenderedReport render(const ReportRecord& record, const std::optional<std::string>& out_path,
                      std::size_t spill_threshold) {
  RenderedReport out;
  std::ostringstream json;
  std::ostringstream text;
  json << "{\n";
  bool first = true;
  for (const auto& [key, value] : record.entries()) {
    json << (first ? "" : ",\n") << "  " << json_string(key) << ": ";
    first = false;
    text << key << ": ";
    if (const auto* s = std::get_if<std::string>(&value)) {
      json << json_string(*s);
      text << *s;
    } else if (const auto* i = std::get_if<long long>(&value)) {
      json << *i;
      text << *i;
    } else if (const auto* d = std::get_if<double>(&value)) {
      json << json_real(*d);
      text << format_real(*d);
    } else {
      const auto& arr = std::get<std::vector<double>>(value);
      if (out_path && arr.size() > spill_threshold) {
        const std::string path = *out_path + "." + key + ".csv";
        std::ostringstream csv;
        csv << key << '\n';
        for (double v : arr) csv << format_real(v) << '\n';
        out.spills.push_back({path, csv.str()});
        const std::string name = std::filesystem::path(path).filename().string();
        json << json_string(name);
        text << "[" << arr.size() << " values in " << name << "]";
      } else {
        json << '[';
        for (std::size_t k = 0; k < arr.size(); ++k) {
          json << (k ? ", " : "") << json_real(arr[k]);
          text << (k ? " " : "") << format_real(arr[k]);
        }
        json << ']';
      }
    }
    text << '\n';
  }
  json << "\n}\n";
  out.json = json.str();
  out.text = text.str();
  return out;
}

}  // namespace quadlik::cli
