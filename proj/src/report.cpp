#include "otcal/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "otcal/errors.hpp"

namespace otcal {

bool VerificationReport::verdict() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void VerificationReport::add(CheckRecord record) {
  checks.push_back(std::move(record));
}

void VerificationReport::run_check(
    const std::string& name, const std::string& anchor, double tolerance,
    const std::function<double(CheckRecord&)>& fn) {
  CheckRecord rec;
  rec.name = name;
  rec.anchor = anchor;
  rec.tolerance = tolerance;
  try {
    rec.residual = fn(rec);
    rec.pass = rec.residual <= tolerance;
  } catch (const Error& e) {
    rec.pass = false;
    rec.residual = std::numeric_limits<double>::quiet_NaN();
    rec.note = e.what();
  }
  add(std::move(rec));
}

std::string VerificationReport::to_json() const {
  // nlohmann::json stores object keys in a std::map, already sorted.
  nlohmann::json j;
  j["command"] = command;
  j["verdict"] = verdict() ? "pass" : "fail";
  j["environment"] = environment;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json rec;
    rec["name"] = c.name;
    rec["anchor"] = c.anchor;
    rec["residual"] = std::isfinite(c.residual)
                          ? nlohmann::json(c.residual)
                          : nlohmann::json(nullptr);
    rec["tolerance"] = c.tolerance;
    rec["pass"] = c.pass;
    rec["flagged_points"] = c.flagged_points;
    if (!c.note.empty()) rec["note"] = c.note;
    arr.push_back(rec);
  }
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

void VerificationReport::write_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write report: " + path);
  out << to_json();
}

void write_csv(const std::string& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write csv: " + path);
  out.imbue(std::locale::classic());
  out.precision(17);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw SizeMismatchError("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw ConfigError("cannot create output directory: " + path);
}

}  // namespace otcal
