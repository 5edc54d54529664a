#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "otcal/domain.hpp"

namespace otcal {

struct CheckRecord {
  std::string name;
  std::string anchor;  // identity label the check verifies
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  int flagged_points = 0;
  std::string note;  // error message when a module error was contained
};

struct VerificationReport {
  std::string command;
  std::vector<CheckRecord> checks;
  std::map<std::string, std::string> environment;

  bool verdict() const;
  void add(CheckRecord record);
  // Runs fn, converting any thrown Error into a failed record with its
  // message in `note`; the report never aborts mid-assembly.
  void run_check(const std::string& name, const std::string& anchor,
                 double tolerance,
                 const std::function<double(CheckRecord&)>& fn);
  // JSON text with keys sorted lexicographically, trailing newline.
  std::string to_json() const;
  void write_json(const std::string& path) const;
};

// CSV with a header row, '.' decimal separator, row-major over the x-grid.
void write_csv(const std::string& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void ensure_directory(const std::string& path);

}  // namespace otcal
