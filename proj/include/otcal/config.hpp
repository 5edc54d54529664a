#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "otcal/cost.hpp"
#include "otcal/density.hpp"
#include "otcal/transport.hpp"

namespace otcal {

// Flat dotted key-value configuration ("section.key = value", '#' comments).
struct RunConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;
  std::string require(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // comma-split
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Problem assembled from a config: cost, density pair, domains, optimal map.
struct Problem {
  int n = 1;
  CostField cost;
  DensitySpec rho;
  DensitySpec rhobar;
  DomainSpec domain;      // source box
  DomainSpec domain_bar;  // target box
  TransportMap map;
};

// Keys: cost.kind, cost.dim; domain.lo/hi/res, domain_bar.lo/hi;
// rho.kind/sigma, rhobar.kind/sigma; map.kind (monotone | gaussian | scale |
// rotation | sinusoid | identity) with map.factor / map.angle / map.amplitude.
Problem build_problem(const RunConfig& config);

// Deterministic per-check stream seed (FNV-1a of the check name, mixed with
// the root seed) so adding a check never perturbs the others.
std::uint64_t derive_seed(std::uint64_t root, const std::string& check_name);

}  // namespace otcal
