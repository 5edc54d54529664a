#include "otcal/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "otcal/errors.hpp"

namespace otcal {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool RunConfig::has(const std::string& key) const {
  return values.count(key) > 0;
}

std::string RunConfig::require(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string RunConfig::get(const std::string& key,
                           const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(values.at(key), &pos);
    if (pos != values.at(key).size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number");
  }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  double v = get_double(key, fallback);
  int i = static_cast<int>(std::lround(v));
  if (i != v) throw ConfigError("config key " + key + " is not an integer");
  return i;
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(values.at(key));
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an unsigned integer");
  }
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  if (!has(key)) return out;
  std::stringstream ss(values.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " is not a number list");
    }
  }
  return out;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) +
                                       ": empty key");
    cfg.values[key] = value;
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

DomainSpec domain_from(const RunConfig& config, const std::string& prefix,
                       int n, const DomainSpec* fallback) {
  if (!config.has(prefix + ".lo") && fallback) return *fallback;
  DomainSpec d;
  std::vector<double> lo = config.get_list(prefix + ".lo");
  std::vector<double> hi = config.get_list(prefix + ".hi");
  if (lo.empty() && hi.empty() && !fallback) {
    lo.assign(n, 0.0);
    hi.assign(n, 1.0);
  }
  if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
    throw ConfigError(prefix + ".lo/hi must have " + std::to_string(n) +
                      " entries");
  d.lo = Eigen::Map<const Vec>(lo.data(), n);
  d.hi = Eigen::Map<const Vec>(hi.data(), n);
  int res = config.get_int(prefix + ".res", config.get_int("domain.res", 64));
  d.resolution.assign(n, res);
  d.validate();
  return d;
}

DensitySpec density_from(const RunConfig& config, const std::string& prefix,
                         const DomainSpec& support) {
  std::string kind = config.get(prefix + ".kind", "uniform");
  if (kind == "uniform") return make_uniform(support);
  if (kind == "gaussian") {
    std::vector<double> sig = config.get_list(prefix + ".sigma");
    if (sig.empty()) sig.assign(support.dim(), 1.0);
    if (static_cast<int>(sig.size()) == 1 && support.dim() > 1)
      sig.assign(support.dim(), sig[0]);
    if (static_cast<int>(sig.size()) != support.dim())
      throw ConfigError(prefix + ".sigma has wrong length");
    Vec sigma = Eigen::Map<const Vec>(sig.data(), support.dim());
    return make_gaussian(support, sigma);
  }
  if (kind == "grid") {
    DensitySpec d = read_density_csv(config.require(prefix + ".file"));
    if (d.support.dim() != support.dim())
      throw ConfigError(prefix + ": grid density dimension mismatch");
    return d;
  }
  throw ConfigError("unknown density kind: " + kind);
}

}  // namespace

Problem build_problem(const RunConfig& config) {
  Problem p;
  p.n = config.get_int("cost.dim", 1);
  if (p.n < 1 || p.n > 4) throw ConfigError("cost.dim must be in [1, 4]");
  std::string cost_kind = config.get("cost.kind", "quadratic");
  p.cost = make_cost(cost_kind, p.n, config.get_double("cost.cut_margin", 1e-3));

  p.domain = domain_from(config, "domain", p.n, nullptr);

  std::string map_kind = config.get("map.kind", "monotone");
  DomainSpec bar_fallback = p.domain;
  if (map_kind == "scale") {
    double k = config.get_double("map.factor", 1.0);
    bar_fallback.lo = k * p.domain.lo;
    bar_fallback.hi = k * p.domain.hi;
    if (k < 0) std::swap(bar_fallback.lo, bar_fallback.hi);
  }
  p.domain_bar = domain_from(config, "domain_bar", p.n, &bar_fallback);

  p.rho = density_from(config, "rho", p.domain);
  p.rhobar = density_from(config, "rhobar", p.domain_bar);
  // File-based densities carry their own support; the transported boxes
  // follow it.
  if (config.get("rho.kind", "uniform") == "grid") {
    int res = p.domain.resolution[0];
    p.domain = p.rho.support;
    p.domain.resolution.assign(p.domain.dim(), res);
  }
  if (config.get("rhobar.kind", "uniform") == "grid") {
    int res = p.domain_bar.resolution[0];
    p.domain_bar = p.rhobar.support;
    p.domain_bar.resolution.assign(p.domain_bar.dim(), res);
  }
  scale_fd_step(p.cost, p.domain, p.domain_bar);

  if (map_kind == "monotone") {
    if (p.n != 1) throw ConfigError("map.kind monotone requires cost.dim = 1");
    p.map = solve_1d_monotone(p.rho, p.rhobar,
                              config.get_int("map.grid", 512));
  } else if (map_kind == "gaussian") {
    std::vector<double> s = config.get_list("rho.sigma");
    std::vector<double> sb = config.get_list("rhobar.sigma");
    if (s.empty()) s.assign(p.n, 1.0);
    if (sb.empty()) sb.assign(p.n, 1.0);
    if (static_cast<int>(s.size()) == 1) s.assign(p.n, s[0]);
    if (static_cast<int>(sb.size()) == 1) sb.assign(p.n, sb[0]);
    Mat sigma = Mat::Zero(p.n, p.n), sigma_bar = Mat::Zero(p.n, p.n);
    for (int i = 0; i < p.n; ++i) {
      sigma(i, i) = s[i] * s[i];
      sigma_bar(i, i) = sb[i] * sb[i];
    }
    p.map = gaussian_map(sigma, sigma_bar, p.domain);
    p.map.target = p.domain_bar;
  } else if (map_kind == "scale") {
    double k = config.get_double("map.factor", 1.0);
    p.map.kind = TransportMap::Kind::Analytic;
    p.map.n = p.n;
    int n = p.n;
    p.map.eval = [k](const Vec& x) -> Vec { return k * x; };
    p.map.jac = [k, n](const Vec&) -> Mat {
      return k * Mat::Identity(n, n);
    };
    p.map.source = p.domain;
    p.map.target = p.domain_bar;
  } else if (map_kind == "rotation") {
    if (p.n != 2) throw ConfigError("map.kind rotation requires cost.dim = 2");
    double angle = config.get_double("map.angle", 0.0) * M_PI / 180.0;
    Mat r(2, 2);
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    p.map.kind = TransportMap::Kind::Analytic;
    p.map.n = 2;
    p.map.eval = [r](const Vec& x) -> Vec { return r * x; };
    p.map.jac = [r](const Vec&) -> Mat { return r; };
    p.map.source = p.domain;
    p.map.target = p.domain_bar;
  } else if (map_kind == "sinusoid") {
    if (p.n != 1) throw ConfigError("map.kind sinusoid requires cost.dim = 1");
    double amp = config.get_double("map.amplitude", 0.05);
    double lo = p.domain.lo[0], w = p.domain.hi[0] - p.domain.lo[0];
    if (std::abs(amp) * 2 * M_PI >= w)
      throw ConfigError("map.amplitude too large: sinusoid not monotone");
    p.map.kind = TransportMap::Kind::Analytic;
    p.map.n = 1;
    p.map.eval = [amp, lo, w](const Vec& x) -> Vec {
      Vec y(1);
      y[0] = x[0] + amp * std::sin(2 * M_PI * (x[0] - lo) / w);
      return y;
    };
    p.map.jac = [amp, lo, w](const Vec& x) -> Mat {
      Mat j(1, 1);
      j(0, 0) = 1 + amp * 2 * M_PI / w * std::cos(2 * M_PI * (x[0] - lo) / w);
      return j;
    };
    p.map.source = p.domain;
    p.map.target = p.domain_bar;
  } else if (map_kind == "identity") {
    p.map.kind = TransportMap::Kind::Analytic;
    p.map.n = p.n;
    int n = p.n;
    p.map.eval = [](const Vec& x) -> Vec { return x; };
    p.map.jac = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
    p.map.source = p.domain;
    p.map.target = p.domain_bar;
  } else if (map_kind == "grid") {
    if (p.n != 1) throw ConfigError("map.kind grid requires cost.dim = 1");
    p.map = map_from_grid_csv(config.require("map.file"), p.domain_bar);
  } else {
    throw ConfigError("unknown map kind: " + map_kind);
  }
  p.map.fd_step = 1e-5 * std::max(1.0, p.domain.diameter());
  return p;
}

std::uint64_t derive_seed(std::uint64_t root, const std::string& check_name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a, stable across builds
  for (unsigned char c : check_name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= root + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace otcal
