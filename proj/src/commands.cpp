#include "otcal/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "otcal/assignment.hpp"
#include "otcal/calibration.hpp"
#include "otcal/curvature.hpp"
#include "otcal/errors.hpp"
#include "otcal/graph_surface.hpp"
#include "otcal/metric.hpp"
#include "otcal/transport.hpp"

namespace otcal {

namespace {

constexpr const char* kVersion = "0.1.0";

void fill_environment(VerificationReport& report, const RunConfig& config) {
  report.environment["version"] = kVersion;
  report.environment["seed"] = std::to_string(config.get_u64("seed", 7));
  report.environment["grid"] = std::to_string(config.get_int("domain.res", 64));
}

ExecPolicy exec_policy(const RunConfig& config) {
  return config.get("exec.policy", "parallel") == "serial"
             ? ExecPolicy::Serial
             : ExecPolicy::Parallel;
}

// Uniform samples in the box eroded by a marginal fraction per axis.
std::vector<Vec> sample_box(const DomainSpec& dom, int count,
                            std::mt19937_64& rng, double margin = 0.15) {
  std::uniform_real_distribution<double> unif(margin, 1.0 - margin);
  std::vector<Vec> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec x(dom.dim());
    for (int i = 0; i < dom.dim(); ++i)
      x[i] = dom.lo[i] + unif(rng) * (dom.hi[i] - dom.lo[i]);
    out.push_back(x);
  }
  return out;
}

DomainSpec with_resolution(const DomainSpec& dom, int res) {
  DomainSpec d = dom;
  d.resolution.assign(d.dim(), res);
  return d;
}

DensitySpec rotate_density_xbar(const DensitySpec& rhobar, const Mat& q) {
  DensitySpec out = rhobar;
  DensitySpec base = rhobar;
  out.eval = [base, q](const Vec& xb) { return base.eval(q * xb); };
  out.cdf = nullptr;
  out.inv_cdf = nullptr;
  return out;
}

TransportMap make_sawtooth_map(const DomainSpec& domain,
                               const DomainSpec& target) {
  // Reflects the middle third of the interval; the decreasing segment makes
  // the graph tangents timelike.
  if (domain.dim() != 1) throw ConfigError("sawtooth competitor is 1-D only");
  double lo = domain.lo[0], hi = domain.hi[0];
  double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
  TransportMap m;
  m.kind = TransportMap::Kind::Analytic;
  m.n = 1;
  m.eval = [a, b](const Vec& x) -> Vec {
    Vec y(1);
    y[0] = (x[0] >= a && x[0] <= b) ? a + b - x[0] : x[0];
    return y;
  };
  m.source = domain;
  m.target = target;
  return m;
}

TransportMap competitor_from_token(const std::string& token,
                                   const Problem& p) {
  auto colon = token.find(':');
  std::string kind = token.substr(0, colon);
  double param = colon == std::string::npos
                     ? 0.0
                     : std::stod(token.substr(colon + 1));
  RunConfig sub;
  sub.values["cost.kind"] = "quadratic";  // map construction only
  sub.values["cost.dim"] = std::to_string(p.n);
  std::ostringstream lo, hi;
  for (int i = 0; i < p.n; ++i) {
    lo << (i ? "," : "") << p.domain.lo[i];
    hi << (i ? "," : "") << p.domain.hi[i];
  }
  sub.values["domain.lo"] = lo.str();
  sub.values["domain.hi"] = hi.str();
  sub.values["domain.res"] = std::to_string(p.domain.resolution[0]);
  if (kind == "rotation") {
    sub.values["map.kind"] = "rotation";
    sub.values["map.angle"] = std::to_string(param);
  } else if (kind == "sinusoid") {
    sub.values["map.kind"] = "sinusoid";
    sub.values["map.amplitude"] = std::to_string(param == 0 ? 0.05 : param);
  } else if (kind == "scale") {
    sub.values["map.kind"] = "scale";
    sub.values["map.factor"] = std::to_string(param == 0 ? 1.0 : param);
  } else if (kind == "identity") {
    sub.values["map.kind"] = "identity";
  } else if (kind == "sawtooth") {
    return make_sawtooth_map(p.domain, p.domain_bar);
  } else {
    throw ConfigError("unknown competitor kind: " + kind);
  }
  TransportMap m = build_problem(sub).map;
  m.target = p.domain_bar;
  return m;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

VerificationReport cmd_verify_map(const RunConfig& config,
                                  const std::string& out_dir) {
  Problem p = build_problem(config);
  ExecPolicy policy = exec_policy(config);
  std::uint64_t seed = config.get_u64("seed", 7);
  double fd_scale = config.get_double("suite.fd_scale", 1.0);

  VerificationReport report;
  report.command = "verify-map";
  fill_environment(report, config);

  report.run_check("twist", "A1", 0.5, [&](CheckRecord& rec) {
    std::mt19937_64 rng(derive_seed(seed, "twist"));
    auto samples = sample_box(p.domain_bar, 48, rng);
    Vec center = 0.5 * (p.domain.lo + p.domain.hi);
    TwistReport tw = check_twist(p.cost, center, samples);
    rec.flagged_points = tw.injective ? 0 : 1;
    return tw.ok() ? 0.0 : 1.0;
  });

  report.run_check("nondegenerate", "A2", 0.5, [&](CheckRecord& rec) {
    std::mt19937_64 rng(derive_seed(seed, "nondegenerate"));
    auto xs = sample_box(p.domain, 64, rng);
    auto xbs = sample_box(p.domain_bar, 64, rng);
    int bad = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (p.cost.on_cut_locus(xs[k], xbs[k])) continue;
      if (!check_nondegenerate(p.cost, xs[k], xbs[k])) ++bad;
    }
    rec.flagged_points = bad;
    return bad > 0 ? 1.0 : 0.0;
  });

  report.run_check("spacelike", "eq:graph is spacelike", 1e-9,
                   [&](CheckRecord& rec) {
                     SweepResult r =
                         spacelike_margin(p.map, p.cost, p.domain, policy);
                     rec.flagged_points = r.flagged_points;
                     return std::max(0.0, -r.value);
                   });

  report.run_check("lagrangian", "eq:graph is Lagrangian",
                   config.get_double("check.lagrangian_tol", 1e-6),
                   [&](CheckRecord& rec) {
                     SweepResult r =
                         lagrangian_residual(p.map, p.cost, p.domain, policy);
                     rec.flagged_points = r.flagged_points;
                     return r.value;
                   });

  report.run_check("pushforward", "eq:measure preserving",
                   config.get_double("check.pushforward_tol", 1e-6),
                   [&](CheckRecord& rec) {
                     SweepResult r = pushforward_residual(
                         p.map, p.rho, p.rhobar, p.domain, policy);
                     rec.flagged_points = r.flagged_points;
                     return r.value;
                   });

  report.run_check("calibration_equality", "prop:calibrated",
                   config.get_double("check.calibration_tol", 1e-6),
                   [&](CheckRecord& rec) {
                     CalibrationEqualityReport r = calibration_equality_check(
                         p.map, p.cost, p.rho, p.rhobar, p.domain, policy);
                     rec.flagged_points = r.flagged_points;
                     return std::max(r.max_sqrt_det_gap, r.max_phi_gap);
                   });

  if (config.get_int("check.mean_curvature", 1)) {
    double diam = std::hypot(p.domain.diameter(), p.domain_bar.diameter());
    double fd = config.get_double("check.mc_fd_step", 1e-3 * diam) * fd_scale;
    double tol = config.get_double("check.mean_curvature_tol", 1e-3) *
                 fd_scale * fd_scale;
    int res = config.get_int("check.mc_res", p.n == 1 ? 33 : 17);
    report.run_check("mean_curvature", "cor:mean curv", tol,
                     [&](CheckRecord&) {
                       MeanCurvatureResult r =
                           mean_curvature(p.map, p.cost, p.rho, p.rhobar,
                                          with_resolution(p.domain, res), fd,
                                          policy);
                       return r.sup_norm;
                     });
  }

  // Plot-ready grid of the calibration-equality quantities.
  ensure_directory(out_dir);
  {
    std::vector<std::string> cols;
    for (int i = 0; i < p.n; ++i) cols.push_back("x" + std::to_string(i));
    cols.insert(cols.end(), {"sqrt_det_g", "phi_pullback", "rho"});
    std::vector<std::vector<double>> rows;
    DomainSpec grid = with_resolution(p.domain, std::min(
        p.domain.resolution[0], p.n == 1 ? 256 : 48));
    for (std::ptrdiff_t c = 0; c < grid.cell_count(); ++c) {
      if (!grid.interior_cell(c, 2)) continue;
      Vec x = grid.cell_point(c);
      std::vector<double> row(x.data(), x.data() + p.n);
      try {
        Mat g = pullback_metric(p.map, p.cost, p.rho, p.rhobar, x);
        double det = g.determinant();
        row.push_back(det > 0 ? std::sqrt(det)
                              : std::numeric_limits<double>::quiet_NaN());
        Vec fx = p.map(x);
        double detj = p.map.jacobian(x).determinant();
        row.push_back(0.5 * (p.rho(x) + p.rhobar(fx) * detj));
        row.push_back(p.rho(x));
      } catch (const Error&) {
        row.insert(row.end(), 3, std::numeric_limits<double>::quiet_NaN());
      }
      rows.push_back(std::move(row));
    }
    write_csv(out_dir + "/verify_map_grid.csv", cols, rows);
  }
  report.write_json(out_dir + "/report.json");
  return report;
}

VerificationReport cmd_comass(const RunConfig& config,
                              const std::string& out_dir) {
  Problem p = build_problem(config);
  std::uint64_t seed = config.get_u64("seed", 7);

  VerificationReport report;
  report.command = "comass";
  fill_environment(report, config);

  CalibrationForm phi{p.rho, p.rhobar};
  ComassConfig cc;
  cc.starts = config.get_int("comass.starts", 12);
  cc.iterations = config.get_int("comass.iterations", 400);
  cc.seed = derive_seed(seed, "comass");
  int npoints = config.get_int("comass.points", 20);

  std::mt19937_64 rng(derive_seed(seed, "comass.points"));
  auto xs = sample_box(p.domain, npoints, rng);

  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  int unbounded = 0;
  report.run_check("comass_estimate", "cor:cal", 1.0, [&](CheckRecord& rec) {
    for (const Vec& x : xs) {
      Vec xbar = p.map(x);
      MetricAtPoint metric =
          conformal_metric(p.cost, p.rho, p.rhobar, x, xbar);
      FormAtPoint form = [&](const TangentPlane& plane) {
        return eval_calibration(phi, x, xbar, plane);
      };
      ComassResult res = numeric_comass(form, metric, cc);
      if (!res.bounded) ++unbounded;
      // Normalized distance to the acceptance band [0.999, 1.01].
      double r = std::max((1.0 - res.estimate) / 1e-3,
                          (res.estimate - 1.0) / 1e-2);
      worst = std::max(worst, r);
      std::vector<double> row(x.data(), x.data() + p.n);
      row.insert(row.end(), xbar.data(), xbar.data() + p.n);
      row.push_back(res.estimate);
      row.push_back(res.bounded ? 1.0 : 0.0);
      rows.push_back(std::move(row));
    }
    rec.flagged_points = unbounded;
    return worst;
  });

  report.run_check("comass_bounded", "comass", 0.5, [&](CheckRecord&) {
    return unbounded > 0 ? 1.0 : 0.0;
  });

  if (config.get_int("comass.control", 1)) {
    // Negative volume form: the infimum over the widening ladder diverges,
    // which must be reported as bounded = false.
    report.run_check("comass_control_unbounded", "comass", 0.5,
                     [&](CheckRecord&) {
                       Vec x = 0.5 * (p.domain.lo + p.domain.hi);
                       Vec xbar = p.map(x);
                       MetricAtPoint metric = conformal_metric(
                           p.cost, p.rho, p.rhobar, x, xbar);
                       FormAtPoint neg = [](const TangentPlane& plane) {
                         return -plane.m_part().determinant();
                       };
                       ComassResult res = numeric_comass(neg, metric, cc);
                       return res.bounded ? 1.0 : 0.0;
                     });
  }

  ensure_directory(out_dir);
  std::vector<std::string> cols;
  for (int i = 0; i < p.n; ++i) cols.push_back("x" + std::to_string(i));
  for (int i = 0; i < p.n; ++i) cols.push_back("xbar" + std::to_string(i));
  cols.insert(cols.end(), {"comass", "bounded"});
  write_csv(out_dir + "/comass_points.csv", cols, rows);
  report.write_json(out_dir + "/report.json");
  return report;
}

VerificationReport cmd_mass_compare(const RunConfig& config,
                                    const std::string& out_dir) {
  Problem p = build_problem(config);

  VerificationReport report;
  report.command = "mass-compare";
  fill_environment(report, config);

  std::vector<std::pair<std::string, TransportMap>> competitors;
  for (const std::string& token :
       split_tokens(config.get("compare.competitors", "")))
    competitors.emplace_back(token, competitor_from_token(token, p));

  int mesh_res = config.get_int("mesh.res", p.n == 1 ? 512 : 128);
  DomainSpec region = with_resolution(p.domain, mesh_res);

  MassCompareReport mc;
  report.run_check("mass_ranking", "th:main", 0.5, [&](CheckRecord&) {
    mc = mass_compare(p.map, competitors, p.cost, p.rho, p.rhobar, region,
                      config.get_double("compare.residual_threshold", 1e-2));
    return mc.optimal_wins ? 0.0 : 1.0;
  });

  if (!mc.rows.empty()) {
    report.run_check("phi_integral_optimal", "def:cal", 1e-3,
                     [&](CheckRecord&) {
                       return std::abs(mc.rows[0].phi_integral - 1.0);
                     });
    report.run_check("mass_equals_phi_optimal", "prop:calibrated", 1e-3,
                     [&](CheckRecord&) {
                       if (!mc.rows[0].mass.finite)
                         throw TimelikeSimplexError("optimal mesh timelike");
                       return std::abs(mc.rows[0].mass.value -
                                       mc.rows[0].phi_integral);
                     });
    std::vector<double> expected = config.get_list("compare.expected");
    if (!expected.empty()) {
      report.run_check(
          "mass_expected", "th:main",
          config.get_double("compare.expected_tol", 2e-3),
          [&](CheckRecord&) {
            if (expected.size() != mc.rows.size())
              throw ConfigError("compare.expected length mismatch");
            double worst = 0.0;
            for (std::size_t k = 0; k < expected.size(); ++k) {
              if (!mc.rows[k].mass.finite)
                throw TimelikeSimplexError("expected-mass row is timelike");
              worst = std::max(worst,
                               std::abs(mc.rows[k].mass.value - expected[k]));
            }
            return worst;
          });
    }
  }

  ensure_directory(out_dir);
  {
    std::ofstream out(out_dir + "/mass_table.csv");
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "name,phi_integral,mass,finite,timelike_simplices,"
           "pushforward_residual\n";
    for (const auto& row : mc.rows)
      out << row.name << ',' << row.phi_integral << ','
          << (row.mass.finite ? row.mass.value
                              : -std::numeric_limits<double>::infinity())
          << ',' << (row.mass.finite ? 1 : 0) << ','
          << row.mass.timelike_simplices << ',' << row.pushforward_residual
          << "\n";
  }
  report.write_json(out_dir + "/report.json");
  return report;
}

VerificationReport cmd_curvature(const RunConfig& config,
                                 const std::string& out_dir) {
  Problem p = build_problem(config);
  std::uint64_t seed = config.get_u64("seed", 7);
  double fd_scale = config.get_double("suite.fd_scale", 1.0);
  double diam = std::hypot(p.domain.diameter(), p.domain_bar.diameter());
  double fd = config.get_double("curvature.fd_step", 1e-3 * diam) * fd_scale;

  VerificationReport report;
  report.command = "curvature";
  fill_environment(report, config);

  std::mt19937_64 rng(derive_seed(seed, "curvature.points"));
  int npoints = config.get_int("curvature.points", 10);
  std::vector<std::pair<Vec, Vec>> points;
  while (static_cast<int>(points.size()) < npoints) {
    Vec x = sample_box(p.domain, 1, rng)[0];
    Vec xbar = sample_box(p.domain_bar, 1, rng)[0];
    if (p.cost.on_cut_locus(x, xbar)) continue;
    points.emplace_back(x, xbar);
  }

  MtwReport mtw;
  std::string expect = config.get("curvature.expect", "nonnegative");
  report.run_check("mtw_sign", "rmk:curvature", 0.5, [&](CheckRecord& rec) {
    mtw = mtw_check(p.cost, points, 1e-8, fd, 1e-7,
                    config.get_int("curvature.haar_samples", 256),
                    derive_seed(seed, "mtw"));
    bool ok = expect == "violated"
                  ? mtw.classification == MtwClass::Violated
                  : mtw.classification != MtwClass::Violated;
    rec.note = mtw.classification == MtwClass::StrictPositive
                   ? "strict positive"
               : mtw.classification == MtwClass::Nonnegative ? "nonnegative"
                                                             : "violated";
    return ok ? 0.0 : 1.0;
  });

  std::vector<std::vector<double>> rows;
  if (p.n >= 2) {
    report.run_check(
        "conformal_identity", "rmk:curvature",
        config.get_double("curvature.identity_tol", 1e-3) * fd_scale *
            fd_scale,
        [&](CheckRecord&) {
          double worst = 0.0;
          int pair_cycle = 0;
          for (const auto& [x, xbar] : points) {
            int i = pair_cycle % p.n;
            int j = (pair_cycle / p.n + i + 1) % p.n;
            ++pair_cycle;
            Mat mixed = mixed_hessian(p.cost, x, xbar);
            Vec row = mixed.row(i).transpose();
            if (row.norm() < 1e-12) continue;
            // Rotate the target chart so (h_c)_{i jbar} vanishes at (x, xbar).
            Vec perp = Vec::Zero(p.n);
            {
              int kmin = 0;
              for (int t = 1; t < p.n; ++t)
                if (std::abs(row[t]) < std::abs(row[kmin])) kmin = t;
              perp[kmin] = 1.0;
              perp -= row * (row.dot(perp) / row.squaredNorm());
              perp.normalize();
            }
            Mat q = Mat::Identity(p.n, p.n);
            if (p.n == 2) {
              q.col(j) = perp;
              Vec other(2);
              other << -perp[1], perp[0];
              q.col(1 - j) = other;
              if (q.determinant() < 0) q.col(1 - j) *= -1;
            } else {
              // Householder sending e_j to perp.
              Vec w = perp - Vec::Unit(p.n, j);
              if (w.norm() > 1e-12) {
                w.normalize();
                q = Mat::Identity(p.n, p.n) - 2.0 * w * w.transpose();
              }
            }
            CostField rotated = rotate_cost_xbar(p.cost, q);
            DensitySpec rb = rotate_density_xbar(p.rhobar, q);
            ConformalIdentityResult res = conformal_identity_check(
                rotated, p.rho, rb, x, q.transpose() * xbar, i, j, fd, 1e-6);
            worst = std::max(worst, res.relative_error);
            std::vector<double> csv(x.data(), x.data() + p.n);
            csv.insert(csv.end(), xbar.data(), xbar.data() + p.n);
            csv.insert(csv.end(),
                       {static_cast<double>(i), static_cast<double>(j),
                        res.lhs, res.rhs, res.relative_error});
            rows.push_back(std::move(csv));
          }
          return worst;
        });
  }

  ensure_directory(out_dir);
  if (!rows.empty()) {
    std::vector<std::string> cols;
    for (int i = 0; i < p.n; ++i) cols.push_back("x" + std::to_string(i));
    for (int i = 0; i < p.n; ++i) cols.push_back("xbar" + std::to_string(i));
    cols.insert(cols.end(), {"i", "jbar", "lhs", "rhs", "relative_error"});
    write_csv(out_dir + "/curvature_points.csv", cols, rows);
  }
  {
    std::vector<std::string> cols;
    for (int i = 0; i < p.n; ++i) cols.push_back("x" + std::to_string(i));
    for (int i = 0; i < p.n; ++i) cols.push_back("xbar" + std::to_string(i));
    cols.push_back("min_component");
    std::vector<std::vector<double>> mrows;
    for (const auto& pt : mtw.points) {
      std::vector<double> r(pt.x.data(), pt.x.data() + p.n);
      r.insert(r.end(), pt.xbar.data(), pt.xbar.data() + p.n);
      r.push_back(pt.min_component);
      mrows.push_back(std::move(r));
    }
    write_csv(out_dir + "/mtw_points.csv", cols, mrows);
  }
  report.write_json(out_dir + "/report.json");
  return report;
}

namespace {

void absorb(VerificationReport& total, const std::string& prefix,
            const VerificationReport& sub) {
  for (CheckRecord rec : sub.checks) {
    rec.name = prefix + "." + rec.name;
    total.add(std::move(rec));
  }
}

RunConfig overlay(const RunConfig& base, const std::string& text) {
  RunConfig cfg = parse_config_text(text);
  // Root seed and suite-wide scales pass through to every sub-run.
  for (const char* key : {"seed", "suite.fd_scale", "exec.policy"})
    if (base.has(key)) cfg.values[key] = base.values.at(key);
  return cfg;
}

// Oracle and structural batteries that have no dedicated subcommand.
void suite_oracle_checks(VerificationReport& report, const RunConfig& config) {
  std::uint64_t seed = config.get_u64("seed", 7);

  report.run_check(
      "oracle.assignment_exact", "invented — artifact plumbing", 1e-12,
      [&](CheckRecord&) {
        std::mt19937_64 rng(derive_seed(seed, "oracle.assignment"));
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::uniform_int_distribution<int> size(2, 8);
        CostField cost = make_cost("quadratic", 2);
        double worst = 0.0;
        for (int inst = 0; inst < 50; ++inst) {
          int m = size(rng);
          std::vector<Vec> src, dst;
          for (int k = 0; k < m; ++k) {
            Vec a(2), b(2);
            a << unif(rng), unif(rng);
            b << unif(rng), unif(rng);
            src.push_back(a);
            dst.push_back(b);
          }
          DiscretePlan plan = solve_discrete(src, dst, cost);
          std::vector<std::vector<double>> cmat(m, std::vector<double>(m));
          for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c)
              cmat[r][c] = eval_cost(cost, src[r], dst[c]);
          std::vector<int> perm;
          // plan.total_cost carries the uniform weights 1/m.
          double best = brute_force_assignment(cmat, perm) / m;
          worst = std::max(worst, std::abs(plan.total_cost - best));
        }
        return worst;
      });

  report.run_check(
      "oracle.discrete_continuous_rate", "invented — artifact plumbing", 0.5,
      [&](CheckRecord& rec) {
        std::mt19937_64 rng(derive_seed(seed, "oracle.rate"));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        DomainSpec dom = DomainSpec::box({-2.0}, {2.0}, 64);
        DensitySpec rho = make_gaussian(dom, Vec::Constant(1, 0.6));
        DomainSpec dom_bar = DomainSpec::box({-3.0}, {3.0}, 64);
        DensitySpec rhobar = make_gaussian(dom_bar, Vec::Constant(1, 0.9));
        TransportMap f = solve_1d_monotone(rho, rhobar, 512);
        CostField cost = make_cost("quadratic", 1);
        std::vector<double> errors;
        for (int npts : {100, 400, 1600}) {
          std::vector<Vec> src, dst;
          for (int k = 0; k < npts; ++k) {
            src.push_back(Vec::Constant(1, rho.inv_cdf(unif(rng))));
            dst.push_back(Vec::Constant(1, rhobar.inv_cdf(unif(rng))));
          }
          DiscretePlan plan = solve_discrete(src, dst, cost);
          double err = 0.0;
          for (int k = 0; k < npts; ++k)
            err += std::abs(dst[plan.matching[k]][0] - f(src[k])[0]);
          errors.push_back(err / npts);
        }
        double r1 = errors[1] / errors[0];
        double r2 = errors[2] / errors[1];
        double gm = std::sqrt(r1 * r2);
        rec.note = "ratios " + std::to_string(r1) + ", " + std::to_string(r2);
        bool ok = r1 > 0.3 && r1 < 0.8 && r2 > 0.3 && r2 < 0.8 && gm > 0.38 &&
                  gm < 0.66;
        return ok ? 0.0 : 1.0;
      });
}

void suite_structural_checks(VerificationReport& report,
                             const RunConfig& config) {
  std::uint64_t seed = config.get_u64("seed", 7);

  report.run_check("structural.signature", "§3", 0.5, [&](CheckRecord& rec) {
    std::mt19937_64 rng(derive_seed(seed, "structural.signature"));
    int bad = 0;
    struct Entry {
      const char* id;
      int n;
    };
    for (Entry e : {Entry{"quadratic", 2}, Entry{"bilinear", 2},
                    Entry{"sqrt1p", 2}, Entry{"log", 1}}) {
      CostField cost = make_cost(e.id, e.n, 0.2);
      DomainSpec dom = e.n == 1 ? DomainSpec::box({0.0}, {1.0}, 8)
                                : DomainSpec::box({-1.0, -1.0}, {1.0, 1.0}, 8);
      DomainSpec dom_bar = e.n == 1
                               ? DomainSpec::box({2.0}, {3.0}, 8)
                               : DomainSpec::box({-1.0, -1.0}, {1.0, 1.0}, 8);
      auto xs = sample_box(dom, 1000, rng);
      auto xbs = sample_box(dom_bar, 1000, rng);
      for (int k = 0; k < 1000; ++k) {
        if (cost.on_cut_locus(xs[k], xbs[k])) continue;
        MetricAtPoint m = base_metric(cost, xs[k], xbs[k]);
        if (m.sig != std::make_pair(e.n, e.n)) ++bad;
      }
    }
    rec.flagged_points = bad;
    return bad > 0 ? 1.0 : 0.0;
  });

  report.run_check(
      "structural.det_inequality", "prop:calibrated", 0.5,
      [&](CheckRecord& rec) {
        std::mt19937_64 rng(derive_seed(seed, "structural.det"));
        std::normal_distribution<double> gauss;
        int bad = 0;
        for (int k = 0; k < 1000; ++k) {
          int n = 1 + static_cast<int>(k % 4);
          Mat m(n, n), a(n, n);
          for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
              m(r, c) = gauss(rng);
              a(r, c) = gauss(rng);
            }
          Mat b = m * m.transpose() + 0.05 * Mat::Identity(n, n) +
                  0.5 * (a - a.transpose());
          DeterminantInequalityResult res = determinant_inequality_check(b);
          bool sym = (b - b.transpose()).norm() < 1e-12;
          if (!res.holds || res.equality != sym) ++bad;
        }
        rec.flagged_points = bad;
        return bad > 0 ? 1.0 : 0.0;
      });

  report.run_check(
      "structural.cyclical_monotonicity", "§3", 0.5, [&](CheckRecord& rec) {
        std::mt19937_64 rng(derive_seed(seed, "structural.cyclical"));
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        CostField cost = make_cost("quadratic", 2);
        std::vector<Vec> src, dst;
        for (int k = 0; k < 60; ++k) {
          Vec a(2), b(2);
          a << unif(rng), unif(rng);
          b << unif(rng), unif(rng);
          src.push_back(a);
          dst.push_back(b);
        }
        DiscretePlan plan = solve_discrete(src, dst, cost);
        std::vector<std::pair<Vec, Vec>> pairs;
        for (int k = 0; k < 60; ++k)
          pairs.emplace_back(src[k], dst[plan.matching[k]]);
        CyclicalReport cyc = cyclical_monotonicity_check(
            pairs, cost, 3, derive_seed(seed, "structural.cyc2"));

        DomainSpec dom = DomainSpec::box({-2.0}, {2.0}, 64);
        DensitySpec rho = make_gaussian(dom, Vec::Constant(1, 0.6));
        DomainSpec dom_bar = DomainSpec::box({-3.0}, {3.0}, 64);
        DensitySpec rhobar = make_gaussian(dom_bar, Vec::Constant(1, 0.9));
        TransportMap f = solve_1d_monotone(rho, rhobar, 512);
        CostField cost1 = make_cost("quadratic", 1);
        std::vector<std::pair<Vec, Vec>> pairs1;
        for (int k = 0; k < 60; ++k) {
          Vec x = Vec::Constant(1, -1.8 + 3.6 * k / 59.0);
          pairs1.emplace_back(x, f(x));
        }
        CyclicalReport cyc1 = cyclical_monotonicity_check(
            pairs1, cost1, 3, derive_seed(seed, "structural.cyc3"));
        rec.note = "worst " + std::to_string(std::min(cyc.worst_violation,
                                                      cyc1.worst_violation));
        return (cyc.monotone && cyc1.monotone) ? 0.0 : 1.0;
      });
}

void suite_mean_curvature_decay(VerificationReport& report,
                                const RunConfig& config) {
  double fd_scale = config.get_double("suite.fd_scale", 1.0);
  RunConfig sub = overlay(config,
                          "cost.kind = quadratic\n"
                          "cost.dim = 1\n"
                          "domain.lo = -2\n"
                          "domain.hi = 2\n"
                          "domain_bar.lo = -3\n"
                          "domain_bar.hi = 3\n"
                          "domain.res = 64\n"
                          "rho.kind = gaussian\n"
                          "rho.sigma = 0.6\n"
                          "rhobar.kind = gaussian\n"
                          "rhobar.sigma = 0.9\n"
                          "map.kind = monotone\n");
  Problem p = build_problem(sub);
  double diam = std::hypot(p.domain.diameter(), p.domain_bar.diameter());
  double fd = 1e-3 * diam * fd_scale;
  DomainSpec region = with_resolution(p.domain, 33);
  ExecPolicy policy = exec_policy(config);

  double sup_h = 0.0, sup_h2 = 0.0;
  report.run_check("mean_curvature.optimal_sup", "cor:mean curv",
                   1e-3 * fd_scale * fd_scale, [&](CheckRecord&) {
                     sup_h = mean_curvature(p.map, p.cost, p.rho, p.rhobar,
                                            region, fd, policy)
                                 .sup_norm;
                     sup_h2 = mean_curvature(p.map, p.cost, p.rho, p.rhobar,
                                             region, fd / 2, policy)
                                  .sup_norm;
                     return sup_h;
                   });
  report.run_check("mean_curvature.decay", "cor:mean curv", 0.5,
                   [&](CheckRecord& rec) {
                     rec.note = "ratio " + std::to_string(sup_h / sup_h2);
                     return sup_h / sup_h2 >= 3.5 ? 0.0 : 1.0;
                   });

  RunConfig subc = sub;
  subc.values["map.kind"] = "sinusoid";
  subc.values["map.amplitude"] = "0.15";
  subc.values["domain_bar.lo"] = "-2";
  subc.values["domain_bar.hi"] = "2";
  Problem comp = build_problem(subc);
  report.run_check("mean_curvature.competitor_floor", "cor:mean curv", 0.5,
                   [&](CheckRecord& rec) {
                     double a = mean_curvature(comp.map, comp.cost, comp.rho,
                                               comp.rhobar, region, fd, policy)
                                    .sup_norm;
                     double b = mean_curvature(comp.map, comp.cost, comp.rho,
                                               comp.rhobar, region, fd / 2,
                                               policy)
                                    .sup_norm;
                     rec.note = "sup " + std::to_string(a) + " -> " +
                                std::to_string(b);
                     return (a > 1e-2 && b > 1e-2) ? 0.0 : 1.0;
                   });
}

}  // namespace

VerificationReport cmd_suite(const RunConfig& config,
                             const std::string& out_dir) {
  VerificationReport report;
  report.command = "suite";
  fill_environment(report, config);
  ensure_directory(out_dir);

  absorb(report, "uniform_1d",
         cmd_verify_map(overlay(config,
                                "cost.kind = quadratic\n"
                                "cost.dim = 1\n"
                                "domain.res = 64\n"
                                "map.kind = monotone\n"
                                "check.mean_curvature = 0\n"),
                        out_dir + "/uniform_1d"));

  absorb(report, "gaussian_1d",
         cmd_verify_map(overlay(config,
                                "cost.kind = quadratic\n"
                                "cost.dim = 1\n"
                                "domain.lo = -2\n"
                                "domain.hi = 2\n"
                                "domain_bar.lo = -3\n"
                                "domain_bar.hi = 3\n"
                                "domain.res = 64\n"
                                "rho.kind = gaussian\n"
                                "rho.sigma = 0.6\n"
                                "rhobar.kind = gaussian\n"
                                "rhobar.sigma = 0.9\n"
                                "map.kind = monotone\n"),
                        out_dir + "/gaussian_1d"));

  absorb(report, "gaussian_2d",
         cmd_verify_map(overlay(config,
                                "cost.kind = quadratic\n"
                                "cost.dim = 2\n"
                                "domain.lo = -2,-2\n"
                                "domain.hi = 2,2\n"
                                "domain_bar.lo = -3,-3\n"
                                "domain_bar.hi = 3,3\n"
                                "domain.res = 48\n"
                                "rho.kind = gaussian\n"
                                "rho.sigma = 0.6\n"
                                "rhobar.kind = gaussian\n"
                                "rhobar.sigma = 0.9\n"
                                "map.kind = gaussian\n"
                                "check.mean_curvature = 0\n"),
                        out_dir + "/gaussian_2d"));

  suite_mean_curvature_decay(report, config);

  {
    std::ostringstream expected;
    expected << 1.0 << "," << std::cos(10.0 * M_PI / 180) << ","
             << std::cos(30.0 * M_PI / 180) << ","
             << std::cos(60.0 * M_PI / 180);
    absorb(report, "rotation_family",
           cmd_mass_compare(
               overlay(config,
                       "cost.kind = bilinear\n"
                       "cost.dim = 2\n"
                       "domain.lo = -2.5,-2.5\n"
                       "domain.hi = 2.5,2.5\n"
                       "domain.res = 48\n"
                       "rho.kind = gaussian\n"
                       "rho.sigma = 1\n"
                       "rhobar.kind = gaussian\n"
                       "rhobar.sigma = 1\n"
                       "map.kind = identity\n"
                       "mesh.res = 128\n"
                       "compare.competitors = rotation:10, rotation:30, "
                       "rotation:60\n"
                       "compare.expected = " +
                           expected.str() + "\n"),
               out_dir + "/rotation_family"));
  }

  absorb(report, "sawtooth",
         cmd_mass_compare(overlay(config,
                                  "cost.kind = quadratic\n"
                                  "cost.dim = 1\n"
                                  "domain.res = 64\n"
                                  "map.kind = monotone\n"
                                  "mesh.res = 256\n"
                                  "compare.competitors = sawtooth\n"),
                          out_dir + "/sawtooth"));

  absorb(report, "comass_uniform_1d",
         cmd_comass(overlay(config,
                            "cost.kind = quadratic\n"
                            "cost.dim = 1\n"
                            "domain.res = 64\n"
                            "map.kind = monotone\n"),
                    out_dir + "/comass_uniform_1d"));

  absorb(report, "comass_gaussian_1d",
         cmd_comass(overlay(config,
                            "cost.kind = quadratic\n"
                            "cost.dim = 1\n"
                            "domain.lo = -2\n"
                            "domain.hi = 2\n"
                            "domain_bar.lo = -3\n"
                            "domain_bar.hi = 3\n"
                            "domain.res = 64\n"
                            "rho.kind = gaussian\n"
                            "rho.sigma = 0.6\n"
                            "rhobar.kind = gaussian\n"
                            "rhobar.sigma = 0.9\n"
                            "map.kind = monotone\n"
                            "comass.control = 0\n"),
                    out_dir + "/comass_gaussian_1d"));

  absorb(report, "comass_gaussian_2d",
         cmd_comass(overlay(config,
                            "cost.kind = bilinear\n"
                            "cost.dim = 2\n"
                            "domain.lo = -2.5,-2.5\n"
                            "domain.hi = 2.5,2.5\n"
                            "domain.res = 48\n"
                            "rho.kind = gaussian\n"
                            "rho.sigma = 1\n"
                            "rhobar.kind = gaussian\n"
                            "rhobar.sigma = 1\n"
                            "map.kind = identity\n"
                            "comass.control = 0\n"),
                    out_dir + "/comass_gaussian_2d"));

  absorb(report, "curvature_quadratic",
         cmd_curvature(overlay(config,
                               "cost.kind = quadratic\n"
                               "cost.dim = 2\n"
                               "domain.lo = -1,-1\n"
                               "domain.hi = 1,1\n"
                               "domain_bar.lo = -1,-1\n"
                               "domain_bar.hi = 1,1\n"
                               "map.kind = identity\n"
                               "curvature.identity_tol = 1e-8\n"),
                       out_dir + "/curvature_quadratic"));

  absorb(report, "curvature_sqrt1p_uniform",
         cmd_curvature(overlay(config,
                               "cost.kind = sqrt1p\n"
                               "cost.dim = 2\n"
                               "domain.lo = -1,-1\n"
                               "domain.hi = 1,1\n"
                               "domain_bar.lo = -1,-1\n"
                               "domain_bar.hi = 1,1\n"
                               "map.kind = identity\n"
                               "curvature.identity_tol = 1e-4\n"),
                       out_dir + "/curvature_sqrt1p_uniform"));

  absorb(report, "curvature_sqrt1p_gaussian",
         cmd_curvature(overlay(config,
                               "cost.kind = sqrt1p\n"
                               "cost.dim = 2\n"
                               "domain.lo = -1,-1\n"
                               "domain.hi = 1,1\n"
                               "domain_bar.lo = -1,-1\n"
                               "domain_bar.hi = 1,1\n"
                               "rho.kind = gaussian\n"
                               "rho.sigma = 0.8\n"
                               "rhobar.kind = gaussian\n"
                               "rhobar.sigma = 0.8\n"
                               "map.kind = identity\n"),
                       out_dir + "/curvature_sqrt1p_gaussian"));

  suite_oracle_checks(report, config);
  suite_structural_checks(report, config);

  report.write_json(out_dir + "/report.json");
  return report;
}

int run_command(const CliOptions& options) {
  RunConfig config;
  if (!options.config_path.empty())
    config = parse_config_file(options.config_path);
  if (options.seed) config.values["seed"] = std::to_string(*options.seed);
  if (options.grid)
    config.values["domain.res"] = std::to_string(*options.grid);

  VerificationReport report;
  if (options.command == "verify-map")
    report = cmd_verify_map(config, options.out_dir);
  else if (options.command == "comass")
    report = cmd_comass(config, options.out_dir);
  else if (options.command == "mass-compare")
    report = cmd_mass_compare(config, options.out_dir);
  else if (options.command == "curvature")
    report = cmd_curvature(config, options.out_dir);
  else if (options.command == "suite")
    report = cmd_suite(config, options.out_dir);
  else
    throw ConfigError("unknown command: " + options.command);

  if (!report.verdict()) {
    for (const auto& c : report.checks)
      if (!c.pass)
        std::fprintf(stderr, "[FAIL] %s (residual %.6g, tolerance %.6g)%s%s\n",
                     c.name.c_str(), c.residual, c.tolerance,
                     c.note.empty() ? "" : ": ", c.note.c_str());
    return 1;
  }
  return 0;
}

}  // namespace otcal
