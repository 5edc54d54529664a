// Acceptance battery: one line per criterion, exit 0 iff all pass.

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "otcal/assignment.hpp"
#include "otcal/calibration.hpp"
#include "otcal/curvature.hpp"
#include "otcal/graph_surface.hpp"
#include "otcal/metric.hpp"
#include "otcal/transport.hpp"

using namespace otcal;

namespace {

struct CheckFailure {
  std::string message;
};

#define REQUIRE(cond, msg)                                        \
  do {                                                            \
    if (!(cond)) {                                                \
      std::ostringstream oss_;                                    \
      oss_ << msg;                                                \
      throw CheckFailure{oss_.str()};                             \
    }                                                             \
  } while (0)

#define REQUIRE_LT(value, bound, what)                                     \
  do {                                                                     \
    double v_ = (value);                                                   \
    if (!(v_ < (bound)))                                                   \
      throw CheckFailure{std::string(what) + " = " + std::to_string(v_) +  \
                         " not below " + std::to_string(double(bound))};   \
  } while (0)

bool run_criterion(int number, const std::string& title,
                   const std::function<void()>& body) {
  try {
    body();
    std::cout << "[PASS] criterion " << number << ": " << title << "\n";
    return true;
  } catch (const CheckFailure& f) {
    std::cout << "[FAIL] criterion " << number << ": " << title << " — "
              << f.message << "\n";
  } catch (const std::exception& e) {
    std::cout << "[FAIL] criterion " << number << ": " << title
              << " — unexpected error: " << e.what() << "\n";
  }
  return false;
}

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TransportMap linear_map(int n, const Mat& a) {
  TransportMap f;
  f.n = n;
  f.eval = [a](const Vec& x) -> Vec { return a * x; };
  f.jac = [a](const Vec&) -> Mat { return a; };
  return f;
}

Mat rotation(double degrees) {
  double t = degrees * M_PI / 180.0;
  Mat r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

// The three analytic optimal families of criterion 1.
struct Family {
  std::string name;
  CostField cost;
  DensitySpec rho;
  DensitySpec rhobar;
  TransportMap map;
  DomainSpec region;
};

std::vector<Family> optimal_families() {
  std::vector<Family> fams;
  {
    Family f;
    f.name = "uniform_1d";
    f.cost = make_cost("quadratic", 1);
    f.rho = make_uniform(DomainSpec::box({0.0}, {1.0}, 16));
    f.rhobar = make_uniform(DomainSpec::box({0.0}, {2.0}, 16));
    f.map = linear_map(1, 2 * Mat::Identity(1, 1));
    f.region = DomainSpec::box({0.0}, {1.0}, 64);
    fams.push_back(f);
  }
  {
    // Truncation windows map onto each other (z-scores match), so the
    // truncated Gaussians transform exactly under F(x) = 1.5 x.
    Family f;
    f.name = "gaussian_1d";
    f.cost = make_cost("quadratic", 1);
    f.rho = make_gaussian(DomainSpec::box({-2.0}, {2.0}, 16),
                          Vec::Constant(1, 0.6));
    f.rhobar = make_gaussian(DomainSpec::box({-3.0}, {3.0}, 16),
                             Vec::Constant(1, 0.9));
    f.map = linear_map(1, 1.5 * Mat::Identity(1, 1));
    f.region = DomainSpec::box({-2.0}, {2.0}, 64);
    fams.push_back(f);
  }
  {
    Family f;
    f.name = "gaussian_2d";
    f.cost = make_cost("quadratic", 2);
    f.rho = make_gaussian(DomainSpec::box({-2.0, -2.0}, {2.0, 2.0}, 16),
                          Vec::Constant(2, 1.0));
    f.rhobar = make_gaussian(DomainSpec::box({-4.0, -4.0}, {4.0, 4.0}, 16),
                             Vec::Constant(2, 2.0));
    f.map = gaussian_map(Mat::Identity(2, 2), 4 * Mat::Identity(2, 2),
                         DomainSpec::box({-2.0, -2.0}, {2.0, 2.0}, 16));
    f.region = DomainSpec::box({-2.0, -2.0}, {2.0, 2.0}, 32);
    fams.push_back(f);
  }
  return fams;
}

void criterion_calibration_equality() {
  for (Family& f : optimal_families()) {
    CalibrationEqualityReport rep = calibration_equality_check(
        f.map, f.cost, f.rho, f.rhobar, f.region);
    REQUIRE_LT(rep.max_sqrt_det_gap, 1e-6,
               f.name + " sqrt-det gap (analytic)");
    REQUIRE_LT(rep.max_phi_gap, 1e-6, f.name + " Phi gap (analytic)");

    TransportMap fd = f.map;
    fd.jac = nullptr;  // force finite-difference Jacobians
    fd.fd_step = 1e-5 * f.region.diameter();
    CalibrationEqualityReport rep_fd =
        calibration_equality_check(fd, f.cost, f.rho, f.rhobar, f.region);
    REQUIRE_LT(rep_fd.max_sqrt_det_gap, 1e-3, f.name + " sqrt-det gap (FD)");
    REQUIRE_LT(rep_fd.max_phi_gap, 1e-3, f.name + " Phi gap (FD)");
  }
}

void criterion_mass_maximality() {
  CostField bil = make_cost("bilinear", 2);
  DomainSpec box = DomainSpec::box({-2.5, -2.5}, {2.5, 2.5}, 128);
  DensitySpec gauss = make_gaussian(box, Vec::Constant(2, 1.0));
  std::vector<std::pair<std::string, TransportMap>> comps;
  std::vector<double> angles = {10.0, 30.0, 60.0};
  for (double a : angles)
    comps.emplace_back("rotation" + std::to_string(int(a)),
                       linear_map(2, rotation(a)));
  MassCompareReport rep = mass_compare(linear_map(2, Mat::Identity(2, 2)),
                                       comps, bil, gauss, gauss, box);
  REQUIRE(rep.rows.size() == 4, "expected 4 rows");
  REQUIRE(rep.optimal_wins, "optimal map not ranked first");
  std::vector<double> expected = {1.0, std::cos(10 * M_PI / 180),
                                  std::cos(30 * M_PI / 180),
                                  std::cos(60 * M_PI / 180)};
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    REQUIRE(rep.rows[i].mass.finite, rep.rows[i].name + " mass not finite");
    REQUIRE_LT(std::abs(rep.rows[i].mass.value - expected[i]), 2e-3,
               rep.rows[i].name + " mass deviation");
    REQUIRE_LT(std::abs(rep.rows[i].phi_integral - 1.0), 1e-3,
               rep.rows[i].name + " Phi integral deviation");
  }
}

void criterion_comass() {
  struct Setup {
    std::string name;
    CostField cost;
    DensitySpec rho;
    DomainSpec box;
  };
  std::vector<Setup> setups;
  setups.push_back({"uniform_quadratic_1d", make_cost("quadratic", 1),
                    make_uniform(DomainSpec::box({0.0}, {1.0}, 16)),
                    DomainSpec::box({0.0}, {1.0}, 16)});
  setups.push_back({"gaussian_quadratic_1d", make_cost("quadratic", 1),
                    make_gaussian(DomainSpec::box({-2.0}, {2.0}, 16),
                                  Vec::Constant(1, 0.8)),
                    DomainSpec::box({-2.0}, {2.0}, 16)});
  setups.push_back(
      {"gaussian_bilinear_2d", make_cost("bilinear", 2),
       make_gaussian(DomainSpec::box({-2.5, -2.5}, {2.5, 2.5}, 16),
                     Vec::Constant(2, 1.0)),
       DomainSpec::box({-2.5, -2.5}, {2.5, 2.5}, 16)});

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.15, 0.85);
  for (Setup& s : setups) {
    for (int k = 0; k < 20; ++k) {
      Vec x(s.box.dim());
      for (int i = 0; i < s.box.dim(); ++i)
        x[i] = s.box.lo[i] + unif(rng) * (s.box.hi[i] - s.box.lo[i]);
      MetricAtPoint h = conformal_metric(s.cost, s.rho, s.rho, x, x);
      CalibrationForm phi{s.rho, s.rho};
      FormAtPoint form = [&](const TangentPlane& plane) {
        return eval_calibration(phi, x, x, plane);
      };
      ComassResult res = numeric_comass(form, h);
      REQUIRE(res.bounded, s.name + " comass flagged unbounded");
      REQUIRE(res.estimate >= 0.999 && res.estimate <= 1.01,
              s.name + " comass estimate " + std::to_string(res.estimate) +
                  " outside [0.999, 1.01]");
    }
  }

  // Negative-form control: unbounded below over degenerating planes.
  Setup& s = setups[0];
  Vec x = v1(0.5);
  MetricAtPoint h = conformal_metric(s.cost, s.rho, s.rho, x, x);
  FormAtPoint neg = [](const TangentPlane& plane) {
    return -plane.m_part().determinant();
  };
  REQUIRE(!numeric_comass(neg, h).bounded,
          "negative-form control reported bounded");
}

void criterion_mean_curvature() {
  DomainSpec src = DomainSpec::box({-2.0}, {2.0}, 33);
  DensitySpec rho = make_gaussian(DomainSpec::box({-2.0}, {2.0}, 33),
                                  Vec::Constant(1, 0.6));
  DensitySpec rhobar = make_gaussian(DomainSpec::box({-3.0}, {3.0}, 33),
                                     Vec::Constant(1, 0.9));
  TransportMap opt = linear_map(1, 1.5 * Mat::Identity(1, 1));
  CostField quad = make_cost("quadratic", 1);
  double h = 1e-3 * src.diameter();
  double sup = mean_curvature(opt, quad, rho, rhobar, src, h).sup_norm;
  REQUIRE_LT(sup, 1e-3, "optimal-map mean curvature sup");
  double sup_half =
      mean_curvature(opt, quad, rho, rhobar, src, h / 2).sup_norm;
  REQUIRE(sup / sup_half >= 3.5,
          "decay ratio " + std::to_string(sup / sup_half) + " below 3.5");

  // Non-optimal sinusoidal competitor: residual stabilizes above 1e-2.
  DensitySpec uni = make_uniform(DomainSpec::box({0.0}, {1.0}, 33));
  double amp = 0.15, w = 1.0;
  TransportMap sine;
  sine.n = 1;
  sine.eval = [amp, w](const Vec& x) -> Vec {
    return v1(x[0] + amp * std::sin(2 * M_PI * x[0] / w));
  };
  sine.jac = [amp, w](const Vec& x) -> Mat {
    Mat j(1, 1);
    j(0, 0) = 1 + amp * 2 * M_PI / w * std::cos(2 * M_PI * x[0] / w);
    return j;
  };
  DomainSpec box1 = DomainSpec::box({0.0}, {1.0}, 33);
  double c1 = mean_curvature(sine, quad, uni, uni, box1, 4e-3).sup_norm;
  double c2 = mean_curvature(sine, quad, uni, uni, box1, 2e-3).sup_norm;
  REQUIRE(c2 > 1e-2, "competitor mean curvature collapsed to " +
                         std::to_string(c2));
  REQUIRE(c1 / c2 < 2.0, "competitor mean curvature did not stabilize");
}

void criterion_conformal_identity() {
  CostField sq = make_cost("sqrt1p", 2);
  DomainSpec box = DomainSpec::box({-2.0, -2.0}, {2.0, 2.0}, 16);
  DensitySpec gauss = make_gaussian(box, Vec::Constant(2, 1.0));
  // Ten vanishing-component configurations: s = x - xbar has one zero
  // coordinate, which zeroes the corresponding off-diagonal metric entry.
  int done = 0;
  for (int k = 0; k < 5; ++k) {
    double t = -0.8 + 0.4 * k;
    {
      Vec x = v2(t, 0.3), xbar = v2(t - 0.5, 0.3);
      ConformalIdentityResult res =
          conformal_identity_check(sq, gauss, gauss, x, xbar, 0, 1, 2e-3);
      REQUIRE_LT(res.relative_error, 1e-3, "identity error (i,j)=(0,1)");
      ++done;
    }
    {
      Vec x = v2(0.2, t), xbar = v2(0.2, t - 0.4);
      ConformalIdentityResult res =
          conformal_identity_check(sq, gauss, gauss, x, xbar, 1, 0, 2e-3);
      REQUIRE_LT(res.relative_error, 1e-3, "identity error (i,j)=(1,0)");
      ++done;
    }
  }
  REQUIRE(done == 10, "expected 10 configurations");

  // Constant-mixed-Hessian costs with uniform densities make the conformal
  // metric constant: both sides are exactly zero.
  DensitySpec uni = make_uniform(box);
  for (const char* id : {"quadratic", "bilinear"}) {
    CostField cost = make_cost(id, 2);
    ConformalIdentityResult res = conformal_identity_check(
        cost, uni, uni, v2(0.4, -0.2), v2(-0.1, 0.3), 0, 1, 2e-3);
    REQUIRE_LT(std::abs(res.lhs), 1e-8, std::string(id) + " lhs");
    REQUIRE_LT(std::abs(res.rhs), 1e-8, std::string(id) + " rhs");
  }
}

void criterion_oracles() {
  // Exact agreement with the O(n!) permutation oracle.
  CostField quad = make_cost("quadratic", 2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0, 1);
  std::uniform_int_distribution<int> size_dist(2, 8);
  for (int inst = 0; inst < 50; ++inst) {
    int m = size_dist(rng);
    std::vector<Vec> a, b;
    for (int k = 0; k < m; ++k) {
      a.push_back(v2(unif(rng), unif(rng)));
      b.push_back(v2(unif(rng), unif(rng)));
    }
    DiscretePlan plan = solve_discrete(a, b, quad);
    std::vector<std::vector<double>> cmat(m, std::vector<double>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) cmat[i][j] = quad.eval(a[i], b[j]);
    std::vector<int> perm;
    double best = brute_force_assignment(cmat, perm) / m;
    REQUIRE_LT(std::abs(plan.total_cost - best), 1e-12,
               "assignment vs brute force gap");
  }

  // Discrete-to-continuous convergence at rate 1/sqrt(N).
  DensitySpec rho = make_gaussian(DomainSpec::box({-2.0}, {2.0}, 16),
                                  Vec::Constant(1, 0.6));
  DensitySpec rhobar = make_gaussian(DomainSpec::box({-3.0}, {3.0}, 16),
                                     Vec::Constant(1, 0.9));
  TransportMap mono = solve_1d_monotone(rho, rhobar, 2048);
  CostField quad1 = make_cost("quadratic", 1);
  // Per-stream ratios are noisy; average the errors over replicates so the
  // band tests the convergence rate, not one sample path.
  const int replicates = 12;
  std::vector<double> errors(3, 0.0);
  for (std::uint64_t rep = 0; rep < replicates; ++rep) {
    std::mt19937_64 rng2(11 + rep);
    std::uniform_real_distribution<double> u01(0, 1);
    int level = 0;
    for (int n : {100, 400, 1600}) {
      std::vector<Vec> src, tgt;
      for (int k = 0; k < n; ++k) src.push_back(v1(rho.inv_cdf(u01(rng2))));
      for (int k = 0; k < n; ++k) tgt.push_back(v1(rhobar.inv_cdf(u01(rng2))));
      DiscretePlan plan = solve_discrete(src, tgt, quad1);
      double err = 0.0;
      for (int k = 0; k < n; ++k)
        err += std::abs(tgt[plan.matching[k]][0] - mono(src[k])[0]);
      errors[level++] += err / n / replicates;
    }
  }
  double r1 = errors[1] / errors[0];
  double r2 = errors[2] / errors[1];
  double geo = std::sqrt(r1 * r2);
  REQUIRE(r1 > 0.3 && r1 < 0.8,
          "first quadrupling ratio " + std::to_string(r1));
  REQUIRE(r2 > 0.3 && r2 < 0.8,
          "second quadrupling ratio " + std::to_string(r2));
  REQUIRE(geo > 0.38 && geo < 0.66,
          "geometric-mean ratio " + std::to_string(geo) +
              " not near 1/2 per quadrupling");
}

void criterion_structural() {
  // Signature (n, n) at 1000 sampled points per cost.
  struct CostSetup {
    CostField cost;
    DomainSpec box_x;
    DomainSpec box_xbar;
  };
  std::vector<CostSetup> costs;
  DomainSpec b2 = DomainSpec::box({-1.0, -1.0}, {1.0, 1.0}, 4);
  costs.push_back({make_cost("quadratic", 2), b2, b2});
  costs.push_back({make_cost("bilinear", 2), b2, b2});
  costs.push_back({make_cost("sqrt1p", 2), b2, b2});
  costs.push_back({make_cost("log", 1), DomainSpec::box({0.0}, {1.0}, 4),
                   DomainSpec::box({2.0}, {3.0}, 4)});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0, 1);
  for (CostSetup& s : costs) {
    int n = s.cost.n;
    for (int k = 0; k < 1000; ++k) {
      Vec x(n), xbar(n);
      for (int i = 0; i < n; ++i) {
        x[i] = s.box_x.lo[i] + u01(rng) * (s.box_x.hi[i] - s.box_x.lo[i]);
        xbar[i] =
            s.box_xbar.lo[i] + u01(rng) * (s.box_xbar.hi[i] - s.box_xbar.lo[i]);
      }
      MetricAtPoint h = base_metric(s.cost, x, xbar);
      REQUIRE((h.sig == std::pair<int, int>(n, n)), "signature not (n, n)");
    }
  }

  // Lagrangian residual of every optimal family.
  for (Family& f : optimal_families()) {
    double res = lagrangian_residual(f.map, f.cost, f.region).value;
    REQUIRE_LT(res, 1e-6, f.name + " Lagrangian residual");
  }

  // Determinant inequality on 1000 random monotone matrices.
  std::normal_distribution<double> gaussn;
  for (int k = 0; k < 1000; ++k) {
    Mat m(2, 2), kk(2, 2);
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = gaussn(rng);
    for (int i = 0; i < 4; ++i) kk(i / 2, i % 2) = gaussn(rng);
    Mat b = m * m.transpose() + 0.05 * Mat::Identity(2, 2) +
            0.5 * (kk - kk.transpose());
    DeterminantInequalityResult r = determinant_inequality_check(b);
    REQUIRE(r.holds, "determinant inequality violated");
  }

  // c-cyclical monotonicity of solver outputs (cycles up to 3).
  CostField quad2 = make_cost("quadratic", 2);
  std::vector<Vec> a, b;
  for (int k = 0; k < 60; ++k) {
    a.push_back(v2(u01(rng), u01(rng)));
    b.push_back(v2(u01(rng), u01(rng)));
  }
  DiscretePlan plan = solve_discrete(a, b, quad2);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 60; ++i) pairs.emplace_back(a[i], b[plan.matching[i]]);
  REQUIRE(cyclical_monotonicity_check(pairs, quad2, 3, 1, 8000).monotone,
          "discrete matching not cyclically monotone");

  DensitySpec u1 = make_uniform(DomainSpec::box({0.0}, {1.0}, 16));
  DensitySpec g1 = make_gaussian(DomainSpec::box({-2.0}, {2.0}, 16),
                                 Vec::Constant(1, 0.7));
  TransportMap mono = solve_1d_monotone(u1, g1, 512);
  CostField quad1 = make_cost("quadratic", 1);
  std::vector<std::pair<Vec, Vec>> mono_pairs;
  for (int k = 1; k < 40; ++k) {
    Vec x = v1(k / 40.0);
    mono_pairs.emplace_back(x, mono(x));
  }
  REQUIRE(cyclical_monotonicity_check(mono_pairs, quad1, 3).monotone,
          "monotone rearrangement not cyclically monotone");
}

void criterion_mutations() {
  // (a) Corrupting the conformal exponent 1/n -> 1/(n+1) breaks the
  // calibration equality of criterion 1.
  Family fam = optimal_families()[1];  // 1-D Gaussian
  double worst_exponent = 0.0;
  double worst_half = 0.0;
  const DomainSpec& region = fam.region;
  for (std::ptrdiff_t c = 0; c < region.cell_count(); ++c) {
    if (!region.interior_cell(c, 2)) continue;
    Vec x = region.cell_point(c);
    Vec fx = fam.map(x);
    Mat a = -mixed_hessian(fam.cost, x, fx);
    Mat prod = a * fam.map.jacobian(x);
    double det = std::abs(a.determinant());
    double rho = fam.rho(x), pushed = fam.rhobar(fx);
    int n = fam.cost.n;

    // Mutant 1: exponent 1/(n+1) instead of 1/n.
    double bad_factor = std::pow(rho * pushed / det, 1.0 / (n + 1));
    Mat g_bad = bad_factor * 0.5 * (prod + prod.transpose());
    worst_exponent = std::max(
        worst_exponent, std::abs(std::sqrt(g_bad.determinant()) - rho) / rho);

    // Mutant 2: dropping the 1/2 from the conformal factor doubles the
    // metric, scaling sqrt(det g) by 2^{n/2}.
    MetricAtPoint h = conformal_metric(fam.cost, fam.rho, fam.rhobar, x, fx);
    MetricAtPoint h_bad{2.0 * h.matrix, h.sig};
    TangentPlane frame = TangentPlane::graph(fam.map.jacobian(x));
    double vol_bad = nvector_norm(h_bad, frame);
    worst_half = std::max(worst_half, std::abs(vol_bad - rho) / rho);
  }
  REQUIRE(worst_exponent > 1e-3,
          "exponent mutation undetected: residual " +
              std::to_string(worst_exponent));
  REQUIRE(worst_half > 1e-3, "half-factor mutation undetected: residual " +
                                 std::to_string(worst_half));

  // (b) Flipping one simplex orientation trips the mesh invariant.
  TransportMap ident = linear_map(1, Mat::Identity(1, 1));
  PolyhedralCurrent mesh =
      mesh_from_graph(ident, DomainSpec::box({0.0}, {1.0}, 32));
  validate_current(mesh);
  std::swap(mesh.simplices[7][0], mesh.simplices[7][1]);
  bool rejected = false;
  try {
    validate_current(mesh);
  } catch (const MeshOrientationError&) {
    rejected = true;
  }
  REQUIRE(rejected, "flipped simplex accepted by the mesh invariant");
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run_criterion(1, "calibration equality on the analytic families",
                      criterion_calibration_equality);
  ok &= run_criterion(2, "mass maximality over the rotation family",
                      criterion_mass_maximality);
  ok &= run_criterion(3, "comass of the calibration form is one",
                      criterion_comass);
  ok &= run_criterion(4, "optimal graphs have zero mean curvature",
                      criterion_mean_curvature);
  ok &= run_criterion(5, "conformal curvature identity at vanishing components",
                      criterion_conformal_identity);
  ok &= run_criterion(6, "solver oracles: exact assignment and 1/sqrt(N) rate",
                      criterion_oracles);
  ok &= run_criterion(7, "structural suite: signature, Lagrangian, "
                         "determinant, cyclical monotonicity",
                      criterion_structural);
  ok &= run_criterion(8, "mutation tests are detected",
                      criterion_mutations);
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
