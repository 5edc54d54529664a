#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "otcal/assignment.hpp"
#include "otcal/transport.hpp"

using namespace otcal;

namespace {

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

}  // namespace

TEST_CASE("monotone rearrangement closed forms") {
  DensitySpec u01 = make_uniform(DomainSpec::box({0.0}, {1.0}, 64));
  DensitySpec u02 = make_uniform(DomainSpec::box({0.0}, {2.0}, 64));
  TransportMap f = solve_1d_monotone(u01, u02, 512);
  for (double x : {0.1, 0.3, 0.55, 0.9})
    CHECK(f(v1(x))[0] == doctest::Approx(2 * x).epsilon(1e-6));

  TransportMap id = solve_1d_monotone(u01, u01, 512);
  for (double x : {0.2, 0.5, 0.8})
    CHECK(id(v1(x))[0] == doctest::Approx(x).epsilon(1e-6));

  DomainSpec b = DomainSpec::box({-4.0}, {4.0}, 64);
  DensitySpec g1 = make_gaussian(b, Vec::Constant(1, 0.5));
  DensitySpec g2 = make_gaussian(b, Vec::Constant(1, 1.0));
  TransportMap fg = solve_1d_monotone(g1, g2, 1024);
  for (double x : {-0.8, -0.2, 0.4, 1.0})
    CHECK(fg(v1(x))[0] == doctest::Approx(2 * x).epsilon(1e-3));
}

TEST_CASE("discrete solver against the permutation oracle") {
  CostField quad = make_cost("quadratic", 1);
  std::vector<Vec> src = {v1(0.1), v1(0.4), v1(0.9)};
  std::vector<Vec> tgt = {v1(0.2), v1(0.5), v1(1.0)};
  DiscretePlan plan = solve_discrete(src, tgt, quad);
  for (int i = 0; i < 3; ++i) CHECK(plan.matching[i] == i);  // sorted order

  DiscretePlan single = solve_discrete({v1(0.3)}, {v1(0.8)}, quad);
  CHECK(single.matching == std::vector<int>{0});

  CostField quad2 = make_cost("quadratic", 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int inst = 0; inst < 10; ++inst) {
    std::vector<Vec> a, b;
    for (int k = 0; k < 6; ++k) {
      a.push_back(v2(unif(rng), unif(rng)));
      b.push_back(v2(unif(rng), unif(rng)));
    }
    DiscretePlan p = solve_discrete(a, b, quad2);
    std::vector<std::vector<double>> cmat(6, std::vector<double>(6));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) cmat[i][j] = quad2.eval(a[i], b[j]);
    std::vector<int> perm;
    double best = brute_force_assignment(cmat, perm) / 6.0;
    CHECK(p.total_cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("Gaussian map closed forms") {
  CHECK((gaussian_map_matrix(Mat::Identity(2, 2), Mat::Identity(2, 2)) -
         Mat::Identity(2, 2))
            .norm() < 1e-12);
  CHECK((gaussian_map_matrix(Mat::Identity(2, 2), 4 * Mat::Identity(2, 2)) -
         2 * Mat::Identity(2, 2))
            .norm() < 1e-12);
  Mat s = Mat::Zero(2, 2), sb = Mat::Zero(2, 2);
  s.diagonal() << 1, 4;
  sb.diagonal() << 9, 1;
  Mat a = gaussian_map_matrix(s, sb);
  CHECK(a(0, 0) == doctest::Approx(3.0));
  CHECK(a(1, 1) == doctest::Approx(0.5));
  CHECK((a * s * a.transpose() - sb).norm() < 1e-10);

  Mat bad = -Mat::Identity(2, 2);
  CHECK_THROWS_AS(gaussian_map_matrix(bad, sb), NotPositiveDefiniteError);
}

TEST_CASE("map from potential solves Dc(x, F(x)) = -Du(x)") {
  CostField quad = make_cost("quadratic", 1);
  DomainSpec src = DomainSpec::box({0.0}, {1.0}, 16);
  DomainSpec tgt = DomainSpec::box({-1.0}, {2.0}, 16);

  TransportPotentials zero;
  zero.u = [](const Vec&) { return 0.0; };
  zero.grad_u = [](const Vec& x) { return Vec::Zero(x.size()); };
  TransportMap f0 = map_from_potential(zero, quad, src, tgt);
  CHECK(f0(v1(0.4))[0] == doctest::Approx(0.4).epsilon(1e-8));

  double b = 0.3;
  TransportPotentials lin;
  lin.u = [b](const Vec& x) { return b * x[0]; };
  lin.grad_u = [b](const Vec& x) { return Vec::Constant(x.size(), b); };
  TransportMap fb = map_from_potential(lin, quad, src, tgt);
  CHECK(fb(v1(0.4))[0] == doctest::Approx(0.7).epsilon(1e-8));

  CostField bil = make_cost("bilinear", 2);
  Mat q(2, 2);
  q << 2.0, 0.5, 0.5, 1.0;
  TransportPotentials quadpot;
  quadpot.u = [q](const Vec& x) { return 0.5 * x.dot(q * x); };
  quadpot.grad_u = [q](const Vec& x) -> Vec { return q * x; };
  DomainSpec src2 = DomainSpec::box({0.0, 0.0}, {1.0, 1.0}, 8);
  DomainSpec tgt2 = DomainSpec::box({-1.0, -1.0}, {3.0, 3.0}, 8);
  TransportMap fq = map_from_potential(quadpot, bil, src2, tgt2);
  Vec x = v2(0.3, 0.6);
  CHECK((fq(x) - q * x).norm() < 1e-8);
}

TEST_CASE("potential consistency for the Gaussian family") {
  Mat s = Mat::Zero(2, 2), sb = Mat::Zero(2, 2);
  s.diagonal() << 1.0, 2.0;
  sb.diagonal() << 3.0, 0.5;
  Mat a = gaussian_map_matrix(s, sb);
  // u(x) = x^T (I - A) x / 2 gives Du = -Dc(x, Ax) for the quadratic cost.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    Vec x = v2(gauss(rng), gauss(rng));
    Vec du = (Mat::Identity(2, 2) - a) * x;
    Vec dc = x - a * x;  // Dc(x, xbar) = x - xbar for quadratic
    CHECK((du + (-dc)).norm() == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("total cost quadrature") {
  CostField quad = make_cost("quadratic", 1);
  DensitySpec u01 = make_uniform(DomainSpec::box({0.0}, {1.0}, 2048));
  TransportMap ident;
  ident.n = 1;
  ident.eval = [](const Vec& x) { return x; };
  ident.jac = [](const Vec&) { return Mat::Identity(1, 1); };
  CHECK(std::abs(total_cost(ident, u01, quad)) < 1e-12);

  TransportMap twice;
  twice.n = 1;
  twice.eval = [](const Vec& x) -> Vec { return 2 * x; };
  twice.jac = [](const Vec&) -> Mat { return 2 * Mat::Identity(1, 1); };
  CHECK(std::abs(total_cost(twice, u01, quad) - 1.0 / 6.0) < 1e-6);

  CostField q1 = make_cost("quadratic", 1);
  DiscretePlan ident_plan = solve_discrete({v1(0), v1(1)}, {v1(0), v1(1)}, q1);
  DiscretePlan swap_plan = ident_plan;
  swap_plan.matching = {1, 0};
  CHECK(total_cost(ident_plan, q1) < total_cost(swap_plan, q1));
}

TEST_CASE("cyclical monotonicity") {
  CostField quad = make_cost("quadratic", 1);
  CyclicalReport mono = cyclical_monotonicity_check(
      {{v1(0), v1(0)}, {v1(1), v1(2)}}, quad, 2);
  CHECK(mono.monotone);
  CyclicalReport crossed = cyclical_monotonicity_check(
      {{v1(0), v1(2)}, {v1(1), v1(0)}}, quad, 2);
  CHECK_FALSE(crossed.monotone);
  CyclicalReport single =
      cyclical_monotonicity_check({{v1(0.5), v1(0.7)}}, quad, 3);
  CHECK(single.monotone);
}

TEST_CASE("discrete matchings are cyclically monotone") {
  CostField quad = make_cost("quadratic", 2);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(0, 1);
  std::vector<Vec> a, b;
  for (int k = 0; k < 40; ++k) {
    a.push_back(v2(unif(rng), unif(rng)));
    b.push_back(v2(unif(rng), unif(rng)));
  }
  DiscretePlan p = solve_discrete(a, b, quad);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int i = 0; i < 40; ++i) pairs.emplace_back(a[i], b[p.matching[i]]);
  CHECK(cyclical_monotonicity_check(pairs, quad, 3, 1, 4000).monotone);
}

TEST_CASE("point cloud and grid map CSV ingestion") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "otcal_transport_csv";
  fs::create_directories(dir);

  std::ofstream pts(dir / "cloud.csv");
  pts << "x1,x2\n0.1,0.2\n0.3,0.4\n";
  pts.close();
  std::vector<Vec> cloud = read_points_csv((dir / "cloud.csv").string());
  REQUIRE(cloud.size() == 2);
  CHECK(cloud[1][0] == doctest::Approx(0.3));
  CHECK(cloud[1][1] == doctest::Approx(0.4));

  std::ofstream gm(dir / "fmap.csv");
  gm << "x,fx\n";
  for (int k = 0; k <= 100; ++k) {
    double x = k / 100.0;
    gm << x << "," << 2 * x << "\n";
  }
  gm.close();
  DomainSpec tgt = DomainSpec::box({0.0}, {2.0}, 16);
  TransportMap f = map_from_grid_csv((dir / "fmap.csv").string(), tgt);
  CHECK(f(v1(0.37))[0] == doctest::Approx(0.74).epsilon(1e-9));
  CHECK(f.jacobian(v1(0.5))(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
}
