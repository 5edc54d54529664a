#include <chrono>
#include <cstdio>

#include "otcal/calibration.hpp"
#include "otcal/config.hpp"
#include "otcal/graph_surface.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn&& fn, int repeats = 3) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  using namespace otcal;

  RunConfig cfg = parse_config_text(
      "cost.kind = quadratic\n"
      "cost.dim = 2\n"
      "domain.lo = -2,-2\n"
      "domain.hi = 2,2\n"
      "domain_bar.lo = -3,-3\n"
      "domain_bar.hi = 3,3\n"
      "domain.res = 96\n"
      "rho.kind = gaussian\n"
      "rho.sigma = 0.6\n"
      "rhobar.kind = gaussian\n"
      "rhobar.sigma = 0.9\n"
      "map.kind = gaussian\n");
  Problem p = build_problem(cfg);

  report("lagrangian_residual",
         time_ms([&] {
           lagrangian_residual(p.map, p.cost, p.domain, ExecPolicy::Serial);
         }),
         time_ms([&] {
           lagrangian_residual(p.map, p.cost, p.domain, ExecPolicy::Parallel);
         }));

  report("calibration_equality",
         time_ms([&] {
           calibration_equality_check(p.map, p.cost, p.rho, p.rhobar, p.domain,
                                      ExecPolicy::Serial);
         }),
         time_ms([&] {
           calibration_equality_check(p.map, p.cost, p.rho, p.rhobar, p.domain,
                                      ExecPolicy::Parallel);
         }));

  DomainSpec mesh_region = p.domain;
  mesh_region.resolution.assign(2, 128);
  PolyhedralCurrent mesh = mesh_from_graph(p.map, mesh_region);
  MetricField field = [&](const Vec& x, const Vec& xbar) {
    return conformal_metric(p.cost, p.rho, p.rhobar, x, xbar);
  };
  report("polyhedral_mass",
         time_ms([&] { polyhedral_mass(mesh, field, ExecPolicy::Serial); }),
         time_ms([&] { polyhedral_mass(mesh, field, ExecPolicy::Parallel); }));

  CalibrationForm phi{p.rho, p.rhobar};
  report("current_integral",
         time_ms([&] { current_integral(mesh, phi, ExecPolicy::Serial); }),
         time_ms([&] { current_integral(mesh, phi, ExecPolicy::Parallel); }));

  DomainSpec mc_region = p.domain;
  mc_region.resolution.assign(2, 13);
  double fd = 1e-3 * std::hypot(p.domain.diameter(), p.domain_bar.diameter());
  report("mean_curvature",
         time_ms(
             [&] {
               mean_curvature(p.map, p.cost, p.rho, p.rhobar, mc_region, fd,
                              ExecPolicy::Serial);
             },
             1),
         time_ms(
             [&] {
               mean_curvature(p.map, p.cost, p.rho, p.rhobar, mc_region, fd,
                              ExecPolicy::Parallel);
             },
             1));

  return 0;
}
