#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "otcal/domain.hpp"
#include "otcal/errors.hpp"

namespace otcal {

// Smooth transport cost c(x, xbar) with exact or finite-difference
// derivatives and a predicate marking the set where smoothness fails.
struct CostField {
  int n = 1;
  std::function<double(const Vec&, const Vec&)> eval;
  // Optional closed forms; central differences are the fallback.
  std::function<Vec(const Vec&, const Vec&)> grad_x;     // Dc
  std::function<Vec(const Vec&, const Vec&)> grad_xbar;  // Dbar c
  std::function<Mat(const Vec&, const Vec&)> mixed;      // D Dbar c
  std::function<bool(const Vec&, const Vec&)> cut_locus;
  double fd_step = 1e-4;  // absolute step; factories scale by domain diameter

  bool on_cut_locus(const Vec& x, const Vec& xbar) const {
    return cut_locus && cut_locus(x, xbar);
  }
};

double eval_cost(const CostField& cost, const Vec& x, const Vec& xbar);

// Dc and Dbar c, analytic when available, else central differences.
Vec cost_grad_x(const CostField& cost, const Vec& x, const Vec& xbar);
Vec cost_grad_xbar(const CostField& cost, const Vec& x, const Vec& xbar);

// (D Dbar c)_{ij} = d^2 c / dx^i dxbar^j.
Mat mixed_hessian(const CostField& cost, const Vec& x, const Vec& xbar);

// Finite-difference mixed Hessian regardless of closed forms (test oracle).
Mat mixed_hessian_fd(const CostField& cost, const Vec& x, const Vec& xbar);

struct TwistReport {
  bool injective = true;
  bool nondegenerate = true;
  int sample_count = 0;
  double min_image_gap = 0.0;  // smallest pairwise distance between Dc images
  bool ok() const { return injective && nondegenerate; }
};

// Sampled witness for (A1): xbar -> Dc(x, xbar) injective on the samples and
// D Dbar c nonsingular at each sample.
TwistReport check_twist(const CostField& cost, const Vec& x,
                        const std::vector<Vec>& samples, double tol = 1e-10);

// (A2) at a point: |det D Dbar c| > tol.
bool check_nondegenerate(const CostField& cost, const Vec& x, const Vec& xbar,
                         double tol = 1e-12);

// Built-in registry: "quadratic", "bilinear", "log", "sqrt1p".
CostField make_cost(const std::string& id, int n,
                    double cut_margin = 1e-3);

// Cost sampled on a uniform (x, xbar) product grid, bicubic interpolation.
// Supported for n = 1 only.
CostField make_grid_cost(const DomainSpec& dom_x, const DomainSpec& dom_xbar,
                         const std::vector<double>& samples);

// Set the finite-difference step from the transported domains.
void scale_fd_step(CostField& cost, const DomainSpec& dom_x,
                   const DomainSpec& dom_xbar, double rel = 1e-4);

}  // namespace otcal
