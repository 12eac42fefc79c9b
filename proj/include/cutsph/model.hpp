// Problem data: weakly convex constraints, the shifted quadratic objective
// and the slack-variable reformulation that turns a generic weakly convex
// program into "minimize ||y||^2 over an intersection of level sets".
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cutsph/common.hpp"

namespace cutsph {

// A constraint f_i(x) <= 0 where f_i + curvature*||.||^2 is convex.
// convexified_gradient returns an element of the (Moreau) subdifferential of
// that convexification; for smooth f_i it equals grad f_i(x) + 2*curvature*x.
struct WeaklyConvexConstraint {
  std::function<double(const Vec&)> eval;
  double curvature = 0.0;
  std::function<Vec(const Vec&)> convexified_gradient;
  std::string label;

  double operator()(const Vec& x) const { return eval(x); }
};

// Optional smooth view of a problem's feasibility system, for local
// refinement: residual values r_j(x) that are all <= 0 exactly when the point
// is feasible, with max_j r_j(x) = max_i f_i(x), but split so that each r_j
// is differentiable (a max-type constraint contributes one residual per
// term). Newton-style feasibility restoration is quadratic on such a view
// where it would crawl on the raw max.
struct SmoothResidualView {
  std::function<Vec(const Vec&)> values;
  std::function<Mat(const Vec&)> jacobian;  // row j = gradient of r_j
};

struct Problem {
  int dimension = 0;
  Vec center;  // z; objective J(x) = ||x - z||^2
  std::vector<WeaklyConvexConstraint> constraints;
  double level_cap = kInf;  // alpha_E metadata, never enforced
  std::optional<SmoothResidualView> polish_view;

  // Set by reformulate(): width of the original variable block.
  int original_dimension = 0;
  // Stated, non machine-checkable assumptions (e.g. nonemptiness of the
  // argmin set D used by the reformulation).
  std::string assumptions;
  // Optional per-iterate diagnostic reported in traces (e.g. the packing
  // container function or the classification loss F1).
  std::string aux_label;
  std::function<double(const Vec&)> aux_metric;

  double objective(const Vec& x) const { return (x - center).squaredNorm(); }
};

struct ViolationReport {
  std::vector<int> indices;   // i with f_i(x) > 0, ascending
  std::vector<double> values; // matching f_i(x)

  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
};

inline ViolationReport violated_set(const Problem& p, const Vec& x) {
  if (!all_finite(x)) throw NonFiniteValue("violated_set: non-finite point");
  ViolationReport report;
  for (int i = 0; i < static_cast<int>(p.constraints.size()); ++i) {
    const double v = p.constraints[i].eval(x);
    if (!std::isfinite(v)) {
      throw NonFiniteValue("constraint '" + p.constraints[i].label +
                           "' is not finite at the queried point");
    }
    if (v > 0.0) {
      report.indices.push_back(i);
      report.values.push_back(v);
    }
  }
  return report;
}

inline double max_violation(const Problem& p, const Vec& x) {
  double worst = -kInf;
  for (const auto& c : p.constraints) worst = std::max(worst, c.eval(x));
  return worst;
}

// Slack-variable reformulation. Given
//   minimize F(xbar) s.t. g_i(xbar) <= 0
// with F weakly convex (objective.curvature = beta_1/2) and rho, eta chosen so
// that some minimizer xhat satisfies F(xhat) + eta >= (rho/2)||xhat||^2,
// returns the equivalent problem
//   minimize ||y||^2  s.t.  F(ybar) + eta - (rho/2)||y||^2 <= 0,
//                           g_i(ybar) <= 0,
// over y = (ybar, y_n). The extra coordinate never enters the lifted g_i, but
// it does enter their convexifications, so the lifted gradients carry the
// 2*a*y_n term.
inline Problem reformulate(const WeaklyConvexConstraint& objective,
                           const std::vector<WeaklyConvexConstraint>& g,
                           int original_dim, double rho, double eta) {
  if (rho <= 0.0) throw InvalidParameter("reformulate: rho must be positive");
  const int n = original_dim + 1;

  Problem p;
  p.dimension = n;
  p.center = Vec::Zero(n);
  p.original_dimension = original_dim;
  p.assumptions =
      "assumes D = {xhat in Argmin F | F(xhat) + eta >= (rho/2)||xhat||^2} "
      "is nonempty (not machine-checked)";

  WeaklyConvexConstraint level;
  level.label = objective.label.empty() ? "objective-level" : objective.label;
  level.curvature = objective.curvature + rho / 2.0;
  {
    auto F = objective.eval;
    auto Fgrad = objective.convexified_gradient;
    const double aF = objective.curvature;
    level.eval = [F, rho, eta, original_dim](const Vec& y) {
      return F(y.head(original_dim)) + eta - (rho / 2.0) * y.squaredNorm();
    };
    // (f1 + a1||.||^2)(y) = [F + aF||.||^2](ybar) + aF*y_n^2 + eta
    level.convexified_gradient = [Fgrad, aF, original_dim](const Vec& y) {
      Vec b = Vec::Zero(y.size());
      b.head(original_dim) = Fgrad(y.head(original_dim));
      b[original_dim] = 2.0 * aF * y[original_dim];
      return b;
    };
  }
  p.constraints.push_back(std::move(level));

  for (const auto& gi : g) {
    WeaklyConvexConstraint lifted;
    lifted.label = gi.label;
    lifted.curvature = gi.curvature;
    auto geval = gi.eval;
    auto ggrad = gi.convexified_gradient;
    const double a = gi.curvature;
    lifted.eval = [geval, original_dim](const Vec& y) {
      return geval(y.head(original_dim));
    };
    lifted.convexified_gradient = [ggrad, a, original_dim](const Vec& y) {
      Vec b = Vec::Zero(y.size());
      b.head(original_dim) = ggrad(y.head(original_dim));
      b[original_dim] = 2.0 * a * y[original_dim];
      return b;
    };
    p.constraints.push_back(std::move(lifted));
  }
  return p;
}

// First original_dimension coordinates of a reformulated solution.
inline Vec recover_original_solution(const Problem& p, const Vec& y) {
  const int keep = p.original_dimension > 0 ? p.original_dimension
                                            : p.dimension - 1;
  return y.head(keep);
}

}  // namespace cutsph
