// Quadratic cuts q(x) = -a||x||^2 + b'x + c <= 0 (complements of open balls,
// halfspaces when a = 0), the accumulated outer approximation set, and its
// linearization into a polyhedron at a fixed objective level.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "cutsph/common.hpp"
#include "cutsph/model.hpp"

namespace cutsph {

struct QuadraticCut {
  double a = 0.0;  // nonnegative
  Vec b;
  double c = 0.0;
  // provenance: which constraint at which iterate produced the cut
  int constraint_index = -1;
  long iterate_index = -1;

  double value(const Vec& x) const {
    return -a * x.squaredNorm() + b.dot(x) + c;
  }
};

// Tangent cut at x for a violated constraint: with b in the subdifferential of
// f + a||.||^2 at x, q(y) = -a||y||^2 + b'y + c minorizes f and q(x) = f(x).
inline QuadraticCut build_cut(const WeaklyConvexConstraint& con, const Vec& x,
                              int constraint_index = -1,
                              long iterate_index = -1) {
  const double f = con.eval(x);
  if (!std::isfinite(f)) {
    throw NonFiniteValue("build_cut: constraint not finite at the iterate");
  }
  if (!con.convexified_gradient) {
    throw SubgradientUnavailable("build_cut: constraint '" + con.label +
                                 "' has no subgradient oracle");
  }
  QuadraticCut cut;
  cut.a = con.curvature;
  cut.b = con.convexified_gradient(x);
  if (!all_finite(cut.b)) {
    throw SubgradientUnavailable("build_cut: non-finite subgradient");
  }
  cut.c = f + cut.a * x.squaredNorm() - cut.b.dot(x);
  cut.constraint_index = constraint_index;
  cut.iterate_index = iterate_index;
  return cut;
}

// Center and radius of the open ball {q > 0}, per the tangent-cut geometry:
// radius^2 = ||x - b/(2a)||^2 + f(x)/a for the generating iterate x.
inline std::pair<Vec, double> ball_of_cut(const QuadraticCut& cut, const Vec& x,
                                          double f_val) {
  if (cut.a <= 0.0) {
    throw DegenerateHalfspace("ball_of_cut: a = 0 cut is a halfspace");
  }
  Vec center = cut.b / (2.0 * cut.a);
  double r2 = (x - center).squaredNorm() + f_val / cut.a;
  return {std::move(center), std::sqrt(std::max(0.0, r2))};
}

enum class RestartVariant { warm, inexact };

// Accumulated cuts since the last restart, plus the optional restart floor
// J(x) >= level_floor (a norm floor once the problem is centered at 0).
struct OuterApproximation {
  std::vector<QuadraticCut> cuts;
  std::optional<double> level_floor;
  long last_restart = 0;

  long cut_count() const { return static_cast<long>(cuts.size()); }
};

inline OuterApproximation append_cuts(OuterApproximation oa, const Problem& p,
                                      const ViolationReport& report,
                                      const Vec& x, long iterate_index) {
  if (report.empty()) {
    throw PreconditionViolated("append_cuts: empty violation report");
  }
  for (int idx : report.indices) {
    oa.cuts.push_back(build_cut(p.constraints[idx], x, idx, iterate_index));
  }
  return oa;
}

// Restart set. Warm variant keeps just the cuts generated at the restart
// point together with the floor J(x) >= J_k; the inexact variant keeps the
// floor alone (its cuts are rebuilt at the next iterate).
inline OuterApproximation restart_set(const Problem& p, const Vec& x,
                                      const ViolationReport& report,
                                      double level_floor,
                                      RestartVariant variant,
                                      long iterate_index) {
  OuterApproximation oa;
  oa.level_floor = level_floor;
  oa.last_restart = iterate_index;
  if (variant == RestartVariant::warm) {
    if (report.empty()) {
      throw PreconditionViolated("restart_set: warm restart needs violations");
    }
    for (int idx : report.indices) {
      oa.cuts.push_back(build_cut(p.constraints[idx], x, idx, iterate_index));
    }
  }
  return oa;
}

// True when the whole sphere ||x||^2 = alpha satisfies the cut, i.e.
// max_{||x||^2=alpha} b'x = ||b|| sqrt(alpha) <= a*alpha - c.
inline bool is_redundant_at_level(const QuadraticCut& cut, double alpha) {
  if (alpha < 0.0) throw InvalidParameter("is_redundant_at_level: alpha < 0");
  return cut.b.norm() * std::sqrt(alpha) <= cut.a * alpha - cut.c;
}

// True when no sphere point satisfies the cut (the cut ball covers the whole
// sphere): min_{||x||^2=alpha} b'x = -||b|| sqrt(alpha) > a*alpha - c.
inline bool excludes_whole_sphere(const QuadraticCut& cut, double alpha) {
  return -cut.b.norm() * std::sqrt(alpha) > cut.a * alpha - cut.c;
}

// Linear system obtained by substituting ||x||^2 = alpha into every cut:
// row b'x <= a*alpha - c. Redundant rows are dropped; if some cut excludes
// the whole sphere the polyhedron cannot meet it and sphere_infeasible is set.
struct LevelPolyhedron {
  Mat normals;  // rows stacked; one row per retained cut
  Vec offsets;
  double level = 0.0;
  bool sphere_infeasible = false;
  std::vector<int> cut_origin;  // index into the source cut list

  long row_count() const { return normals.rows(); }
};

inline LevelPolyhedron linearize_at_level(const OuterApproximation& oa,
                                          double alpha) {
  if (alpha < 0.0) throw InvalidParameter("linearize_at_level: alpha < 0");
  LevelPolyhedron poly;
  poly.level = alpha;
  // The floor ||x||^2 >= floor linearizes to 0 <= alpha - floor: vacuous at
  // any level at or above the floor, impossible below it.
  if (oa.level_floor && alpha < *oa.level_floor &&
      !(std::abs(alpha - *oa.level_floor) <=
        1e-12 * std::max(1.0, std::abs(alpha)))) {
    poly.sphere_infeasible = true;
  }

  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(oa.cuts.size()); ++i) {
    const QuadraticCut& cut = oa.cuts[i];
    if (excludes_whole_sphere(cut, alpha)) {
      poly.sphere_infeasible = true;
      continue;
    }
    if (is_redundant_at_level(cut, alpha)) continue;
    keep.push_back(i);
  }
  const int n = oa.cuts.empty() ? 0 : static_cast<int>(oa.cuts.front().b.size());
  poly.normals.resize(static_cast<int>(keep.size()), n);
  poly.offsets.resize(static_cast<int>(keep.size()));
  for (int r = 0; r < static_cast<int>(keep.size()); ++r) {
    const QuadraticCut& cut = oa.cuts[keep[r]];
    poly.normals.row(r) = cut.b.transpose();
    poly.offsets[r] = cut.a * alpha - cut.c;
    poly.cut_origin.push_back(keep[r]);
  }
  return poly;
}

}  // namespace cutsph
