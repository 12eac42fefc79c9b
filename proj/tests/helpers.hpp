// Test-side utilities: finite differences, independent reference solvers and
// instance generators. These deliberately avoid the library's numerical
// kernels so they can serve as oracles for them.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cutsph/common.hpp"
#include "cutsph/geometry.hpp"
#include "cutsph/model.hpp"
#include "cutsph/problems.hpp"

namespace testutil {

using cutsph::Mat;
using cutsph::Rng;
using cutsph::Vec;

inline Vec finite_difference_gradient(const std::function<double(const Vec&)>& f,
                                      const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec lo = x, hi = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Smooth weakly convex test constraint f(x) = q ||x - u||^2 + l'x + c0 with
// curvature max(0, -q).
inline cutsph::WeaklyConvexConstraint random_quadratic_constraint(Rng& rng,
                                                                  int n) {
  std::uniform_real_distribution<double> uq(-2.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double q = uq(rng);
  Vec u(n), l(n);
  for (int i = 0; i < n; ++i) {
    u[i] = gauss(rng);
    l[i] = 0.5 * gauss(rng);
  }
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  const double c0 = uc(rng);
  cutsph::WeaklyConvexConstraint con;
  con.label = "random-quadratic";
  con.curvature = std::max(0.0, -q);
  con.eval = [q, u, l, c0](const Vec& x) {
    return q * (x - u).squaredNorm() + l.dot(x) + c0;
  };
  const double a = con.curvature;
  con.convexified_gradient = [q, u, l, a](const Vec& x) {
    return Vec(2.0 * q * (x - u) + l + 2.0 * a * x);
  };
  return con;
}

// Reference J* for an original problem: dense grid plus multistart
// pattern-search polish from the best grid cells. Independent of every
// solver code path.
inline std::pair<Vec, double> grid_reference_optimum(const cutsph::Problem& p,
                                                     double halfwidth,
                                                     int per_axis) {
  const int n = p.dimension;
  auto feasible = [&](const Vec& x) {
    for (const auto& c : p.constraints) {
      if (c.eval(x) > 1e-12) return false;
    }
    return true;
  };
  // best feasible grid point per coarse bucket of the objective value
  std::vector<std::pair<double, Vec>> starts;
  Vec x(n);
  std::vector<int> idx(n, 0);
  const double cell = 2.0 * halfwidth / (per_axis - 1);
  while (true) {
    for (int j = 0; j < n; ++j) {
      x[j] = p.center[j] - halfwidth + cell * idx[j];
    }
    if (feasible(x)) {
      starts.emplace_back(p.objective(x), x);
    }
    int pos = 0;
    while (pos < n && ++idx[pos] == per_axis) idx[pos++] = 0;
    if (pos == n) break;
  }
  if (starts.empty()) return {Vec(), cutsph::kInf};
  std::sort(starts.begin(), starts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (starts.size() > 24) starts.resize(24);

  auto polish = [&](Vec y, double val) {
    double step = cell;
    while (step > 1e-9) {
      bool improved = false;
      for (int j = 0; j < n; ++j) {
        for (double s : {step, -step}) {
          Vec cand = y;
          cand[j] += s;
          if (feasible(cand) && p.objective(cand) < val - 1e-15) {
            y = cand;
            val = p.objective(cand);
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return std::make_pair(val, y);
  };

  Vec best = starts.front().second;
  double best_val = starts.front().first;
  for (const auto& [val, start] : starts) {
    auto [pv, py] = polish(start, val);
    if (pv < best_val) {
      best_val = pv;
      best = py;
    }
  }
  return {best, best_val};
}

// Nonempty random polyhedron: rows are supported at a known interior point.
inline cutsph::Polyhedron random_feasible_polyhedron(Rng& rng, int n, int rows,
                                                     double slack_max = 2.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uslack(0.05, slack_max);
  Vec interior(n);
  for (int i = 0; i < n; ++i) interior[i] = 0.7 * gauss(rng);
  Mat G(rows, n);
  Vec h(rows);
  for (int r = 0; r < rows; ++r) {
    Vec g(n);
    double norm = 0.0;
    while (norm < 1e-3) {
      for (int i = 0; i < n; ++i) g[i] = gauss(rng);
      norm = g.norm();
    }
    G.row(r) = g.transpose();
    h[r] = g.dot(interior) + uslack(rng);
  }
  return {G, h};
}

// Bounded random polyhedron: a rotated box plus extra supporting rows.
inline cutsph::Polyhedron random_bounded_polyhedron(Rng& rng, int n,
                                                    int extra_rows) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uoff(0.3, 1.7);
  Mat basis(n, n);
  // random orthonormal basis via Gram-Schmidt
  for (int c = 0; c < n; ++c) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    for (int prev = 0; prev < c; ++prev) {
      v -= basis.col(prev).dot(v) * basis.col(prev);
    }
    basis.col(c) = v.normalized();
  }
  const int rows = 2 * n + extra_rows;
  Mat G(rows, n);
  Vec h(rows);
  for (int c = 0; c < n; ++c) {
    G.row(2 * c) = basis.col(c).transpose();
    h[2 * c] = uoff(rng);
    G.row(2 * c + 1) = -basis.col(c).transpose();
    h[2 * c + 1] = uoff(rng);
  }
  for (int r = 2 * n; r < rows; ++r) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = gauss(rng);
    G.row(r) = g.normalized().transpose();
    h[r] = uoff(rng);
  }
  return {G, h};
}

// Geometric packing check: circles pairwise disjoint and inside the disk of
// the given radius around the origin.
inline bool circles_valid(const Vec& xy, const cutsph::PackingSpec& spec,
                          double container_radius, double tol = 1e-7) {
  const int m = spec.count();
  for (int i = 0; i < m; ++i) {
    const double cx = xy[i], cy = xy[m + i];
    if (std::hypot(cx, cy) + spec.radii[i] > container_radius + tol) {
      return false;
    }
    for (int j = i + 1; j < m; ++j) {
      const double d = std::hypot(cx - xy[j], cy - xy[m + j]);
      if (d + tol < spec.radii[i] + spec.radii[j]) return false;
    }
  }
  return true;
}

}  // namespace testutil
