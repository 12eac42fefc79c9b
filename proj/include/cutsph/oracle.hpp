// Brute-force reference solvers for certifying small instances. Deliberately
// simple and slow, and deliberately sharing no numerical kernels with
// geometry.hpp: projections are enumerated over active subsets with Eigen
// factorizations, vertices over row subsets, and the S-QCQP oracle walks a
// dense grid with local polish. Certificates are sampled, and labeled so.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cutsph/common.hpp"
#include "cutsph/cuts.hpp"
#include "cutsph/geometry.hpp"

namespace cutsph {

struct OracleBudget {
  int grid_per_axis = 21;
  int multistart = 8;
  double box_halfwidth = 0.0;  // 0: derive from the instance
  int cap_n = 4;
  long max_evals = 40000000;
};

struct SqcqpSolution {
  Vec point;
  double value = kInf;
  double gap = kInf;  // grid-resolution bound on the J variation per cell
  std::string certificate = "sampled";
};

namespace oracle_detail {

// Tight feasibility: any slack here directly biases the reported optimum low.
inline bool cuts_feasible(const std::vector<QuadraticCut>& cuts, const Vec& x,
                          double tol = 1e-13) {
  for (const QuadraticCut& q : cuts) {
    const double scale = 1.0 + std::abs(q.c) + q.a * x.squaredNorm();
    if (q.value(x) > tol * scale) return false;
  }
  return true;
}

// Pattern-search polish within the feasible region.
inline void polish(const std::vector<QuadraticCut>& cuts, const Vec& z,
                   Vec& x, double& value, double initial_step, double tol) {
  const int n = static_cast<int>(x.size());
  double step = initial_step;
  while (step > 1e-10) {
    bool improved = false;
    for (int j = 0; j < n; ++j) {
      for (double s : {step, -step}) {
        Vec y = x;
        y[j] += s;
        if (!cuts_feasible(cuts, y, tol)) continue;
        const double v = (y - z).squaredNorm();
        if (v < value - 1e-15) {
          x = y;
          value = v;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace oracle_detail

// Global minimization of ||x - z||^2 over an intersection of quadratic cuts
// (plus the optional objective floor, folded in as one more cut). Dense grid
// over a box, radial candidates on each cut sphere, then local polish.
inline SqcqpSolution brute_force_sqcqp(const OuterApproximation& oa,
                                       const Vec& z,
                                       const OracleBudget& budget) {
  const int n = static_cast<int>(z.size());
  if (n > budget.cap_n) {
    throw BudgetExceeded("brute_force_sqcqp: dimension exceeds the oracle cap");
  }
  std::vector<QuadraticCut> cuts = oa.cuts;
  if (oa.level_floor && *oa.level_floor > 0.0) {
    // J(x) >= floor  <=>  -||x||^2 + 2 z'x + floor - ||z||^2 <= 0
    QuadraticCut floor_cut;
    floor_cut.a = 1.0;
    floor_cut.b = 2.0 * z;
    floor_cut.c = *oa.level_floor - z.squaredNorm();
    cuts.push_back(std::move(floor_cut));
  }
  const double feas_tol = 1e-13;

  SqcqpSolution best;
  auto consider = [&](const Vec& x) {
    if (!oracle_detail::cuts_feasible(cuts, x, feas_tol)) return;
    const double v = (x - z).squaredNorm();
    if (v < best.value) {
      best.value = v;
      best.point = x;
    }
  };

  consider(z);

  // Radial candidates: nearest sphere point of every cut ball containing z.
  Rng rng(20240001u);
  for (const QuadraticCut& q : cuts) {
    if (q.a <= 0.0) continue;
    Vec center = q.b / (2.0 * q.a);
    const double r2 = center.squaredNorm() + q.c / q.a;
    if (r2 <= 0.0) continue;
    const double r = std::sqrt(r2);
    Vec d = z - center;
    if (d.norm() > 1e-12) {
      consider(center + (r * (1.0 + 1e-13)) * d.normalized());
    } else {
      for (int t = 0; t < std::max(2, budget.multistart); ++t) {
        Vec dir = (t == 0) ? Vec(Vec::Unit(n, 0)) : random_direction(rng, n);
        consider(center + (r * (1.0 + 1e-13)) * dir);
      }
    }
  }

  // Grid sweep.
  double W = budget.box_halfwidth;
  if (W <= 0.0) {
    W = 1.0;
    for (const QuadraticCut& q : cuts) {
      if (q.a <= 0.0) continue;
      Vec center = q.b / (2.0 * q.a);
      const double r2 = center.squaredNorm() + q.c / q.a;
      if (r2 > 0.0) {
        W = std::max(W, (center - z).norm() + std::sqrt(r2));
      }
    }
    W *= 1.25;
  }
  const int g = std::max(3, budget.grid_per_axis);
  double count = 1.0;
  for (int j = 0; j < n; ++j) count *= g;
  if (count > static_cast<double>(budget.max_evals)) {
    throw BudgetExceeded("brute_force_sqcqp: grid exceeds the eval budget");
  }
  const double cell = 2.0 * W / (g - 1);
  Vec x(n);
  std::vector<int> idx(n, 0);
  while (true) {
    for (int j = 0; j < n; ++j) x[j] = z[j] - W + cell * idx[j];
    consider(x);
    int pos = 0;
    while (pos < n && ++idx[pos] == g) idx[pos++] = 0;
    if (pos == n) break;
  }

  if (best.value == kInf) {
    // No feasible sample: fall back to long radial shots before reporting.
    for (int t = 0; t < 64; ++t) {
      consider(z + (2.0 * W + t) * random_direction(rng, n));
      if (best.value < kInf) break;
    }
    if (best.value == kInf) {
      throw BudgetExceeded("brute_force_sqcqp: no feasible sample found");
    }
  }

  oracle_detail::polish(cuts, z, best.point, best.value, cell, feas_tol);
  const double lipschitz = 2.0 * (W * std::sqrt(static_cast<double>(n)) +
                                  (best.point - z).norm());
  best.gap = lipschitz * cell * std::sqrt(static_cast<double>(n));
  return best;
}

// Exact projection via enumeration of active subsets with KKT filtering.
struct ExactProjection {
  Vec point;
  double value = kInf;
};

inline ExactProjection exact_projection_qp(const Polyhedron& P, const Vec& z) {
  const int n = P.dim();
  const long m = P.rows();
  if (m > 12 || n > 6) {
    throw BudgetExceeded("exact_projection_qp: instance exceeds oracle caps");
  }
  const double tol = 1e-9;
  ExactProjection best;

  if (P.contains(z, tol)) {
    best.point = z;
    best.value = 0.0;
    return best;
  }

  std::vector<int> subset;
  std::function<void(int)> visit = [&](int start) {
    if (!subset.empty()) {
      Mat Ga(static_cast<long>(subset.size()), n);
      Vec ha(static_cast<long>(subset.size()));
      for (std::size_t r = 0; r < subset.size(); ++r) {
        Ga.row(static_cast<long>(r)) = P.G.row(subset[r]);
        ha[static_cast<long>(r)] = P.h[subset[r]];
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(Ga * Ga.transpose());
      Vec nu = cod.solve(Ga * z - ha);
      Vec x = z - Ga.transpose() * nu;
      const double eq_resid = (Ga * x - ha).lpNorm<Eigen::Infinity>();
      bool ok = eq_resid <= 1e-7 * (1.0 + ha.lpNorm<Eigen::Infinity>()) &&
                nu.minCoeff() >= -1e-9;
      if (ok && P.contains(x, tol)) {
        const double v = (x - z).squaredNorm();
        if (v < best.value) {
          best.value = v;
          best.point = x;
        }
      }
    }
    if (static_cast<int>(subset.size()) == n) return;
    for (int i = start; i < m; ++i) {
      subset.push_back(i);
      visit(i + 1);
      subset.pop_back();
    }
  };
  visit(0);

  if (best.value == kInf) {
    // Sampled confirmation that the polyhedron itself is empty.
    Rng rng(77u);
    const double W = 4.0 * (1.0 + z.norm() + P.h.cwiseAbs().maxCoeff());
    for (int t = 0; t < 20000; ++t) {
      Vec x = z + W * random_direction(rng, n) *
                       std::pow(static_cast<double>(t % 100) / 100.0, 2.0);
      if (P.contains(x, tol)) {
        throw BudgetExceeded(
            "exact_projection_qp: KKT enumeration failed on a feasible "
            "instance");
      }
    }
    throw UnboundedPolyhedron("exact_projection_qp: infeasible (certified on "
                              "a sampled grid)");
  }
  return best;
}

// All basic feasible points of a bounded polyhedron. Unboundedness, when
// detected through a recession direction, is reported via exception.
inline std::vector<Vec> enumerate_vertices(const Polyhedron& P) {
  const int n = P.dim();
  const long m = P.rows();
  if (m > 25 || n > 10) {
    throw BudgetExceeded("enumerate_vertices: instance exceeds oracle caps");
  }
  const double tol = 1e-9;

  // Recession direction search: lineality space, then extreme-ray subsets.
  {
    Eigen::FullPivLU<Mat> lu(P.G);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) {
      throw UnboundedPolyhedron("enumerate_vertices: lineality direction");
    }
  }
  if (n >= 2) {
    std::vector<int> subset;
    std::function<bool(int)> ray_scan = [&](int start) -> bool {
      if (static_cast<int>(subset.size()) == n - 1) {
        Mat A(n - 1, n);
        for (int r = 0; r < n - 1; ++r) A.row(r) = P.G.row(subset[r]);
        Eigen::FullPivLU<Mat> lu(A);
        lu.setThreshold(1e-10);
        if (lu.rank() == n - 1) {
          Mat ker = lu.kernel();
          if (ker.cols() == 1) {
            Vec d = ker.col(0).normalized();
            if ((P.G * d).maxCoeff() <= tol || (P.G * (-d)).maxCoeff() <= tol) {
              return true;
            }
          }
        }
        return false;
      }
      for (int i = start; i < m; ++i) {
        subset.push_back(i);
        if (ray_scan(i + 1)) return true;
        subset.pop_back();
      }
      return false;
    };
    if (ray_scan(0)) {
      throw UnboundedPolyhedron("enumerate_vertices: recession ray found");
    }
  } else if (n == 1) {
    for (double s : {1.0, -1.0}) {
      if ((P.G * Vec::Constant(1, s)).maxCoeff() <= tol) {
        throw UnboundedPolyhedron("enumerate_vertices: unbounded axis");
      }
    }
  }

  std::vector<Vec> vertices;
  std::vector<int> subset;
  std::function<void(int)> scan = [&](int start) {
    if (static_cast<int>(subset.size()) == n) {
      Mat A(n, n);
      Vec b(n);
      for (int r = 0; r < n; ++r) {
        A.row(r) = P.G.row(subset[r]);
        b[r] = P.h[subset[r]];
      }
      Eigen::FullPivLU<Mat> lu(A);
      lu.setThreshold(1e-10);
      if (lu.isInvertible()) {
        Vec x = lu.solve(b);
        if (x.allFinite() && P.contains(x, tol)) {
          for (const Vec& v : vertices) {
            if ((v - x).norm() <= 1e-9 * (1.0 + x.norm())) return;
          }
          vertices.push_back(x);
        }
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      subset.push_back(i);
      scan(i + 1);
      subset.pop_back();
    }
  };
  scan(0);
  return vertices;
}

// Subsolver adapter for the exact algorithm variant.
inline std::function<std::pair<Vec, double>(const OuterApproximation&,
                                            const Vec&)>
make_bruteforce_subsolver(const OracleBudget& budget) {
  return [budget](const OuterApproximation& oa, const Vec& z) {
    SqcqpSolution sol = brute_force_sqcqp(oa, z, budget);
    return std::make_pair(sol.point, sol.value);
  };
}

}  // namespace cutsph
