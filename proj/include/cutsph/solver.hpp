// The cutting-spheres algorithms: the exact variant (global S-QCQP subsolver
// per iteration), the warm-restart variant (cut budget m_bar with restart
// floors), and the inexact variant that replaces every subproblem by one
// sphere/polyhedron feasibility decision at the current level and jumps by
// epsilon on certified emptiness. Also: KKT certificate checking, the
// dimension condition, and the error-bound infeasibility surrogate.
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cutsph/common.hpp"
#include "cutsph/cuts.hpp"
#include "cutsph/geometry.hpp"
#include "cutsph/model.hpp"
#include "cutsph/oracle.hpp"

namespace cutsph {

enum class Variant { exact, warm, inexact };

struct SolverConfig {
  Variant variant = Variant::inexact;
  double epsilon = 1.0;     // inexact level jump, > 0
  double delta = 1e-6;      // warm restart threshold, > 0 for termination
  long cut_budget = 500;    // m_bar
  long max_iter = 100000;
  uint64_t seed = 1;
  double feas_tol = 1e-9;   // slack applied to the stopping test only
  double start_level = 0.0; // inexact: start from a random point on this level
  bool allow_uncertified = false;
  GeometryConfig geometry;
  OracleBudget oracle;  // exact/warm subsolver budget
};

struct IterationRecord {
  long k = 0;
  Vec x;
  double objective = 0.0;  // J(x_k)
  int violated = 0;        // |I(x_k)|
  long cut_count = 0;      // m_k: cuts the subproblem at k involves
  bool restart = false;
  std::string branch;
  double aux = kNaN;       // problem-specific diagnostic (e.g. F1)
  double wall_ms = 0.0;
};

enum class SolveStatus {
  FeasibleEpsOptimal,
  FeasibleOptimalFinite,
  LowerBoundOnly,
  Uncertified
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::FeasibleEpsOptimal: return "FeasibleEpsOptimal";
    case SolveStatus::FeasibleOptimalFinite: return "FeasibleOptimalFinite";
    case SolveStatus::LowerBoundOnly: return "LowerBoundOnly";
    case SolveStatus::Uncertified: return "Uncertified";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::LowerBoundOnly;
  Vec point;
  double level = 0.0;  // J at the final iterate
  bool final_feasible = false;
  double infeasibility_surrogate = 0.0;
  long iterations = 0;
  long restarts = 0;
  long uncertified_restarts = 0;
  std::vector<IterationRecord> trace;
};

struct TraceEvents {
  std::function<void(const IterationRecord&)> on_iteration;
  std::function<void(const QuadraticCut&)> on_cut;
};

using Subsolver =
    std::function<std::pair<Vec, double>(const OuterApproximation&, const Vec&)>;

// ---------------------------------------------------------------------------
// Certificates and diagnostics.

struct KktReport {
  bool sufficient_global = false;
  double stationarity_residual = kInf;
  double complementarity_residual = kInf;
  double trace_condition = -kInf;  // a0 - sum gamma_i a_i, needs >= 0
  std::vector<std::string> violations;
};

// Checks the (KKT) system for min ||x - z||^2 over the cut intersection:
//   (i)  2 a0 x* + b0 + sum gamma_i (b_i - 2 a_i x*) = 0, a0 = 1, b0 = -2z
//   (ii) gamma_i q_i(x*) = 0
//   (iii) a0 - sum gamma_i a_i >= 0
// with gamma in the nonnegative orthant, not identically zero. When all hold
// the point is a certified global minimizer of the subproblem.
inline KktReport check_kkt_certificate(const std::vector<QuadraticCut>& cuts,
                                       const Vec& z, const Vec& x_star,
                                       const Vec& gamma, double tol = 1e-7) {
  KktReport rep;
  const int n = static_cast<int>(z.size());
  if (gamma.size() != static_cast<long>(cuts.size())) {
    rep.violations.push_back("multiplier count does not match the cut count");
    return rep;
  }
  if (gamma.size() > 0 && gamma.minCoeff() < 0.0) {
    rep.violations.push_back("negative multiplier");
  }
  if (gamma.size() == 0 || gamma.maxCoeff() <= 0.0) {
    rep.violations.push_back("multipliers must not all vanish");
  }

  Vec stat = 2.0 * x_star - 2.0 * z;
  double comp = 0.0;
  double trace_cond = 1.0;
  double feas = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const QuadraticCut& q = cuts[i];
    const double g = gamma[static_cast<long>(i)];
    stat += g * (q.b - 2.0 * q.a * x_star);
    const double qi = q.value(x_star);
    comp = std::max(comp, std::abs(g * qi));
    trace_cond -= g * q.a;
    feas = std::max(feas, qi);
  }
  const double scale = 1.0 + x_star.norm() + z.norm();
  rep.stationarity_residual = stat.lpNorm<Eigen::Infinity>();
  rep.complementarity_residual = comp;
  rep.trace_condition = trace_cond;
  if (rep.stationarity_residual > tol * scale) {
    rep.violations.push_back("stationarity residual " +
                             std::to_string(rep.stationarity_residual));
  }
  if (comp > tol * scale) {
    rep.violations.push_back("complementarity residual " + std::to_string(comp));
  }
  if (trace_cond < -tol) {
    rep.violations.push_back("second-order trace condition violated");
  }
  if (feas > tol * scale) {
    rep.violations.push_back("candidate violates a cut by " +
                             std::to_string(feas));
  }
  (void)n;
  rep.sufficient_global = rep.violations.empty();
  return rep;
}

// Dimension condition: every maximal linearly independent subfamily of
// {b0} u {b_i} has fewer than n elements, i.e. rank < n.
inline bool check_dimension_condition(const std::vector<QuadraticCut>& cuts,
                                      const Vec& z, double threshold = 1e-9) {
  const int n = static_cast<int>(z.size());
  Mat B(n, static_cast<long>(cuts.size()) + 1);
  B.col(0) = -2.0 * z;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    B.col(static_cast<long>(i) + 1) = cuts[i].b;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(B);
  qr.setThreshold(threshold);
  return qr.rank() < n;
}

// Error-bound surrogate: max over violated i of (f_i(x) + (rho_i/2)||x||^2)_+
// with rho_i = 2 a_i. Distance to feasibility up to the (unknown) error-bound
// constant; reported as a surrogate, never as a distance.
inline double infeasibility_diagnostic(const Problem& p, const Vec& x) {
  double worst = 0.0;
  const double nsq = x.squaredNorm();
  for (const auto& c : p.constraints) {
    const double f = c.eval(x);
    if (f > 0.0) {
      worst = std::max(worst, std::max(0.0, f + c.curvature * nsq));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace solver_detail {

inline double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

inline void emit(const TraceEvents* sink, SolveResult& result,
                 IterationRecord rec) {
  if (sink && sink->on_iteration) sink->on_iteration(rec);
  result.trace.push_back(std::move(rec));
}

inline IterationRecord make_record(const Problem& p, long k, const Vec& x,
                                   int violated, long cut_count, bool restart,
                                   std::string branch, double t0) {
  IterationRecord rec;
  rec.k = k;
  rec.x = x;
  rec.objective = p.objective(x);
  rec.violated = violated;
  rec.cut_count = cut_count;
  rec.restart = restart;
  rec.branch = std::move(branch);
  if (p.aux_metric) rec.aux = p.aux_metric(x);
  rec.wall_ms = now_ms() - t0;
  return rec;
}

inline void finish(const Problem& p, SolveResult& result, const Vec& x,
                   double feas_tol, SolveStatus status) {
  result.point = x;
  result.level = p.objective(x);
  result.final_feasible = max_violation(p, x) <= feas_tol;
  result.infeasibility_surrogate = infeasibility_diagnostic(p, x);
  result.status = status;
}

// Feasibility restoration on the sphere: Gauss-Newton on the positive
// constraint residuals, projected to the sphere tangent and renormalized,
// with a halving line search on the worst violation. A success returns a
// point with max_i f_i <= feas_tol on the level sphere; such a point belongs
// to every cut (cuts minorize the constraints), so it is a legitimate
// Subroutine-1.1 selection once its cut membership is re-verified.
inline std::optional<Vec> sphere_violation_polish(const Problem& p,
                                                  Vec x, double alpha,
                                                  double feas_tol,
                                                  int max_steps = 40) {
  if (alpha <= 0.0) return std::nullopt;
  const int n = p.dimension;
  const double root = std::sqrt(alpha);
  auto renorm = [&](Vec v) {
    const double nv = v.norm();
    return nv > 1e-14 ? Vec((root / nv) * v) : v;
  };
  auto residual_values = [&](const Vec& v) {
    if (p.polish_view) return p.polish_view->values(v);
    Vec r(static_cast<long>(p.constraints.size()));
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      r[static_cast<long>(i)] = p.constraints[i].eval(v);
    }
    return r;
  };
  auto residual_jacobian = [&](const Vec& v) {
    if (p.polish_view) return p.polish_view->jacobian(v);
    Mat J(static_cast<long>(p.constraints.size()), n);
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      const auto& con = p.constraints[i];
      // gradient of f_i from the convexified oracle: b - 2 a x
      J.row(static_cast<long>(i)) =
          (con.convexified_gradient(v) - 2.0 * con.curvature * v).transpose();
    }
    return J;
  };

  x = renorm(x);
  double worst = residual_values(x).maxCoeff();
  // aim well below the stopping slack so the returned point is clean
  const double target = std::max(1e-4 * feas_tol, 4e-15);
  for (int step = 0; step < max_steps; ++step) {
    if (worst <= target) break;
    // near-active residuals enter with sign: at a knife-edge optimum the
    // whole active set must be driven to zero together, not one violation
    // at a time
    Vec rall = residual_values(x);
    Mat Jall = residual_jacobian(x);
    const double band = 10.0 * std::max(worst, 0.0) + 1e-12;
    std::vector<int> active;
    for (long i = 0; i < rall.size(); ++i) {
      if (rall[i] > -band) active.push_back(static_cast<int>(i));
    }
    if (active.empty()) break;
    Mat J(static_cast<long>(active.size()), n);
    Vec r(static_cast<long>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      Vec g = Jall.row(active[k]).transpose();
      // tangent component only, the radial one is fixed by the sphere
      g -= (g.dot(x) / alpha) * x;
      J.row(static_cast<long>(k)) = g.transpose();
      r[static_cast<long>(k)] = rall[active[k]];
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
    Vec d = -cod.solve(r);
    if (!d.allFinite() || d.norm() < 1e-15 * (1.0 + root)) break;
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      Vec y = renorm(x + t * d);
      const double wy = residual_values(y).maxCoeff();
      if (wy < worst - 1e-4 * std::abs(worst) - 1e-16) {
        x = y;
        worst = wy;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  // the view satisfies max_j r_j = max_i f_i, but re-verify on the real
  // constraints before reporting success
  return (worst <= feas_tol && max_violation(p, x) <= feas_tol)
             ? std::optional<Vec>(x)
             : std::nullopt;
}

// Shifted view of a problem with the objective center moved to the origin.
// Subgradients of the shifted convexification pick up a -2a z correction.
inline Problem shift_to_origin(const Problem& p) {
  Problem q = p;
  const Vec z = p.center;
  q.center = Vec::Zero(p.dimension);
  q.constraints.clear();
  for (const auto& c : p.constraints) {
    WeaklyConvexConstraint s;
    s.label = c.label;
    s.curvature = c.curvature;
    auto eval = c.eval;
    auto grad = c.convexified_gradient;
    const double a = c.curvature;
    s.eval = [eval, z](const Vec& x) { return eval(x + z); };
    s.convexified_gradient = [grad, z, a](const Vec& x) {
      return Vec(grad(x + z) - 2.0 * a * z);
    };
    q.constraints.push_back(std::move(s));
  }
  if (p.aux_metric) {
    auto aux = p.aux_metric;
    q.aux_metric = [aux, z](const Vec& x) { return aux(x + z); };
  }
  if (p.polish_view) {
    auto values = p.polish_view->values;
    auto jac = p.polish_view->jacobian;
    q.polish_view = SmoothResidualView{
        [values, z](const Vec& x) { return values(x + z); },
        [jac, z](const Vec& x) { return jac(x + z); }};
  }
  return q;
}

}  // namespace solver_detail

// ---------------------------------------------------------------------------
// Exact variant: cumulative cuts, one certified global S-QCQP solve per
// iteration. Practical only at oracle scale; the production path is
// solve_inexact.
inline SolveResult solve_exact(const Problem& p, const SolverConfig& cfg,
                               const Subsolver& subsolver,
                               const TraceEvents* sink = nullptr) {
  const double t0 = solver_detail::now_ms();
  SolveResult result;
  OuterApproximation oa;
  Vec x = p.center;

  for (long k = 0; k < cfg.max_iter; ++k) {
    result.iterations = k + 1;
    ViolationReport report = violated_set(p, x);
    const bool stop_feasible = max_violation(p, x) <= cfg.feas_tol;
    solver_detail::emit(
        sink, result,
        solver_detail::make_record(p, k, x, static_cast<int>(report.size()),
                                   oa.cut_count() + static_cast<long>(report.size()),
                                   false, stop_feasible ? "feasible" : "cut", t0));
    if (stop_feasible) {
      solver_detail::finish(p, result, x, cfg.feas_tol,
                            SolveStatus::FeasibleOptimalFinite);
      return result;
    }
    oa = append_cuts(std::move(oa), p, report, x, k);
    if (sink && sink->on_cut) {
      for (auto it = oa.cuts.end() - static_cast<long>(report.size());
           it != oa.cuts.end(); ++it) {
        sink->on_cut(*it);
      }
    }
    try {
      auto [next, value] = subsolver(oa, p.center);
      (void)value;
      x = next;
    } catch (const std::exception& e) {
      throw SubsolverFailure(std::string("exact subsolver failed: ") + e.what());
    }
  }
  solver_detail::finish(p, result, x, cfg.feas_tol, SolveStatus::LowerBoundOnly);
  return result;
}

inline SolveResult solve_exact(const Problem& p, const SolverConfig& cfg,
                               const TraceEvents* sink = nullptr) {
  return solve_exact(p, cfg, make_bruteforce_subsolver(cfg.oracle), sink);
}

// ---------------------------------------------------------------------------
// Warm-restart variant. Cumulative iterations accumulate cuts while the
// would-be subproblem cost m_k stays below m_bar; once it would exceed the
// budget, the run either restarts (keeping only the cuts at the current point
// plus the floor J(x) >= J(x_k), provided the level gained more than delta
// since the last restart) or stops with a certified lower bound.
inline SolveResult solve_warm(const Problem& p, const SolverConfig& cfg,
                              const Subsolver& subsolver,
                              const TraceEvents* sink = nullptr) {
  if (cfg.delta <= 0.0) {
    throw InvalidParameter("solve_warm: delta must be positive");
  }
  const double t0 = solver_detail::now_ms();
  SolveResult result;
  OuterApproximation oa;
  Vec x = p.center;
  double restart_level = 0.0;  // J(x_{r_k})

  for (long k = 0; k < cfg.max_iter; ++k) {
    result.iterations = k + 1;
    ViolationReport report = violated_set(p, x);
    const bool stop_feasible = max_violation(p, x) <= cfg.feas_tol;
    const long would_be_cost = oa.cut_count() + static_cast<long>(report.size());

    if (stop_feasible) {
      solver_detail::emit(
          sink, result,
          solver_detail::make_record(p, k, x, static_cast<int>(report.size()),
                                     would_be_cost, false, "feasible", t0));
      solver_detail::finish(p, result, x, cfg.feas_tol,
                            SolveStatus::FeasibleOptimalFinite);
      return result;
    }

    bool restart = false;
    if (would_be_cost >= cfg.cut_budget) {
      if (p.objective(x) > restart_level + cfg.delta) {
        restart = true;
      } else {
        // budget exhausted without enough level progress: stop
        solver_detail::emit(
            sink, result,
            solver_detail::make_record(p, k, x, static_cast<int>(report.size()),
                                       would_be_cost, false, "cost-cap", t0));
        solver_detail::finish(p, result, x, cfg.feas_tol,
                              SolveStatus::LowerBoundOnly);
        return result;
      }
    }

    if (restart) {
      oa = restart_set(p, x, report, p.objective(x), RestartVariant::warm, k);
      restart_level = p.objective(x);
      ++result.restarts;
    } else {
      oa = append_cuts(std::move(oa), p, report, x, k);
    }
    if (sink && sink->on_cut) {
      for (auto it = oa.cuts.end() - static_cast<long>(report.size());
           it != oa.cuts.end(); ++it) {
        sink->on_cut(*it);
      }
    }
    solver_detail::emit(
        sink, result,
        solver_detail::make_record(p, k, x, static_cast<int>(report.size()),
                                   oa.cut_count(), restart,
                                   restart ? "restart" : "cut", t0));
    try {
      auto [next, value] = subsolver(oa, p.center);
      (void)value;
      x = next;
    } catch (const std::exception& e) {
      throw SubsolverFailure(std::string("warm subsolver failed: ") + e.what());
    }
  }
  solver_detail::finish(p, result, x, cfg.feas_tol, SolveStatus::LowerBoundOnly);
  return result;
}

inline SolveResult solve_warm(const Problem& p, const SolverConfig& cfg,
                              const TraceEvents* sink = nullptr) {
  return solve_warm(p, cfg, make_bruteforce_subsolver(cfg.oracle), sink);
}

// ---------------------------------------------------------------------------
// Inexact variant. The objective center is translated to the origin, so
// levels are plain squared norms. Each iteration linearizes the accumulated
// cuts at the current level and decides sphere/polyhedron feasibility:
// a point means a cumulative step at the same level (it solves the
// subproblem globally), certified emptiness means the level holds no
// outer-approximation point and the run restarts on level + epsilon.
inline SolveResult solve_inexact(const Problem& problem,
                                 const SolverConfig& cfg,
                                 const TraceEvents* sink = nullptr) {
  if (cfg.epsilon <= 0.0) {
    throw InvalidParameter("solve_inexact: epsilon must be positive");
  }
  const double t0 = solver_detail::now_ms();
  const bool shifted = problem.center.norm() > 0.0;
  const Problem p =
      shifted ? solver_detail::shift_to_origin(problem) : problem;
  const Vec z = problem.center;
  const int n = p.dimension;

  SolveResult result;
  Rng rng(cfg.seed);
  OuterApproximation oa;
  Vec x;
  if (cfg.start_level > 0.0) {
    x = random_point_on_level(rng, n, cfg.start_level);
    oa.level_floor = cfg.start_level;
  } else {
    x = Vec::Zero(n);
  }

  auto unshift = [&](const Vec& v) { return shifted ? Vec(v + z) : v; };

  auto record = [&](long k, const Vec& xs, int violated, long cost,
                    bool restart, const std::string& branch) {
    solver_detail::emit(sink, result,
                        solver_detail::make_record(problem, k, unshift(xs),
                                                   violated, cost, restart,
                                                   branch, t0));
  };

  for (long k = 0; k < cfg.max_iter; ++k) {
    result.iterations = k + 1;
    const double alpha = x.squaredNorm();
    ViolationReport report = violated_set(p, x);
    const bool stop_feasible = max_violation(p, x) <= cfg.feas_tol;
    const long cost = oa.cut_count() + static_cast<long>(report.size());

    if (stop_feasible) {
      record(k, x, static_cast<int>(report.size()), cost, false, "feasible");
      solver_detail::finish(problem, result, unshift(x), cfg.feas_tol,
                            result.uncertified_restarts > 0
                                ? SolveStatus::Uncertified
                                : SolveStatus::FeasibleEpsOptimal);
      return result;
    }
    if (cost > cfg.cut_budget) {
      record(k, x, static_cast<int>(report.size()), cost, false, "cost-cap");
      solver_detail::finish(problem, result, unshift(x), cfg.feas_tol,
                            result.uncertified_restarts > 0
                                ? SolveStatus::Uncertified
                                : SolveStatus::LowerBoundOnly);
      return result;
    }

    oa = append_cuts(std::move(oa), p, report, x, k);
    if (sink && sink->on_cut) {
      for (auto it = oa.cuts.end() - static_cast<long>(report.size());
           it != oa.cuts.end(); ++it) {
        sink->on_cut(*it);
      }
    }

    // Cheap local candidate first: restore feasibility on the current level
    // sphere. A success lies in every cut (cuts minorize the constraints) and
    // is therefore a valid Subroutine-1.1 point; membership is re-verified.
    if (auto polished = solver_detail::sphere_violation_polish(
            p, x, alpha, cfg.feas_tol)) {
      bool in_cuts = true;
      for (const QuadraticCut& cut : oa.cuts) {
        if (cut.value(*polished) >
            cfg.geometry.tol * (1.0 + std::abs(cut.c))) {
          in_cuts = false;
          break;
        }
      }
      if (in_cuts) {
        record(k, x, static_cast<int>(report.size()), oa.cut_count(), false,
               "point(polish)");
        x = *polished;
        continue;
      }
    }

    LevelPolyhedron lp = linearize_at_level(oa, alpha);
    FeasibilityOutcome feas = sphere_polyhedron_feasibility(
        lp, alpha, cfg.geometry, static_cast<uint64_t>(k) + 1, x);

    if (feas.kind == FeasibilityOutcome::Kind::Uncertified &&
        !cfg.allow_uncertified) {
      record(k, x, static_cast<int>(report.size()), oa.cut_count(), false,
             "uncertified-stop(" + feas.branch + ")");
      solver_detail::finish(problem, result, unshift(x), cfg.feas_tol,
                            SolveStatus::Uncertified);
      return result;
    }

    if (feas.kind == FeasibilityOutcome::Kind::Point) {
      record(k, x, static_cast<int>(report.size()), oa.cut_count(), false,
             "point(" + feas.branch + ")");
      x = feas.point;
    } else {
      // Empty (certified) or Uncertified treated as empty by explicit opt-in.
      const bool uncertified =
          feas.kind == FeasibilityOutcome::Kind::Uncertified;
      if (uncertified) ++result.uncertified_restarts;
      ++result.restarts;
      const double next_level = alpha + cfg.epsilon;
      record(k, x, static_cast<int>(report.size()), oa.cut_count(), true,
             (uncertified ? "restart-uncertified(" : "restart(") + feas.branch +
                 ")");
      x = random_point_on_level(rng, n, next_level);
      oa = restart_set(p, x, ViolationReport{}, next_level,
                       RestartVariant::inexact, k + 1);
    }
  }
  solver_detail::finish(problem, result, unshift(x), cfg.feas_tol,
                        result.uncertified_restarts > 0
                            ? SolveStatus::Uncertified
                            : SolveStatus::LowerBoundOnly);
  return result;
}

inline SolveResult solve(const Problem& p, const SolverConfig& cfg,
                         const TraceEvents* sink = nullptr) {
  switch (cfg.variant) {
    case Variant::exact: return solve_exact(p, cfg, sink);
    case Variant::warm: return solve_warm(p, cfg, sink);
    case Variant::inexact: return solve_inexact(p, cfg, sink);
  }
  throw InvalidParameter("unknown solver variant");
}

}  // namespace cutsph
