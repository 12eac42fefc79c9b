// Subproblem kernel: projection onto a polyhedron (dual coordinate ascent
// with an active-set fallback), norm maximization over a polyhedron with
// certified bounds, segment-sphere intersection, and the sphere/polyhedron
// feasibility decision used by the inexact solver.
//
// Certification strategy for "the polyhedron holds no point of norm^2 >= t":
//   * small instances: exact vertex enumeration (a concave function attains
//     its maximum over a polytope at a vertex);
//   * larger instances: dual (Farkas-style) coordinate bounds, sharpened by
//     interval branch-and-bound over the resulting box.
// Anything the budget cannot certify is surfaced as uncertified, never
// silently trusted.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "cutsph/common.hpp"
#include "cutsph/cuts.hpp"

namespace cutsph {

struct Polyhedron {
  Mat G;  // rows g_i' x <= h_i
  Vec h;

  int dim() const { return static_cast<int>(G.cols()); }
  long rows() const { return G.rows(); }

  double max_residual(const Vec& x) const {
    if (rows() == 0) return -kInf;
    return ((G * x - h).array()).maxCoeff();
  }
  bool contains(const Vec& x, double tol) const {
    for (long i = 0; i < rows(); ++i) {
      const double scale = 1.0 + std::abs(h[i]);
      if (G.row(i).dot(x) - h[i] > tol * scale) return false;
    }
    return true;
  }
};

inline Polyhedron as_polyhedron(const LevelPolyhedron& lp) {
  return Polyhedron{lp.normals, lp.offsets};
}

struct GeometryConfig {
  double tol = 1e-8;         // membership / row residual, absolute + relative
  double sphere_tol = 1e-9;  // relative residual on the sphere level
  int cap_n = 10;            // exact vertex enumeration caps
  int cap_m = 25;
  long combo_budget = 6000000;  // subset count ceiling for enumeration
  int multistart = 12;
  int ascent_steps = 40;
  int proj_max_sweeps = 4000;
  long bb_max_nodes = 4000;
  uint64_t seed = 1;
};

// ---------------------------------------------------------------------------
// Projection onto {x | Gx <= h}.

struct Projection {
  enum class Status { Converged, Infeasible, IterationLimit };
  Status status = Status::IterationLimit;
  Vec point;
  Vec multipliers;
  double dual_value = -kInf;  // lower bound on min (1/2)||x - z||^2 over P
  double max_violation = kInf;
  double comp_residual = kInf;
};

namespace detail {

inline Vec nnls(const Mat& A, const Vec& d, int max_iter = 0) {
  const long m = A.cols();
  Vec w = Vec::Zero(m);
  std::vector<int> passive;
  if (max_iter == 0) max_iter = static_cast<int>(3 * m) + 30;

  auto solve_passive = [&](const std::vector<int>& set) {
    Mat Ap(A.rows(), static_cast<long>(set.size()));
    for (std::size_t j = 0; j < set.size(); ++j) Ap.col(static_cast<long>(j)) = A.col(set[j]);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Ap);
    return Vec(cod.solve(d));
  };

  Vec resid = d;
  for (int it = 0; it < max_iter; ++it) {
    Vec grad = A.transpose() * resid;
    int best = -1;
    double best_val = 1e-12 * (1.0 + d.norm());
    for (long j = 0; j < m; ++j) {
      if (w[j] == 0.0 && grad[j] > best_val &&
          std::find(passive.begin(), passive.end(), static_cast<int>(j)) == passive.end()) {
        best_val = grad[j];
        best = static_cast<int>(j);
      }
    }
    if (best < 0) break;
    passive.push_back(best);

    for (int inner = 0; inner < max_iter; ++inner) {
      Vec s = solve_passive(passive);
      bool ok = true;
      for (long j = 0; j < s.size(); ++j) {
        if (s[j] <= 0.0) { ok = false; break; }
      }
      if (ok) {
        w.setZero();
        for (std::size_t j = 0; j < passive.size(); ++j) w[passive[j]] = s[static_cast<long>(j)];
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < passive.size(); ++j) {
        const double sj = s[static_cast<long>(j)];
        const double wj = w[passive[j]];
        if (sj <= 0.0 && wj - sj > 0.0) alpha = std::min(alpha, wj / (wj - sj));
      }
      for (std::size_t j = 0; j < passive.size(); ++j) {
        w[passive[j]] += alpha * (s[static_cast<long>(j)] - w[passive[j]]);
      }
      std::vector<int> next;
      for (int idx : passive) {
        if (w[idx] > 1e-14) next.push_back(idx); else w[idx] = 0.0;
      }
      passive = next;
      if (passive.empty()) break;
    }
    resid = d - A * w;
  }
  return w;
}

// One certified dual value for the current multipliers.
inline double projection_dual_value(const Mat& G, const Vec& h, const Vec& z,
                                    const Vec& lambda) {
  Vec gtl = G.transpose() * lambda;
  return -0.5 * gtl.squaredNorm() + lambda.dot(G * z - h);
}

// Farkas emptiness certificate: y >= 0 with G'y ~ 0 and h'y = -1, found by a
// weighted nonnegative least squares and sharpened on its support. A residual
// below 1e-12 relative makes every x in the polyhedron contradictory.
inline bool farkas_certificate(const Mat& G, const Vec& h) {
  const long m = G.rows();
  const int n = static_cast<int>(G.cols());
  Mat A(n + 1, m);
  A.topRows(n) = G.transpose();
  const double weight = 8.0;
  A.row(n) = weight * h.transpose();
  Vec d = Vec::Zero(n + 1);
  d[n] = -weight;
  Vec y = nnls(A, d);
  if (y.lpNorm<1>() <= 0.0) return false;
  const double s = -h.dot(y);
  if (s <= 1e-8) return false;
  // sharpen on the support
  std::vector<int> support;
  for (long i = 0; i < m; ++i) {
    if (y[i] > 1e-12 * y.lpNorm<Eigen::Infinity>()) {
      support.push_back(static_cast<int>(i));
    }
  }
  if (support.empty()) return false;
  Mat As(n + 1, static_cast<long>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    As.col(static_cast<long>(j)).head(n) = G.row(support[j]).transpose();
    As(n, static_cast<long>(j)) = h[support[j]];
  }
  Vec target = Vec::Zero(n + 1);
  target[n] = -1.0;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(As);
  Vec ys = cod.solve(target);
  if (ys.minCoeff() < -1e-10) return false;
  Vec resid = As * ys - target;
  const double row_scale = 1.0 + G.cwiseAbs().maxCoeff() + h.cwiseAbs().maxCoeff();
  return resid.head(n).lpNorm<Eigen::Infinity>() <=
             1e-10 * row_scale * (1.0 + ys.lpNorm<1>()) &&
         std::abs(resid[n]) <= 1e-8;
}

// Exact-refinement attempt from a near-converged dual iterate: solve the
// equality-constrained projection on the apparent active set and accept it
// only when its own KKT residuals check out at machine precision.
inline bool refine_on_support(const Mat& G, const Vec& h, const Vec& z,
                              const Vec& lambda, const Vec& x_hint, double tol,
                              Projection& out) {
  const long m = G.rows();
  const int n = static_cast<int>(G.cols());
  const double lambda_max = lambda.size() ? lambda.lpNorm<Eigen::Infinity>() : 0.0;
  std::vector<int> support;
  for (long i = 0; i < m; ++i) {
    const double resid = G.row(i).dot(x_hint) - h[i];
    const double scale = 1.0 + std::abs(h[i]);
    if (lambda[i] > 1e-10 * (1.0 + lambda_max) ||
        std::abs(resid) <= 10.0 * tol * scale) {
      support.push_back(static_cast<int>(i));
    }
  }
  Vec x, nu;
  if (support.empty()) {
    x = z;
    nu.resize(0);
  } else {
    Mat Gs(static_cast<long>(support.size()), n);
    Vec hs(static_cast<long>(support.size()));
    for (std::size_t r = 0; r < support.size(); ++r) {
      Gs.row(static_cast<long>(r)) = G.row(support[r]);
      hs[static_cast<long>(r)] = h[support[r]];
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Gs * Gs.transpose());
    nu = cod.solve(Gs * z - hs);
    if (!nu.allFinite()) return false;
    if (nu.minCoeff() < -1e-9) return false;
    x = z - Gs.transpose() * nu;
  }
  for (long i = 0; i < m; ++i) {
    const double scale = 1.0 + std::abs(h[i]);
    if (G.row(i).dot(x) - h[i] > tol * scale) return false;
  }
  out.status = Projection::Status::Converged;
  out.point = x;
  out.multipliers = Vec::Zero(m);
  for (std::size_t r = 0; r < support.size(); ++r) {
    out.multipliers[support[r]] = std::max(0.0, nu[static_cast<long>(r)]);
  }
  double maxviol = -kInf, comp = 0.0;
  for (long i = 0; i < m; ++i) {
    const double scale = 1.0 + std::abs(h[i]);
    const double r = G.row(i).dot(x) - h[i];
    maxviol = std::max(maxviol, r / scale);
    comp = std::max(comp, std::abs(out.multipliers[i] * r) / scale);
  }
  out.max_violation = std::max(0.0, maxviol);
  out.comp_residual = comp;
  out.dual_value = projection_dual_value(G, h, z, out.multipliers);
  return true;
}

// Classic primal active-set projection, used when coordinate ascent stalls.
inline Projection active_set_projection(const Mat& G, const Vec& h,
                                        const Vec& z, double tol,
                                        int max_iter) {
  const long m = G.rows();
  const int n = static_cast<int>(G.cols());
  Projection out;
  out.point = z;
  out.multipliers = Vec::Zero(m);
  std::vector<int> W;
  Vec nu;

  auto resolve = [&]() {
    if (W.empty()) {
      out.point = z;
      nu.resize(0);
      return true;
    }
    Mat Gw(static_cast<long>(W.size()), n);
    Vec hw(static_cast<long>(W.size()));
    for (std::size_t r = 0; r < W.size(); ++r) {
      Gw.row(static_cast<long>(r)) = G.row(W[r]);
      hw[static_cast<long>(r)] = h[W[r]];
    }
    Mat gram = Gw * Gw.transpose();
    Vec rhs = Gw * z - hw;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(gram);
    nu = cod.solve(rhs);
    out.point = z - Gw.transpose() * nu;
    return nu.allFinite();
  };

  resolve();
  for (int it = 0; it < max_iter; ++it) {
    long worst = -1;
    double worst_viol = 0.0;
    for (long i = 0; i < m; ++i) {
      const double scale = 1.0 + std::abs(h[i]);
      const double v = (G.row(i).dot(out.point) - h[i]) / scale;
      if (v > worst_viol + tol &&
          std::find(W.begin(), W.end(), static_cast<int>(i)) == W.end()) {
        worst_viol = v;
        worst = i;
      }
    }
    if (worst < 0) {
      // primal feasible; enforce dual feasibility
      int drop = -1;
      double most_negative = -tol;
      for (std::size_t r = 0; r < W.size(); ++r) {
        if (nu[static_cast<long>(r)] < most_negative) {
          most_negative = nu[static_cast<long>(r)];
          drop = static_cast<int>(r);
        }
      }
      if (drop < 0) {
        out.status = Projection::Status::Converged;
        out.multipliers = Vec::Zero(m);
        for (std::size_t r = 0; r < W.size(); ++r) {
          out.multipliers[W[r]] = std::max(0.0, nu[static_cast<long>(r)]);
        }
        out.max_violation = std::max(0.0, out.point.size() ? ((G * out.point - h).array()).maxCoeff() : 0.0);
        out.comp_residual = 0.0;
        out.dual_value = projection_dual_value(G, h, z, out.multipliers);
        return out;
      }
      W.erase(W.begin() + drop);
    } else {
      W.push_back(static_cast<int>(worst));
    }
    if (!resolve()) break;
  }
  out.status = Projection::Status::IterationLimit;
  out.max_violation = m ? ((G * out.point - h).array()).maxCoeff() : 0.0;
  return out;
}

}  // namespace detail

// Dual coordinate ascent (Hildreth) with certified residual stopping and an
// active-set fallback. dual_value is always a valid lower bound on the
// optimal value min (1/2)||x - z||^2, by weak duality, even before
// convergence; Infeasible is only reported with a Farkas certificate.
inline Projection project_onto_polyhedron(const Polyhedron& P, const Vec& z,
                                          double tol, int max_sweeps) {
  if (tol <= 0.0) throw InvalidParameter("project: tol must be positive");
  const Mat& G = P.G;
  const Vec& h = P.h;
  const long m = G.rows();
  Projection out;
  if (m == 0) {
    out.status = Projection::Status::Converged;
    out.point = z;
    out.multipliers.resize(0);
    out.dual_value = 0.0;
    out.max_violation = 0.0;
    out.comp_residual = 0.0;
    return out;
  }

  Vec row_sq(m);
  for (long i = 0; i < m; ++i) row_sq[i] = G.row(i).squaredNorm();
  // Zero rows constrain nothing or everything.
  for (long i = 0; i < m; ++i) {
    if (row_sq[i] == 0.0 && h[i] < 0.0) {
      out.status = Projection::Status::Infeasible;
      out.point = z;
      out.multipliers = Vec::Zero(m);
      out.dual_value = kInf;
      return out;
    }
  }

  Vec lambda = Vec::Zero(m);
  Vec x = z;
  bool farkas_tried = false;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (long i = 0; i < m; ++i) {
      if (row_sq[i] == 0.0) continue;
      const double r = G.row(i).dot(x) - h[i];
      const double step = r / row_sq[i];
      const double updated = std::max(0.0, lambda[i] + step);
      const double delta = updated - lambda[i];
      if (delta != 0.0) {
        lambda[i] = updated;
        x -= delta * G.row(i).transpose();
      }
    }
    if ((sweep & 7) != 7 && sweep + 1 != max_sweeps) continue;

    double maxviol = -kInf;
    double comp = 0.0;
    for (long i = 0; i < m; ++i) {
      const double scale = 1.0 + std::abs(h[i]);
      const double r = G.row(i).dot(x) - h[i];
      maxviol = std::max(maxviol, r / scale);
      comp = std::max(comp, std::abs(lambda[i] * r) / scale);
    }
    if (maxviol <= tol) {
      // Near-feasible: try to finish exactly on the apparent active set.
      if (detail::refine_on_support(G, h, z, lambda, x, tol, out)) {
        return out;
      }
      if (comp <= tol) {
        out.status = Projection::Status::Converged;
        out.point = x;
        out.multipliers = lambda;
        out.max_violation = std::max(0.0, maxviol);
        out.comp_residual = comp;
        out.dual_value = detail::projection_dual_value(G, h, z, lambda);
        return out;
      }
    }
    if (!farkas_tried && lambda.lpNorm<1>() > 1e4 * (1.0 + z.norm())) {
      farkas_tried = true;
      if (detail::farkas_certificate(G, h)) {
        out.status = Projection::Status::Infeasible;
        out.point = x;
        out.multipliers = lambda;
        out.dual_value = detail::projection_dual_value(G, h, z, lambda);
        return out;
      }
    }
  }

  // Stalled: try the active-set fallback, then a Farkas certificate.
  Projection fallback = detail::active_set_projection(
      G, h, z, tol, static_cast<int>(40 * m) + 200);
  if (fallback.status == Projection::Status::Converged) return fallback;
  if (detail::farkas_certificate(G, h)) {
    out.status = Projection::Status::Infeasible;
  }
  out.point = x;
  out.multipliers = lambda;
  out.dual_value = detail::projection_dual_value(G, h, z, lambda);
  double maxviol = -kInf, comp = 0.0;
  for (long i = 0; i < m; ++i) {
    const double scale = 1.0 + std::abs(h[i]);
    const double r = G.row(i).dot(x) - h[i];
    maxviol = std::max(maxviol, r / scale);
    comp = std::max(comp, std::abs(lambda[i] * r) / scale);
  }
  out.max_violation = maxviol;
  out.comp_residual = comp;
  return out;
}

// ---------------------------------------------------------------------------
// Nonnegative least squares (Lawson-Hanson), used to build certified dual
// bounds max_{Gx<=h} c'x <= h'y for y >= 0 with G'y ~ c.

namespace detail {

struct DirectionBound {
  bool ok = false;
  double bound = kInf;     // h'y
  double residual = kInf;  // ||G'y - c||
};

// Certified upper bound on max c'x over {Gx <= h} for x with ||x|| <= R:
// c'x <= bound + residual * R.
inline DirectionBound direction_dual_bound(const Mat& G, const Vec& h,
                                           const Vec& c) {
  DirectionBound out;
  if (G.rows() == 0) return out;
  Vec y = nnls(G.transpose(), c);
  Vec r = G.transpose() * y - c;
  out.residual = r.norm();
  if (out.residual > 1e-7 * (1.0 + c.norm())) return out;
  out.bound = h.dot(y.cwiseMax(0.0));
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Hand-rolled dense solves for the in-kernel vertex enumeration; the test
// oracle enumerates with Eigen factorizations so the code paths stay
// independent.

// Destructive in-place solve; A and b are workspace.
inline bool solve_square(Mat& A, Vec& b, Vec& x) {
  const int n = static_cast<int>(A.rows());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(A(col, col));
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(A(r, col)) > best) { best = std::abs(A(r, col)); piv = r; }
    }
    if (best < 1e-11) return false;
    if (piv != col) { A.row(piv).swap(A.row(col)); std::swap(b[piv], b[col]); }
    for (int r = col + 1; r < n; ++r) {
      const double f = A(r, col) / A(col, col);
      if (f == 0.0) continue;
      A.row(r).tail(n - col) -= f * A.row(col).tail(n - col);
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return x.allFinite();
}

// One-dimensional nullspace direction of an (n-1) x n system, when it exists.
inline bool nullspace_direction(Mat A, Vec& dir) {
  const int rows = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < n && r < rows; ++c) {
    int piv = r;
    double best = std::abs(A(r, c));
    for (int rr = r + 1; rr < rows; ++rr) {
      if (std::abs(A(rr, c)) > best) { best = std::abs(A(rr, c)); piv = rr; }
    }
    if (best < 1e-11) continue;
    if (piv != r) A.row(piv).swap(A.row(r));
    for (int rr = 0; rr < rows; ++rr) {
      if (rr == r) continue;
      const double f = A(rr, c) / A(r, c);
      if (f != 0.0) A.row(rr) -= f * A.row(r);
    }
    pivot_col.push_back(c);
    ++r;
  }
  if (r != n - 1) return false;  // rank deficiency, no unique direction
  int free_col = -1;
  for (int c = 0, k = 0; c < n; ++c) {
    if (k < static_cast<int>(pivot_col.size()) && pivot_col[k] == c) { ++k; continue; }
    free_col = c;
    break;
  }
  dir = Vec::Zero(n);
  dir[free_col] = 1.0;
  for (int i = static_cast<int>(pivot_col.size()) - 1; i >= 0; --i) {
    dir[pivot_col[i]] = -A(i, free_col) / A(i, pivot_col[i]);
  }
  const double nrm = dir.norm();
  if (nrm < 1e-12) return false;
  dir /= nrm;
  return true;
}

inline double binomial_guard(long m, int k, long ceiling) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) {
    v *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (v > static_cast<double>(ceiling)) return v;
  }
  return v;
}

template <typename F>
void for_each_combination(long m, int k, F&& body) {
  if (k == 0 || k > m) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!body(idx)) return;
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == m - k + pos) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct VertexScan {
  std::vector<Vec> vertices;
  std::optional<Vec> ray;   // recession direction, if one was found
  bool complete = false;    // all candidate bases visited
};

inline VertexScan enumerate_basic_points(const Polyhedron& P, double tol,
                                         long combo_budget) {
  VertexScan scan;
  const int n = P.dim();
  const long m = P.rows();
  if (binomial_guard(m, n, combo_budget) > static_cast<double>(combo_budget) ||
      (n > 1 && binomial_guard(m, n - 1, combo_budget) >
                    static_cast<double>(combo_budget))) {
    return scan;
  }

  // Recession directions first: a nontrivial one certifies unboundedness.
  // Lineality: rank(G) < n.
  {
    Mat A = P.G;
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) {
      Mat kernel = qr.colsPermutation() * Mat::Identity(n, n);
      // fall back to a simple search for a null direction
      Eigen::FullPivLU<Mat> lu(A);
      lu.setThreshold(1e-10);
      Mat ker = lu.kernel();
      if (ker.cols() > 0 && ker.col(0).norm() > 1e-12) {
        scan.ray = Vec(ker.col(0) / ker.col(0).norm());
        scan.complete = true;
        return scan;
      }
    }
  }
  if (n >= 2) {
    bool found_ray = false;
    for_each_combination(m, n - 1, [&](const std::vector<int>& idx) {
      Mat A(n - 1, n);
      for (int r = 0; r < n - 1; ++r) A.row(r) = P.G.row(idx[r]);
      Vec dir;
      if (nullspace_direction(std::move(A), dir)) {
        for (const Vec& cand : {Vec(dir), Vec(-dir)}) {
          bool recession = true;
          for (long r = 0; r < m; ++r) {
            if (P.G.row(r).dot(cand) > 1e-12 * (1.0 + P.G.row(r).norm())) {
              recession = false;
              break;
            }
          }
          if (recession) {
            scan.ray = cand;
            found_ray = true;
            return false;
          }
        }
      }
      return true;
    });
    if (found_ray) {
      scan.complete = true;
      return scan;
    }
  } else if (n == 1) {
    // rays along +-e1 unless blocked by some row
    for (double s : {1.0, -1.0}) {
      bool blocked = false;
      for (long i = 0; i < m; ++i) {
        if (P.G(i, 0) * s > tol) { blocked = true; break; }
      }
      if (!blocked) {
        scan.ray = Vec::Constant(1, s);
        scan.complete = true;
        return scan;
      }
    }
  }

  Mat A(n, n);
  Vec rhs(n);
  Vec x(n);
  for_each_combination(m, n, [&](const std::vector<int>& idx) {
    for (int r = 0; r < n; ++r) {
      A.row(r) = P.G.row(idx[r]);
      rhs[r] = P.h[idx[r]];
    }
    if (solve_square(A, rhs, x) && P.contains(x, tol)) {
      bool dup = false;
      for (const Vec& v : scan.vertices) {
        if ((v - x).norm() <= 1e-9 * (1.0 + x.norm())) { dup = true; break; }
      }
      if (!dup) scan.vertices.push_back(x);
    }
    return true;
  });
  scan.complete = true;
  return scan;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Norm maximization over a polyhedron with early stop at a target level.

struct MaxNormOutcome {
  enum class Kind { Reached, Bounded, BestEffortBounded, Unbounded };
  // Bounded with scope sphere_box certifies only that P holds no point of
  // value >= target inside the box |x_j| <= sqrt(target) — which is all a
  // sphere-feasibility caller needs, since every sphere point lies there.
  enum class Scope { global, sphere_box };
  Kind kind = Kind::BestEffortBounded;
  Scope scope = Scope::global;
  Vec point;           // Reached/Unbounded: feasible point with value >= target
  double value = 0.0;  // Bounded: certified upper bound on max ||x||^2;
                       // BestEffort: best observed value (not a bound)
  bool certified = false;
  bool exact = false;  // Bounded via exhaustive vertex enumeration
  std::string method;
};

namespace detail {

// Longest feasible step from x along the unit direction d inside P, capped at
// t_max. The cutoff on the directional derivative is relative to the row norm
// so that tiny-but-positive derivatives cannot leak violations over a capped
// step.
inline double ray_step(const Polyhedron& P, const Vec& x, const Vec& d,
                       double t_max) {
  double t = t_max;
  for (long i = 0; i < P.rows(); ++i) {
    const double gd = P.G.row(i).dot(d);
    if (gd > 1e-13 * (1.0 + P.G.row(i).norm())) {
      t = std::min(t, (P.h[i] - P.G.row(i).dot(x)) / gd);
    }
  }
  return t;
}

inline std::optional<Vec> heuristic_reach(const Polyhedron& P, double target,
                                          const GeometryConfig& cfg, Rng& rng,
                                          const std::vector<Vec>& hints) {
  const int n = P.dim();
  const double reach_tol = 1.0 - 1e-12;
  auto feasible = [&](const Vec& x) { return P.contains(x, cfg.tol); };

  // Ray-walk ascent: alternate a maximal feasible step along the current
  // point's own direction (which increases the norm monotonically) with a
  // projected random sidestep to escape ridges.
  auto climb = [&](Vec x) -> std::optional<Vec> {
    if (!feasible(x)) return std::nullopt;
    for (int step = 0; step < cfg.ascent_steps; ++step) {
      if (x.squaredNorm() >= target * reach_tol && feasible(x)) return x;
      Vec d = x;
      if (d.norm() < 1e-9) d = random_direction(rng, n);
      d.normalize();
      const double cap = 4.0 * std::sqrt(std::max(target, 1.0)) + x.norm();
      const double t = ray_step(P, x, d, cap);
      bool moved = false;
      if (t > 1e-12) {
        x += t * d;
        moved = true;
        if (x.squaredNorm() >= target * reach_tol && feasible(x)) return x;
      }
      // sidestep: project a norm-inflated random perturbation back onto P
      Vec probe = x * 1.5 + 0.25 * std::sqrt(std::max(target, 1e-12)) *
                               random_direction(rng, n);
      Projection pp = project_onto_polyhedron(P, probe, cfg.tol,
                                              cfg.proj_max_sweeps / 8);
      if (pp.status == Projection::Status::Converged &&
          pp.point.squaredNorm() > x.squaredNorm() * (1.0 + 1e-14)) {
        x = pp.point;
        moved = true;
      }
      if (!moved) break;
    }
    if (x.squaredNorm() >= target * reach_tol && feasible(x)) return x;
    return std::nullopt;
  };

  for (const Vec& hint : hints) {
    if (hint.size() != n) continue;
    if (auto x = climb(hint)) return x;
  }
  const double radius = 4.0 * std::sqrt(std::max(target, 1.0));
  for (int s = 0; s < cfg.multistart; ++s) {
    Vec d = random_direction(rng, n);
    Projection pr = project_onto_polyhedron(P, radius * d, cfg.tol,
                                            cfg.proj_max_sweeps / 4);
    if (pr.status != Projection::Status::Converged) continue;
    if (auto x = climb(pr.point)) return x;
  }
  return std::nullopt;
}

// Recession-direction probe: projects directions onto the cone {Gd <= 0}.
inline std::optional<Vec> heuristic_ray(const Polyhedron& P,
                                        const GeometryConfig& cfg, Rng& rng) {
  const int n = P.dim();
  Polyhedron cone{P.G, Vec::Zero(P.rows())};
  for (int s = 0; s < cfg.multistart; ++s) {
    Vec d = random_direction(rng, n);
    Projection pr = project_onto_polyhedron(cone, d, cfg.tol,
                                            cfg.proj_max_sweeps / 4);
    if (pr.status != Projection::Status::Converged) continue;
    if (pr.point.norm() <= 1e-6) continue;
    Vec cand = pr.point.normalized();
    bool recession = true;
    for (long r = 0; r < P.rows(); ++r) {
      if (P.G.row(r).dot(cand) > 1e-12 * (1.0 + P.G.row(r).norm())) {
        recession = false;
        break;
      }
    }
    if (recession) return cand;
  }
  return std::nullopt;
}

struct BoxBound {
  bool ok = false;
  Vec lo, hi;
};

// Per-coordinate dual bounds, inflated by the dual residuals so that the box
// provably contains every x in P (self-consistently resolved for the norm).
inline BoxBound dual_box(const Polyhedron& P) {
  const int n = P.dim();
  BoxBound box;
  box.lo.resize(n);
  box.hi.resize(n);
  double sum_sq = 0.0;
  double sigma = 0.0;
  Vec c = Vec::Zero(n);
  std::vector<double> width(n);
  for (int j = 0; j < n; ++j) {
    c.setZero();
    c[j] = 1.0;
    DirectionBound up = direction_dual_bound(P.G, P.h, c);
    c[j] = -1.0;
    DirectionBound dn = direction_dual_bound(P.G, P.h, c);
    if (!up.ok || !dn.ok) return box;
    box.hi[j] = up.bound;
    box.lo[j] = -dn.bound;
    sigma = std::max({sigma, up.residual, dn.residual});
    width[j] = std::max(std::abs(box.hi[j]), std::abs(box.lo[j]));
    sum_sq += width[j] * width[j];
  }
  // |x_j| <= width_j + sigma ||x||  =>  ||x|| <= sqrt(sum width^2)/(1 - sqrt(n) sigma)
  const double shrink = 1.0 - std::sqrt(static_cast<double>(n)) * sigma;
  if (shrink <= 0.5) return box;
  const double R = std::sqrt(sum_sq) / shrink;
  for (int j = 0; j < n; ++j) {
    box.hi[j] += sigma * R;
    box.lo[j] -= sigma * R;
  }
  box.ok = true;
  return box;
}

struct BranchResult {
  enum class Kind { Reached, Bounded, BudgetOut } kind = Kind::BudgetOut;
  Vec point;
  double bound = 0.0;
  double best_seen = 0.0;
};

// Interval branch-and-bound on max ||x||^2 over P intersected with a box that
// is known to contain P. Sound: every pruned node carries a valid interval
// upper bound below the target.
inline BranchResult branch_and_bound_max_norm(const Polyhedron& P,
                                              double target, const Vec& lo0,
                                              const Vec& hi0,
                                              const GeometryConfig& cfg) {
  const int n = P.dim();
  struct Node {
    Vec lo, hi;
    double ub;
  };
  auto box_ub = [&](const Vec& lo, const Vec& hi) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = std::max(std::abs(lo[j]), std::abs(hi[j]));
      s += w * w;
    }
    return s * (1.0 + 1e-12) + 1e-300;
  };
  auto cmp = [](const Node& a, const Node& b) { return a.ub < b.ub; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
  open.push({lo0, hi0, box_ub(lo0, hi0)});

  BranchResult out;
  double certified_max = 0.0;
  long visited = 0;
  const double margin = 1e-9 * (1.0 + target);

  Mat Gaug(P.rows() + 2 * n, n);
  Vec haug(P.rows() + 2 * n);
  Gaug.topRows(P.rows()) = P.G;
  Gaug.middleRows(P.rows(), n) = Mat::Identity(n, n);
  Gaug.bottomRows(n) = -Mat::Identity(n, n);
  haug.head(P.rows()) = P.h;

  while (!open.empty()) {
    if (++visited > cfg.bb_max_nodes) {
      out.kind = BranchResult::Kind::BudgetOut;
      return out;
    }
    Node node = open.top();
    open.pop();
    if (node.ub <= target - margin) {
      certified_max = std::max(certified_max, node.ub);
      continue;
    }
    // Emptiness test for P within the node box.
    haug.segment(P.rows(), n) = node.hi;
    haug.tail(n) = -node.lo;
    Polyhedron nodeP{Gaug, haug};
    Vec center = 0.5 * (node.lo + node.hi);
    Projection pr = project_onto_polyhedron(nodeP, center, cfg.tol,
                                            cfg.proj_max_sweeps / 2);
    const double half_diag_sq = 0.25 * (node.hi - node.lo).squaredNorm();
    if (pr.status == Projection::Status::Infeasible ||
        2.0 * pr.dual_value > half_diag_sq * (1.0 + 1e-9) + 1e-12) {
      continue;  // no feasible point in this node
    }
    if (pr.status == Projection::Status::Converged) {
      double v = pr.point.squaredNorm();
      out.best_seen = std::max(out.best_seen, v);
      if (v >= target * (1.0 - 1e-12) && P.contains(pr.point, cfg.tol)) {
        out.kind = BranchResult::Kind::Reached;
        out.point = pr.point;
        return out;
      }
    }
    // Split the coordinate with the widest contribution to the bound,
    // preferring a split at zero when the interval straddles it.
    int split = 0;
    double best_w = -1.0;
    for (int j = 0; j < n; ++j) {
      const double w = std::max(std::abs(node.lo[j]), std::abs(node.hi[j]));
      if (node.hi[j] - node.lo[j] > 1e-12 && w > best_w) {
        best_w = w;
        split = j;
      }
    }
    if (node.hi[split] - node.lo[split] <= 1e-12) {
      certified_max = std::max(certified_max, node.ub);
      continue;
    }
    double mid;
    if (node.lo[split] < 0.0 && node.hi[split] > 0.0) {
      mid = 0.0;
    } else {
      mid = 0.5 * (node.lo[split] + node.hi[split]);
    }
    Node left = node, right = node;
    left.hi[split] = mid;
    right.lo[split] = mid;
    left.ub = box_ub(left.lo, left.hi);
    right.ub = box_ub(right.lo, right.hi);
    open.push(std::move(left));
    open.push(std::move(right));
  }
  out.kind = BranchResult::Kind::Bounded;
  out.bound = certified_max;
  return out;
}

}  // namespace detail

namespace detail {

// Local search for a point of P on the sphere ||x||^2 = alpha by alternating
// the polyhedron projection with radial rescaling. Cheap, convergent near
// transversal intersections, and self-verifying: any output passed the
// membership checks, so no certificate is required.
inline std::optional<Vec> alternating_sphere_projection(
    const Polyhedron& P, double alpha, const std::vector<Vec>& starts,
    const GeometryConfig& cfg) {
  const int n = P.dim();
  const double root = std::sqrt(alpha);
  for (const Vec& start : starts) {
    if (start.size() != n) continue;
    Vec x = start;
    if (x.norm() > 1e-14) x *= root / x.norm();
    double prev_move = kInf;
    for (int it = 0; it < 80; ++it) {
      Projection pr = project_onto_polyhedron(P, x, cfg.tol,
                                              cfg.proj_max_sweeps / 4);
      if (pr.status != Projection::Status::Converged) break;
      Vec y = pr.point;
      const double ynorm = y.norm();
      if (ynorm < 1e-14) break;
      Vec next = (root / ynorm) * y;
      const double sphere_gap = std::abs(y.squaredNorm() - alpha);
      if (sphere_gap <= cfg.sphere_tol * (1.0 + alpha) &&
          P.contains(y, cfg.tol)) {
        return y;
      }
      if (P.contains(next, cfg.tol)) return next;
      const double move = (next - x).norm();
      if (move >= prev_move * (1.0 - 1e-9) && it > 4) break;  // stalled
      prev_move = move;
      x = next;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Maximize ||x||^2 over P, stopping early once a feasible point with value at
// least `target` is known. Outcomes:
//   Reached    feasible x with ||x||^2 >= target (its own certificate)
//   Unbounded  recession ray found; `point` lies past the target on the ray
//   Bounded    certified: max over P is `value` (exact) or at most `value`
//   BestEffortBounded  budget exhausted, `value` is the best seen, uncertified
inline MaxNormOutcome max_norm_over_polyhedron(
    const Polyhedron& P, double target, const GeometryConfig& cfg,
    uint64_t salt = 0, const std::vector<Vec>& hints = {},
    bool allow_sphere_box = false) {
  if (target < 0.0) throw InvalidParameter("max_norm: target must be >= 0");
  const int n = P.dim();
  MaxNormOutcome out;
  Rng rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL + salt));

  auto walk_ray = [&](const Vec& ray) {
    Projection base = project_onto_polyhedron(P, Vec::Zero(n), cfg.tol,
                                              cfg.proj_max_sweeps);
    Vec x0 = base.status == Projection::Status::Converged ? base.point
                                                          : Vec(Vec::Zero(n));
    double t = std::sqrt(target) + x0.norm() + 1.0;
    Vec x = x0 + t * ray;
    while (x.squaredNorm() < target && t < 1e12) {
      t *= 2.0;
      x = x0 + t * ray;
    }
    return x;
  };

  if (P.rows() == 0) {
    out.kind = MaxNormOutcome::Kind::Unbounded;
    out.point = walk_ray(Vec::Unit(n, 0));
    out.value = out.point.squaredNorm();
    out.certified = true;
    out.method = "free";
    return out;
  }

  if (auto x = detail::heuristic_reach(P, target, cfg, rng, hints)) {
    out.kind = MaxNormOutcome::Kind::Reached;
    out.point = *x;
    out.value = x->squaredNorm();
    out.certified = true;
    out.method = "ascent";
    return out;
  }
  if (auto ray = detail::heuristic_ray(P, cfg, rng)) {
    Vec x = walk_ray(*ray);
    if (x.squaredNorm() >= target && P.contains(x, cfg.tol)) {
      out.kind = MaxNormOutcome::Kind::Unbounded;
      out.point = x;
      out.value = x.squaredNorm();
      out.certified = true;
      out.method = "ray";
      return out;
    }
  }

  // Certified path 1: exhaustive enumeration at small scale.
  if (n <= cfg.cap_n && P.rows() <= cfg.cap_m) {
    detail::VertexScan scan =
        detail::enumerate_basic_points(P, cfg.tol, cfg.combo_budget);
    if (scan.complete) {
      if (scan.ray) {
        Vec x = walk_ray(*scan.ray);
        out.kind = MaxNormOutcome::Kind::Unbounded;
        out.point = x;
        out.value = x.squaredNorm();
        out.certified = true;
        out.method = "enumeration-ray";
        return out;
      }
      double best = 0.0;
      const Vec* arg = nullptr;
      for (const Vec& v : scan.vertices) {
        const double val = v.squaredNorm();
        if (val > best) {
          best = val;
          arg = &v;
        }
      }
      if (arg && best >= target * (1.0 - 1e-12)) {
        out.kind = MaxNormOutcome::Kind::Reached;
        out.point = *arg;
        out.value = best;
        out.certified = true;
        out.exact = true;
        out.method = "enumeration";
        return out;
      }
      if (!scan.vertices.empty()) {
        out.kind = MaxNormOutcome::Kind::Bounded;
        if (arg) out.point = *arg;  // maximizing vertex, for marginal cases
        out.value = best;
        out.certified = true;
        out.exact = true;
        out.method = "enumeration";
        return out;
      }
      // No vertex and no ray: either empty or numerically degenerate; fall
      // through to the dual box path.
    }
  }

  // Certified path 2: dual coordinate box + interval branch and bound. If no
  // dual box exists (e.g. P is unbounded) a sphere-feasibility caller can
  // still get a certificate over the box every sphere point must lie in.
  detail::BoxBound box = detail::dual_box(P);
  MaxNormOutcome::Scope scope = MaxNormOutcome::Scope::global;
  if (!box.ok && allow_sphere_box) {
    const double w = std::sqrt(target) * (1.0 + 1e-12);
    box.lo = Vec::Constant(n, -w);
    box.hi = Vec::Constant(n, w);
    box.ok = true;
    scope = MaxNormOutcome::Scope::sphere_box;
  }
  if (box.ok) {
    detail::BranchResult bb =
        detail::branch_and_bound_max_norm(P, target, box.lo, box.hi, cfg);
    switch (bb.kind) {
      case detail::BranchResult::Kind::Reached:
        out.kind = MaxNormOutcome::Kind::Reached;
        out.point = bb.point;
        out.value = bb.point.squaredNorm();
        out.certified = true;
        out.method = "branch-and-bound";
        return out;
      case detail::BranchResult::Kind::Bounded:
        out.kind = MaxNormOutcome::Kind::Bounded;
        out.scope = scope;
        out.value = bb.bound;
        out.certified = true;
        out.method = scope == MaxNormOutcome::Scope::sphere_box
                         ? "branch-and-bound-sphere-box"
                         : "branch-and-bound";
        return out;
      case detail::BranchResult::Kind::BudgetOut:
        out.kind = MaxNormOutcome::Kind::BestEffortBounded;
        out.value = bb.best_seen;
        out.certified = false;
        out.method = "branch-and-bound-budget";
        return out;
    }
  }

  out.kind = MaxNormOutcome::Kind::BestEffortBounded;
  out.value = 0.0;
  out.certified = false;
  out.method = "unresolved";
  return out;
}

// ---------------------------------------------------------------------------

// Point x1 + t (x2 - x1), t in [0, 1], with ||x||^2 = alpha; requires
// ||x1||^2 <= alpha <= ||x2||^2. Smaller admissible root wins.
inline Vec segment_sphere_intersection(const Vec& x1, const Vec& x2,
                                       double alpha) {
  const double n1 = x1.squaredNorm();
  const double n2 = x2.squaredNorm();
  const double slack = 1e-9 * (1.0 + alpha);
  if (n1 > alpha + slack || n2 < alpha - slack) {
    throw PreconditionViolated(
        "segment_sphere_intersection: segment does not straddle the sphere");
  }
  Vec d = x2 - x1;
  const double a = d.squaredNorm();
  if (a == 0.0) return x1;
  const double b = 2.0 * x1.dot(d);
  const double c = n1 - alpha;
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) disc = 0.0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double roots[2] = {q / a, (q != 0.0 ? c / q : 0.0)};
  double t = kInf;
  for (double r : roots) {
    if (r >= -1e-12 && r <= 1.0 + 1e-12) t = std::min(t, r);
  }
  if (!std::isfinite(t)) t = std::clamp(-b / (2.0 * a), 0.0, 1.0);
  t = std::clamp(t, 0.0, 1.0);
  return x1 + t * d;
}

// ---------------------------------------------------------------------------
// Feasibility of (sphere ||x||^2 = alpha) intersected with a level polyhedron.

struct FeasibilityOutcome {
  enum class Kind { Point, Empty, Uncertified };
  Kind kind = Kind::Uncertified;
  Vec point;
  std::optional<double> max_norm_sq;
  std::optional<double> min_norm_sq;
  std::string branch;
};

inline FeasibilityOutcome sphere_polyhedron_feasibility(
    const LevelPolyhedron& lp, double alpha, const GeometryConfig& cfg,
    uint64_t salt = 0, const Vec& hint = Vec()) {
  if (alpha < 0.0) throw InvalidParameter("feasibility: alpha must be >= 0");
  FeasibilityOutcome out;
  if (lp.sphere_infeasible) {
    out.kind = FeasibilityOutcome::Kind::Empty;
    out.branch = "covered-row";
    return out;
  }
  Polyhedron P = as_polyhedron(lp);
  const int n = P.dim();

  auto verified_point = [&](const Vec& x) -> bool {
    if (!P.contains(x, cfg.tol)) return false;
    return std::abs(x.squaredNorm() - alpha) <= cfg.sphere_tol * (1.0 + alpha);
  };

  if (P.rows() == 0) {
    if (n == 0) {
      out.kind = FeasibilityOutcome::Kind::Uncertified;
      out.branch = "no-dimension";
      return out;
    }
    Vec x = std::sqrt(alpha) * Vec::Unit(n, 0);
    out.kind = FeasibilityOutcome::Kind::Point;
    out.point = x;
    out.branch = "free-sphere";
    return out;
  }

  if (alpha == 0.0) {
    if (P.h.minCoeff() >= -cfg.tol) {
      out.kind = FeasibilityOutcome::Kind::Point;
      out.point = Vec::Zero(n);
      out.branch = "origin";
    } else {
      out.kind = FeasibilityOutcome::Kind::Empty;
      out.branch = "origin-excluded";
    }
    return out;
  }

  Projection inner = project_onto_polyhedron(P, Vec::Zero(n), cfg.tol,
                                             cfg.proj_max_sweeps);
  if (inner.status == Projection::Status::Infeasible) {
    out.kind = FeasibilityOutcome::Kind::Empty;
    out.branch = "polyhedron-empty";
    return out;
  }
  const double min_bound = 2.0 * std::max(0.0, inner.dual_value);
  out.min_norm_sq = min_bound;
  if (min_bound > alpha * (1.0 + 1e-10) + 1e-14) {
    out.kind = FeasibilityOutcome::Kind::Empty;
    out.branch = "min-norm";
    return out;
  }
  if (inner.status != Projection::Status::Converged) {
    out.kind = FeasibilityOutcome::Kind::Uncertified;
    out.branch = "projection-unresolved";
    return out;
  }
  Vec x1 = inner.point;

  // Local pass first: alternating projections from the hint (typically the
  // iterate that generated the newest cuts) find nearby sphere points long
  // before any global machinery is warranted.
  {
    std::vector<Vec> starts;
    if (hint.size() == n) starts.push_back(hint);
    if (x1.norm() > 1e-14) starts.push_back(x1);
    Rng rng(cfg.seed ^ (0xd1b54a32d192ed03ULL + salt));
    starts.push_back(random_point_on_level(rng, n, alpha));
    if (auto x = detail::alternating_sphere_projection(P, alpha, starts, cfg)) {
      if (verified_point(*x)) {
        out.kind = FeasibilityOutcome::Kind::Point;
        out.point = *x;
        out.branch = "alternating";
        return out;
      }
    }
  }

  if (x1.squaredNorm() > alpha) {
    // Projection landed (numerically) outside the ball but the certified
    // bound does not exclude the sphere; pull back toward the certified side.
    if (verified_point(x1)) {
      out.kind = FeasibilityOutcome::Kind::Point;
      out.point = x1;
      out.branch = "projection-on-sphere";
      return out;
    }
    if (x1.squaredNorm() > alpha * (1.0 + 1e-9) + 1e-12) {
      out.kind = FeasibilityOutcome::Kind::Empty;
      out.branch = "min-norm";
      return out;
    }
    x1 *= std::sqrt(alpha / x1.squaredNorm());
  }

  std::vector<Vec> hints;
  if (hint.size() == n) hints.push_back(hint);
  hints.push_back(x1);
  MaxNormOutcome mx = max_norm_over_polyhedron(P, alpha, cfg, salt, hints,
                                               /*allow_sphere_box=*/true);
  switch (mx.kind) {
    case MaxNormOutcome::Kind::Reached:
    case MaxNormOutcome::Kind::Unbounded: {
      Vec x3 = segment_sphere_intersection(x1, mx.point, alpha);
      if (!verified_point(x3)) {
        // one refinement pass: re-project and intersect again
        Projection rp = project_onto_polyhedron(P, x3, cfg.tol,
                                                cfg.proj_max_sweeps);
        if (rp.status == Projection::Status::Converged) {
          Vec lo = x1, hi = mx.point;
          if (rp.point.squaredNorm() <= alpha) lo = rp.point; else hi = rp.point;
          x3 = segment_sphere_intersection(lo, hi, alpha);
        }
        if (!verified_point(x3)) {
          out.kind = FeasibilityOutcome::Kind::Uncertified;
          out.branch = "segment-unverified";
          return out;
        }
      }
      out.kind = FeasibilityOutcome::Kind::Point;
      out.point = x3;
      out.branch = "segment";
      return out;
    }
    case MaxNormOutcome::Kind::Bounded: {
      out.max_norm_sq = mx.value;
      if (mx.value < alpha * (1.0 - 1e-12)) {
        out.kind = FeasibilityOutcome::Kind::Empty;
        out.branch = mx.exact ? "max-norm-exact"
                     : mx.scope == MaxNormOutcome::Scope::sphere_box
                         ? "max-norm-sphere-box"
                         : "max-norm-bound";
      } else if (mx.exact && mx.point.size() == n &&
                 std::abs(mx.value - alpha) <= cfg.sphere_tol * (1.0 + alpha)) {
        // certified max sits on the level: the maximizing vertex is the point
        Vec v = mx.point;
        if (v.norm() > 1e-14) v *= std::sqrt(alpha) / v.norm();
        if (verified_point(v)) {
          out.kind = FeasibilityOutcome::Kind::Point;
          out.point = v;
          out.branch = "max-vertex";
        } else {
          out.kind = FeasibilityOutcome::Kind::Uncertified;
          out.branch = "max-norm-marginal";
        }
      } else {
        out.kind = FeasibilityOutcome::Kind::Uncertified;
        out.branch = "max-norm-marginal";
      }
      return out;
    }
    case MaxNormOutcome::Kind::BestEffortBounded: {
      out.max_norm_sq = mx.value;
      out.kind = FeasibilityOutcome::Kind::Uncertified;
      out.branch = "max-norm-uncertified";
      return out;
    }
  }
  return out;
}

}  // namespace cutsph
