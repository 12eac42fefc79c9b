// Built-in problem families: circle packing in a circle and multiclass
// Neyman-Pearson classification, with their analytic curvature constants,
// plus a LIBSVM-format dataset reader.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cutsph/common.hpp"
#include "cutsph/model.hpp"

namespace cutsph {

// ---------------------------------------------------------------------------
// Circle packing. Variables (x_1..x_m, y_1..y_m, p); the container radius of
// a configuration is sqrt(F) with F(x,y) = max_i (||(x_i,y_i)|| + r_i)^2.

struct PackingSpec {
  std::vector<double> radii;

  int count() const { return static_cast<int>(radii.size()); }
};

namespace packing_detail {

inline int argmax_term(const PackingSpec& spec, const Vec& xy) {
  const int m = spec.count();
  int best = 0;
  double best_val = -kInf;
  for (int i = 0; i < m; ++i) {
    const double norm = std::hypot(xy[i], xy[m + i]);
    const double val = (norm + spec.radii[i]) * (norm + spec.radii[i]);
    if (val > best_val + 0.0) {  // smallest index wins ties
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
  }
  return best;
}

inline double container_level(const PackingSpec& spec, const Vec& xy) {
  const int i = argmax_term(spec, xy);
  const double norm = std::hypot(xy[i], xy[spec.count() + i]);
  return (norm + spec.radii[i]) * (norm + spec.radii[i]);
}

}  // namespace packing_detail

// Problem (dimension 2m+1, z = 0) with one pairwise non-overlap constraint
// per circle pair and the container constraint
//   g(x,y,p) = F(x,y) - ||(x,y,p)||^2 / m <= 0.
// Curvatures: the pairwise quadratic -(x_i-x_j)^2-(y_i-y_j)^2 has Hessian
// eigenvalues {0,-4}, so its convexification needs a = 2; F is convex (max of
// convex terms), so the container constraint carries a = 1/m alone.
inline Problem build_packing(const PackingSpec& spec) {
  const int m = spec.count();
  if (m < 2) throw InvalidParameter("build_packing: need at least 2 circles");
  for (double r : spec.radii) {
    if (!(r > 0.0)) throw InvalidParameter("build_packing: radii must be > 0");
  }
  auto shared = std::make_shared<PackingSpec>(spec);

  WeaklyConvexConstraint objective;
  objective.label = "container";
  objective.curvature = 0.0;
  objective.eval = [shared](const Vec& xy) {
    return packing_detail::container_level(*shared, xy);
  };
  objective.convexified_gradient = [shared](const Vec& xy) {
    const int mm = shared->count();
    const int i = packing_detail::argmax_term(*shared, xy);
    Vec g = Vec::Zero(2 * mm);
    const double norm = std::hypot(xy[i], xy[mm + i]);
    if (norm > 0.0) {
      const double scale = 2.0 * (norm + shared->radii[i]) / norm;
      g[i] = scale * xy[i];
      g[mm + i] = scale * xy[mm + i];
    }
    // at the origin 0 is a valid subgradient of (||.|| + r)^2
    return g;
  };

  std::vector<WeaklyConvexConstraint> pairwise;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      WeaklyConvexConstraint con;
      con.label = "overlap(" + std::to_string(i + 1) + "," +
                  std::to_string(j + 1) + ")";
      con.curvature = 2.0;
      const double rr = spec.radii[i] + spec.radii[j];
      con.eval = [i, j, m, rr](const Vec& xy) {
        const double dx = xy[i] - xy[j];
        const double dy = xy[m + i] - xy[m + j];
        return -dx * dx - dy * dy + rr * rr;
      };
      con.convexified_gradient = [i, j, m](const Vec& xy) {
        Vec g = 4.0 * xy;  // 2 a xy with a = 2
        const double dx = xy[i] - xy[j];
        const double dy = xy[m + i] - xy[m + j];
        g[i] += -2.0 * dx;
        g[j] += 2.0 * dx;
        g[m + i] += -2.0 * dy;
        g[m + j] += 2.0 * dy;
        return g;
      };
      pairwise.push_back(std::move(con));
    }
  }

  Problem p = reformulate(objective, pairwise, 2 * m, 2.0 / m, 0.0);
  double diam_sum = 0.0;
  for (double r : spec.radii) diam_sum += 2.0 * r;
  p.level_cap = m * (diam_sum * diam_sum) * (1.0 + static_cast<double>(m)) + 1.0;
  p.aux_label = "F";
  p.aux_metric = [shared](const Vec& v) {
    return packing_detail::container_level(*shared,
                                           v.head(2 * shared->count()));
  };

  // Smooth residual view: the container max splits into one term per circle,
  // (||c_i|| + r_i)^2 - ||v||^2 / m, each differentiable away from c_i = 0.
  SmoothResidualView view;
  view.values = [shared](const Vec& v) {
    const int mm = shared->count();
    const int pairs = mm * (mm - 1) / 2;
    Vec r(pairs + mm);
    int row = 0;
    for (int i = 0; i < mm; ++i) {
      for (int j = i + 1; j < mm; ++j) {
        const double dx = v[i] - v[j];
        const double dy = v[mm + i] - v[mm + j];
        const double rr = shared->radii[i] + shared->radii[j];
        r[row++] = -dx * dx - dy * dy + rr * rr;
      }
    }
    const double level_term = v.squaredNorm() / mm;
    for (int i = 0; i < mm; ++i) {
      const double norm = std::hypot(v[i], v[mm + i]);
      const double t = norm + shared->radii[i];
      r[row++] = t * t - level_term;
    }
    return r;
  };
  view.jacobian = [shared](const Vec& v) {
    const int mm = shared->count();
    const int pairs = mm * (mm - 1) / 2;
    const int n = static_cast<int>(v.size());
    Mat J = Mat::Zero(pairs + mm, n);
    int row = 0;
    for (int i = 0; i < mm; ++i) {
      for (int j = i + 1; j < mm; ++j) {
        const double dx = v[i] - v[j];
        const double dy = v[mm + i] - v[mm + j];
        J(row, i) = -2.0 * dx;
        J(row, j) = 2.0 * dx;
        J(row, mm + i) = -2.0 * dy;
        J(row, mm + j) = 2.0 * dy;
        ++row;
      }
    }
    for (int i = 0; i < mm; ++i) {
      J.row(row) = (-2.0 / mm) * v.transpose();
      const double norm = std::hypot(v[i], v[mm + i]);
      if (norm > 1e-14) {
        const double scale = 2.0 * (norm + shared->radii[i]) / norm;
        J(row, i) += scale * v[i];
        J(row, mm + i) += scale * v[mm + i];
      }
      ++row;
    }
    return J;
  };
  p.polish_view = std::move(view);
  return p;
}

// Enclosing radius max_i (||(x_i,y_i)|| + r_i) = sqrt(F) of a configuration;
// accepts either the (x,y) block or the full reformulated (x,y,p) vector.
inline double packing_radius_of(const Vec& point, const PackingSpec& spec) {
  const int m = spec.count();
  if (point.size() != 2 * m && point.size() != 2 * m + 1) {
    throw InvalidParameter("packing_radius_of: wrong point dimension");
  }
  return std::sqrt(
      packing_detail::container_level(spec, point.head(2 * m)));
}

// ---------------------------------------------------------------------------
// LIBSVM-format datasets: lines "label idx:val idx:val ..." with 1-based
// strictly ascending indices; '#' starts a comment; empty lines are skipped.

struct Dataset {
  struct Entry {
    int index = 0;  // 1-based
    double value = 0.0;
    std::string raw;  // original token text, kept for round-trips
  };
  struct Row {
    std::string raw_label;
    double label = 0.0;
    int class_id = 0;  // 1..K in first-appearance order
    std::vector<Entry> entries;
  };
  std::vector<Row> rows;
  int feature_dim = 0;  // max index seen
  int class_count = 0;

  Vec dense(std::size_t row, int dim = 0) const {
    const int p = dim > 0 ? dim : feature_dim;
    Vec v = Vec::Zero(p);
    for (const Entry& e : rows[row].entries) {
      if (e.index <= p) v[e.index - 1] = e.value;
    }
    return v;
  }
};

inline Dataset parse_libsvm(std::istream& in) {
  Dataset data;
  std::vector<double> seen_labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t pos = 0;
    auto skip_ws = [&]() {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    };
    auto take_token = [&]() {
      const std::size_t start = pos;
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      return line.substr(start, pos - start);
    };
    skip_ws();
    if (pos == line.size()) continue;

    Dataset::Row row;
    const int label_col = static_cast<int>(pos) + 1;
    row.raw_label = take_token();
    {
      std::size_t used = 0;
      try {
        row.label = std::stod(row.raw_label, &used);
      } catch (...) {
        throw ParseError(line_no, label_col, "label is not a number");
      }
      if (used != row.raw_label.size()) {
        throw ParseError(line_no, label_col, "label is not a number");
      }
    }
    int last_index = 0;
    while (true) {
      skip_ws();
      if (pos == line.size()) break;
      const int col = static_cast<int>(pos) + 1;
      std::string tok = take_token();
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_no, col, "expected index:value, got '" + tok + "'");
      }
      Dataset::Entry e;
      e.raw = tok;
      try {
        std::size_t used = 0;
        e.index = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("");
      } catch (...) {
        throw ParseError(line_no, col, "bad feature index in '" + tok + "'");
      }
      try {
        std::size_t used = 0;
        e.value = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument("");
      } catch (...) {
        throw ParseError(line_no, col, "bad feature value in '" + tok + "'");
      }
      if (e.index < 1) {
        throw ParseError(line_no, col, "feature indices are 1-based");
      }
      if (e.index <= last_index) {
        throw ParseError(line_no, col, "feature indices must be ascending");
      }
      last_index = e.index;
      data.feature_dim = std::max(data.feature_dim, e.index);
      row.entries.push_back(std::move(e));
    }
    int id = 0;
    for (std::size_t i = 0; i < seen_labels.size(); ++i) {
      if (seen_labels[i] == row.label) {
        id = static_cast<int>(i) + 1;
        break;
      }
    }
    if (id == 0) {
      seen_labels.push_back(row.label);
      id = static_cast<int>(seen_labels.size());
    }
    row.class_id = id;
    data.rows.push_back(std::move(row));
  }
  data.class_count = static_cast<int>(seen_labels.size());
  return data;
}

inline Dataset parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

inline std::string serialize_libsvm(const Dataset& data) {
  std::string out;
  for (const auto& row : data.rows) {
    out += row.raw_label;
    for (const auto& e : row.entries) {
      out += ' ';
      out += e.raw;
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multiclass Neyman-Pearson classification with the sigmoid-complement loss
// psi(t) = 1/(1+e^t). psi'' is maximized in magnitude at e^t = 2 - sqrt(3),
// giving the weak-convexity modulus of psi below.
inline const double kRhoPsi = 1.0 / (6.0 * std::sqrt(3.0));

struct NpcSpec {
  int classes = 0;      // K
  int feature_dim = 0;  // p
  Dataset data;
  double lambda = 0.3;
  std::vector<double> thresholds;  // r_2..r_K

  static NpcSpec from_dataset(Dataset d, double lambda,
                              std::vector<double> thresholds) {
    NpcSpec spec;
    spec.classes = d.class_count;
    spec.feature_dim = d.feature_dim;
    spec.data = std::move(d);
    spec.lambda = lambda;
    spec.thresholds = std::move(thresholds);
    return spec;
  }
};

namespace npc_detail {

inline double psi(double t) { return 1.0 / (1.0 + std::exp(t)); }
inline double psi_prime(double t) {
  const double s = psi(t);
  return -s * (1.0 - s);
}

struct NpcData {
  int K = 0;
  int p = 0;
  std::vector<std::vector<Vec>> by_class;      // zeta_t grouped by class
  std::vector<double> sq_norm_sum;             // sum ||zeta||^2 per class
  std::vector<double> rho;                     // rho_k per class (1-based-0)

  // mean over class k of sum_{l != k} psi(x_k' z - x_l' z)
  double loss(const Vec& xbar, int k) const {
    const auto& pts = by_class[k];
    double s = 0.0;
    for (const Vec& zeta : pts) {
      const double own = xbar.segment(k * p, p).dot(zeta);
      for (int l = 0; l < K; ++l) {
        if (l == k) continue;
        s += psi(own - xbar.segment(l * p, p).dot(zeta));
      }
    }
    return s / static_cast<double>(pts.size());
  }

  Vec loss_gradient(const Vec& xbar, int k) const {
    const auto& pts = by_class[k];
    Vec g = Vec::Zero(K * p);
    for (const Vec& zeta : pts) {
      const double own = xbar.segment(k * p, p).dot(zeta);
      for (int l = 0; l < K; ++l) {
        if (l == k) continue;
        const double w = psi_prime(own - xbar.segment(l * p, p).dot(zeta));
        g.segment(k * p, p) += w * zeta;
        g.segment(l * p, p) -= w * zeta;
      }
    }
    return g / static_cast<double>(pts.size());
  }
};

inline std::shared_ptr<NpcData> prepare(const NpcSpec& spec) {
  auto d = std::make_shared<NpcData>();
  d->K = spec.classes;
  d->p = spec.feature_dim;
  if (d->K < 2) throw DatasetMismatch("npc: need at least two classes");
  if (spec.data.class_count != d->K) {
    throw DatasetMismatch("npc: dataset has " +
                          std::to_string(spec.data.class_count) +
                          " classes, spec says " + std::to_string(d->K));
  }
  if (spec.data.feature_dim > d->p) {
    throw DatasetMismatch("npc: dataset feature dim exceeds the spec");
  }
  if (static_cast<int>(spec.thresholds.size()) != d->K - 1) {
    throw DatasetMismatch("npc: expected K-1 threshold values");
  }
  d->by_class.resize(d->K);
  d->sq_norm_sum.assign(d->K, 0.0);
  for (std::size_t r = 0; r < spec.data.rows.size(); ++r) {
    const int k = spec.data.rows[r].class_id - 1;
    Vec zeta = spec.data.dense(r, d->p);
    d->sq_norm_sum[k] += zeta.squaredNorm();
    d->by_class[k].push_back(std::move(zeta));
  }
  for (int k = 0; k < d->K; ++k) {
    if (d->by_class[k].empty()) throw DatasetMismatch("npc: empty class");
    d->rho.push_back(2.0 * (d->K - 1) / d->by_class[k].size() * kRhoPsi *
                     d->sq_norm_sum[k]);
  }
  return d;
}

}  // namespace npc_detail

// Reformulated problem over x = (x_1,...,x_K, slack) of dimension pK + 1:
//   F_1(x) + K lambda^2 - ||x||^2 <= 0        (curvature 1 + rho_1/2)
//   mean psi-losses of classes 2..K <= r_k    (curvature rho_k/2)
//   ||x_k||^2 <= lambda^2                     (convex, a = 0)
inline Problem build_npc(const NpcSpec& spec) {
  auto d = npc_detail::prepare(spec);
  const int K = d->K;
  const int p = d->p;
  const int nbar = K * p;
  const double eta = K * spec.lambda * spec.lambda;

  WeaklyConvexConstraint objective;
  objective.label = "npc-objective";
  objective.curvature = d->rho[0] / 2.0;
  objective.eval = [d](const Vec& xbar) { return d->loss(xbar, 0); };
  {
    const double rho1 = d->rho[0];
    objective.convexified_gradient = [d, rho1](const Vec& xbar) {
      return Vec(d->loss_gradient(xbar, 0) + rho1 * xbar);
    };
  }

  std::vector<WeaklyConvexConstraint> g;
  for (int k = 1; k < K; ++k) {
    WeaklyConvexConstraint con;
    con.label = "npc-threshold(" + std::to_string(k + 1) + ")";
    con.curvature = d->rho[k] / 2.0;
    const double rk = spec.thresholds[k - 1];
    const double rho_k = d->rho[k];
    con.eval = [d, k, rk](const Vec& xbar) { return d->loss(xbar, k) - rk; };
    con.convexified_gradient = [d, k, rho_k](const Vec& xbar) {
      return Vec(d->loss_gradient(xbar, k) + rho_k * xbar);
    };
    g.push_back(std::move(con));
  }
  for (int k = 0; k < K; ++k) {
    WeaklyConvexConstraint con;
    con.label = "npc-norm-cap(" + std::to_string(k + 1) + ")";
    con.curvature = 0.0;
    const double lam2 = spec.lambda * spec.lambda;
    con.eval = [k, p, lam2](const Vec& xbar) {
      return xbar.segment(k * p, p).squaredNorm() - lam2;
    };
    con.convexified_gradient = [k, p](const Vec& xbar) {
      Vec grad = Vec::Zero(xbar.size());
      grad.segment(k * p, p) = 2.0 * xbar.segment(k * p, p);
      return grad;
    };
    g.push_back(std::move(con));
  }

  Problem prob = reformulate(objective, g, nbar, 2.0, eta);
  prob.level_cap = eta + (K - 1) + eta + 1.0;
  prob.aux_label = "F1";
  prob.aux_metric = [d, nbar](const Vec& v) {
    return d->loss(v.head(nbar), 0);
  };
  return prob;
}

// argmax_k x_k' zeta; ties go to the smallest class index. Accepts weight
// vectors of length pK or pK+1 (trailing slack ignored).
inline int npc_classify(const Vec& weights, const Vec& zeta) {
  const int p = static_cast<int>(zeta.size());
  long len = weights.size();
  if (len % p == 1) --len;
  if (len % p != 0 || len == 0) {
    throw InvalidParameter("npc_classify: weight layout does not match zeta");
  }
  const int K = static_cast<int>(len / p);
  int best = 0;
  double best_score = weights.segment(0, p).dot(zeta);
  for (int k = 1; k < K; ++k) {
    const double s = weights.segment(k * p, p).dot(zeta);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best + 1;
}

}  // namespace cutsph
