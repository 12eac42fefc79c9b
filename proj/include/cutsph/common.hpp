// Shared aliases, error types and small numeric helpers.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace cutsph {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct NonFiniteValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PreconditionViolated : std::logic_error {
  using std::logic_error::logic_error;
};
struct DegenerateHalfspace : std::domain_error {
  using std::domain_error::domain_error;
};
struct SubgradientUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DatasetMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnboundedPolyhedron : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SubsolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line_, int column_, const std::string& reason)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(column_) + ": " + reason),
        line(line_),
        column(column_) {}
};

using Rng = std::mt19937_64;

// Unit vector drawn from the rotation-invariant (normalized Gaussian) law.
inline Vec random_direction(Rng& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec d(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int i = 0; i < n; ++i) d[i] = gauss(rng);
    norm = d.norm();
  }
  return d / norm;
}

// Point with squared objective value `level` on the sphere around the origin.
inline Vec random_point_on_level(Rng& rng, int n, double level) {
  if (level < 0) throw InvalidParameter("level must be nonnegative");
  if (level == 0.0) return Vec::Zero(n);
  return std::sqrt(level) * random_direction(rng, n);
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace cutsph
