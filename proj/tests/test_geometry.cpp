#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cutsph/geometry.hpp"
#include "cutsph/oracle.hpp"
#include "helpers.hpp"

using cutsph::FeasibilityOutcome;
using cutsph::GeometryConfig;
using cutsph::LevelPolyhedron;
using cutsph::Mat;
using cutsph::MaxNormOutcome;
using cutsph::Polyhedron;
using cutsph::Projection;
using cutsph::Vec;

namespace {

Polyhedron make_poly(std::initializer_list<std::initializer_list<double>> rows,
                     std::initializer_list<double> rhs) {
  const int m = static_cast<int>(rows.size());
  const int n = static_cast<int>(rows.begin()->size());
  Mat G(m, n);
  Vec h(m);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) G(r, c++) = v;
    ++r;
  }
  int i = 0;
  for (double v : rhs) h[i++] = v;
  return {G, h};
}

LevelPolyhedron as_level(const Polyhedron& P, double alpha) {
  LevelPolyhedron lp;
  lp.normals = P.G;
  lp.offsets = P.h;
  lp.level = alpha;
  return lp;
}

}  // namespace

TEST_CASE("projection onto a halfspace and a box corner") {
  Polyhedron half = make_poly({{1.0, 0.0}}, {1.0});
  Vec z(2);
  z << 2.0, 0.0;
  auto pr = cutsph::project_onto_polyhedron(half, z, 1e-10, 2000);
  REQUIRE(pr.status == Projection::Status::Converged);
  CHECK_THAT(pr.point[0], Catch::Matchers::WithinAbs(1.0, 1e-8));
  CHECK_THAT(pr.point[1], Catch::Matchers::WithinAbs(0.0, 1e-8));

  Polyhedron box = make_poly(
      {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}, {1.0, 1.0, 0.0, 0.0});
  Vec z2(2);
  z2 << 2.0, 2.0;
  auto pr2 = cutsph::project_onto_polyhedron(box, z2, 1e-10, 2000);
  REQUIRE(pr2.status == Projection::Status::Converged);
  CHECK_THAT(pr2.point[0], Catch::Matchers::WithinAbs(1.0, 1e-8));
  CHECK_THAT(pr2.point[1], Catch::Matchers::WithinAbs(1.0, 1e-8));
}

TEST_CASE("projection matches the active-set enumeration oracle") {
  cutsph::Rng rng(515);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3;
    auto P = testutil::random_feasible_polyhedron(rng, n, 5);
    Vec z = 2.0 * cutsph::random_direction(rng, n);
    auto pr = cutsph::project_onto_polyhedron(P, z, 1e-10, 4000);
    REQUIRE(pr.status == Projection::Status::Converged);
    auto exact = cutsph::exact_projection_qp(P, z);
    CHECK((pr.point - exact.point).norm() <= 1e-6 * (1.0 + exact.point.norm()));
  }
}

TEST_CASE("projection is idempotent and satisfies KKT residuals") {
  cutsph::Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    auto P = testutil::random_feasible_polyhedron(rng, 4, 7);
    Vec z = 3.0 * cutsph::random_direction(rng, 4);
    auto pr = cutsph::project_onto_polyhedron(P, z, 1e-10, 4000);
    REQUIRE(pr.status == Projection::Status::Converged);
    CHECK(pr.max_violation <= 1e-9);
    CHECK(pr.comp_residual <= 1e-5);
    // stationarity holds by construction: x = z - G' lambda
    Vec recon = z - P.G.transpose() * pr.multipliers;
    CHECK((recon - pr.point).norm() <= 1e-10 * (1.0 + pr.point.norm()));
    auto again = cutsph::project_onto_polyhedron(P, pr.point, 1e-10, 4000);
    REQUIRE(again.status == Projection::Status::Converged);
    CHECK((again.point - pr.point).norm() <= 1e-7 * (1.0 + pr.point.norm()));
  }
}

TEST_CASE("projection certifies infeasibility via Farkas") {
  // x1 <= -1 and -x1 <= -2 (x1 >= 2) cannot hold together
  Polyhedron P = make_poly({{1.0, 0.0}, {-1.0, 0.0}}, {-1.0, -2.0});
  auto pr = cutsph::project_onto_polyhedron(P, Vec::Zero(2), 1e-10, 4000);
  CHECK(pr.status == Projection::Status::Infeasible);
}

TEST_CASE("max_norm over boxes (bounded and reached)") {
  GeometryConfig cfg;
  Polyhedron box = make_poly(
      {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}, {1.0, 1.0, 1.0, 1.0});

  auto bounded = cutsph::max_norm_over_polyhedron(box, 3.0, cfg);
  REQUIRE(bounded.kind == MaxNormOutcome::Kind::Bounded);
  CHECK(bounded.certified);
  CHECK_THAT(bounded.value, Catch::Matchers::WithinAbs(2.0, 1e-9));

  auto reached = cutsph::max_norm_over_polyhedron(box, 1.5, cfg);
  REQUIRE(reached.kind == MaxNormOutcome::Kind::Reached);
  CHECK(reached.point.squaredNorm() >= 1.5 - 1e-9);
  CHECK(box.contains(reached.point, 1e-8));
}

TEST_CASE("max_norm detects recession directions") {
  GeometryConfig cfg;
  Polyhedron half = make_poly({{-1.0, 0.0}}, {0.0});  // x1 >= 0
  auto out = cutsph::max_norm_over_polyhedron(half, 100.0, cfg);
  const bool escaped = out.kind == MaxNormOutcome::Kind::Unbounded ||
                       out.kind == MaxNormOutcome::Kind::Reached;
  REQUIRE(escaped);
  CHECK(out.point.squaredNorm() >= 100.0 - 1e-7);
  CHECK(half.contains(out.point, 1e-8));
}

TEST_CASE("certified bounded value equals the vertex enumeration max") {
  cutsph::Rng rng(8181);
  GeometryConfig cfg;
  int certified = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    auto P = testutil::random_bounded_polyhedron(rng, n, 3);
    auto vertices = cutsph::enumerate_vertices(P);
    REQUIRE_FALSE(vertices.empty());
    double vmax = 0.0;
    for (const auto& v : vertices) vmax = std::max(vmax, v.squaredNorm());
    auto out = cutsph::max_norm_over_polyhedron(P, vmax * 4.0 + 1.0, cfg);
    REQUIRE(out.kind == MaxNormOutcome::Kind::Bounded);
    if (out.exact) {
      CHECK_THAT(out.value, Catch::Matchers::WithinRel(vmax, 1e-9));
      ++certified;
    } else {
      CHECK(out.value >= vmax - 1e-9);  // upper bound dominates the true max
    }
  }
  CHECK(certified >= 30);
}

TEST_CASE("branch-and-bound certifies boxes beyond the enumeration caps") {
  GeometryConfig cfg;
  cfg.cap_n = 2;  // force the dual-bound path in dimension 3
  Polyhedron box = make_poly({{1.0, 0, 0},
                              {0, 1.0, 0},
                              {0, 0, 1.0},
                              {-1.0, 0, 0},
                              {0, -1.0, 0},
                              {0, 0, -1.0}},
                             {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  auto out = cutsph::max_norm_over_polyhedron(box, 4.0, cfg);
  REQUIRE(out.kind == MaxNormOutcome::Kind::Bounded);
  CHECK(out.certified);
  CHECK(out.value < 4.0);
  CHECK(out.value >= 0.75 - 1e-9);  // true max
}

TEST_CASE("segment_sphere_intersection closed form") {
  Vec a(2), b(2);
  a << 0.0, 0.0;
  b << 2.0, 0.0;
  Vec hit = cutsph::segment_sphere_intersection(a, b, 1.0);
  CHECK_THAT(hit[0], Catch::Matchers::WithinAbs(1.0, 1e-12));

  Vec c(2), d(2);
  c << 0.0, 1.0;
  d << 2.0, 1.0;
  Vec hit2 = cutsph::segment_sphere_intersection(c, d, 2.0);
  CHECK_THAT(hit2[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(hit2[1], Catch::Matchers::WithinAbs(1.0, 1e-12));

  Vec on_sphere(2);
  on_sphere << 1.0, 0.0;
  Vec hit3 = cutsph::segment_sphere_intersection(on_sphere, b, 1.0);
  CHECK((hit3 - on_sphere).norm() == 0.0);

  CHECK_THROWS_AS(cutsph::segment_sphere_intersection(b, b, 1.0),
                  cutsph::PreconditionViolated);
}

TEST_CASE("segment_sphere_intersection is exact on random instances") {
  cutsph::Rng rng(2222);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    std::uniform_real_distribution<double> ualpha(0.2, 9.0);
    const double alpha = ualpha(rng);
    Vec inner = std::sqrt(alpha) * 0.3 * cutsph::random_direction(rng, n);
    Vec outer = std::sqrt(alpha) * 2.5 * cutsph::random_direction(rng, n);
    Vec hit = cutsph::segment_sphere_intersection(inner, outer, alpha);
    CHECK(std::abs(hit.squaredNorm() - alpha) <= 1e-12 * (1.0 + alpha));
  }
}

TEST_CASE("sphere feasibility: point in a halfspace") {
  GeometryConfig cfg;
  Polyhedron P = make_poly({{1.0, 0.0}}, {1.0});
  auto out = cutsph::sphere_polyhedron_feasibility(as_level(P, 4.0), 4.0, cfg);
  REQUIRE(out.kind == FeasibilityOutcome::Kind::Point);
  CHECK(std::abs(out.point.squaredNorm() - 4.0) <= 1e-8);
  CHECK(out.point[0] <= 1.0 + 1e-8);
}

TEST_CASE("sphere feasibility: small box is certified empty") {
  GeometryConfig cfg;
  Polyhedron P = make_poly(
      {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}},
      {0.5, 0.5, 0.5, 0.5});
  auto out = cutsph::sphere_polyhedron_feasibility(as_level(P, 4.0), 4.0, cfg);
  REQUIRE(out.kind == FeasibilityOutcome::Kind::Empty);
  REQUIRE(out.max_norm_sq.has_value());
  CHECK(*out.max_norm_sq < 4.0);
}

TEST_CASE("sphere feasibility: far polyhedron is empty via the min-norm branch") {
  GeometryConfig cfg;
  Polyhedron P = make_poly({{-1.0, 0.0}}, {-3.0});  // x1 >= 3
  auto out = cutsph::sphere_polyhedron_feasibility(as_level(P, 4.0), 4.0, cfg);
  REQUIRE(out.kind == FeasibilityOutcome::Kind::Empty);
  CHECK(out.branch == "min-norm");
  REQUIRE(out.min_norm_sq.has_value());
  CHECK(*out.min_norm_sq > 4.0);
}

TEST_CASE("sphere feasibility trichotomy on random instances") {
  cutsph::Rng rng(606);
  GeometryConfig cfg;
  int points = 0, empties = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    auto P = testutil::random_bounded_polyhedron(rng, n, 2);
    std::uniform_real_distribution<double> ualpha(0.01, 6.0);
    const double alpha = ualpha(rng);
    auto out = cutsph::sphere_polyhedron_feasibility(as_level(P, alpha), alpha,
                                                     cfg, trial);
    if (out.kind == FeasibilityOutcome::Kind::Point) {
      ++points;
      CHECK(P.contains(out.point, 1e-7));
      CHECK(std::abs(out.point.squaredNorm() - alpha) <= 1e-8 * (1.0 + alpha));
    } else if (out.kind == FeasibilityOutcome::Kind::Empty) {
      ++empties;
      // cross-check the emptiness claim with the enumeration oracles
      if (out.branch == "min-norm") {
        auto proj = cutsph::exact_projection_qp(P, Vec::Zero(n));
        CHECK(proj.value > alpha * (1.0 - 1e-9));
      } else {
        auto vertices = cutsph::enumerate_vertices(P);
        double vmax = 0.0;
        for (const auto& v : vertices) vmax = std::max(vmax, v.squaredNorm());
        CHECK(vmax < alpha * (1.0 + 1e-9));
      }
    }
  }
  CHECK(points > 0);
  CHECK(empties > 0);
}

TEST_CASE("sphere feasibility at level zero") {
  GeometryConfig cfg;
  Polyhedron ok = make_poly({{1.0, 0.0}}, {0.5});
  auto out = cutsph::sphere_polyhedron_feasibility(as_level(ok, 0.0), 0.0, cfg);
  REQUIRE(out.kind == FeasibilityOutcome::Kind::Point);
  CHECK(out.point.norm() == 0.0);

  Polyhedron bad = make_poly({{1.0, 0.0}}, {-0.5});
  auto out2 =
      cutsph::sphere_polyhedron_feasibility(as_level(bad, 0.0), 0.0, cfg);
  CHECK(out2.kind == FeasibilityOutcome::Kind::Empty);
}
