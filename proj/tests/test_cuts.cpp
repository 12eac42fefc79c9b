#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cutsph/cuts.hpp"
#include "cutsph/problems.hpp"
#include "helpers.hpp"

using cutsph::OuterApproximation;
using cutsph::Problem;
using cutsph::QuadraticCut;
using cutsph::Vec;
using cutsph::WeaklyConvexConstraint;

namespace {

WeaklyConvexConstraint complement_unit_ball() {
  WeaklyConvexConstraint con;
  con.label = "outside-unit-ball";
  con.curvature = 1.0;
  con.eval = [](const Vec& x) { return -x.squaredNorm() + 1.0; };
  con.convexified_gradient = [](const Vec& x) { return Vec(0.0 * x); };
  return con;
}

}  // namespace

TEST_CASE("build_cut at the origin of the unit-ball complement") {
  auto con = complement_unit_ball();
  QuadraticCut cut = cutsph::build_cut(con, Vec::Zero(2));
  CHECK(cut.a == 1.0);
  CHECK(cut.b.norm() == 0.0);
  CHECK(cut.c == 1.0);  // cut is exactly ||x||^2 >= 1
}

TEST_CASE("build_cut with a = 0 reduces to the classic linear cut") {
  WeaklyConvexConstraint con;
  con.curvature = 0.0;
  con.eval = [](const Vec& x) { return x.squaredNorm() - 4.0; };
  con.convexified_gradient = [](const Vec& x) { return Vec(2.0 * x); };
  Vec x(2);
  x << 3.0, 0.0;
  QuadraticCut cut = cutsph::build_cut(con, x);
  CHECK(cut.a == 0.0);
  // f(x0) + grad'(y - x0) = 5 + 6(y1 - 3)
  Vec y(2);
  y << 1.0, 2.0;
  CHECK_THAT(cut.value(y),
             Catch::Matchers::WithinAbs(5.0 + 6.0 * (y[0] - 3.0), 1e-12));
}

TEST_CASE("build_cut hand-expanded coefficients") {
  // f(x) = ||x||^2 - 4 handled with curvature a = 1:
  // b(x0) = 4 x0, at x0 = (3,0): cut q(x) = -||x||^2 + 12 x1 - 22
  WeaklyConvexConstraint con;
  con.curvature = 1.0;
  con.eval = [](const Vec& x) { return x.squaredNorm() - 4.0; };
  con.convexified_gradient = [](const Vec& x) { return Vec(4.0 * x); };
  Vec x(2);
  x << 3.0, 0.0;
  QuadraticCut cut = cutsph::build_cut(con, x);
  CHECK(cut.a == 1.0);
  CHECK_THAT(cut.b[0], Catch::Matchers::WithinAbs(12.0, 1e-14));
  CHECK_THAT(cut.c, Catch::Matchers::WithinAbs(-22.0, 1e-12));
  CHECK_THAT(cut.value(x), Catch::Matchers::WithinAbs(con.eval(x), 1e-12));
}

TEST_CASE("ball_of_cut geometry") {
  QuadraticCut pure;
  pure.a = 1.0;
  pure.b = Vec::Zero(2);
  pure.c = 1.0;
  auto [c0, r0] = cutsph::ball_of_cut(pure, Vec::Zero(2), 1.0);
  CHECK(c0.norm() == 0.0);
  CHECK_THAT(r0, Catch::Matchers::WithinAbs(1.0, 1e-15));

  QuadraticCut shifted;
  shifted.a = 1.0;
  shifted.b = Vec::Zero(2);
  shifted.b << 2.0, 0.0;
  shifted.c = 3.0;
  auto [c1, r1] = cutsph::ball_of_cut(shifted, Vec::Zero(2), 3.0);
  CHECK_THAT(c1[0], Catch::Matchers::WithinAbs(1.0, 1e-15));
  CHECK_THAT(r1, Catch::Matchers::WithinAbs(2.0, 1e-15));

  QuadraticCut degenerate;
  degenerate.a = 0.0;
  degenerate.b = Vec::Ones(2);
  degenerate.c = 0.0;
  CHECK_THROWS_AS(cutsph::ball_of_cut(degenerate, Vec::Zero(2), 1.0),
                  cutsph::DegenerateHalfspace);
}

TEST_CASE("append_cuts counts") {
  cutsph::PackingSpec spec{{1.0, 1.0}};
  Problem p = cutsph::build_packing(spec);
  Vec origin = Vec::Zero(p.dimension);
  auto report = cutsph::violated_set(p, origin);
  REQUIRE_FALSE(report.empty());

  OuterApproximation empty;
  auto oa1 = cutsph::append_cuts(empty, p, report, origin, 0);
  CHECK(oa1.cut_count() == static_cast<long>(report.size()));

  auto oa2 = cutsph::append_cuts(oa1, p, report, origin, 1);
  CHECK(oa2.cut_count() == 2 * static_cast<long>(report.size()));

  CHECK_THROWS_AS(
      cutsph::append_cuts(empty, p, cutsph::ViolationReport{}, origin, 0),
      cutsph::PreconditionViolated);
}

TEST_CASE("append_cuts on the 4-circle first iterate") {
  cutsph::PackingSpec spec{{1.0, 1.0, 1.0, 1.0}};
  Problem p = cutsph::build_packing(spec);
  cutsph::Rng rng(11);
  Vec x0 = cutsph::random_point_on_level(rng, p.dimension, 21.0);
  auto report = cutsph::violated_set(p, x0);
  // independent count of the violated constraints at the sampled start
  int expected = 0;
  for (const auto& c : p.constraints) {
    if (c.eval(x0) > 0.0) ++expected;
  }
  CHECK(static_cast<int>(report.size()) == expected);
  OuterApproximation oa;
  oa = cutsph::append_cuts(oa, p, report, x0, 0);
  CHECK(oa.cut_count() == expected);
}

TEST_CASE("restart_set variants") {
  cutsph::PackingSpec spec{{1.0, 1.0}};
  Problem p = cutsph::build_packing(spec);
  Vec x = Vec::Zero(p.dimension);
  auto report = cutsph::violated_set(p, x);

  auto inexact = cutsph::restart_set(p, x, {}, 24.0,
                                     cutsph::RestartVariant::inexact, 3);
  CHECK(inexact.cut_count() == 0);
  REQUIRE(inexact.level_floor.has_value());
  CHECK(*inexact.level_floor == 24.0);
  CHECK(inexact.last_restart == 3);

  REQUIRE(report.size() >= 2);
  auto warm = cutsph::restart_set(p, x, report, 5.0,
                                  cutsph::RestartVariant::warm, 2);
  CHECK(warm.cut_count() == static_cast<long>(report.size()));
  CHECK(*warm.level_floor == 5.0);

  auto vacuous = cutsph::restart_set(p, x, report, 0.0,
                                     cutsph::RestartVariant::warm, 0);
  CHECK(*vacuous.level_floor == 0.0);
}

TEST_CASE("linearize_at_level rows and redundancy") {
  QuadraticCut norm_cut;  // ||x||^2 >= 1
  norm_cut.a = 1.0;
  norm_cut.b = Vec::Zero(2);
  norm_cut.c = 1.0;
  CHECK(cutsph::is_redundant_at_level(norm_cut, 1.0));

  QuadraticCut offset;
  offset.a = 1.0;
  offset.b = Vec::Zero(2);
  offset.b << 2.0, 0.0;
  offset.c = 3.0;
  CHECK_FALSE(cutsph::is_redundant_at_level(offset, 4.0));

  QuadraticCut linear;  // x1 <= -10: no point of the unit sphere qualifies
  linear.a = 0.0;
  linear.b = Vec::Zero(2);
  linear.b << 1.0, 0.0;
  linear.c = 10.0;
  CHECK_FALSE(cutsph::is_redundant_at_level(linear, 1.0));

  QuadraticCut halfspace;  // x1 <= -1 slices through the radius-2 sphere
  halfspace.a = 0.0;
  halfspace.b = Vec::Zero(2);
  halfspace.b << 1.0, 0.0;
  halfspace.c = 1.0;

  OuterApproximation oa;
  oa.cuts = {norm_cut, offset, halfspace};
  auto lp = cutsph::linearize_at_level(oa, 4.0);
  REQUIRE(lp.row_count() == 2);  // the pure norm cut is redundant at 4
  CHECK_FALSE(lp.sphere_infeasible);
  // offset cut: b'x <= a*alpha - c = 1
  CHECK_THAT(lp.offsets[0], Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK(lp.normals(0, 0) == 2.0);
  // linear cut: b'x <= -c independent of alpha
  CHECK_THAT(lp.offsets[1], Catch::Matchers::WithinAbs(-1.0, 1e-14));
}

TEST_CASE("linearize flags spheres that are entirely cut away") {
  QuadraticCut big_ball;  // everything with ||x||^2 = 1 violates it
  big_ball.a = 1.0;
  big_ball.b = Vec::Zero(2);
  big_ball.c = 9.0;  // cut is ||x||^2 >= 9
  OuterApproximation oa;
  oa.cuts = {big_ball};
  auto lp = cutsph::linearize_at_level(oa, 1.0);
  CHECK(lp.sphere_infeasible);
}

TEST_CASE("cut minorant and exclusion properties") {
  cutsph::Rng rng(404);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    auto con = testutil::random_quadratic_constraint(rng, n);
    Vec x0 = 2.5 * cutsph::random_direction(rng, n);
    const double f0 = con.eval(x0);
    QuadraticCut cut = cutsph::build_cut(con, x0);

    // exclusion: q(x0) = f(x0) exactly, to 1e-12 relative
    const double scale =
        std::max({1.0, std::abs(f0), cut.a * x0.squaredNorm(),
                  std::abs(cut.b.dot(x0))});
    CHECK(std::abs(cut.value(x0) - f0) <= 1e-12 * scale);

    // minorant: q(y) <= f(y) for sampled y
    for (int s = 0; s < 25; ++s) {
      Vec y = 4.0 * cutsph::random_direction(rng, n);
      const double fy = con.eval(y);
      CHECK(cut.value(y) <= fy + 1e-9 * (1.0 + std::abs(fy)));
    }
  }
}

TEST_CASE("packing cuts contain the analytically feasible set") {
  cutsph::PackingSpec spec{{1.0, 1.0}};
  Problem p = cutsph::build_packing(spec);
  // infeasible probe points generate cuts ...
  cutsph::Rng rng(17);
  OuterApproximation oa;
  for (int t = 0; t < 12; ++t) {
    Vec x = cutsph::random_point_on_level(rng, p.dimension, 2.0 + t);
    auto report = cutsph::violated_set(p, x);
    if (!report.empty()) oa = cutsph::append_cuts(oa, p, report, x, t);
  }
  REQUIRE(oa.cut_count() > 0);
  // ... and every feasible configuration satisfies all of them
  for (int t = 0; t < 50; ++t) {
    std::uniform_real_distribution<double> utheta(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> usep(2.0, 3.5);
    const double theta = utheta(rng);
    const double sep = usep(rng);
    Vec y(5);
    const double cx = 0.5 * sep * std::cos(theta);
    const double cy = 0.5 * sep * std::sin(theta);
    y << cx, -cx, cy, -cy, 0.0;
    const double needed = p.constraints[0].eval(y);  // g at p = 0
    // lift p so the container constraint holds: g decreases in p^2
    const double p2 = std::max(0.0, 2.0 * needed) + 1.0;
    y[4] = std::sqrt(p2 + y.head(4).squaredNorm());
    if (cutsph::max_violation(p, y) > 0.0) continue;  // not feasible, skip
    for (const auto& cut : oa.cuts) {
      CHECK(cut.value(y) <= 1e-9 * (1.0 + std::abs(cut.value(y))));
    }
  }
}

TEST_CASE("cumulative updates only shrink the outer approximation") {
  cutsph::Rng rng(31);
  auto con = testutil::random_quadratic_constraint(rng, 3);
  Problem p;
  p.dimension = 3;
  p.center = Vec::Zero(3);
  p.constraints.push_back(con);

  OuterApproximation before;
  Vec x1 = 2.0 * cutsph::random_direction(rng, 3);
  auto r1 = cutsph::violated_set(p, x1);
  if (r1.empty()) return;
  before = cutsph::append_cuts(before, p, r1, x1, 0);

  OuterApproximation after = before;
  Vec x2 = 2.0 * cutsph::random_direction(rng, 3);
  auto r2 = cutsph::violated_set(p, x2);
  if (!r2.empty()) after = cutsph::append_cuts(after, p, r2, x2, 1);

  for (int t = 0; t < 200; ++t) {
    Vec y = 3.0 * cutsph::random_direction(rng, 3);
    bool in_before = true;
    for (const auto& c : before.cuts) in_before &= c.value(y) <= 0.0;
    bool in_after = true;
    for (const auto& c : after.cuts) in_after &= c.value(y) <= 0.0;
    if (in_after) CHECK(in_before);  // nesting: new set is a subset
  }
}

TEST_CASE("level consistency of the linearized polyhedron") {
  cutsph::Rng rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    OuterApproximation oa;
    Problem p;
    p.dimension = n;
    p.center = Vec::Zero(n);
    for (int c = 0; c < 4; ++c) {
      p.constraints.push_back(testutil::random_quadratic_constraint(rng, n));
    }
    for (int k = 0; k < 3; ++k) {
      Vec x = 2.0 * cutsph::random_direction(rng, n);
      auto report = cutsph::violated_set(p, x);
      if (!report.empty()) oa = cutsph::append_cuts(oa, p, report, x, k);
    }
    if (oa.cut_count() == 0) continue;
    const double alpha = 2.25;
    auto lp = cutsph::linearize_at_level(oa, alpha);
    if (lp.sphere_infeasible) continue;
    for (int s = 0; s < 40; ++s) {
      Vec y = std::sqrt(alpha) * cutsph::random_direction(rng, n);
      bool cuts_ok = true;
      for (const auto& cut : oa.cuts) {
        cuts_ok &= cut.value(y) <= 1e-10 * (1.0 + std::abs(cut.c));
      }
      bool rows_ok = true;
      for (long r = 0; r < lp.row_count(); ++r) {
        rows_ok &= lp.normals.row(r).dot(y) - lp.offsets[r] <=
                   1e-10 * (1.0 + std::abs(lp.offsets[r]));
      }
      CHECK(cuts_ok == rows_ok);
    }
  }
}
