#include <cmath>
#include <functional>

#include "doctest.h"
#include "roc/linescan.hpp"

using namespace roc;

namespace {

RankOneSegment diag_segment_2d(double c, Interval range) {
  const std::vector<double> e1 = {1, 0};
  return make_segment_from(c * Matrix::identity(2), e1, e1, range);
}

}  // namespace

TEST_CASE("one-sided derivatives of |t| and t^2") {
  const std::function<double(double)> absf = [](double t) { return std::abs(t); };
  CHECK(one_sided_derivative(absf, 0.0, Side::Left).value == doctest::Approx(-1.0));
  CHECK(one_sided_derivative(absf, 0.0, Side::Right).value == doctest::Approx(1.0));

  const std::function<double(double)> sq = [](double t) { return t * t; };
  CHECK(one_sided_derivative(sq, 1.0, Side::Left).value ==
        doctest::Approx(2.0).epsilon(1e-8));
  CHECK(one_sided_derivative(sq, 1.0, Side::Right).value ==
        doctest::Approx(2.0).epsilon(1e-8));
  CHECK(one_sided_derivative(sq, 1.0, Side::Right).error < 1e-6);
}

TEST_CASE("branch tracking on the diagonal family in the plane") {
  // F = I, H = e1(x)e1 on [-1/2, 1/2]: analytic branches 1+t and 1
  // with one exchange crossing at t = 0.
  const RankOneSegment seg = diag_segment_2d(1.0, {-0.5, 0.5});
  const BranchCurves bc = track_branches(seg, 128);
  REQUIRE(bc.crossings.size() == 1);
  CHECK(bc.crossings[0].t == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(bc.crossings[0].exchange);
  CHECK(bc.crossings[0].gap <= 1e-9);

  // One branch is constant 1, the other is 1 + t.
  for (std::size_t k = 0; k < bc.times.size(); ++k) {
    const double t = bc.times[k];
    const double b0 = bc.values[k][0];
    const double b1 = bc.values[k][1];
    const bool pattern_a = std::abs(b0 - 1.0) < 1e-10 && std::abs(b1 - (1.0 + t)) < 1e-10;
    const bool pattern_b = std::abs(b1 - 1.0) < 1e-10 && std::abs(b0 - (1.0 + t)) < 1e-10;
    CHECK((pattern_a || pattern_b));
  }
  // and the labeling is consistent: each branch is one analytic curve.
  const std::size_t last = bc.times.size() - 1;
  const bool branch0_constant = std::abs(bc.values[0][0] - 1.0) < 1e-10;
  if (branch0_constant) {
    CHECK(std::abs(bc.values[last][0] - 1.0) < 1e-10);
    CHECK(std::abs(bc.values[last][1] - 1.5) < 1e-10);
  } else {
    CHECK(std::abs(bc.values[last][1] - 1.0) < 1e-10);
    CHECK(std::abs(bc.values[last][0] - 1.5) < 1e-10);
  }
}

TEST_CASE("branch tracking keeps permanently coincident branches in n = 3") {
  // F = I, H = diag(1,0,0): branches 1+t, 1, 1; the singular values are
  // non-simple at every t.
  const std::vector<double> e1 = {1, 0, 0};
  const RankOneSegment seg = make_segment_from(Matrix::identity(3), e1, e1, {0.0, 1.0});
  const BranchCurves bc = track_branches(seg, 128);
  CHECK(bc.matching_ambiguous);
  for (std::size_t k = 0; k < bc.times.size(); ++k) {
    const double t = bc.times[k];
    int ones = 0, moving = 0;
    for (int b = 0; b < 3; ++b) {
      if (std::abs(bc.values[k][b] - 1.0) < 1e-10) ++ones;
      if (std::abs(bc.values[k][b] - (1.0 + t)) < 1e-10) ++moving;
    }
    CHECK(ones >= 2);
    CHECK(moving >= 1);
  }
}

TEST_CASE("branch values reproduce the singular values and have bounded increments") {
  Rng seed_gen(404);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(seed_gen.uniform() * 3);
    const RankOneSegment seg = make_segment(5000 + static_cast<std::uint64_t>(trial), n);
    const int m = 96;
    const BranchCurves bc = track_branches(seg, m);
    const double hnorm = frobenius_norm(seg.H);
    const double dt = seg.t_range.length() / m;
    for (std::size_t k = 0; k < bc.times.size(); ++k) {
      const OrderedTuple s = singular_values(seg.at(bc.times[k]));
      std::vector<double> sorted_branches;
      for (int b = 0; b < n; ++b) sorted_branches.push_back(bc.values[k][b]);
      std::sort(sorted_branches.begin(), sorted_branches.end(), std::greater<>());
      for (int i = 0; i < n; ++i)
        REQUIRE(std::abs(sorted_branches[static_cast<std::size_t>(i)] - s[i]) <=
                1e-10 * std::max(1.0, s[0]));
      if (k > 0) {
        for (int b = 0; b < n; ++b)
          REQUIRE(std::abs(bc.values[k][b] - bc.values[k - 1][b]) <=
                  hnorm * dt * (1.0 + 1e-6) + 1e-9);
      }
    }
  }
}

TEST_CASE("planar segments have at most one crossing") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const RankOneSegment seg = make_segment(seed, 2);
    const BranchCurves bc = track_branches(seg, 128);
    CHECK(bc.crossings.size() <= 1);
  }
}

TEST_CASE("operator norm scan: kink gap +1 at the crossing, convex overall") {
  const RankOneSegment seg = diag_segment_2d(1.3, {-0.5, 0.5});
  const LineScanResult res = convexity_scan(zoo("opnorm"), seg, 256);
  CHECK(res.verdict == LineScanResult::Verdict::ConvexOnSegment);
  CHECK(res.violations.empty());
  REQUIRE(res.gap_checks.size() == 1);
  CHECK(res.gap_checks[0].t0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(res.gap_checks[0].gap == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_FALSE(res.gap_checks[0].violation);
}

TEST_CASE("determinant scan: affine along the line, nothing to report") {
  Rng seed_gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const RankOneSegment seg = make_segment(777 + static_cast<std::uint64_t>(trial), 2);
    const LineScanResult res = convexity_scan(zoo("det"), seg, 128);
    CHECK(res.verdict == LineScanResult::Verdict::ConvexOnSegment);
    CHECK(res.violations.empty());
    for (const auto& gc : res.gap_checks) {
      CHECK(std::abs(gc.gap) <= 1e-6);
      CHECK_FALSE(gc.violation);
    }
  }
}

TEST_CASE("distortion scan: rank-one convex, no violations over random segments") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const LineScanResult res = convexity_scan(zoo("distortion"), make_segment(seed, 2), 128);
    CHECK(res.verdict == LineScanResult::Verdict::ConvexOnSegment);
  }
}

TEST_CASE("log-distortion scan: a violating segment appears quickly") {
  ZooParams p;
  p.hhat = "log(t)";
  const EnergySpec e = zoo("conformal", p);
  bool found = false;
  for (std::uint64_t seed = 0; seed < 100 && !found; ++seed) {
    const LineScanResult res = convexity_scan(e, make_segment(seed, 2), 128);
    found = res.verdict == LineScanResult::Verdict::Violated;
  }
  CHECK(found);
}

TEST_CASE("glued parabola is flagged only through the one-sided gap") {
  const ScalarEnergy e = glued_parabola(0.5, 0.0);
  const ScalarScan scan = scan_scalar(e.f, {-1.0, 1.0}, 256, e.kinks);
  CHECK(scan.violated);
  CHECK(scan.violations.empty());  // second differences away from the kink are fine
  REQUIRE(scan.gap_checks.size() == 1);
  CHECK(scan.gap_checks[0].gap == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(scan.gap_checks[0].violation);
  CHECK(scan.gap_checks[0].error < 0.1 * 2.0);
}

TEST_CASE("scalar scan on smooth convex and concave functions") {
  const std::function<double(double)> sq = [](double t) { return t * t; };
  const ScalarScan convex = scan_scalar(sq, {-1.0, 1.0}, 128, {});
  CHECK_FALSE(convex.violated);

  const std::function<double(double)> neg = [](double t) { return -t * t; };
  const ScalarScan concave = scan_scalar(neg, {-1.0, 1.0}, 128, {});
  CHECK(concave.violated);
  CHECK(concave.violations.size() > 50);
}

TEST_CASE("planar crossing identities at engineered conformal points") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const EngineeredCrossing ec = engineered_planar_crossing(seed);
    const CrossingCheck chk = verify_crossing_planar(ec.seg, ec.t0);
    REQUIRE(chk.applicable);
    CHECK(chk.pass);
    CHECK(chk.eq_outer_resid <= 1e-6);
    CHECK(chk.eq_inner_resid <= 1e-6);
    CHECK(chk.ineq_slack >= -1e-8);
    ++checked;
  }
  CHECK(checked == 200);
  // For unit direction vectors the exchanged slopes differ by exactly
  // one: the slope pair is ((u.v)+1)/2, ((u.v)-1)/2 up to scaling.
  const EngineeredCrossing ec = engineered_planar_crossing(1);
  const CrossingCheck chk = verify_crossing_planar(ec.seg, ec.t0);
  const double xi_norm = std::hypot(ec.seg.xi[0], ec.seg.xi[1]);
  CHECK(chk.d_plus_max - chk.d_plus_min == doctest::Approx(xi_norm).epsilon(1e-5));
}

TEST_CASE("crossing check is not applicable away from a coincidence") {
  const RankOneSegment seg = make_segment_from(Matrix::from_rows({{2, 0}, {0, 1}}),
                                               std::vector<double>{1, 0},
                                               std::vector<double>{1, 0});
  const CrossingCheck chk = verify_crossing_planar(seg, 0.5);
  CHECK_FALSE(chk.applicable);
}

TEST_CASE("sum rules at the explicit n = 3 corner case") {
  const std::vector<double> e1 = {1, 0, 0};
  const RankOneSegment seg = make_segment_from(Matrix::identity(3), e1, e1, {-0.4, 0.4});
  const auto blocks = verify_sum_rules(seg, 0.0);
  REQUIRE(blocks.size() == 1);
  const SumRuleBlock& blk = blocks[0];
  CHECK(blk.i_min == 0);
  CHECK(blk.i_max == 2);
  CHECK(blk.pass);
  CHECK(blk.sum_minus == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(blk.sum_plus == doctest::Approx(1.0).epsilon(1e-6));
  // d+ = (1, 0, 0), d- = (0, 0, 1)
  CHECK(blk.d_plus[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(blk.d_plus[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  CHECK(blk.d_plus[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  CHECK(blk.d_minus[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
  CHECK(blk.d_minus[2] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("sum rules hold at engineered repeated points in n = 3 and 4") {
  for (int n : {3, 4}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const EngineeredCrossing ec = engineered_repeated_point(seed, n);
      const auto blocks = verify_sum_rules(ec.seg, ec.t0);
      REQUIRE_FALSE(blocks.empty());
      for (const auto& blk : blocks) {
        CHECK(blk.pass);
        CHECK(blk.equality_resid <= 1e-6);
        CHECK(blk.worst_prefix_slack >= -1e-8);
      }
    }
  }
}

TEST_CASE("sum rules report nothing when all singular values are simple") {
  const RankOneSegment seg = make_segment_from(Matrix::from_rows({{2, 0}, {0, 1}}),
                                               std::vector<double>{1, 0},
                                               std::vector<double>{0, 1});
  CHECK(verify_sum_rules(seg, 0.0).empty());
}

TEST_CASE("ordered dot product lemma") {
  // x = (1, -1), b = (2, 1): sum(x) = 0 applies, value 1.
  const double x1[2] = {1, -1};
  const double b1[2] = {2, 1};
  auto r = ordered_dot_check(std::span<const double>(x1, 2), std::span<const double>(b1, 2));
  CHECK(r.hypotheses_ok);
  CHECK(r.note == "x-sums-to-zero");
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.nonnegative);

  // first prefix sum negative: no claim.
  const double x2[2] = {-1, 1};
  r = ordered_dot_check(std::span<const double>(x2, 2), std::span<const double>(b1, 2));
  CHECK_FALSE(r.hypotheses_ok);

  // property: nonnegative decreasing b, prefix-nonnegative x.
  Rng rng(88);
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> prefix(static_cast<std::size_t>(d));
    for (auto& s : prefix) s = rng.uniform(0.0, 2.0);
    std::vector<double> x(static_cast<std::size_t>(d));
    x[0] = prefix[0];
    for (int i = 1; i < d; ++i)
      x[static_cast<std::size_t>(i)] =
          prefix[static_cast<std::size_t>(i)] - prefix[static_cast<std::size_t>(i - 1)];
    std::vector<double> b(static_cast<std::size_t>(d));
    for (auto& v : b) v = rng.uniform(0.0, 3.0);
    std::sort(b.begin(), b.end(), std::greater<>());
    const auto res = ordered_dot_check(x, b);
    REQUIRE(res.hypotheses_ok);
    REQUIRE(res.nonnegative);
  }
}

TEST_CASE("no rank-one connections inside CSO(2)") {
  // diff of I and 2I has both singular values 1.
  const Matrix d1 = 2.0 * Matrix::identity(2) - Matrix::identity(2);
  CHECK(singular_values(d1)[1] == doctest::Approx(1.0));

  // Z1 = I, Z2 = R(theta): both singular values are 2|sin(theta/2)|.
  const double theta = 0.73;
  const Matrix d2 = planar_rotation(theta) - Matrix::identity(2);
  const OrderedTuple s = singular_values(d2);
  CHECK(s[0] == doctest::Approx(2.0 * std::abs(std::sin(theta / 2))));
  CHECK(s[1] == doctest::Approx(2.0 * std::abs(std::sin(theta / 2))));

  const Cso2ScanStats stats = cso2_rank_one_scan(10000, 42);
  CHECK(stats.rank_one_hits == 0);
  CHECK(stats.min_rel_smallest_sv >= 1e-8);
}

TEST_CASE("ky fan prefix sums: right derivative dominates the left") {
  Rng seed_gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(seed_gen.uniform() * 3);
    const RankOneSegment seg = make_segment(2222 + static_cast<std::uint64_t>(trial), n);
    const BranchCurves bc = track_branches(seg, 96);
    std::vector<double> ts = {0.31 * seg.t_range.hi + 0.69 * seg.t_range.lo,
                              0.5 * (seg.t_range.lo + seg.t_range.hi)};
    for (const auto& cr : bc.crossings) ts.push_back(cr.t);
    for (double t : ts) {
      const double margin = std::sqrt(std::numeric_limits<double>::epsilon()) *
                            (1.0 + std::abs(t)) * 100.0;
      if (t - seg.t_range.lo < margin || seg.t_range.hi - t < margin) continue;
      for (int k = 1; k <= n; ++k) {
        auto kyfan = [&](double tt) { return ky_fan_norm(seg.at(tt), k); };
        const double dm = one_sided_derivative(kyfan, t, Side::Left).value;
        const double dp = one_sided_derivative(kyfan, t, Side::Right).value;
        CHECK(dp - dm >= -1e-6);
      }
    }
  }
}

TEST_CASE("scan input validation") {
  CHECK_THROWS_AS(track_branches(make_segment(1, 2), 8), InputError);
  CHECK_THROWS_AS(convexity_scan(zoo("opnorm"), make_segment(1, 2), 32), InputError);
  const std::function<double(double)> id = [](double t) { return t; };
  CHECK_THROWS_AS(scan_scalar(id, {1.0, 0.0}, 128, {}), InputError);
  CHECK_THROWS_AS(cso2_rank_one_scan(0, 1), InputError);
}
