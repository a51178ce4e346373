#include "roc/linescan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace roc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Base step for one-sided difference quotients. The extrapolation error
// is O(h^3), so a fairly large base keeps rounding noise (which scales
// like 1/h) below the 1e-8 slack used by the crossing and sum-rule
// checks without hurting accuracy.
constexpr double kOneSidedBase = 1024.0;

double one_sided_safety(double t) {
  return std::sqrt(kEps) * (1.0 + std::abs(t)) * (kOneSidedBase * 1.1);
}

double sorted_sv_at(const RankOneSegment& seg, double t, int i) {
  return singular_values(seg.at(t))[i];
}

std::vector<std::pair<int, int>> equal_blocks_of(const OrderedTuple& s, double rel_tol) {
  std::vector<std::pair<int, int>> blocks;
  const double scale = std::max(s[0], 1.0);
  int start = 0;
  for (int i = 1; i <= s.dim(); ++i) {
    if (i == s.dim() || s[i - 1] - s[i] > rel_tol * scale) {
      blocks.emplace_back(start, i - 1);
      start = i;
    }
  }
  return blocks;
}

}  // namespace

OneSided one_sided_derivative(const std::function<double(double)>& f, double t0, Side side) {
  const double sgn = (side == Side::Right) ? 1.0 : -1.0;
  const double h0 = std::sqrt(kEps) * (1.0 + std::abs(t0)) * kOneSidedBase;
  const double f0 = f(t0);
  auto quot = [&](double h) { return sgn * (f(t0 + sgn * h) - f0) / h; };
  const double d1 = quot(h0);
  const double d2 = quot(0.5 * h0);
  const double d3 = quot(0.25 * h0);
  const double e1 = 2.0 * d2 - d1;
  const double e2 = 2.0 * d3 - d2;
  const double value = (4.0 * e2 - e1) / 3.0;
  if (!std::isfinite(value))
    throw EvalError("one_sided_derivative: non-finite evaluation near t0");
  OneSided out;
  out.value = value;
  out.error = std::abs(value - e2) + 256.0 * kEps * (std::abs(f0) + 1.0) / h0;
  return out;
}

BranchCurves track_branches(const RankOneSegment& seg, int m) {
  if (m < 16) throw InputError("track_branches: need at least 16 samples");
  const int n = seg.F.dim();
  const double lo = seg.t_range.lo;
  const double range = seg.t_range.length();
  const double dt = range / m;

  BranchCurves bc;
  bc.n = n;
  bc.times.resize(static_cast<std::size_t>(m) + 1);
  std::vector<std::array<double, kMaxDim>> sorted(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    const double t = lo + k * dt;
    bc.times[static_cast<std::size_t>(k)] = t;
    const OrderedTuple s = singular_values(seg.at(t));
    for (int i = 0; i < n; ++i) sorted[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = s[i];
    // A near-tie makes the displacement assignment ambiguous; the
    // identity permutation is kept in that case.
    for (int i = 0; i + 1 < n; ++i)
      if (s[i] - s[i + 1] <= 1e-14 * std::max(1.0, s[0])) bc.matching_ambiguous = true;
  }

  const double cand_thresh = 10.0 * frobenius_norm(seg.H) * range / m;

  for (int pair = 0; pair + 1 < n; ++pair) {
    auto gap_at = [&](double t) {
      const OrderedTuple s = singular_values(seg.at(t));
      return s[pair] - s[pair + 1];
    };
    // Candidate clusters: maximal runs of samples with a small gap.
    int k = 0;
    while (k <= m) {
      const double g =
          sorted[static_cast<std::size_t>(k)][static_cast<std::size_t>(pair)] -
          sorted[static_cast<std::size_t>(k)][static_cast<std::size_t>(pair + 1)];
      if (g >= cand_thresh) {
        ++k;
        continue;
      }
      int end = k;
      while (end + 1 <= m) {
        const double g2 =
            sorted[static_cast<std::size_t>(end + 1)][static_cast<std::size_t>(pair)] -
            sorted[static_cast<std::size_t>(end + 1)][static_cast<std::size_t>(pair + 1)];
        if (g2 >= cand_thresh) break;
        ++end;
      }

      Crossing cr;
      cr.upper = pair;
      if (k == 0 && end == m) {
        // Contact along the whole interval: the two curves coincide,
        // no isolated crossing time exists.
        cr.t = lo + 0.5 * range;
        cr.gap = gap_at(cr.t);
        cr.exchange = false;
        cr.ambiguous = true;
        bc.crossings.push_back(cr);
        break;
      }

      // Shrink [a, b] around the minimum of the V-shaped gap.
      double a = bc.times[static_cast<std::size_t>(std::max(0, k - 1))];
      double b = bc.times[static_cast<std::size_t>(std::min(m, end + 1))];
      while (b - a > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b))) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (gap_at(m1) < gap_at(m2))
          b = m2;
        else
          a = m1;
      }
      cr.t = 0.5 * (a + b);
      cr.gap = gap_at(cr.t);
      const double scale = std::max(1.0, sorted_sv_at(seg, cr.t, 0));
      if (cr.gap <= 1e-7 * scale) {
        // Genuine coincidence: decide whether the analytic curves
        // exchange order by matching one-sided slopes.
        const double safety = one_sided_safety(cr.t);
        if (cr.t - seg.t_range.lo > safety && seg.t_range.hi - cr.t > safety) {
          auto ci = [&](double t) { return sorted_sv_at(seg, t, pair); };
          auto cj = [&](double t) { return sorted_sv_at(seg, t, pair + 1); };
          const double dmi = one_sided_derivative(ci, cr.t, Side::Left).value;
          const double dpi = one_sided_derivative(ci, cr.t, Side::Right).value;
          const double dmj = one_sided_derivative(cj, cr.t, Side::Left).value;
          const double dpj = one_sided_derivative(cj, cr.t, Side::Right).value;
          const double err_stay = std::abs(dpi - dmi) + std::abs(dpj - dmj);
          const double err_swap = std::abs(dpi - dmj) + std::abs(dpj - dmi);
          const double deriv_scale =
              std::abs(dpi) + std::abs(dmi) + std::abs(dpj) + std::abs(dmj) + 1.0;
          cr.exchange = err_swap < err_stay;
          cr.ambiguous = std::abs(err_swap - err_stay) <= 1e-6 * deriv_scale;
          if (cr.ambiguous) cr.exchange = false;
        } else {
          cr.ambiguous = true;
        }
        bc.crossings.push_back(cr);
      }
      k = end + 1;
    }
  }

  std::sort(bc.crossings.begin(), bc.crossings.end(),
            [](const Crossing& x, const Crossing& y) { return x.t < y.t; });

  // Branch labels follow the analytic continuation: rank-following
  // between crossings, with the two affected labels swapped when the
  // curves exchange order.
  std::array<int, kMaxDim> rank_of_branch{};
  for (int i = 0; i < n; ++i) rank_of_branch[static_cast<std::size_t>(i)] = i;
  bc.values.resize(static_cast<std::size_t>(m) + 1);
  std::size_t cidx = 0;
  for (int k2 = 0; k2 <= m; ++k2) {
    const double t = bc.times[static_cast<std::size_t>(k2)];
    while (cidx < bc.crossings.size() && bc.crossings[cidx].t <= t) {
      const Crossing& cr = bc.crossings[cidx];
      if (cr.exchange) {
        int b1 = -1, b2 = -1;
        for (int b = 0; b < n; ++b) {
          if (rank_of_branch[static_cast<std::size_t>(b)] == cr.upper) b1 = b;
          if (rank_of_branch[static_cast<std::size_t>(b)] == cr.upper + 1) b2 = b;
        }
        std::swap(rank_of_branch[static_cast<std::size_t>(b1)],
                  rank_of_branch[static_cast<std::size_t>(b2)]);
      }
      ++cidx;
    }
    for (int b = 0; b < n; ++b)
      bc.values[static_cast<std::size_t>(k2)][static_cast<std::size_t>(b)] =
          sorted[static_cast<std::size_t>(k2)]
                [static_cast<std::size_t>(rank_of_branch[static_cast<std::size_t>(b)])];
  }
  return bc;
}

ScalarScan scan_scalar(const std::function<double(double)>& f, Interval range, int m,
                       std::span<const double> kinks, const Tolerances& tol) {
  if (m < 16) throw InputError("scan_scalar: need at least 16 samples");
  if (!(range.lo < range.hi)) throw InputError("scan_scalar: empty interval");
  const double dt = range.length() / m;
  std::vector<double> p(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    const double t = range.lo + k * dt;
    p[static_cast<std::size_t>(k)] = f(t);
    if (!std::isfinite(p[static_cast<std::size_t>(k)]))
      throw EvalError("scan_scalar: non-finite value at t=" + std::to_string(t));
  }

  ScalarScan out;
  const double band = 4.0 * range.length() / m;
  for (int k = 1; k < m; ++k) {
    const double t = range.lo + k * dt;
    bool near_kink = false;
    for (double kt : kinks)
      if (std::abs(t - kt) < band) near_kink = true;
    if (near_kink) continue;
    const double d2 = p[static_cast<std::size_t>(k - 1)] - 2.0 * p[static_cast<std::size_t>(k)] +
                      p[static_cast<std::size_t>(k + 1)];
    const double thresh = (tol.abs + tol.rel * std::abs(p[static_cast<std::size_t>(k)])) * dt * dt;
    if (d2 < -thresh) out.violations.push_back(Violation{t, d2 / (dt * dt)});
  }

  for (double kt : kinks) {
    if (kt - range.lo <= one_sided_safety(kt) || range.hi - kt <= one_sided_safety(kt)) continue;
    const OneSided dp = one_sided_derivative(f, kt, Side::Right);
    const OneSided dm = one_sided_derivative(f, kt, Side::Left);
    GapCheck gc;
    gc.t0 = kt;
    gc.gap = dp.value - dm.value;
    gc.error = dp.error + dm.error;
    const double gtol = tol.abs + tol.rel * (std::abs(dp.value) + std::abs(dm.value));
    gc.violation = (gc.gap < -gtol) && (gc.error < 0.1 * std::abs(gc.gap));
    out.gap_checks.push_back(gc);
  }

  out.violated = !out.violations.empty();
  for (const auto& gc : out.gap_checks)
    if (gc.violation) out.violated = true;
  return out;
}

LineScanResult convexity_scan(const EnergySpec& spec, const RankOneSegment& seg, int m,
                              const Tolerances& tol) {
  if (m < 64) throw InputError("convexity_scan: need at least 64 samples");
  if (spec.n != seg.F.dim()) throw InputError("convexity_scan: dimension mismatch");
  BranchCurves bc = track_branches(seg, m);
  std::vector<double> kinks;
  kinks.reserve(bc.crossings.size());
  for (const auto& cr : bc.crossings) kinks.push_back(cr.t);

  auto f = [&](double t) {
    try {
      return eval_W(spec, seg.at(t));
    } catch (const DomainError& e) {
      throw EvalError("energy evaluation failed at t=" + std::to_string(t) + ": " + e.what());
    }
  };
  ScalarScan ss = scan_scalar(f, seg.t_range, m, kinks, tol);

  LineScanResult out{seg, std::move(ss.violations), std::move(bc.crossings),
                     std::move(ss.gap_checks),
                     LineScanResult::Verdict::ConvexOnSegment};
  bool bad = !out.violations.empty();
  for (const auto& gc : out.gap_checks)
    if (gc.violation) bad = true;
  out.verdict = bad ? LineScanResult::Verdict::Violated : LineScanResult::Verdict::ConvexOnSegment;
  return out;
}

CrossingCheck verify_crossing_planar(const RankOneSegment& seg, double t0) {
  if (seg.F.dim() != 2) throw InputError("verify_crossing_planar: planar segments only");
  CrossingCheck out;
  const OrderedTuple s = singular_values(seg.at(t0));
  if (s[0] - s[1] > 1e-6 * std::max(1.0, s[0])) {
    out.note = "no singular-value coincidence at t0";
    return out;
  }
  out.applicable = true;
  auto lmax = [&](double t) { return sorted_sv_at(seg, t, 0); };
  auto lmin = [&](double t) { return sorted_sv_at(seg, t, 1); };
  out.d_minus_max = one_sided_derivative(lmax, t0, Side::Left).value;
  out.d_plus_max = one_sided_derivative(lmax, t0, Side::Right).value;
  out.d_minus_min = one_sided_derivative(lmin, t0, Side::Left).value;
  out.d_plus_min = one_sided_derivative(lmin, t0, Side::Right).value;
  out.eq_outer_resid = std::abs(out.d_minus_max - out.d_plus_min);
  out.eq_inner_resid = std::abs(out.d_plus_max - out.d_minus_min);
  out.ineq_slack = out.d_plus_max - out.d_minus_max;
  out.pass = out.eq_outer_resid <= 1e-6 && out.eq_inner_resid <= 1e-6 &&
             out.ineq_slack >= -1e-8;
  return out;
}

std::vector<SumRuleBlock> verify_sum_rules(const RankOneSegment& seg, double t0) {
  const OrderedTuple s = singular_values(seg.at(t0));
  std::vector<SumRuleBlock> out;
  for (const auto& [first, last] : equal_blocks_of(s, 1e-7)) {
    if (last == first) continue;
    SumRuleBlock blk;
    blk.lambda = s[first];
    blk.i_min = first;
    blk.i_max = last;
    for (int i = first; i <= last; ++i) {
      auto curve = [&, i](double t) { return sorted_sv_at(seg, t, i); };
      blk.d_minus.push_back(one_sided_derivative(curve, t0, Side::Left).value);
      blk.d_plus.push_back(one_sided_derivative(curve, t0, Side::Right).value);
    }
    blk.sum_minus = 0.0;
    blk.sum_plus = 0.0;
    double prefix = 0.0;
    blk.worst_prefix_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < blk.d_minus.size(); ++i) {
      blk.sum_minus += blk.d_minus[i];
      blk.sum_plus += blk.d_plus[i];
      prefix += blk.d_plus[i] - blk.d_minus[i];
      blk.worst_prefix_slack = std::min(blk.worst_prefix_slack, prefix);
    }
    blk.equality_resid = std::abs(blk.sum_minus - blk.sum_plus);
    blk.pass = blk.equality_resid <= 1e-6 && blk.worst_prefix_slack >= -1e-8;
    out.push_back(std::move(blk));
  }
  return out;
}

OrderedDotResult ordered_dot_check(std::span<const double> x, std::span<const double> b) {
  if (x.size() != b.size() || x.empty())
    throw InputError("ordered_dot_check: need equally sized nonempty vectors");
  OrderedDotResult out;
  double scale_x = 0.0, scale_b = 0.0;
  for (double v : x) scale_x += std::abs(v);
  for (double v : b) scale_b += std::abs(v);
  const double tol_x = 1e-12 * std::max(scale_x, 1.0);
  const double tol_b = 1e-12 * std::max(scale_b, 1.0);

  double prefix = 0.0;
  for (double v : x) {
    prefix += v;
    if (prefix < -tol_x) {
      out.note = "hypothesis failed: a prefix sum of x is negative";
      return out;
    }
  }
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    if (b[i] < b[i + 1] - tol_b) {
      out.note = "hypothesis failed: b is not weakly decreasing";
      return out;
    }
  }
  bool b_nonneg = true;
  for (double v : b)
    if (v < -tol_b) b_nonneg = false;
  const bool x_sums_zero = std::abs(prefix) <= tol_x;
  if (!b_nonneg && !x_sums_zero) {
    out.note = "hypothesis failed: neither b >= 0 nor sum(x) = 0";
    return out;
  }
  out.hypotheses_ok = true;
  if (b_nonneg) out.note = "b-nonnegative";
  if (x_sums_zero) out.note += (out.note.empty() ? "" : ",") + std::string("x-sums-to-zero");
  double dot = 0.0, dot_scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * b[i];
    dot_scale += std::abs(x[i] * b[i]);
  }
  out.value = dot;
  out.nonnegative = dot >= -(1e-10 + 1e-8 * dot_scale);
  return out;
}

Cso2ScanStats cso2_rank_one_scan(long trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("cso2_rank_one_scan: trials must be at least 1");
  Rng rng(seed);
  Cso2ScanStats stats;
  stats.trials = trials;
  stats.min_rel_smallest_sv = std::numeric_limits<double>::infinity();
  for (long k = 0; k < trials; ++k) {
    const double a = rng.uniform(0.5, 2.0);
    const double b = rng.uniform(0.5, 2.0);
    const double t1 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double t2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Matrix diff = b * planar_rotation(t2) - a * planar_rotation(t1);
    const double nd = frobenius_norm(diff);
    if (nd <= 1e-12 * (a + b)) {
      ++stats.zero_pairs;
      continue;
    }
    const OrderedTuple s = singular_values(diff);
    const double rel = s[1] / nd;
    stats.min_rel_smallest_sv = std::min(stats.min_rel_smallest_sv, rel);
    if (rel < 1e-8) ++stats.rank_one_hits;
  }
  return stats;
}

double midpoint_convexity_worst(const std::function<double(double)>& f, Interval range,
                                int samples) {
  if (samples < 2) throw InputError("midpoint_convexity_worst: need at least 2 samples");
  const double dt = range.length() / (samples - 1);
  std::vector<double> ts(static_cast<std::size_t>(samples));
  std::vector<double> fs(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    ts[static_cast<std::size_t>(i)] = range.lo + i * dt;
    fs[static_cast<std::size_t>(i)] = f(ts[static_cast<std::size_t>(i)]);
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i)
    for (int j = i + 1; j < samples; ++j) {
      const double mid = 0.5 * (ts[static_cast<std::size_t>(i)] + ts[static_cast<std::size_t>(j)]);
      const double defect =
          f(mid) - 0.5 * (fs[static_cast<std::size_t>(i)] + fs[static_cast<std::size_t>(j)]);
      worst = std::max(worst, defect);
    }
  return worst;
}

namespace {

RankOneSegment admissible_segment_through(const Matrix& f, Rng& rng, Interval t_range) {
  std::vector<double> xi = rng.unit_vector(f.dim());
  const std::vector<double> eta = rng.unit_vector(f.dim());
  const Matrix finv = inverse(f);
  double c = 0.0;
  for (int i = 0; i < f.dim(); ++i) {
    double fx = 0.0;
    for (int j = 0; j < f.dim(); ++j) fx += finv(i, j) * xi[static_cast<std::size_t>(j)];
    c += eta[static_cast<std::size_t>(i)] * fx;
  }
  const double reach = std::max(std::abs(t_range.lo), std::abs(t_range.hi));
  if (std::abs(c) * reach > 0.6) {
    const double shrink = 0.6 / (std::abs(c) * reach);
    for (auto& v : xi) v *= shrink;
  }
  return make_segment_from(f, xi, eta, t_range);
}

}  // namespace

EngineeredCrossing engineered_planar_crossing(std::uint64_t seed) {
  Rng rng(seed);
  const double c = std::exp(rng.uniform(-0.5, 0.5));
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Matrix f = c * planar_rotation(theta);
  return EngineeredCrossing{admissible_segment_through(f, rng, {-0.4, 0.4}), 0.0};
}

EngineeredCrossing engineered_repeated_point(std::uint64_t seed, int n) {
  Rng rng(seed);
  // Multiplicity pattern: d distinct values with d < n guarantees at
  // least one repeated block.
  const int d = 1 + static_cast<int>(rng.uniform() * (n - 1));
  std::vector<int> mult(static_cast<std::size_t>(d), 1);
  for (int extra = 0; extra < n - d; ++extra)
    ++mult[static_cast<std::size_t>(rng.uniform() * d)];
  std::vector<double> values;
  double v = 2.0 * std::exp(rng.uniform(-0.2, 0.2));
  for (int k = 0; k < d; ++k) {
    for (int r = 0; r < mult[static_cast<std::size_t>(k)]; ++r) values.push_back(v);
    v *= rng.uniform(0.45, 0.7);
  }
  const Matrix f = rng.rotation(n) * Matrix::diagonal(values) * transpose(rng.rotation(n));
  return EngineeredCrossing{admissible_segment_through(f, rng, {-0.4, 0.4}), 0.0};
}

}  // namespace roc
