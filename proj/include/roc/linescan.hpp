#ifndef ROC_LINESCAN_HPP
#define ROC_LINESCAN_HPP

// Brute-force rank-one convexity oracle and structural checks on
// singular-value curves along rank-one lines: branch tracking with
// crossing refinement, second-difference scanning away from crossings,
// one-sided derivative gap tests at crossings, block sum rules at
// repeated singular values, and the CSO(2) rank-one scan.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "roc/criteria.hpp"
#include "roc/energymodel.hpp"
#include "roc/smallmat.hpp"

namespace roc {

struct Crossing {
  double t = 0.0;        // refined time of minimal gap
  int upper = 0;         // sorted-curve index i meeting i+1
  double gap = 0.0;      // refined minimal gap between the two curves
  bool exchange = false; // analytic curves swap order across t
  bool ambiguous = false;
};

struct BranchCurves {
  int n = 0;
  std::vector<double> times;
  // values[k][b]: branch b at times[k]. Branch labels follow the
  // analytic continuation: sorted curves relabel across an exchange.
  std::vector<std::array<double, kMaxDim>> values;
  std::vector<Crossing> crossings;
  bool matching_ambiguous = false;
};

// Samples the singular values of F + tH at m+1 times, matches branches
// between consecutive samples by the minimal total-displacement
// assignment (ties flagged as ambiguous), locates crossing candidates
// where two curves come within 10*|H|*(range)/m, and refines each
// candidate by interval shrinking on the curve difference.
BranchCurves track_branches(const RankOneSegment& seg, int m);

enum class Side { Left, Right };

struct OneSided {
  double value = 0.0;
  double error = 0.0;  // extrapolation + rounding estimate
};

// One-sided derivative by Richardson extrapolation of one-sided
// difference quotients at steps h, h/2, h/4.
OneSided one_sided_derivative(const std::function<double(double)>& f, double t0, Side side);

struct Violation {
  double t = 0.0;
  double value = 0.0;  // second difference divided by h^2
};

struct GapCheck {
  double t0 = 0.0;
  double gap = 0.0;    // d+ - d-
  double error = 0.0;  // combined one-sided error estimate
  bool violation = false;
};

struct ScalarScan {
  std::vector<Violation> violations;
  std::vector<GapCheck> gap_checks;
  bool violated = false;
};

// Convexity scan of a scalar function: second differences at interior
// samples outside a 4*(range)/m band around each kink; one-sided gap
// tests at the kinks. A gap violation requires the derivative error
// estimate to stay below 10% of the gap magnitude.
ScalarScan scan_scalar(const std::function<double(double)>& f, Interval range, int m,
                       std::span<const double> kinks, const Tolerances& tol = {});

struct LineScanResult {
  RankOneSegment segment;
  std::vector<Violation> violations;  // second-difference violations
  std::vector<Crossing> crossings;
  std::vector<GapCheck> gap_checks;
  enum class Verdict { ConvexOnSegment, Violated } verdict = Verdict::ConvexOnSegment;
};

// Scans t -> W(F + tH): branch tracking supplies the crossing times,
// which are excluded from the second-difference test and handled by the
// one-sided gap test instead.
LineScanResult convexity_scan(const EnergySpec& spec, const RankOneSegment& seg, int m,
                              const Tolerances& tol = {});

struct CrossingCheck {
  bool applicable = false;
  std::string note;
  double d_minus_max = 0.0, d_plus_max = 0.0;
  double d_minus_min = 0.0, d_plus_min = 0.0;
  double eq_outer_resid = 0.0;  // |d- max - d+ min|
  double eq_inner_resid = 0.0;  // |d+ max - d- min|
  double ineq_slack = 0.0;      // d+ max - d- max
  bool pass = false;            // equalities within 1e-6, inequality >= -1e-8
};

// Planar crossing identities: the one-sided derivatives of the ordered
// singular values swap pairwise at a crossing, and the exchanged slope
// dominates.
CrossingCheck verify_crossing_planar(const RankOneSegment& seg, double t0);

struct SumRuleBlock {
  double lambda = 0.0;
  int i_min = 0, i_max = 0;  // 0-based inclusive block indices
  std::vector<double> d_minus, d_plus;
  double sum_minus = 0.0, sum_plus = 0.0;
  double equality_resid = 0.0;      // |sum- minus sum+|, tolerance 1e-6
  double worst_prefix_slack = 0.0;  // min over k of prefix(d+) - prefix(d-), slack -1e-8
  bool pass = false;
};

// Block sum rules at a repeated singular value: within each repeated
// block the one-sided derivative sums agree and every prefix of the
// right derivatives dominates the left ones.
std::vector<SumRuleBlock> verify_sum_rules(const RankOneSegment& seg, double t0);

struct OrderedDotResult {
  bool hypotheses_ok = false;
  std::string note;  // which hypothesis applied or failed
  double value = 0.0;
  bool nonnegative = false;
};

// For x with nonnegative prefix sums and weakly decreasing b with
// either b >= 0 or sum(x) = 0, the dot product x.b is nonnegative.
OrderedDotResult ordered_dot_check(std::span<const double> x, std::span<const double> b);

struct Cso2ScanStats {
  long trials = 0;
  long rank_one_hits = 0;  // pairs whose difference was numerically rank one
  long zero_pairs = 0;     // identical draws (difference ~ 0)
  double min_rel_smallest_sv = 0.0;
};

// Random pairs Z1 = a R(t1), Z2 = b R(t2) in CSO(2): the difference is
// conformal again, so its smallest singular value stays a fixed
// fraction of its norm and rank-one differences never occur.
Cso2ScanStats cso2_rank_one_scan(long trials, std::uint64_t seed);

// Worst positive midpoint-convexity defect f((a+b)/2) - (f(a)+f(b))/2
// over all sample pairs from a uniform grid; <= 0 for convex f.
double midpoint_convexity_worst(const std::function<double(double)>& f, Interval range,
                                int samples);

struct EngineeredCrossing {
  RankOneSegment seg;
  double t0 = 0.0;
};

// Planar segment through a conformal matrix at t0 = 0.
EngineeredCrossing engineered_planar_crossing(std::uint64_t seed);
// Segment through a matrix with a repeated singular-value block at t0 = 0.
EngineeredCrossing engineered_repeated_point(std::uint64_t seed, int n);

}  // namespace roc

#endif
