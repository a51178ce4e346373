#ifndef ROC_CRITERIA_HPP
#define ROC_CRITERIA_HPP

// Pointwise and grid-swept ellipticity criteria for isotropic energies:
// Baker-Ericksen margins, the classical planar five-condition check,
// its reduced four-condition form on strictly ordered points, direct
// sampling of the rank-one quadratic form, and the partial-derivative
// ordering check inside repeated singular-value blocks.

#include <cstdint>
#include <string>
#include <vector>

#include "roc/energymodel.hpp"
#include "roc/smallmat.hpp"

namespace roc {

struct Tolerances {
  double abs = 1e-10;
  double rel = 1e-8;
  double bound(double scale) const { return abs + rel * scale; }
  bool pass(double value, double scale) const { return value >= -bound(scale); }
};

// One inequality evaluated at one point. The condition is satisfied iff
// value >= -(tol.abs + tol.rel * scale), where scale is the sum of the
// absolute values of the terms entering the margin.
struct ConditionMargin {
  std::string id;      // BE, KS-i..KS-v, RED-i..RED-iv, ORD, LH
  std::string detail;  // sub-inequality or index pair
  double value = 0.0;
  double scale = 0.0;
  std::vector<double> point;
  bool pass(const Tolerances& tol) const { return tol.pass(value, scale); }
};

enum class PointStatus { Ok, NotApplicable };

struct PointCheck {
  PointStatus status = PointStatus::Ok;
  std::string note;
  std::vector<ConditionMargin> margins;
  bool all_pass(const Tolerances& tol) const {
    for (const auto& m : margins)
      if (!m.pass(tol)) return false;
    return status == PointStatus::Ok;
  }
};

// Margins l_i g_i - l_j g_j for strictly ordered pairs i < j. Pairs with
// equal entries are skipped here; they belong to partial_order_check.
std::vector<ConditionMargin> baker_ericksen(const EnergySpec& spec, const OrderedTuple& s);

// The five planar conditions at (l1, l2) with l1 >= l2 > 0. On the
// diagonal (l1 == l2) conditions {i, iii, v} apply and require a
// c2-closure claim; otherwise {i, ii, iv, v}. A negative product
// g11*g22 is clamped to zero under the square root; the sign failure
// is carried by the condition-i margins.
PointCheck knowles_sternberg_point(const EnergySpec& spec, double l1, double l2);

// The reduced four-condition criterion at strictly ordered points;
// the diagonal-only condition is omitted. l1 <= l2 is an input error.
std::vector<ConditionMargin> reduced_ks_point(const EnergySpec& spec, double l1, double l2);

// Margins g_i - g_{i+1} for consecutive indices inside each repeated
// block of s. Empty when all entries are simple.
std::vector<ConditionMargin> partial_order_check(const EnergySpec& spec, const OrderedTuple& s);

struct GridSpec {
  double lo = 1e-2;
  double hi = 1e2;
  int points_per_axis = 64;
  double min_gap = 1e-3;    // relative exclusion band around the diagonal
  double ratio_cap = 1e4;   // max l1/ln
  void validate() const;
};

struct WorstMargin {
  std::string id;
  std::string detail;
  double value = 0.0;
  double scale = 0.0;
  std::vector<double> point;
  bool pass = false;
};

struct CriterionReport {
  bool passed = false;
  std::string method;  // "reduced-knowles-sternberg" or "lh-sampling"
  std::vector<WorstMargin> worst;
  long points_total = 0;
  long points_evaluated = 0;
  long points_errored = 0;
  double completeness = 1.0;
  std::vector<std::string> errors;  // first few evaluation errors
  std::vector<std::string> notes;
  GridSpec grid;
  Tolerances tol;
};

// Sweeps the reduced criterion (n = 2) or rank-one quadratic-form
// sampling on diagonal matrices with simple singular values (n >= 3)
// over a log-spaced grid, plus the partial-derivative ordering check at
// a few diagonal points. A pass is evidence on the grid, not a proof.
CriterionReport grid_check(const EnergySpec& spec, const GridSpec& grid = {},
                           const Tolerances& tol = {});

struct LhSample {
  bool applicable = true;
  std::string note;
  double min_value = 0.0;
  double scale = 0.0;  // |W(F)|, for tolerance scaling
  std::vector<double> worst_xi, worst_eta;
};

// Minimum of the sampled second difference (W(F+hH) - 2W(F) + W(F-hH))/h^2
// over n_dirs quasi-uniform unit direction pairs plus the 2n^2
// axis-aligned pairs. Requires simple singular values at F (relative
// gap > 1e-6); otherwise returns not-applicable.
LhSample lh_sample_at(const EnergySpec& spec, const Matrix& F, int n_dirs, std::uint64_t seed);

}  // namespace roc

#endif
