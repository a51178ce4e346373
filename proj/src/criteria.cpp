#include "roc/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace roc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kLhStep = std::pow(kEps, 0.2);
constexpr double kSimpleGapTol = 1e-6;  // relative gap defining "simple" singular values

std::vector<double> point_of(const OrderedTuple& s) {
  return std::vector<double>(s.values().begin(), s.values().end());
}

// Gathers repeated-value blocks [first, last] using a relative tolerance.
std::vector<std::pair<int, int>> equal_blocks(const OrderedTuple& s, double rel_tol) {
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

void GridSpec::validate() const {
  if (!(lo > 0.0) || !(hi > lo)) throw InputError("grid: need 0 < lo < hi");
  if (points_per_axis < 2) throw InputError("grid: points_per_axis must be at least 2");
  if (!(min_gap > 0.0)) throw InputError("grid: min_gap must be positive");
  if (!(ratio_cap > 1.0)) throw InputError("grid: ratio_cap must exceed 1");
}

std::vector<ConditionMargin> baker_ericksen(const EnergySpec& spec, const OrderedTuple& s) {
  const GradArray g = gradient_at(spec, s);
  std::vector<ConditionMargin> out;
  for (int i = 0; i < s.dim(); ++i) {
    for (int j = i + 1; j < s.dim(); ++j) {
      if (!(s[i] > s[j])) continue;  // equal pairs belong to partial_order_check
      const double a = s[i] * g[static_cast<std::size_t>(i)];
      const double b = s[j] * g[static_cast<std::size_t>(j)];
      out.push_back(ConditionMargin{
          "BE", "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")", a - b,
          std::abs(a) + std::abs(b), point_of(s)});
    }
  }
  return out;
}

namespace {

struct PlanarDerivs {
  double g1, g2, g11, g22, g12;
  double sqrt_term;  // sqrt(max(g11*g22, 0)); negative products clamp to 0
};

PlanarDerivs planar_derivs(const EnergySpec& spec, const OrderedTuple& s) {
  const DerivativeBundle d = derivatives_at(spec, s, true);
  PlanarDerivs p{};
  p.g1 = d.grad[0];
  p.g2 = d.grad[1];
  p.g11 = d.hess[0][0];
  p.g22 = d.hess[1][1];
  p.g12 = d.hess[0][1];
  p.sqrt_term = std::sqrt(std::max(p.g11 * p.g22, 0.0));
  return p;
}

ConditionMargin margin2(const std::string& id, const std::string& detail, double value,
                        double scale, const OrderedTuple& s) {
  return ConditionMargin{id, detail, value, scale, point_of(s)};
}

}  // namespace

PointCheck knowles_sternberg_point(const EnergySpec& spec, double l1, double l2) {
  if (spec.n != 2) throw InputError("knowles_sternberg_point: planar energies only");
  if (!(l2 > 0.0) || l1 < l2)
    throw InputError("knowles_sternberg_point: need l1 >= l2 > 0");
  const bool equal = (l1 - l2) <= 1e-12 * l1;
  PointCheck out;
  if (equal && spec.regularity != Regularity::C2Closure) {
    out.status = PointStatus::NotApplicable;
    out.note =
        "repeated singular value: the diagonal conditions need second derivatives there, "
        "which requires a c2-closure regularity claim";
    return out;
  }
  const double sv[2] = {l1, l2};
  const OrderedTuple s(std::span<const double>(sv, 2));
  const PlanarDerivs d = planar_derivs(spec, s);

  out.margins.push_back(margin2("KS-i", "g11", d.g11, std::abs(d.g11), s));
  out.margins.push_back(margin2("KS-i", "g22", d.g22, std::abs(d.g22), s));
  if (!equal) {
    const double be = (l1 * d.g1 - l2 * d.g2) / (l1 - l2);
    out.margins.push_back(margin2(
        "KS-ii", "", be, (std::abs(l1 * d.g1) + std::abs(l2 * d.g2)) / (l1 - l2), s));
    const double diff = (d.g1 - d.g2) / (l1 - l2);
    out.margins.push_back(margin2("KS-iv", "", d.sqrt_term + d.g12 + diff,
                                  d.sqrt_term + std::abs(d.g12) + std::abs(diff), s));
  } else {
    out.margins.push_back(margin2("KS-iii", "first", d.g11 - d.g12 + d.g1 / l1,
                                  std::abs(d.g11) + std::abs(d.g12) + std::abs(d.g1 / l1), s));
    out.margins.push_back(margin2("KS-iii", "second", d.g22 - d.g12 + d.g2 / l2,
                                  std::abs(d.g22) + std::abs(d.g12) + std::abs(d.g2 / l2), s));
  }
  const double sum = (d.g1 + d.g2) / (l1 + l2);
  out.margins.push_back(margin2("KS-v", "", d.sqrt_term - d.g12 + sum,
                                d.sqrt_term + std::abs(d.g12) + std::abs(sum), s));
  return out;
}

std::vector<ConditionMargin> reduced_ks_point(const EnergySpec& spec, double l1, double l2) {
  if (spec.n != 2) throw InputError("reduced_ks_point: planar energies only");
  if (!(l2 > 0.0) || !(l1 > l2))
    throw InputError("reduced_ks_point: need strictly ordered l1 > l2 > 0");
  const double sv[2] = {l1, l2};
  const OrderedTuple s(std::span<const double>(sv, 2));
  const PlanarDerivs d = planar_derivs(spec, s);

  std::vector<ConditionMargin> out;
  out.push_back(margin2("RED-i", "g11", d.g11, std::abs(d.g11), s));
  out.push_back(margin2("RED-i", "g22", d.g22, std::abs(d.g22), s));
  const double be = (l1 * d.g1 - l2 * d.g2) / (l1 - l2);
  out.push_back(
      margin2("RED-ii", "", be, (std::abs(l1 * d.g1) + std::abs(l2 * d.g2)) / (l1 - l2), s));
  const double diff = (d.g1 - d.g2) / (l1 - l2);
  out.push_back(margin2("RED-iii", "", d.sqrt_term + d.g12 + diff,
                        d.sqrt_term + std::abs(d.g12) + std::abs(diff), s));
  const double sum = (d.g1 + d.g2) / (l1 + l2);
  out.push_back(margin2("RED-iv", "", d.sqrt_term - d.g12 + sum,
                        d.sqrt_term + std::abs(d.g12) + std::abs(sum), s));
  return out;
}

std::vector<ConditionMargin> partial_order_check(const EnergySpec& spec, const OrderedTuple& s) {
  const GradArray g = gradient_at(spec, s);
  std::vector<ConditionMargin> out;
  for (const auto& [first, last] : equal_blocks(s, 1e-12)) {
    if (last == first) continue;
    for (int i = first; i < last; ++i) {
      const double a = g[static_cast<std::size_t>(i)];
      const double b = g[static_cast<std::size_t>(i + 1)];
      out.push_back(ConditionMargin{
          "ORD", "(" + std::to_string(i + 1) + "," + std::to_string(i + 2) + ")", a - b,
          std::abs(a) + std::abs(b), point_of(s)});
    }
  }
  return out;
}

LhSample lh_sample_at(const EnergySpec& spec, const Matrix& F, int n_dirs, std::uint64_t seed) {
  if (F.dim() != spec.n) throw InputError("lh_sample_at: dimension mismatch");
  const int n = F.dim();
  const Svd dec = svd_ordered(F);
  if (!dec.det_positive) throw DomainError("lh_sample_at: det F must be positive");
  LhSample out;
  for (int i = 0; i + 1 < n; ++i) {
    if (dec.s[i] - dec.s[i + 1] <= kSimpleGapTol * dec.s[0]) {
      out.applicable = false;
      out.note = "F has non-simple singular values (relative gap below 1e-6); the quadratic "
                 "form may not exist there";
      return out;
    }
  }

  const double w0 = spec.ghat(dec.s);
  out.scale = std::abs(w0);
  out.min_value = std::numeric_limits<double>::infinity();
  const double fnorm = frobenius_norm(F);
  // Step limited by the distance to the GL+ boundary so F +/- hH stays
  // admissible for any unit rank-one H.
  const double h = std::min(kLhStep * (1.0 + fnorm), 0.5 * dec.s[n - 1]);

  auto probe = [&](std::span<const double> xi, std::span<const double> eta) {
    const Matrix H = outer(xi, eta);
    const Matrix fp = F + h * H;
    const Matrix fm = F + (-h) * H;
    const double wp = eval_W(spec, fp);
    const double wm = eval_W(spec, fm);
    const double value = (wp - 2.0 * w0 + wm) / (h * h);
    if (value < out.min_value) {
      out.min_value = value;
      out.worst_xi.assign(xi.begin(), xi.end());
      out.worst_eta.assign(eta.begin(), eta.end());
    }
  };

  std::vector<double> ei(static_cast<std::size_t>(n), 0.0);
  std::vector<double> ej(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    ei[static_cast<std::size_t>(i)] = 1.0;
    for (int j = 0; j < n; ++j) {
      for (double sgn : {1.0, -1.0}) {
        ej[static_cast<std::size_t>(j)] = sgn;
        probe(ei, ej);
        ej[static_cast<std::size_t>(j)] = 0.0;
      }
    }
    ei[static_cast<std::size_t>(i)] = 0.0;
  }
  Rng rng(seed);
  for (int k = 0; k < n_dirs; ++k) {
    const std::vector<double> xi = rng.unit_vector(n);
    const std::vector<double> eta = rng.unit_vector(n);
    probe(xi, eta);
  }
  return out;
}

namespace {

struct WorstFold {
  std::map<std::string, WorstMargin> by_id;
  void add(const ConditionMargin& m, const Tolerances& tol) {
    auto it = by_id.find(m.id);
    if (it == by_id.end() || m.value < it->second.value) {
      by_id[m.id] = WorstMargin{m.id, m.detail, m.value, m.scale, m.point, m.pass(tol)};
    }
  }
};

std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < count; ++i)
    v[static_cast<std::size_t>(i)] =
        lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  return v;
}

void record_error(CriterionReport& rep, const std::exception& e) {
  ++rep.points_errored;
  if (rep.errors.size() < 8) rep.errors.emplace_back(e.what());
}

// Enumerates strictly decreasing index combinations of the axis grid.
template <typename Fn>
void for_each_decreasing_tuple(const std::vector<double>& axis, int n, const GridSpec& grid,
                               Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::vector<double> vals(static_cast<std::size_t>(n));
  const int p = static_cast<int>(axis.size());
  // idx strictly increasing; values taken in reverse (descending).
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    bool ok = true;
    for (int i = 0; i < n; ++i)
      vals[static_cast<std::size_t>(i)] =
          axis[static_cast<std::size_t>(p - 1 - idx[static_cast<std::size_t>(i)])];
    for (int i = 0; i + 1 < n && ok; ++i)
      if (vals[static_cast<std::size_t>(i)] - vals[static_cast<std::size_t>(i + 1)] <
          grid.min_gap * vals[0])
        ok = false;
    if (ok && vals[0] / vals[static_cast<std::size_t>(n - 1)] <= grid.ratio_cap) fn(vals);
    int k = n - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == p - n + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int i = k + 1; i < n; ++i)
      idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }
}

}  // namespace

CriterionReport grid_check(const EnergySpec& spec, const GridSpec& grid, const Tolerances& tol) {
  grid.validate();
  CriterionReport rep;
  rep.grid = grid;
  rep.tol = tol;
  rep.method = (spec.n == 2) ? "reduced-knowles-sternberg" : "lh-sampling";
  rep.notes.push_back(
      "simple singular values are a tolerance-based proxy: the grid excludes a relative band "
      "of width min_gap around the diagonal, and lh sampling requires relative gaps above 1e-6");

  WorstFold fold;
  const std::vector<double> axis = log_spaced(grid.lo, grid.hi, grid.points_per_axis);

  if (spec.n == 2) {
    for (std::size_t a = 0; a < axis.size(); ++a) {
      for (std::size_t b = 0; b < axis.size(); ++b) {
        const double l1 = axis[a], l2 = axis[b];
        if (!(l1 > l2)) continue;
        if (l1 - l2 < grid.min_gap * l1) continue;
        if (l1 / l2 > grid.ratio_cap) continue;
        ++rep.points_total;
        try {
          for (const auto& m : reduced_ks_point(spec, l1, l2)) fold.add(m, tol);
          ++rep.points_evaluated;
        } catch (const std::exception& e) {
          record_error(rep, e);
        }
      }
    }
  } else {
    long index = 0;
    for_each_decreasing_tuple(axis, spec.n, grid, [&](const std::vector<double>& vals) {
      ++rep.points_total;
      ++index;
      try {
        const Matrix f = Matrix::diagonal(vals);
        const LhSample lh = lh_sample_at(spec, f, 64, 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(index));
        if (!lh.applicable) throw EvalError("lh sampling not applicable: " + lh.note);
        fold.add(ConditionMargin{"LH", "", lh.min_value, lh.scale, vals}, tol);
        ++rep.points_evaluated;
      } catch (const std::exception& e) {
        record_error(rep, e);
      }
    });
  }

  // Partial-derivative ordering along the diagonal; the grid proper
  // excludes it, but the ordering margins extend the evidence to the
  // cone boundary.
  for (double c : log_spaced(grid.lo, grid.hi, 9)) {
    std::vector<double> diag(static_cast<std::size_t>(spec.n), c);
    ++rep.points_total;
    try {
      const OrderedTuple s{std::span<const double>(diag.data(), diag.size())};
      for (const auto& m : partial_order_check(spec, s)) fold.add(m, tol);
      ++rep.points_evaluated;
    } catch (const std::exception& e) {
      record_error(rep, e);
    }
  }

  rep.completeness = rep.points_total == 0
                         ? 0.0
                         : static_cast<double>(rep.points_evaluated) /
                               static_cast<double>(rep.points_total);
  rep.passed = rep.points_evaluated > 0;
  for (auto& [id, w] : fold.by_id) {
    rep.worst.push_back(w);
    if (!w.pass) rep.passed = false;
  }
  return rep;
}

}  // namespace roc
