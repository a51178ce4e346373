#include "roc/verdict.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace roc {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string point_str(const std::vector<double>& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    out += fmt_g(p[i]);
  }
  return out + ")";
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::CriterionPassed: return "criterion_passed";
    case Status::Refuted: return "refuted";
    case Status::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void CheckConfig::validate() const {
  grid.validate();
  if (oracle.segments < 1) throw InputError("oracle: segments must be at least 1");
  if (oracle.samples < 64) throw InputError("oracle: samples must be at least 64");
  if (!(oracle.scale > 0.0)) throw InputError("oracle: scale must be positive");
  if (lh_dirs < 1) throw InputError("lh_dirs must be at least 1");
}

Verdict check_rank_one_convexity(const EnergySpec& spec, const CheckConfig& config) {
  config.validate();
  if (spec.n < kMinDim || spec.n > kMaxDim)
    throw InputError("check: energy dimension out of range");

  Verdict v;
  v.criterion = grid_check(spec, config.grid, config.tol);

  // The oracle always runs as a cross-check, stopping at the first
  // witness; everything is seeded, so reruns reproduce it exactly.
  for (long i = 0; i < config.oracle.segments; ++i) {
    const std::uint64_t seed = config.oracle.seed + static_cast<std::uint64_t>(i);
    std::optional<RankOneSegment> seg;
    try {
      seg = make_segment(seed, spec.n, config.oracle.scale);
    } catch (const SamplingError&) {
      ++v.oracle.errored_segments;
      continue;
    }
    try {
      const LineScanResult res = convexity_scan(spec, *seg, config.oracle.samples, config.tol);
      ++v.oracle.segments_run;
      v.oracle.crossings_checked += static_cast<long>(res.gap_checks.size());
      v.oracle.second_difference_violations += static_cast<long>(res.violations.size());
      for (const auto& gc : res.gap_checks)
        if (gc.violation) ++v.oracle.gap_violations;
      if (res.verdict == LineScanResult::Verdict::Violated) {
        ++v.oracle.violating_segments;
        Witness w;
        w.F = seg->F;
        w.xi = seg->xi;
        w.eta = seg->eta;
        w.t_range = seg->t_range;
        w.segment_seed = seed;
        if (!res.violations.empty()) {
          w.t = res.violations.front().t;
          w.value = res.violations.front().value;
          w.kind = "second-difference";
        } else {
          for (const auto& gc : res.gap_checks)
            if (gc.violation) {
              w.t = gc.t0;
              w.value = gc.gap;
              w.kind = "one-sided-gap";
              break;
            }
        }
        v.witness = std::move(w);
        break;
      }
    } catch (const EvalError&) {
      ++v.oracle.errored_segments;
    }
  }

  if (v.witness) {
    v.status = Status::Refuted;
    v.reason = "oracle found a rank-one segment violating convexity (" + v.witness->kind +
               " = " + fmt_g(v.witness->value) + " at t = " + fmt_g(v.witness->t) +
               ", segment seed " + std::to_string(v.witness->segment_seed) + ")";
    return v;
  }

  const bool hypothesis_ok = (spec.n == 2) || (spec.regularity == Regularity::C2Closure);
  if (v.criterion.passed && v.criterion.completeness >= 1.0) {
    if (hypothesis_ok) {
      v.status = Status::CriterionPassed;
      v.reason = "all criterion margins are nonnegative on the grid and the oracle found no "
                 "violation; with the asserted " +
                 to_string(spec.regularity) +
                 " regularity this is grid evidence of rank-one convexity, not a proof";
    } else {
      v.status = Status::Inconclusive;
      v.reason = "criterion margins pass on the grid, but for n >= 3 the global conclusion "
                 "requires a c2-closure regularity claim (claimed: " +
                 to_string(spec.regularity) + ")";
    }
    return v;
  }

  v.status = Status::Inconclusive;
  if (!v.criterion.passed) {
    const WorstMargin* worst_fail = nullptr;
    bool noise_scale_only = true;
    for (const auto& w : v.criterion.worst) {
      if (w.pass) continue;
      if (!worst_fail || w.value < worst_fail->value) worst_fail = &w;
      if (w.value < -10.0 * v.criterion.tol.bound(w.scale)) noise_scale_only = false;
    }
    if (worst_fail && noise_scale_only) {
      v.reason = "criterion fails only at noise scale (within 10x tolerance of zero; worst " +
                 worst_fail->id + " = " + fmt_g(worst_fail->value) + " at " +
                 point_str(worst_fail->point) +
                 ") and the oracle found no violation: boundary case";
    } else if (worst_fail) {
      v.reason = "criterion fails (" + worst_fail->id + " = " + fmt_g(worst_fail->value) +
                 " at " + point_str(worst_fail->point) +
                 ") but the oracle found no violating segment within its budget";
    } else {
      v.reason = "criterion could not be evaluated anywhere on the grid";
    }
  } else {
    v.reason = "grid evaluation incomplete (completeness = " + fmt_g(v.criterion.completeness) +
               "); see recorded errors";
  }
  return v;
}

LineScanResult replay(const EnergySpec& spec, const Witness& witness, int samples,
                      const Tolerances& tol) {
  const RankOneSegment seg = make_segment_from(witness.F, witness.xi, witness.eta,
                                               witness.t_range);
  return convexity_scan(spec, seg, samples, tol);
}

EnergySpec EnergyConfig::build() const {
  if (!zoo_name.empty()) {
    ZooParams p;
    p.n = n;
    p.hhat = hhat;
    p.f = f;
    p.regularity = regularity;
    return zoo(zoo_name, p);
  }
  if (ghat.empty())
    throw InputError("energy config: need either a zoo name or a ghat expression");
  return energy_from_expression(ghat, n, regularity.value_or(Regularity::C2InteriorC1Closure));
}

nlohmann::json to_json(const EnergyConfig& cfg) {
  nlohmann::json j;
  if (!cfg.zoo_name.empty()) j["zoo"] = cfg.zoo_name;
  if (!cfg.ghat.empty()) j["ghat"] = cfg.ghat;
  if (!cfg.hhat.empty()) j["hhat"] = cfg.hhat;
  if (!cfg.f.empty()) j["f"] = cfg.f;
  j["n"] = cfg.n;
  if (cfg.regularity) j["regularity"] = to_string(*cfg.regularity);
  return j;
}

EnergyConfig energy_config_from_json(const nlohmann::json& j) {
  EnergyConfig cfg;
  cfg.zoo_name = j.value("zoo", "");
  cfg.ghat = j.value("ghat", "");
  cfg.hhat = j.value("hhat", "");
  cfg.f = j.value("f", "");
  cfg.n = j.value("n", 2);
  if (j.contains("regularity")) cfg.regularity = regularity_from_string(j.at("regularity"));
  return cfg;
}

nlohmann::json to_json(const CheckConfig& cfg) {
  return nlohmann::json{
      {"grid",
       {{"lo", cfg.grid.lo},
        {"hi", cfg.grid.hi},
        {"points_per_axis", cfg.grid.points_per_axis},
        {"min_gap", cfg.grid.min_gap},
        {"ratio_cap", cfg.grid.ratio_cap}}},
      {"oracle",
       {{"segments", cfg.oracle.segments},
        {"samples", cfg.oracle.samples},
        {"seed", cfg.oracle.seed},
        {"scale", cfg.oracle.scale}}},
      {"tolerances", {{"abs", cfg.tol.abs}, {"rel", cfg.tol.rel}}},
      {"lh_dirs", cfg.lh_dirs}};
}

CheckConfig check_config_from_json(const nlohmann::json& j) {
  CheckConfig cfg;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.grid.lo = g.value("lo", cfg.grid.lo);
    cfg.grid.hi = g.value("hi", cfg.grid.hi);
    cfg.grid.points_per_axis = g.value("points_per_axis", cfg.grid.points_per_axis);
    cfg.grid.min_gap = g.value("min_gap", cfg.grid.min_gap);
    cfg.grid.ratio_cap = g.value("ratio_cap", cfg.grid.ratio_cap);
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    cfg.oracle.segments = o.value("segments", cfg.oracle.segments);
    cfg.oracle.samples = o.value("samples", cfg.oracle.samples);
    cfg.oracle.seed = o.value("seed", cfg.oracle.seed);
    cfg.oracle.scale = o.value("scale", cfg.oracle.scale);
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tol.abs = t.value("abs", cfg.tol.abs);
    cfg.tol.rel = t.value("rel", cfg.tol.rel);
  }
  cfg.lh_dirs = j.value("lh_dirs", cfg.lh_dirs);
  return cfg;
}

nlohmann::json to_json(const Witness& w) {
  nlohmann::json jf = nlohmann::json::array();
  for (int i = 0; i < w.F.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < w.F.dim(); ++j) row.push_back(w.F(i, j));
    jf.push_back(row);
  }
  return nlohmann::json{{"F", jf},
                        {"xi", w.xi},
                        {"eta", w.eta},
                        {"t_range", {w.t_range.lo, w.t_range.hi}},
                        {"t", w.t},
                        {"value", w.value},
                        {"kind", w.kind},
                        {"segment_seed", w.segment_seed}};
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                    const std::string& path) {
  if (!j.contains(key))
    throw InputError("witness record: missing field '" + path + key + "'");
  return j.at(key);
}

}  // namespace

Witness witness_from_json(const nlohmann::json& j) {
  Witness w;
  const auto& jf = require_field(j, "F", "witness.");
  if (!jf.is_array() || jf.empty())
    throw InputError("witness record: field 'witness.F' must be a nonempty array of rows");
  const int n = static_cast<int>(jf.size());
  if (n < kMinDim || n > kMaxDim)
    throw InputError("witness record: dimension of 'witness.F' out of range");
  w.F = Matrix(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = jf.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw InputError("witness record: ragged row in 'witness.F'");
    for (int k = 0; k < n; ++k) {
      const auto& cell = row.at(static_cast<std::size_t>(k));
      if (!cell.is_number())
        throw InputError("witness record: non-numeric entry in 'witness.F[" +
                         std::to_string(i) + "][" + std::to_string(k) + "]'");
      w.F(i, k) = cell.get<double>();
    }
  }
  w.xi = require_field(j, "xi", "witness.").get<std::vector<double>>();
  w.eta = require_field(j, "eta", "witness.").get<std::vector<double>>();
  const auto& tr = require_field(j, "t_range", "witness.");
  if (!tr.is_array() || tr.size() != 2)
    throw InputError("witness record: 'witness.t_range' must be [lo, hi]");
  w.t_range = Interval{tr.at(0).get<double>(), tr.at(1).get<double>()};
  w.t = require_field(j, "t", "witness.").get<double>();
  w.value = j.value("value", 0.0);
  w.kind = j.value("kind", "");
  w.segment_seed = j.value("segment_seed", std::uint64_t{0});
  return w;
}

nlohmann::json to_json(const LineScanResult& res) {
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : res.violations) viol.push_back({{"t", v.t}, {"value", v.value}});
  nlohmann::json cross = nlohmann::json::array();
  for (const auto& c : res.crossings)
    cross.push_back({{"t", c.t},
                     {"upper", c.upper},
                     {"gap", c.gap},
                     {"exchange", c.exchange},
                     {"ambiguous", c.ambiguous}});
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : res.gap_checks)
    gaps.push_back(
        {{"t0", g.t0}, {"gap", g.gap}, {"error", g.error}, {"violation", g.violation}});
  return nlohmann::json{
      {"verdict", res.verdict == LineScanResult::Verdict::Violated ? "violated"
                                                                   : "convex_on_segment"},
      {"violations", viol},
      {"crossings", cross},
      {"gap_checks", gaps}};
}

nlohmann::json report_json(const Verdict& v, const EnergyConfig& energy,
                           const CheckConfig& config) {
  nlohmann::json worst = nlohmann::json::array();
  for (const auto& w : v.criterion.worst)
    worst.push_back({{"id", w.id},
                     {"detail", w.detail},
                     {"value", w.value},
                     {"scale", w.scale},
                     {"point", w.point},
                     {"pass", w.pass}});
  nlohmann::json j{
      {"energy", to_json(energy)},
      {"dimension", energy.n},
      {"config", to_json(config)},
      {"criterion",
       {{"passed", v.criterion.passed},
        {"method", v.criterion.method},
        {"completeness", v.criterion.completeness},
        {"points",
         {{"total", v.criterion.points_total},
          {"evaluated", v.criterion.points_evaluated},
          {"errored", v.criterion.points_errored}}},
        {"conditions", worst},
        {"errors", v.criterion.errors},
        {"notes", v.criterion.notes}}},
      {"oracle",
       {{"segments_run", v.oracle.segments_run},
        {"violating_segments", v.oracle.violating_segments},
        {"errored_segments", v.oracle.errored_segments},
        {"crossings_checked", v.oracle.crossings_checked},
        {"second_difference_violations", v.oracle.second_difference_violations},
        {"gap_violations", v.oracle.gap_violations}}},
      {"verdict", to_string(v.status)},
      {"reason", v.reason},
      {"provenance",
       {{"tool", kToolName},
        {"version", kToolVersion},
        {"seed", config.oracle.seed},
        {"grid", to_json(config).at("grid")},
        {"tolerances", {{"abs", config.tol.abs}, {"rel", config.tol.rel}}},
        {"regularity_claim",
         energy.regularity ? to_string(*energy.regularity) : std::string("default")},
        {"notes", v.criterion.notes}}}};
  if (v.witness) j["witness"] = to_json(*v.witness);
  return j;
}

void write_json_atomic(const nlohmann::json& j, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw EvalError("cannot open '" + tmp.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw EvalError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

}  // namespace roc
