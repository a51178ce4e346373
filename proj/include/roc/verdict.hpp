#ifndef ROC_VERDICT_HPP
#define ROC_VERDICT_HPP

// Orchestrates the grid criterion and the rank-one line-scan oracle
// into a single verdict with a machine-readable report. Reports are
// deterministic for fixed (energy, config, seeds) and are written
// atomically.

#include <optional>
#include <string>

#include "json.hpp"
#include "roc/criteria.hpp"
#include "roc/linescan.hpp"

namespace roc {

inline constexpr const char* kToolName = "roc";
inline constexpr const char* kToolVersion = "0.1.0";

enum class Status { CriterionPassed, Refuted, Inconclusive };
std::string to_string(Status s);

struct OracleConfig {
  long segments = 1000;
  int samples = 512;
  std::uint64_t seed = 42;
  double scale = 1.0;  // size of the sampled deformation gradients
};

struct CheckConfig {
  GridSpec grid;
  OracleConfig oracle;
  Tolerances tol;
  int lh_dirs = 64;
  void validate() const;
};

struct Witness {
  Matrix F{2};
  std::vector<double> xi, eta;
  Interval t_range{0.0, 1.0};
  double t = 0.0;
  double value = 0.0;
  std::string kind;  // "second-difference" or "one-sided-gap"
  std::uint64_t segment_seed = 0;
};

struct OracleSummary {
  long segments_run = 0;
  long violating_segments = 0;
  long errored_segments = 0;
  long crossings_checked = 0;
  long second_difference_violations = 0;
  long gap_violations = 0;
};

struct Verdict {
  Status status = Status::Inconclusive;
  std::string reason;
  CriterionReport criterion;
  OracleSummary oracle;
  std::optional<Witness> witness;
};

// Runs grid_check and the seeded segment oracle. Refuted requires a
// replayable witness; criterion_passed requires a clean oracle, a
// complete grid pass and a regularity claim matching the theorem
// hypothesis for the dimension. Everything else is inconclusive, with
// the failing condition and location in the reason.
Verdict check_rank_one_convexity(const EnergySpec& spec, const CheckConfig& config);

// Deterministic reproduction of a recorded violation.
LineScanResult replay(const EnergySpec& spec, const Witness& witness, int samples,
                      const Tolerances& tol);

// Serializable description of an energy, embedded in every report so a
// witness can be replayed from the file alone.
struct EnergyConfig {
  std::string zoo_name;  // empty for expression-backed energies
  std::string ghat;
  std::string hhat;
  std::string f;
  int n = 2;
  std::optional<Regularity> regularity;

  EnergySpec build() const;
};

nlohmann::json to_json(const EnergyConfig& cfg);
EnergyConfig energy_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CheckConfig& cfg);
CheckConfig check_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Witness& w);
Witness witness_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LineScanResult& res);

// Full report: energy, dimension, config, criterion conditions, oracle
// summary, verdict, optional witness, provenance.
nlohmann::json report_json(const Verdict& v, const EnergyConfig& energy,
                           const CheckConfig& config);

// Temp-file plus rename.
void write_json_atomic(const nlohmann::json& j, const std::string& path);

}  // namespace roc

#endif
