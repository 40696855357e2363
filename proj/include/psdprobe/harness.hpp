#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psdprobe/constants.hpp"
#include "psdprobe/oracle.hpp"

namespace psdprobe {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TesterKind {
  oja_l1,
  bilinear_sketch,
  adaptive_l2,
  nonadaptive_l1,
  krylov,
  nonadaptive_mv,
  spectrum,
  spectrum_adaptive
};

std::string to_string(TesterKind t);
TesterKind parse_tester(const std::string& name);

enum class Truth { psd, far, gap };
std::string to_string(Truth t);

struct ExperimentConfig {
  TesterKind tester = TesterKind::oja_l1;
  InstanceDescriptor instance;
  double eps = 0.1;
  double p = 1.0;
  int trials = 10;
  std::uint64_t seed0 = 0;
  Constants constants;
  std::string output_path;
  std::string format = "csv";
  int spectrum_k = 1;
  bool timing = true;  // false writes wall_time_ms = 0 for byte-stable CSVs
  int threads = 0;     // 0: hardware concurrency

  void validate() const;
  static ExperimentConfig from_json(const std::string& text);
};

struct TrialRecord {
  std::uint64_t seed = 0;
  Truth truth = Truth::psd;
  bool verdict = true;  // is_psd for testers; guarantee held for spectrum
  std::int64_t queries_mv = 0;
  std::int64_t queries_vmv = 0;
  std::optional<double> statistic;
  std::optional<bool> witness_valid;
  double wall_time_ms = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::string summary_json;
};

// Exact label of an instance: far if λ_min <= −eps·‖A‖_p, PSD if λ_min is
// non-negative up to 1e-12·‖A‖_op, gap otherwise.
Truth ground_truth(const Matrix& A, double eps, double p);
Truth ground_truth_from_eigenvalues(const Vector& ev, double eps, double p);

TrialRecord run_trial(const ExperimentConfig& cfg, int index);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string records_csv(const std::vector<TrialRecord>& records);
// Writes <dir>/trials.csv (or trials.json) and <dir>/summary.json.
void write_outputs(const ExperimentResult& res, const std::string& dir, const std::string& format);

enum class CalibrationSuite {
  c_psd,
  kappa_sketch,
  kappa_oja,
  kappa_krylov,
  kappa_na,
  kappa_mv,
  embed_rows
};

CalibrationSuite parse_suite(const std::string& name);
std::string to_string(CalibrationSuite s);

struct CalibrationResult {
  Constants constants;
  std::string report_json;
  bool separated = true;
};

CalibrationResult calibrate(CalibrationSuite suite, std::uint64_t seed, int trials,
                            const Constants& base = Constants{});

struct ScalingRow {
  double eps = 0.0;
  Index d = 0;
  std::int64_t size = 0;    // tester's size parameter (N, m or k)
  std::int64_t budget = 0;  // queries at that size
  double success = 0.0;
};

struct ScalingTable {
  std::string tester;
  double p = 1.0;
  std::vector<ScalingRow> rows;
  std::optional<double> slope_eps;  // log budget vs log 1/ε
  std::optional<double> slope_d;    // log budget vs log d
  std::string to_csv() const;
  std::string to_json() const;
};

// Per (ε, d): least size whose far-instance rejection rate is >= target,
// found by doubling then bisection over shared instances and seeds.
ScalingTable scaling_report(TesterKind tester, double p, const std::vector<double>& eps_list,
                            const std::vector<Index>& d_list, int trials, std::uint64_t seed,
                            const Constants& c = Constants{}, double target = 0.9);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Parallel map over [0, n) with results merged by index.
template <class F>
void parallel_for(int n, int threads, F&& f);

}  // namespace psdprobe

#include "psdprobe/detail/parallel.hpp"
