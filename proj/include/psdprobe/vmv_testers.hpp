#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "psdprobe/constants.hpp"
#include "psdprobe/kernels.hpp"
#include "psdprobe/oracle.hpp"
#include "psdprobe/verdict.hpp"

namespace psdprobe {

struct OjaStep {
  Vector x_next;
  double s = 0.0;    // gᵀAx
  double gAg = 0.0;  // gᵀAg, feeds the incremental f update
};

// One step x ← x − η(gᵀAx)g. Two queries: gᵀAx and gᵀAg.
OjaStep oja_step(const VmvOracle& op, const Vector& x, double eta, const Vector& g);
OjaStep oja_step(const VmvOracle& op, const Vector& x, double eta, Rng& rng);

// f(x − η s g) given f(x): f − η s² (2 − η gᵀAg).
inline double oja_f_update(double f, double eta, double s, double gAg) {
  return f - eta * s * s * (2.0 - eta * gAg);
}

struct OjaConfig {
  double eta = 0.0;        // > 0 fixes the step size and skips the scale search
  int max_iters = 0;       // 0: ceil(iter_const·ln(1/eps)/eps)
  int eta_scales = 0;      // 0: ceil(log2(m²))
  int amplification = 20;
  double kappa_m = 8.0;    // reduced dimension m = min(d, ceil(kappa_m/eps))
  double step_const = 1.0;
  double iter_const = 2.0;
  bool reduce = true;
  double norm_hint = 0.0;  // > 0: known ‖A‖₁ scale, no scale estimate

  static OjaConfig from_constants(const Constants& c);
};

// Worst-case query count of oja_l1_tester for a given configuration.
std::int64_t oja_budget(Index d, double eps, const OjaConfig& cfg);

// Maintained f values of a single fixed-η run (for descent checks).
std::vector<double> oja_trace(const VmvOracle& op, Vector x, double eta, int iters, Rng& rng);

Verdict oja_l1_tester(const VmvOracle& op, double eps, const OjaConfig& cfg, std::uint64_t seed);

// Gaussian sketch with N(0, 1/d) entries, the reduction of the ℓ1 tester.
std::unique_ptr<SketchedOperator> sketch_reduce(const VmvOracle& op, Index m, std::uint64_t seed);

double lp_to_l1_eps(double eps, double p, Index d);

struct SketchState {
  Index k = 0;
  Matrix G;
  Matrix S;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double lambda_min = 0.0;
  std::int64_t queries = 0;
};

Index sketch_dim(double eps, double kappa);
SketchState build_sketch(const VmvOracle& op, Index k, std::uint64_t seed,
                         const Constants& c = Constants{});
double gamma_statistic(double alpha, double lmin, double beta, Index k);

Verdict bilinear_sketch_tester(const VmvOracle& op, double eps, double c_psd, std::uint64_t seed,
                               const Constants& c = Constants{});

Verdict adaptive_l2_tester(const VmvOracle& op, double eps, std::uint64_t seed,
                           const Constants& c = Constants{});

Index nonadaptive_l1_dim(double eps, double kappa, Index d);
Verdict nonadaptive_l1_tester(const VmvOracle& op, double eps, std::uint64_t seed,
                              const Constants& c = Constants{});
// Fixed sketch size and repetition count (used by scaling sweeps).
Verdict nonadaptive_l1_sized(const VmvOracle& op, Index m, int reps, std::uint64_t seed);

}  // namespace psdprobe
