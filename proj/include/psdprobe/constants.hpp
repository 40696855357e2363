#pragma once

#include <map>
#include <string>

namespace psdprobe {

// Every unnamed constant behind the testers. The defaults below are the
// values recorded in config/calibration.json by `psdprobe calibrate`.
struct Constants {
  // Oja ℓ1 tester: m = ceil(oja_kappa_m/eps), η = oja_step/L,
  // N = ceil(oja_iter·ln(1/eps)/eps).
  double oja_kappa_m = 8.0;
  double oja_step = 1.0;
  double oja_iter = 0.5;
  double oja_amplification = 20;

  // Bilinear sketch: k = ceil(kappa_sketch·eps⁻²·ln²(max(e,1/eps))).
  double kappa_sketch = 4.0;
  double c_psd = 0.46000523550826716;
  double c_far = 0.510272239052549;
  double trace_samples = 32;
  double trace_groups = 5;
  double frob_fail = 0.01;

  // Adaptive ℓ2: probes, the ℓ1 scale hint for Γ (in units of k·c_far/(c_far − c_psd)) and the
  // Oja amplification used on Γ.
  double l2_probes = 8;
  double l2_scale = 1.0;
  double l2_iter = 0.5;
  double l2_amplification = 1;

  // Non-adaptive vmv: m = ceil(kappa_na/eps), repeated na_reps times.
  double kappa_na = 1.0;
  double na_reps = 5;

  // Krylov: k = ceil(kappa_krylov·eps^{-p/(2p+1)}·ln(1/eps)·(p>1 ? log2 d : 1)).
  double kappa_krylov = 0.2;
  double krylov_reps = 5;

  // Non-adaptive mv: m = ceil(kappa_mv·d^{1−1/p}/eps).
  double kappa_mv = 1.0;
  double mv_reps = 5;

  // Spectrum: R has ceil(spectrum_kappa_r·k/eps) columns, the affine
  // embeddings embed_rows·m/eps² rows (both capped at d).
  double spectrum_kappa_r = 8.0;
  double embed_rows = 16.0;
  double spectrum_rep_const = 0.25;  // repetitions 2·ceil(c·ln(1/δ)) + 1

  // Spiked instance shift in units of √d.
  double spiked_shift = 2.1;

  // Repetitions per trial inside scaling sweeps.
  double scaling_reps_oja = 1;
  double scaling_reps_krylov = 1;
  double scaling_reps_na = 5;
  double scaling_reps_mv = 1;

  std::map<std::string, double> to_map() const;
  // Unknown keys and non-positive values are rejected.
  static Constants from_map(const std::map<std::string, double>& m, const Constants& base);
  static Constants from_map(const std::map<std::string, double>& m);
  static Constants defaults();
  static Constants load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace psdprobe
