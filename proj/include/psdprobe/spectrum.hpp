#pragma once

#include <cstdint>
#include <vector>

#include "psdprobe/constants.hpp"
#include "psdprobe/kernels.hpp"
#include "psdprobe/oracle.hpp"

namespace psdprobe {

struct SpectrumSketch {
  Matrix R;   // d×m
  Matrix S1;  // rows1×d
  Matrix S2;  // rows2×d
  Matrix M1;  // S1·A·R
  Matrix M2;  // S2·A·R
  Matrix Q;   // S1·A·S2ᵀ
  std::int64_t queries = 0;
};

struct PsdFit {
  double cost = 0.0;
  Matrix Y;
};

// min over PSD Y of rank <= k of ‖M1·Y·M2ᵀ + Q‖_F².
PsdFit psd_rank_k_fit(const Matrix& M1, const Matrix& M2, const Matrix& Q, int k,
                      std::uint64_t seed = 0);

// Same problem after projecting onto the column spaces of M1 and M2:
// min ‖P1·Y·P2ᵀ − C‖² with P = Σ·Vᵀ from the thin SVDs and C the projected
// target. Returns the projected cost only.
PsdFit psd_fit_projected(const Matrix& P1, const Matrix& P2, const Matrix& C, int k,
                         std::uint64_t seed = 0);

// Scaled Gaussian rows×d with entries of variance 1/rows.
Matrix affine_embedding(Index rows, Index d, std::uint64_t seed);

// Sketch with m Gaussian columns in R and `rows`-row embeddings; rows >= d
// uses the identity embedding.
SpectrumSketch build_spectrum_sketch(const VmvOracle& op, Index m, Index rows, std::uint64_t seed);

double estimate_Akplus_sq(const VmvOracle& op, int k, double eps, double delta,
                          std::uint64_t seed, const Constants& c = Constants{});

struct EigenEstimate {
  std::vector<double> values;  // decreasing magnitude
  double error_bound = 0.0;
  std::int64_t queries = 0;
  std::int64_t round2_queries = 0;
};

EigenEstimate top_eigs_signed(const VmvOracle& op, int k, double eps, std::uint64_t seed,
                              const Constants& c = Constants{});
EigenEstimate top_eigs_signed_adaptive(const VmvOracle& op, int k, double eps,
                                       std::uint64_t seed, const Constants& c = Constants{});

// The four orthogonal pieces of ‖M1·Y·M2ᵀ − B‖² split by the projectors
// onto the column spaces of M1 and M2.
struct PythagoreanSplit {
  double inner = 0.0;   // ‖Π1(M1YM2ᵀ − B)Π2‖²
  double left = 0.0;    // ‖Π1⊥ B Π2‖²
  double right = 0.0;   // ‖Π1 B Π2⊥‖²
  double corner = 0.0;  // ‖Π1⊥ B Π2⊥‖²
  double total() const { return inner + left + right + corner; }
};

PythagoreanSplit pythagorean_split(const Matrix& M1, const Matrix& M2, const Matrix& B,
                                   const Matrix& Y);

int spectrum_repetitions(double delta, const Constants& c);

}  // namespace psdprobe

namespace psdprobe {

struct GuaranteeCheck {
  bool holds = true;      // every qualifying eigenvalue matched within ε‖A‖_F
  bool signs_ok = true;   // matched estimates carry the right sign
  int qualifying = 0;     // eigenvalues with |λᵢ| >= |λ_k| + 2ε‖A‖_F
  double max_error = 0.0; // over matched pairs, in units of ε‖A‖_F
};

// Guarantee (i) of the signed estimator against exact eigenvalues: a
// one-to-one assignment of estimates to the qualifying eigenvalues with
// error at most ε‖A‖_F each.
GuaranteeCheck check_spectral_guarantee(const Vector& true_eigenvalues,
                                        const std::vector<double>& estimates, int k, double eps);

}  // namespace psdprobe
