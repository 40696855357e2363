#pragma once

#include <cstdint>
#include <vector>

#include "psdprobe/constants.hpp"
#include "psdprobe/kernels.hpp"
#include "psdprobe/oracle.hpp"
#include "psdprobe/verdict.hpp"

namespace psdprobe {

struct KrylovSpace {
  Matrix basis;         // d×(j+1), orthonormal
  Matrix raw_iterates;  // A·basis, one column per query
  Matrix projected;     // basisᵀ·A·basis
  int k = 0;            // requested degree
  bool degenerate = false;
};

// Arnoldi-style build of span{g, Ag, …, Aᵏg}: A is applied to each new
// orthonormal direction, so a full space costs exactly k+1 queries.
KrylovSpace build_krylov(const MvOracle& op, int k, const Vector& g);
KrylovSpace build_krylov(const MvOracle& op, int k, std::uint64_t seed);

int krylov_degree(double eps, double p, Index d, double kappa);

// One-sided (ε, ℓp) tester. norm_estimate <= 0 falls back to the largest
// projected eigenvalue magnitude for the rejection tolerance. With
// power_mode, p > 1 is handled by the p = 1 tester on A^q for the least odd
// q >= p (each query then costs q products).
Verdict krylov_tester(const MvOracle& op, double eps, double p, double norm_estimate,
                      std::uint64_t seed, const Constants& c = Constants{},
                      bool power_mode = false);
Verdict krylov_sized(const MvOracle& op, int k, int reps, double norm_estimate,
                     std::uint64_t seed);

// A^q behind a parent mv oracle.
class PowerOperator final : public MvOracle {
 public:
  PowerOperator(const MvOracle& parent, int q) : parent_(parent), q_(q) {}
  Index dim() const override { return parent_.dim(); }

 protected:
  Vector eval_mat_vec(const Vector& v) const override;

 private:
  const MvOracle& parent_;
  int q_;
};

// q(x)·∏_{λᵢ > r} (λᵢ − x)/(λᵢ − λ_min) with q the threshold polynomial on
// [0, r], r = T^{−1/p}.
struct DeflationCertificate {
  ThresholdPolynomial q;
  std::vector<double> roots;
  double lambda_min = 0.0;
  double max_positive_mass = 0.0;

  double operator()(double x) const;
  int degree() const { return q.degree() + static_cast<int>(roots.size()); }
};

DeflationCertificate deflation_poly_certificate(const std::vector<double>& spectrum, double eps,
                                                double p, int T);

Index nonadaptive_mv_dim(double eps, double p, Index d, double kappa);
Verdict nonadaptive_mv_tester(const MvOracle& op, double eps, double p, std::uint64_t seed,
                              const Constants& c = Constants{});
Verdict nonadaptive_mv_sized(const MvOracle& op, Index m, int reps, std::uint64_t seed);

}  // namespace psdprobe
