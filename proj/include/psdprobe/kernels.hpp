#pragma once

#include <cstdint>
#include <vector>

#include "psdprobe/oracle.hpp"

namespace psdprobe {

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // columns orthonormal
};

SymEig sym_eig_small(const Matrix& M);
double lambda_min(const Matrix& M);
Vector eigenvalues_of(const Matrix& M);

// Orthonormal basis of span(vectors); a vector whose residual after
// projection falls below tol·(its original norm) is dropped. Two
// modified Gram-Schmidt passes per vector.
Matrix orthonormalize(const std::vector<Vector>& vectors, double tol = 1e-10);

// T_n((2x − r)/r) / T_n((−2α − r)/r): equals 1 at −α and is at most δ in
// magnitude on [0, r].
class ThresholdPolynomial {
 public:
  ThresholdPolynomial(int degree, double alpha, double r, double delta);

  int degree() const { return degree_; }
  double alpha() const { return alpha_; }
  double r() const { return r_; }
  double delta() const { return delta_; }
  // The sup of |p| on [0, r], i.e. 1/|T_n(1 + 2α/r)|.
  double suppression() const { return 1.0 / norm_; }

  double operator()(double x) const;
  // Monomial coefficients, lowest first. Only offered for degree <= 30.
  std::vector<double> coefficients() const;
  // max |p| over a uniform grid of [0, r].
  double grid_max(int points = 10000) const;

 private:
  int degree_;
  double alpha_, r_, delta_;
  double norm_;  // |T_n| at the image of −α
};

double chebyshev_t(int n, double t);
ThresholdPolynomial chebyshev_threshold_poly(double r, double alpha, double delta);

enum class EstimatorTarget { trace, frobenius, schatten1_range };

struct EstimatorResult {
  double value = 0.0;
  std::int64_t n_queries = 0;
  EstimatorTarget target = EstimatorTarget::trace;
};

EstimatorResult hutchinson_trace(const VmvOracle& op, int n, Rng& rng);
// Median of `groups` Hutchinson means with `per_group` samples each.
EstimatorResult trace_estimate(const VmvOracle& op, int per_group, int groups, Rng& rng);
EstimatorResult frobenius_estimate(const VmvOracle& op, double eps_fail, Rng& rng);

struct ScaleInterval {
  double lower = 0.0;
  double upper = 0.0;
  std::int64_t n_queries = 0;
};

ScaleInterval schatten1_scale_estimate(const VmvOracle& op, Rng& rng);

double sphere_quadform_variance_exact(const Matrix& M);

struct SphereMoments {
  double alpha4;
  double alpha22;
};

SphereMoments sphere_moments(int d);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

}  // namespace psdprobe
