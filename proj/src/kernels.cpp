#include "psdprobe/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace psdprobe {

namespace {

void require_symmetric(const Matrix& M, const char* who) {
  require(M.rows() == M.cols(), std::string(who) + ": matrix must be square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  require((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
          std::string(who) + ": matrix is not symmetric");
}

}  // namespace

SymEig sym_eig_small(const Matrix& M) {
  require_symmetric(M, "sym_eig_small");
  require(M.rows() <= 4096, "sym_eig_small: k must be <= 4096");
  if (M.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
  require(es.info() == Eigen::Success, "sym_eig_small: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Vector eigenvalues_of(const Matrix& M) {
  require_symmetric(M, "eigenvalues_of");
  if (M.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, "eigenvalues_of: eigensolver did not converge");
  return es.eigenvalues();
}

double lambda_min(const Matrix& M) {
  Vector ev = eigenvalues_of(M);
  return ev.size() ? ev[0] : 0.0;
}

Matrix orthonormalize(const std::vector<Vector>& vectors, double tol) {
  if (vectors.empty()) return Matrix();
  const Index d = vectors.front().size();
  std::vector<Vector> basis;
  for (const Vector& v : vectors) {
    require(v.size() == d, "orthonormalize: vectors must share a length");
    const double n0 = v.norm();
    if (n0 == 0.0) continue;
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& b : basis) w -= b.dot(w) * b;
    const double nw = w.norm();
    if (nw < tol * n0) continue;
    basis.push_back(w / nw);
  }
  Matrix B(d, static_cast<Index>(basis.size()));
  for (Index j = 0; j < B.cols(); ++j) B.col(j) = basis[j];
  return B;
}

double chebyshev_t(int n, double t) {
  if (std::abs(t) <= 1.0) {
    double a = 1.0, b = t;
    if (n == 0) return a;
    for (int k = 1; k < n; ++k) {
      double c = 2.0 * t * b - a;
      a = b;
      b = c;
    }
    return b;
  }
  double sign = (t < 0 && n % 2 == 1) ? -1.0 : 1.0;
  return sign * std::cosh(n * std::acosh(std::abs(t)));
}

namespace {

// log cosh(y) for y >= 0 without overflow.
double log_cosh(double y) { return y + std::log1p(std::exp(-2.0 * y)) - std::log(2.0); }

}  // namespace

ThresholdPolynomial::ThresholdPolynomial(int degree, double alpha, double r, double delta)
    : degree_(degree), alpha_(alpha), r_(r), delta_(delta) {
  require(degree >= 0, "ThresholdPolynomial: negative degree");
  norm_ = std::exp(log_cosh(degree * std::acosh(1.0 + 2.0 * alpha / r)));
}

double ThresholdPolynomial::operator()(double x) const {
  const double t = (2.0 * x - r_) / r_;
  const double a0 = std::acosh(1.0 + 2.0 * alpha_ / r_);
  const double sign0 = degree_ % 2 == 1 ? -1.0 : 1.0;  // T_n at the image of −α
  if (std::abs(t) <= 1.0) return chebyshev_t(degree_, t) / (sign0 * norm_);
  const double at = std::acosh(std::abs(t));
  const double st = (t < 0 && degree_ % 2 == 1) ? -1.0 : 1.0;
  return st * sign0 * std::exp(log_cosh(degree_ * at) - log_cosh(degree_ * a0));
}

std::vector<double> ThresholdPolynomial::coefficients() const {
  require(degree_ <= 30, "ThresholdPolynomial: monomial form limited to degree <= 30");
  // t = s·x − 1 with s = 2/r.
  const double s = 2.0 / r_;
  std::vector<double> prev{1.0}, cur{-1.0, s};
  if (degree_ == 0) cur = prev;
  for (int k = 1; k < degree_; ++k) {
    std::vector<double> next(cur.size() + 1, 0.0);
    for (size_t i = 0; i < cur.size(); ++i) {
      next[i] += -2.0 * cur[i];
      next[i + 1] += 2.0 * s * cur[i];
    }
    for (size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  const double denom = chebyshev_t(degree_, (-2.0 * alpha_ - r_) / r_);
  for (double& c : cur) c /= denom;
  return cur;
}

double ThresholdPolynomial::grid_max(int points) const {
  double mx = 0.0;
  for (int i = 0; i < points; ++i) {
    double x = r_ * static_cast<double>(i) / static_cast<double>(points - 1);
    mx = std::max(mx, std::abs((*this)(x)));
  }
  return mx;
}

ThresholdPolynomial chebyshev_threshold_poly(double r, double alpha, double delta) {
  require(r > 0.0, "chebyshev_threshold_poly: r must be positive");
  require(alpha > 0.0, "chebyshev_threshold_poly: alpha must be positive");
  require(delta > 0.0 && delta < 1.0, "chebyshev_threshold_poly: delta must be in (0,1)");
  const double gamma = 2.0 * alpha / r;
  // The growth bound T_n(1+γ) >= 2^{n√γ − 1} gives a degree that is always
  // enough; the least sufficient degree is found below it.
  int hi = std::max(0, static_cast<int>(std::ceil((std::log2(1.0 / delta) + 1.0) / std::sqrt(gamma))));
  const double a0 = std::acosh(1.0 + gamma);
  int lo = 0;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (std::exp(-log_cosh(mid * a0)) <= delta) hi = mid;
    else lo = mid + 1;
  }
  for (int n = lo;; ++n) {
    ThresholdPolynomial p(n, alpha, r, delta);
    if (p.grid_max() <= delta * (1.0 + 1e-6) && std::abs(p(-alpha) - 1.0) <= 1e-6) return p;
  }
}

EstimatorResult hutchinson_trace(const VmvOracle& op, int n, Rng& rng) {
  require(n >= 1, "hutchinson_trace: n must be positive");
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += op.quad_form(rng.gaussian_vector(op.dim()));
  return {s / n, n, EstimatorTarget::trace};
}

EstimatorResult trace_estimate(const VmvOracle& op, int per_group, int groups, Rng& rng) {
  std::vector<double> means;
  std::int64_t q = 0;
  for (int g = 0; g < groups; ++g) {
    auto r = hutchinson_trace(op, per_group, rng);
    means.push_back(r.value);
    q += r.n_queries;
  }
  return {median(means), q, EstimatorTarget::trace};
}

EstimatorResult frobenius_estimate(const VmvOracle& op, double eps_fail, Rng& rng) {
  require(eps_fail > 0.0 && eps_fail < 1.0, "frobenius_estimate: eps_fail must be in (0,1)");
  constexpr int kBlock = 4;
  const int reps = static_cast<int>(std::ceil(8.0 * std::log(1.0 / eps_fail)));
  std::vector<double> means;
  std::int64_t q = 0;
  for (int r = 0; r < reps; ++r) {
    Matrix G = rng.gaussian_matrix(op.dim(), kBlock);
    Matrix H = rng.gaussian_matrix(op.dim(), kBlock);
    Matrix B = op.bilinear_block(G, H);
    q += kBlock * kBlock;
    means.push_back(B.squaredNorm() / (kBlock * kBlock));
  }
  return {std::sqrt(std::max(0.0, median(means))), q, EstimatorTarget::frobenius};
}

ScaleInterval schatten1_scale_estimate(const VmvOracle& op, Rng& rng) {
  const Index d = op.dim();
  Vector g = rng.gaussian_vector(d);
  Vector Ag = op.bilinear_block(Matrix::Identity(d, d), g).col(0);
  const double n = Ag.norm();
  if (n == 0.0) return {0.0, 0.0, d};
  return {n / (2.0 * d), d * n, d};
}

double sphere_quadform_variance_exact(const Matrix& M) {
  Vector ev = eigenvalues_of(M);
  const double d = static_cast<double>(ev.size());
  const double m1 = ev.mean();
  const double m2 = ev.squaredNorm() / d;
  return 2.0 / (d + 2.0) * (m2 - m1 * m1);
}

SphereMoments sphere_moments(int d) {
  require(d >= 2, "sphere_moments: need d >= 2");
  const double dd = d;
  return {3.0 / (dd * (dd + 2.0)), 1.0 / (dd * (dd + 2.0))};
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t i = static_cast<size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double f = pos - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

}  // namespace psdprobe
