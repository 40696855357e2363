#include "psdprobe/mv_testers.hpp"

#include <algorithm>
#include <cmath>

namespace psdprobe {

KrylovSpace build_krylov(const MvOracle& op, int k, const Vector& g) {
  const Index d = op.dim();
  require(k >= 0 && k + 1 <= d, "build_krylov: need k + 1 <= d");
  require(g.size() == d, "build_krylov: start vector has wrong length");
  const double gn = g.norm();
  require(gn > 0.0, "build_krylov: zero start vector");

  KrylovSpace ks;
  ks.k = k;
  std::vector<Vector> Q{g / gn};
  std::vector<Vector> AQ;
  for (int j = 0; j <= k; ++j) {
    Vector w = op.mat_vec(Q[j]);
    AQ.push_back(w);
    if (j == k) break;
    const double n0 = w.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& b : Q) w -= b.dot(w) * b;
    const double nw = w.norm();
    if (n0 == 0.0 || nw < 1e-10 * n0) {
      ks.degenerate = true;
      break;
    }
    Q.push_back(w / nw);
  }
  const Index n = static_cast<Index>(Q.size());
  ks.basis.resize(d, n);
  ks.raw_iterates.resize(d, n);
  for (Index j = 0; j < n; ++j) {
    ks.basis.col(j) = Q[j];
    ks.raw_iterates.col(j) = AQ[j];
  }
  Matrix P = ks.basis.transpose() * ks.raw_iterates;
  ks.projected = 0.5 * (P + P.transpose());
  return ks;
}

KrylovSpace build_krylov(const MvOracle& op, int k, std::uint64_t seed) {
  Rng rng(seed);
  return build_krylov(op, k, rng.gaussian_vector(op.dim()));
}

int krylov_degree(double eps, double p, Index d, double kappa) {
  const double T = std::isinf(p) ? 1.0 / std::sqrt(eps) : std::pow(eps, -p / (2.0 * p + 1.0));
  double k = kappa * T * std::max(1.0, std::log(1.0 / eps));
  if (p > 1.0) k *= std::log2(static_cast<double>(std::max<Index>(d, 2)));
  return std::max(1, static_cast<int>(std::ceil(k)));
}

Verdict krylov_sized(const MvOracle& op, int k, int reps, double norm_estimate,
                     std::uint64_t seed) {
  const std::int64_t q0 = op.mv_queries();
  Verdict v;
  v.mode = TesterMode::one_sided;
  k = std::min<int>(k, static_cast<int>(op.dim()) - 1);
  Rng root(seed);
  for (int r = 0; r < reps && v.is_psd; ++r) {
    Rng rng = root.split(r);
    KrylovSpace ks = build_krylov(op, k, rng.gaussian_vector(op.dim()));
    SymEig eg = sym_eig_small(ks.projected);
    const double scale =
        norm_estimate > 0.0 ? norm_estimate : eg.values.cwiseAbs().maxCoeff();
    if (eg.values[0] < -1e-10 * scale) {
      v.is_psd = false;
      v.witness = ks.basis * eg.vectors.col(0);
    }
  }
  v.queries_used = op.mv_queries() - q0;
  return v;
}

Vector PowerOperator::eval_mat_vec(const Vector& v) const {
  Vector w = v;
  for (int i = 0; i < q_; ++i) w = parent_.mat_vec(w);
  return w;
}

Verdict krylov_tester(const MvOracle& op, double eps, double p, double norm_estimate,
                      std::uint64_t seed, const Constants& c, bool power_mode) {
  require(eps > 0.0 && eps < 1.0, "krylov_tester: eps must be in (0,1)");
  require(p >= 1.0, "krylov_tester: p must be >= 1");
  const int reps = static_cast<int>(c.krylov_reps);
  if (power_mode && p > 1.0 && !std::isinf(p)) {
    int q = static_cast<int>(std::ceil(p));
    if (q % 2 == 0) ++q;
    // λ_min(A^q) = λ_min^q and ‖A^q‖₁ <= ‖A‖_p^q for q >= p.
    const double eps_q = std::pow(eps, q);
    const std::int64_t q0 = op.mv_queries();
    PowerOperator Aq(op, q);
    const double ne = norm_estimate > 0.0 ? std::pow(norm_estimate, q) : 0.0;
    Verdict v = krylov_sized(Aq, krylov_degree(eps_q, 1.0, op.dim(), c.kappa_krylov), reps, ne,
                             seed);
    v.queries_used = op.mv_queries() - q0;
    return v;
  }
  return krylov_sized(op, krylov_degree(eps, p, op.dim(), c.kappa_krylov), reps, norm_estimate,
                      seed);
}

double DeflationCertificate::operator()(double x) const {
  double v = q(x);
  for (double l : roots) v *= (l - x) / (l - lambda_min);
  return v;
}

DeflationCertificate deflation_poly_certificate(const std::vector<double>& spectrum, double eps,
                                                double p, int T) {
  require(!spectrum.empty(), "deflation_poly_certificate: empty spectrum");
  require(eps > 0.0 && eps < 1.0, "deflation_poly_certificate: eps must be in (0,1)");
  require(T >= 1, "deflation_poly_certificate: T must be positive");
  Vector ev = Eigen::Map<const Vector>(spectrum.data(), static_cast<Index>(spectrum.size()));
  require(schatten_norm(ev, p) <= 1.0 + 1e-9, "deflation_poly_certificate: need ‖spectrum‖_p <= 1");
  const double lmin = ev.minCoeff();
  require(lmin <= -eps, "deflation_poly_certificate: need min(spectrum) <= -eps");

  const double d = static_cast<double>(spectrum.size());
  const double r = std::isinf(p) ? 1.0 : std::pow(static_cast<double>(T), -1.0 / p);
  const double dfac = std::isinf(p) ? d : std::pow(d, 1.0 - 1.0 / p);
  const double delta = std::sqrt((eps / 10.0) / dfac);
  DeflationCertificate cert{chebyshev_threshold_poly(r, eps, delta), {}, lmin, 0.0};
  for (double l : spectrum)
    if (l > r) cert.roots.push_back(l);
  require(static_cast<int>(cert.roots.size()) <= T,
          "deflation_poly_certificate: more than T eigenvalues above the threshold");
  for (double l : spectrum)
    if (l > 0.0) {
      const double v = cert(l);
      cert.max_positive_mass += v * v * l;
    }
  return cert;
}

Index nonadaptive_mv_dim(double eps, double p, Index d, double kappa) {
  const double dd = static_cast<double>(d);
  const double grow = std::isinf(p) ? dd : std::pow(dd, 1.0 - 1.0 / p);
  return std::clamp<Index>(static_cast<Index>(std::ceil(kappa * grow / eps)), 1, d);
}

Verdict nonadaptive_mv_sized(const MvOracle& op, Index m, int reps, std::uint64_t seed) {
  require(m >= 1, "nonadaptive_mv: sketch size must be positive");
  m = std::min(m, op.dim());
  const std::int64_t q0 = op.mv_queries();
  Verdict v;
  v.mode = TesterMode::one_sided;
  Rng root(seed);
  for (int r = 0; r < reps && v.is_psd; ++r) {
    Rng rng = root.split(r);
    Matrix G = rng.gaussian_matrix(op.dim(), m);
    Matrix AG = op.mat_mat(G);
    Matrix S = G.transpose() * AG;
    SymEig eg = sym_eig_small(0.5 * (S + S.transpose()));
    const double scale = eg.values.cwiseAbs().maxCoeff();
    if (eg.values[0] < -1e-10 * scale) {
      v.is_psd = false;
      v.witness = G * eg.vectors.col(0);
    }
  }
  v.queries_used = op.mv_queries() - q0;
  return v;
}

Verdict nonadaptive_mv_tester(const MvOracle& op, double eps, double p, std::uint64_t seed,
                              const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "nonadaptive_mv_tester: eps must be in (0,1)");
  return nonadaptive_mv_sized(op, nonadaptive_mv_dim(eps, p, op.dim(), c.kappa_mv),
                              static_cast<int>(c.mv_reps), seed);
}

}  // namespace psdprobe
