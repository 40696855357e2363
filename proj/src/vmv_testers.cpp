#include "psdprobe/vmv_testers.hpp"

#include <algorithm>
#include <cmath>

namespace psdprobe {

OjaStep oja_step(const VmvOracle& op, const Vector& x, double eta, const Vector& g) {
  OjaStep st;
  st.s = op.bilinear(g, x);
  st.gAg = op.quad_form(g);
  st.x_next = x - (eta * st.s) * g;
  return st;
}

OjaStep oja_step(const VmvOracle& op, const Vector& x, double eta, Rng& rng) {
  return oja_step(op, x, eta, rng.gaussian_vector(op.dim()));
}

OjaConfig OjaConfig::from_constants(const Constants& c) {
  OjaConfig cfg;
  cfg.amplification = static_cast<int>(c.oja_amplification);
  cfg.kappa_m = c.oja_kappa_m;
  cfg.step_const = c.oja_step;
  cfg.iter_const = c.oja_iter;
  return cfg;
}

namespace {

Index reduced_dim(Index d, double eps, const OjaConfig& cfg) {
  if (!cfg.reduce) return d;
  return std::min<Index>(d, static_cast<Index>(std::ceil(cfg.kappa_m / eps)));
}

int iteration_count(double eps, const OjaConfig& cfg) {
  if (cfg.max_iters > 0) return cfg.max_iters;
  return std::max(1, static_cast<int>(std::ceil(cfg.iter_const * std::log(1.0 / eps) / eps)));
}

int scale_count(Index m, const OjaConfig& cfg) {
  if (cfg.eta > 0.0 || cfg.norm_hint > 0.0) return 1;
  if (cfg.eta_scales > 0) return cfg.eta_scales;
  const double mm = static_cast<double>(m);
  return std::max(1, static_cast<int>(std::ceil(std::log2(mm * mm))));
}

// One run from a Gaussian start at fixed η. A negative maintained f is
// confirmed by a direct query before it counts.
bool oja_run(const VmvOracle& B, double eta, int iters, double tol, Rng& rng, Vector& witness) {
  Vector x = rng.gaussian_vector(B.dim());
  double f = B.quad_form(x);
  if (f < -tol * x.squaredNorm()) {
    witness = x;
    return true;
  }
  for (int it = 0; it < iters; ++it) {
    OjaStep st = oja_step(B, x, eta, rng);
    f = oja_f_update(f, eta, st.s, st.gAg);
    x = std::move(st.x_next);
    if (!std::isfinite(f) || !x.allFinite()) return false;
    double n2 = x.squaredNorm();
    if (n2 == 0.0) return false;
    if (n2 > 1e100 || n2 < 1e-100) {
      x /= std::sqrt(n2);
      f /= n2;
      n2 = 1.0;
    }
    if (f < -tol * n2) {
      const double direct = B.quad_form(x);
      if (direct < -tol * n2) {
        witness = x;
        return true;
      }
      f = direct;
    }
  }
  return false;
}

}  // namespace

std::int64_t oja_budget(Index d, double eps, const OjaConfig& cfg) {
  const Index m = reduced_dim(d, eps, cfg);
  const std::int64_t scale_q = (cfg.eta > 0.0 || cfg.norm_hint > 0.0) ? 0 : m;
  const std::int64_t J = scale_count(m, cfg);
  const std::int64_t N = iteration_count(eps, cfg);
  return cfg.amplification * (scale_q + J * (1 + 2 * N));
}

std::vector<double> oja_trace(const VmvOracle& op, Vector x, double eta, int iters, Rng& rng) {
  std::vector<double> fs;
  double f = op.quad_form(x);
  fs.push_back(f);
  for (int it = 0; it < iters; ++it) {
    OjaStep st = oja_step(op, x, eta, rng);
    f = oja_f_update(f, eta, st.s, st.gAg);
    x = std::move(st.x_next);
    fs.push_back(f);
  }
  return fs;
}

std::unique_ptr<SketchedOperator> sketch_reduce(const VmvOracle& op, Index m, std::uint64_t seed) {
  require(m >= 1 && m <= op.dim(), "sketch_reduce: need 1 <= m <= d");
  Rng rng(seed);
  Matrix G = rng.gaussian_matrix(op.dim(), m) / std::sqrt(static_cast<double>(op.dim()));
  return std::make_unique<SketchedOperator>(op, std::move(G));
}

Verdict oja_l1_tester(const VmvOracle& op, double eps, const OjaConfig& cfg, std::uint64_t seed) {
  require(eps > 0.0 && eps < 1.0, "oja_l1_tester: eps must be in (0,1)");
  require(cfg.amplification >= 1, "oja_l1_tester: amplification must be positive");
  const std::int64_t q0 = op.vmv_queries();
  Verdict v;
  v.mode = TesterMode::one_sided;
  const Index d = op.dim();
  const Index m = reduced_dim(d, eps, cfg);
  const int N = iteration_count(eps, cfg);
  Rng root(seed);

  for (int rep = 0; rep < cfg.amplification && v.is_psd; ++rep) {
    Rng rng = root.split(rep);
    std::unique_ptr<SketchedOperator> red;
    if (m < d) red = sketch_reduce(op, m, rng.bits());
    const VmvOracle& B = red ? static_cast<const VmvOracle&>(*red) : op;

    std::vector<double> etas;
    double hi = cfg.norm_hint;
    if (cfg.eta > 0.0) {
      etas.push_back(cfg.eta);
      hi = hi > 0.0 ? hi : 1.0 / cfg.eta;
    } else if (cfg.norm_hint > 0.0) {
      etas.push_back(cfg.step_const / cfg.norm_hint);
    } else {
      ScaleInterval iv = schatten1_scale_estimate(B, rng);
      if (iv.upper == 0.0) continue;  // zero operator: nothing to find
      hi = iv.upper;
      const int J = scale_count(m, cfg);
      for (int j = 0; j < J; ++j) {
        const double t = J == 1 ? 0.5 : static_cast<double>(j) / (J - 1);
        const double L = iv.lower * std::pow(iv.upper / iv.lower, t);
        etas.push_back(cfg.step_const / L);
      }
    }
    const double tol = 1e-10 * hi;
    for (double eta : etas) {
      Vector w;
      if (oja_run(B, eta, N, tol, rng, w)) {
        v.is_psd = false;
        v.witness = red ? red->pullback(w) : w;
        break;
      }
    }
  }
  v.queries_used = op.vmv_queries() - q0;
  return v;
}

double lp_to_l1_eps(double eps, double p, Index d) {
  require(p >= 1.0, "lp_to_l1_eps: p must be >= 1");
  const double dd = static_cast<double>(d);
  if (std::isinf(p)) return eps / dd;
  return eps * std::pow(dd, 1.0 / p - 1.0);
}

Index sketch_dim(double eps, double kappa) {
  const double l = std::log(std::max(std::exp(1.0), 1.0 / eps));
  return std::max<Index>(1, static_cast<Index>(std::ceil(kappa * l * l / (eps * eps))));
}

double gamma_statistic(double alpha, double lmin, double beta, Index k) {
  if (beta <= 0.0) return 0.0;
  const double lk = std::max(1.0, std::log(static_cast<double>(k)));
  return (alpha - lmin) / (beta * std::sqrt(static_cast<double>(k)) * lk);
}

SketchState build_sketch(const VmvOracle& op, Index k, std::uint64_t seed, const Constants& c) {
  require(k >= 1, "build_sketch: k must be positive");
  const std::int64_t q0 = op.vmv_queries();
  Rng rng(seed);
  SketchState st;
  st.k = k;
  st.G = rng.gaussian_matrix(op.dim(), k);
  st.S = op.sketch_gram(st.G);
  st.alpha = trace_estimate(op, static_cast<int>(c.trace_samples),
                            static_cast<int>(c.trace_groups), rng).value;
  st.beta = frobenius_estimate(op, c.frob_fail, rng).value;
  st.lambda_min = lambda_min(st.S);
  st.gamma = gamma_statistic(st.alpha, st.lambda_min, st.beta, k);
  st.queries = op.vmv_queries() - q0;
  return st;
}

Verdict bilinear_sketch_tester(const VmvOracle& op, double eps, double c_psd, std::uint64_t seed,
                               const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "bilinear_sketch_tester: eps must be in (0,1)");
  const std::int64_t q0 = op.vmv_queries();
  Verdict v;
  v.mode = TesterMode::two_sided;
  // A square Gaussian G is invertible, so GᵀAG already has the inertia of A.
  const Index k = std::min(op.dim(), sketch_dim(eps, c.kappa_sketch));
  SketchState st = build_sketch(op, k, seed, c);
  v.statistic = st.gamma;
  if (st.beta > 0.0) {
    SymEig eg = sym_eig_small(st.S);
    const double scale = eg.values.cwiseAbs().maxCoeff();
    if (eg.values[0] < -1e-10 * scale) {
      v.is_psd = false;
      v.witness = st.G * eg.vectors.col(0);
    } else {
      v.is_psd = st.gamma <= c_psd;
    }
  }
  v.queries_used = op.vmv_queries() - q0;
  return v;
}

Verdict adaptive_l2_tester(const VmvOracle& op, double eps, std::uint64_t seed, const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "adaptive_l2_tester: eps must be in (0,1)");
  const std::int64_t q0 = op.vmv_queries();
  Verdict v;
  v.mode = TesterMode::two_sided;
  Rng rng(seed);
  const Index d = op.dim();
  auto done = [&] {
    v.queries_used = op.vmv_queries() - q0;
    return v;
  };

  for (int i = 0; i < static_cast<int>(c.l2_probes); ++i) {
    Vector x = rng.gaussian_vector(d);
    if (op.quad_form(x) < 0.0) {
      v.is_psd = false;
      v.witness = x;
      return done();
    }
  }

  const Index k = std::min(d, sketch_dim(eps, c.kappa_sketch));
  Matrix G = rng.gaussian_matrix(d, k);
  const double alpha = trace_estimate(op, static_cast<int>(c.trace_samples),
                                      static_cast<int>(c.trace_groups), rng).value;
  const double beta = frobenius_estimate(op, c.frob_fail, rng).value;
  if (beta <= 0.0) return done();

  // Γ = (c_psd·I − T)/(c_far − c_psd) with T = (αI − GᵀAG)/(β√k log k), so
  // λ_min(Γ) = (c_psd − γ)/(c_far − c_psd): PSD when γ <= c_psd and at most
  // −1 when γ >= c_far.
  const double unit = beta * std::sqrt(static_cast<double>(k)) *
                      std::max(1.0, std::log(static_cast<double>(k)));
  const double D = (c.c_far - c.c_psd) * unit;
  SketchedOperator sketched(op, G);
  AffineShiftOperator gamma_op(sketched, 1.0 / D, (c.c_psd * unit - alpha) / D);

  OjaConfig cfg;
  cfg.reduce = false;
  // tr(Γ) ≈ k·c_psd/(c_far − c_psd), so ‖Γ‖₁ is about k·c_far/(c_far − c_psd).
  cfg.norm_hint = c.l2_scale * static_cast<double>(k) * c.c_far / (c.c_far - c.c_psd);
  cfg.step_const = c.oja_step;
  cfg.amplification = static_cast<int>(c.l2_amplification);
  const double eps_gamma = 1.0 / cfg.norm_hint;
  cfg.max_iters = std::max(
      1, static_cast<int>(std::ceil(c.l2_iter * std::log(1.0 / eps_gamma) / eps_gamma)));
  Verdict inner = oja_l1_tester(gamma_op, std::min(0.5, eps_gamma), cfg, rng.bits());
  if (!inner.is_psd) {
    v.is_psd = false;
    // A negative Γ direction need not be negative for A; keep it only if verified.
    Vector w = G * *inner.witness;
    if (op.quad_form(w) < 0.0) v.witness = std::move(w);
  }
  return done();
}

Index nonadaptive_l1_dim(double eps, double kappa, Index d) {
  return std::clamp<Index>(static_cast<Index>(std::ceil(kappa / eps)), 1, d);
}

Verdict nonadaptive_l1_sized(const VmvOracle& op, Index m, int reps, std::uint64_t seed) {
  require(m >= 1, "nonadaptive_l1: sketch size must be positive");
  const std::int64_t q0 = op.vmv_queries();
  Verdict v;
  v.mode = TesterMode::one_sided;
  Rng root(seed);
  for (int r = 0; r < reps && v.is_psd; ++r) {
    Rng rng = root.split(r);
    Matrix G = rng.gaussian_matrix(op.dim(), m);
    SymEig eg = sym_eig_small(op.sketch_gram(G));
    const double scale = eg.values.cwiseAbs().maxCoeff();
    if (eg.values[0] < -1e-10 * scale) {
      v.is_psd = false;
      v.witness = G * eg.vectors.col(0);
    }
  }
  v.queries_used = op.vmv_queries() - q0;
  return v;
}

Verdict nonadaptive_l1_tester(const VmvOracle& op, double eps, std::uint64_t seed,
                              const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "nonadaptive_l1_tester: eps must be in (0,1)");
  return nonadaptive_l1_sized(op, nonadaptive_l1_dim(eps, c.kappa_na, op.dim()),
                              static_cast<int>(c.na_reps), seed);
}

}  // namespace psdprobe
