#include "psdprobe/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace psdprobe {

namespace {

struct ThinSvd {
  Matrix U;  // orthonormal basis of the column space
  Matrix P;  // Σ·Vᵀ, so M = U·P
};

ThinSvd thin_svd(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double tol = (s.size() ? s[0] : 0.0) * 1e-12 * std::max(M.rows(), M.cols());
  Index r = 0;
  while (r < s.size() && s[r] > tol) ++r;
  ThinSvd out;
  out.U = svd.matrixU().leftCols(r);
  out.P = s.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  return out;
}

// f(Z) = ‖P1 Z Zᵀ P2ᵀ − C‖² and its gradient.
struct FactoredObjective {
  const Matrix& P1;
  const Matrix& P2;
  const Matrix& C;

  double operator()(const Matrix& Z, Matrix* grad) const {
    Matrix A1 = P1 * Z;  // r1×k
    Matrix A2 = P2 * Z;  // r2×k
    Matrix E = A1 * A2.transpose() - C;
    if (grad) *grad = 2.0 * (P1.transpose() * (E * A2) + P2.transpose() * (E.transpose() * A1));
    return E.squaredNorm();
  }
};

double frob_dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

// L-BFGS with Armijo backtracking.
double minimize_lbfgs(const FactoredObjective& f, Matrix& Z, int max_iters, double floor) {
  constexpr int kMemory = 10;
  Matrix g;
  double fz = f(Z, &g);
  std::deque<std::pair<Matrix, Matrix>> hist;
  int stalls = 0;
  for (int it = 0; it < max_iters && fz > floor; ++it) {
    Matrix dir = -g;
    std::vector<double> alphas;
    for (auto it2 = hist.rbegin(); it2 != hist.rend(); ++it2) {
      const double rho = 1.0 / frob_dot(it2->second, it2->first);
      const double a = rho * frob_dot(it2->first, dir);
      alphas.push_back(a);
      dir -= a * it2->second;
    }
    if (!hist.empty()) {
      const auto& [s, y] = hist.back();
      dir *= frob_dot(s, y) / frob_dot(y, y);
    }
    size_t idx = alphas.size();
    for (auto& [s, y] : hist) {
      const double rho = 1.0 / frob_dot(y, s);
      const double b = rho * frob_dot(y, dir);
      dir += (alphas[--idx] - b) * s;
    }
    double slope = frob_dot(g, dir);
    if (!(slope < 0.0)) {
      hist.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }
    if (slope == 0.0) break;
    double t = 1.0;
    Matrix Zn, gn;
    double fn = 0.0;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      Zn = Z + t * dir;
      fn = f(Zn, &gn);
      if (fn <= fz + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) break;
    Matrix s = Zn - Z, y = gn - g;
    if (frob_dot(s, y) > 1e-300) {
      hist.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(hist.size()) > kMemory) hist.pop_front();
    }
    const double improvement = fz - fn;
    Z = std::move(Zn);
    g = std::move(gn);
    stalls = improvement <= 1e-9 * std::max(fz, floor) ? stalls + 1 : 0;
    fz = fn;
    if (stalls >= 3) break;
  }
  return fz;
}

}  // namespace

constexpr Index kConvexStartMaxDim = 8;

PsdFit psd_fit_projected(const Matrix& P1, const Matrix& P2, const Matrix& C, int k,
                         std::uint64_t seed) {
  require(k >= 1, "psd_rank_k_fit: k must be positive");
  require(P1.cols() == P2.cols(), "psd_rank_k_fit: M1 and M2 must have the same column count");
  require(P1.rows() == C.rows() && P2.rows() == C.cols(), "psd_rank_k_fit: non-conformal Q");
  const Index m = P1.cols();
  PsdFit best;
  best.Y = Matrix::Zero(m, m);
  best.cost = C.squaredNorm();
  if (m == 0 || best.cost == 0.0 || P1.rows() == 0 || P2.rows() == 0) return best;
  const int kk = static_cast<int>(std::min<Index>(k, m));
  FactoredObjective f{P1, P2, C};
  const double floor = 1e-28 * best.cost;
  Rng rng(seed ^ 0xa5a5a5a5ULL);

  // Warm start: PSD rank-k truncation of the unconstrained least-squares Y.
  Matrix Yls = P1.completeOrthogonalDecomposition().pseudoInverse() * C *
               P2.completeOrthogonalDecomposition().pseudoInverse().transpose();
  SymEig eg = sym_eig_small(0.5 * (Yls + Yls.transpose()));
  Matrix Zw = Matrix::Zero(m, kk);
  for (int j = 0; j < kk; ++j) {
    const double l = eg.values[m - 1 - j];
    if (l > 0.0) Zw.col(j) = std::sqrt(l) * eg.vectors.col(m - 1 - j);
  }
  const double scale =
      std::sqrt(C.norm() / std::max(1e-300, P1.norm() * P2.norm() / std::sqrt(double(m))));

  // Second warm start for small m: top-k truncation of the unconstrained-rank
  // PSD fit, whose full-width factorization has no spurious local minima.
  Matrix Zc;
  if (m <= kConvexStartMaxDim && kk < m) {
    Matrix Zf = scale * rng.gaussian_matrix(m, m) / std::sqrt(double(m));
    minimize_lbfgs(f, Zf, 2000, floor);
    SymEig ef = sym_eig_small(Zf * Zf.transpose());
    Zc = Matrix::Zero(m, kk);
    for (int j = 0; j < kk; ++j)
      Zc.col(j) = std::sqrt(std::max(0.0, ef.values[m - 1 - j])) * ef.vectors.col(m - 1 - j);
  }

  // Up to 10 starts; stop after 3 in a row fail to improve the best cost.
  constexpr int kRestarts = 10, kPatience = 3;
  for (int r = 0, idle = 0; r < kRestarts && idle < kPatience; ++r) {
    Matrix Z = r == 0 && Zw.norm() > 0.0   ? Zw
               : r == 1 && Zc.norm() > 0.0 ? Zc
                                           : Matrix(scale * rng.gaussian_matrix(m, kk) / std::sqrt(double(m)));
    const double cost = minimize_lbfgs(f, Z, 500, floor);
    if (cost < best.cost * (1.0 - 1e-9)) {
      best.cost = cost;
      best.Y = Z * Z.transpose();
      idle = 0;
    } else {
      ++idle;
      if (cost < best.cost) {
        best.cost = cost;
        best.Y = Z * Z.transpose();
      }
    }
  }
  return best;
}

PsdFit psd_rank_k_fit(const Matrix& M1, const Matrix& M2, const Matrix& Q, int k,
                      std::uint64_t seed) {
  require(M1.cols() == M2.cols(), "psd_rank_k_fit: M1 and M2 must have the same column count");
  require(M1.rows() == Q.rows() && M2.rows() == Q.cols(), "psd_rank_k_fit: non-conformal Q");
  require(k >= 1 && k <= M1.cols(), "psd_rank_k_fit: need 1 <= k <= columns(M1)");
  const Matrix B = -Q;
  ThinSvd s1 = thin_svd(M1), s2 = thin_svd(M2);
  const Matrix C = s1.U.transpose() * B * s2.U;
  PsdFit fit = psd_fit_projected(s1.P, s2.P, C, k, seed);
  fit.cost += std::max(0.0, B.squaredNorm() - C.squaredNorm());
  return fit;
}

Matrix affine_embedding(Index rows, Index d, std::uint64_t seed) {
  require(rows >= 1 && rows <= d, "affine_embedding: need 1 <= rows <= d");
  Rng rng(seed);
  return rng.gaussian_matrix(rows, d) / std::sqrt(static_cast<double>(rows));
}

SpectrumSketch build_spectrum_sketch(const VmvOracle& op, Index m, Index rows,
                                     std::uint64_t seed) {
  const Index d = op.dim();
  require(m >= 1, "build_spectrum_sketch: m must be positive");
  const std::int64_t q0 = op.vmv_queries();
  Rng rng(seed);
  SpectrumSketch sk;
  sk.R = rng.gaussian_matrix(d, std::min(m, d));
  if (rows >= d) {
    sk.S1 = Matrix::Identity(d, d);
    sk.S2 = Matrix::Identity(d, d);
  } else {
    sk.S1 = affine_embedding(rows, d, rng.bits());
    sk.S2 = affine_embedding(rows, d, rng.bits());
  }
  sk.M1 = op.bilinear_block(sk.S1.transpose(), sk.R);
  sk.M2 = op.bilinear_block(sk.S2.transpose(), sk.R);
  sk.Q = op.bilinear_block(sk.S1.transpose(), sk.S2.transpose());
  sk.queries = op.vmv_queries() - q0;
  return sk;
}

int spectrum_repetitions(double delta, const Constants& c) {
  return 2 * static_cast<int>(std::ceil(c.spectrum_rep_const * std::log(1.0 / delta))) + 1;
}

namespace {

struct SketchDims {
  Index m;
  Index rows;
};

SketchDims sketch_dims(Index d, int k, double eps, const Constants& c) {
  const Index m = std::min<Index>(d, static_cast<Index>(std::ceil(c.spectrum_kappa_r * k / eps)));
  const double rows = std::ceil(c.embed_rows * static_cast<double>(m) / (eps * eps));
  return {m, rows >= static_cast<double>(d) ? d : static_cast<Index>(rows)};
}

// ‖A_{i,+}‖² and ‖A_{i,−}‖² estimates for i = 1..k from one sketch, given
// the projected pieces. C is the projection of S1·A·S2ᵀ.
void signed_estimates(const Matrix& P1, const Matrix& P2, const Matrix& C, int k,
                      std::uint64_t seed, std::vector<double>& plus, std::vector<double>& minus) {
  const double c2 = C.squaredNorm();
  plus.assign(k, 0.0);
  minus.assign(k, 0.0);
  for (int i = 1; i <= k; ++i) {
    plus[i - 1] = c2 - psd_fit_projected(P1, P2, C, i, seed + 2 * i).cost;
    minus[i - 1] = c2 - psd_fit_projected(P1, P2, -C, i, seed + 2 * i + 1).cost;
  }
}

EigenEstimate assemble(const std::vector<std::vector<double>>& plus_reps,
                       const std::vector<std::vector<double>>& minus_reps, int k) {
  std::vector<double> cands;
  for (int sign = 0; sign < 2; ++sign) {
    const auto& reps = sign == 0 ? plus_reps : minus_reps;
    double prev = 0.0;
    for (int i = 0; i < k; ++i) {
      std::vector<double> col;
      for (const auto& r : reps) col.push_back(r[i]);
      const double est = median(col);
      const double val = std::sqrt(std::max(0.0, est - prev));
      prev = est;
      cands.push_back(sign == 0 ? val : -val);
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](double a, double b) { return std::abs(a) > std::abs(b); });
  cands.resize(k);
  EigenEstimate e;
  e.values = cands;
  return e;
}

}  // namespace

double estimate_Akplus_sq(const VmvOracle& op, int k, double eps, double delta,
                          std::uint64_t seed, const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "estimate_Akplus_sq: eps must be in (0,1)");
  require(delta > 0.0 && delta < 1.0, "estimate_Akplus_sq: delta must be in (0,1)");
  require(k >= 1, "estimate_Akplus_sq: k must be positive");
  const SketchDims dims = sketch_dims(op.dim(), k, eps, c);
  const int reps = spectrum_repetitions(delta, c);
  Rng root(seed);
  std::vector<double> ests;
  for (int r = 0; r < reps; ++r) {
    Rng rng = root.split(r);
    SpectrumSketch sk = build_spectrum_sketch(op, dims.m, dims.rows, rng.bits());
    // ‖A − A_{k,+}‖² from the fit, ‖A‖² from ‖Q‖²; the part of ‖Q‖² outside
    // the projected block cancels between the two.
    PsdFit fit = psd_rank_k_fit(sk.M1, sk.M2, -sk.Q, std::min<int>(k, sk.M1.cols()), rng.bits());
    ests.push_back(sk.Q.squaredNorm() - fit.cost);
  }
  return median(ests);
}

EigenEstimate top_eigs_signed(const VmvOracle& op, int k, double eps, std::uint64_t seed,
                              const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "top_eigs_signed: eps must be in (0,1)");
  require(k >= 1, "top_eigs_signed: k must be positive");
  const std::int64_t q0 = op.vmv_queries();
  const double task_eps = eps * eps / 2.0;
  const SketchDims dims = sketch_dims(op.dim(), k, task_eps, c);
  const int reps = spectrum_repetitions(1.0 / (20.0 * k), c);
  const int kk = static_cast<int>(std::min<Index>(k, dims.m));
  Rng root(seed);
  std::vector<std::vector<double>> plus_reps, minus_reps;
  double frob2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = root.split(r);
    SpectrumSketch sk = build_spectrum_sketch(op, dims.m, dims.rows, rng.bits());
    ThinSvd s1 = thin_svd(sk.M1), s2 = thin_svd(sk.M2);
    const Matrix C = s1.U.transpose() * sk.Q * s2.U;
    std::vector<double> p, m;
    signed_estimates(s1.P, s2.P, C, kk, rng.bits(), p, m);
    p.resize(k, p.empty() ? 0.0 : p.back());
    m.resize(k, m.empty() ? 0.0 : m.back());
    plus_reps.push_back(p);
    minus_reps.push_back(m);
    frob2 += sk.Q.squaredNorm() / reps;
  }
  EigenEstimate e = assemble(plus_reps, minus_reps, k);
  e.error_bound = eps * std::sqrt(frob2);
  e.queries = op.vmv_queries() - q0;
  return e;
}

EigenEstimate top_eigs_signed_adaptive(const VmvOracle& op, int k, double eps,
                                       std::uint64_t seed, const Constants& c) {
  require(eps > 0.0 && eps < 1.0, "top_eigs_signed_adaptive: eps must be in (0,1)");
  require(k >= 1, "top_eigs_signed_adaptive: k must be positive");
  const std::int64_t q0 = op.vmv_queries();
  const Index d = op.dim();
  const double task_eps = eps * eps / 2.0;
  const SketchDims dims = sketch_dims(d, k, task_eps, c);
  const int reps = spectrum_repetitions(1.0 / (20.0 * k), c);
  const int kk = static_cast<int>(std::min<Index>(k, dims.m));
  Rng root(seed);
  std::vector<std::vector<double>> plus_reps, minus_reps;
  double frob2 = 0.0;
  std::int64_t round2 = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng = root.split(r);
    Matrix R = rng.gaussian_matrix(d, dims.m);
    Matrix S1, S2;
    if (dims.rows >= d) {
      S1 = Matrix::Identity(d, d);
      S2 = Matrix::Identity(d, d);
    } else {
      S1 = affine_embedding(dims.rows, d, rng.bits());
      S2 = affine_embedding(dims.rows, d, rng.bits());
    }
    // Round 1.
    Matrix M1 = op.bilinear_block(S1.transpose(), R);
    Matrix M2 = op.bilinear_block(S2.transpose(), R);
    ThinSvd s1 = thin_svd(M1), s2 = thin_svd(M2);

    // Round 2: Π1·Q·Π2 on the product of the two bases, then Frobenius
    // probes of the three residual blocks.
    const std::int64_t qa = op.vmv_queries();
    const Matrix X1 = S1.transpose() * s1.U;
    const Matrix X2 = S2.transpose() * s2.U;
    Matrix C = op.bilinear_block(X1, X2);
    const Matrix perp1 = Matrix::Identity(S1.rows(), S1.rows()) - s1.U * s1.U.transpose();
    const Matrix perp2 = Matrix::Identity(S2.rows(), S2.rows()) - s2.U * s2.U.transpose();
    auto block_frob2 = [&](const Matrix& L, const Matrix& Rt) {
      // L, Rt map sketch coordinates to R^d; estimate ‖Lᵀ A Rt‖²-style
      // block norms with 4×4 Gaussian probes, median of 5 means.
      std::vector<double> means;
      for (int t = 0; t < 5; ++t) {
        Matrix X = L * rng.gaussian_matrix(L.cols(), 4);
        Matrix Y = Rt * rng.gaussian_matrix(Rt.cols(), 4);
        means.push_back(op.bilinear_block(X, Y).squaredNorm() / 16.0);
      }
      return median(means);
    };
    const Matrix L1p = S1.transpose() * perp1;
    const Matrix L2p = S2.transpose() * perp2;
    const double resid = block_frob2(L1p, X2) + block_frob2(X1, L2p) + block_frob2(L1p, L2p);
    round2 += op.vmv_queries() - qa;

    std::vector<double> p, m;
    signed_estimates(s1.P, s2.P, C, kk, rng.bits(), p, m);
    p.resize(k, p.empty() ? 0.0 : p.back());
    m.resize(k, m.empty() ? 0.0 : m.back());
    plus_reps.push_back(p);
    minus_reps.push_back(m);
    frob2 += (C.squaredNorm() + resid) / reps;
  }
  EigenEstimate e = assemble(plus_reps, minus_reps, k);
  e.error_bound = eps * std::sqrt(frob2);
  e.queries = op.vmv_queries() - q0;
  e.round2_queries = round2;
  return e;
}

PythagoreanSplit pythagorean_split(const Matrix& M1, const Matrix& M2, const Matrix& B,
                                   const Matrix& Y) {
  ThinSvd s1 = thin_svd(M1), s2 = thin_svd(M2);
  const Matrix P1 = s1.U * s1.U.transpose();
  const Matrix P2 = s2.U * s2.U.transpose();
  const Matrix Q1 = Matrix::Identity(P1.rows(), P1.cols()) - P1;
  const Matrix Q2 = Matrix::Identity(P2.rows(), P2.cols()) - P2;
  PythagoreanSplit out;
  out.inner = (P1 * (M1 * Y * M2.transpose() - B) * P2).squaredNorm();
  out.left = (Q1 * B * P2).squaredNorm();
  out.right = (P1 * B * Q2).squaredNorm();
  out.corner = (Q1 * B * Q2).squaredNorm();
  return out;
}

}  // namespace psdprobe

namespace psdprobe {

namespace {

bool augment(int i, const std::vector<std::vector<int>>& adj, std::vector<int>& match,
             std::vector<char>& seen) {
  for (int j : adj[i]) {
    if (seen[j]) continue;
    seen[j] = 1;
    if (match[j] < 0 || augment(match[j], adj, match, seen)) {
      match[j] = i;
      return true;
    }
  }
  return false;
}

}  // namespace

GuaranteeCheck check_spectral_guarantee(const Vector& true_eigenvalues,
                                        const std::vector<double>& estimates, int k, double eps) {
  std::vector<double> ev(true_eigenvalues.data(), true_eigenvalues.data() + true_eigenvalues.size());
  std::stable_sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  const double frob = true_eigenvalues.norm();
  const double tol = eps * frob;
  const double lk = k <= static_cast<int>(ev.size()) ? std::abs(ev[k - 1]) : 0.0;
  GuaranteeCheck out;
  std::vector<double> qual;
  for (double l : ev)
    if (std::abs(l) >= lk + 2.0 * tol && std::abs(l) > 0.0) qual.push_back(l);
  out.qualifying = static_cast<int>(qual.size());
  if (qual.empty()) return out;

  std::vector<std::vector<int>> adj(qual.size());
  for (size_t i = 0; i < qual.size(); ++i)
    for (size_t j = 0; j < estimates.size(); ++j)
      if (std::abs(estimates[j] - qual[i]) <= tol) adj[i].push_back(static_cast<int>(j));
  std::vector<int> match(estimates.size(), -1);
  for (size_t i = 0; i < qual.size(); ++i) {
    std::vector<char> seen(estimates.size(), 0);
    if (!augment(static_cast<int>(i), adj, match, seen)) out.holds = false;
  }
  for (size_t j = 0; j < estimates.size(); ++j) {
    if (match[j] < 0) continue;
    const double l = qual[match[j]];
    out.max_error = std::max(out.max_error, std::abs(estimates[j] - l) / tol);
    if ((l > 0) != (estimates[j] > 0)) out.signs_ok = false;
  }
  return out;
}

}  // namespace psdprobe
