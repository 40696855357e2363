#include "psdprobe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

namespace psdprobe {

namespace {

void check_len(Index got, Index want, const char* what) {
  require(got == want, std::string(what) + ": dimension mismatch (" + std::to_string(got) +
                           " vs " + std::to_string(want) + ")");
}

}  // namespace

double VmvOracle::quad_form(const Vector& x) const {
  check_len(x.size(), dim(), "quad_form");
  vmv_.add(1);
  return eval_bilinear(x, x);
}

double VmvOracle::bilinear(const Vector& x, const Vector& y) const {
  check_len(x.size(), dim(), "bilinear");
  check_len(y.size(), dim(), "bilinear");
  vmv_.add(1);
  return eval_bilinear(x, y);
}

Matrix VmvOracle::bilinear_block(const Matrix& X, const Matrix& Y) const {
  check_len(X.rows(), dim(), "bilinear_block");
  check_len(Y.rows(), dim(), "bilinear_block");
  vmv_.add(static_cast<std::int64_t>(X.cols()) * Y.cols());
  return eval_block(X, Y);
}

Matrix VmvOracle::sketch_gram(const Matrix& X) const {
  check_len(X.rows(), dim(), "sketch_gram");
  const std::int64_t k = X.cols();
  vmv_.add(k * (k + 1) / 2);
  Matrix S = eval_gram(X);
  return 0.5 * (S + S.transpose());
}

Matrix VmvOracle::eval_block(const Matrix& X, const Matrix& Y) const {
  Matrix out(X.cols(), Y.cols());
  for (Index i = 0; i < X.cols(); ++i)
    for (Index j = 0; j < Y.cols(); ++j) out(i, j) = eval_bilinear(X.col(i), Y.col(j));
  return out;
}

Vector MvOracle::mat_vec(const Vector& v) const {
  check_len(v.size(), dim(), "mat_vec");
  mv_.add(1);
  return eval_mat_vec(v);
}

Matrix MvOracle::mat_mat(const Matrix& V) const {
  check_len(V.rows(), dim(), "mat_mat");
  mv_.add(V.cols());
  return eval_mat_mat(V);
}

Matrix MvOracle::eval_mat_mat(const Matrix& V) const {
  Matrix out(dim(), V.cols());
  for (Index j = 0; j < V.cols(); ++j) out.col(j) = eval_mat_vec(V.col(j));
  return out;
}

DenseOperator::DenseOperator(Matrix A, std::uint64_t seed) : seed_(seed) {
  require(A.rows() == A.cols(), "DenseOperator: matrix must be square");
  require(A.rows() >= 1, "DenseOperator: empty matrix");
  A_ = std::make_shared<const Matrix>(std::move(A));
}

DenseOperator DenseOperator::identity(Index d) { return DenseOperator(Matrix::Identity(d, d)); }

DenseOperator DenseOperator::diagonal(const Vector& diag) {
  return DenseOperator(Matrix(diag.asDiagonal()));
}

DenseOperator DenseOperator::zero(Index d) { return DenseOperator(Matrix::Zero(d, d)); }

DenseOperator DenseOperator::negated() const { return DenseOperator(-*A_, seed_); }

double DenseOperator::eval_bilinear(const Vector& x, const Vector& y) const {
  return x.dot(*A_ * y);
}

Matrix DenseOperator::eval_block(const Matrix& X, const Matrix& Y) const {
  return X.transpose() * (*A_ * Y);
}

Matrix DenseOperator::eval_gram(const Matrix& X) const { return X.transpose() * (*A_ * X); }

Vector DenseOperator::eval_mat_vec(const Vector& v) const { return *A_ * v; }

Matrix DenseOperator::eval_mat_mat(const Matrix& V) const { return *A_ * V; }

SketchedOperator::SketchedOperator(const VmvOracle& parent, Matrix G)
    : parent_(parent), G_(std::move(G)) {
  require(G_.rows() == parent.dim(), "SketchedOperator: sketch rows must equal parent dim");
  require(G_.cols() >= 1, "SketchedOperator: sketch needs at least one column");
  const double k = static_cast<double>(G_.cols()), d = static_cast<double>(G_.rows());
  auto* dense = dynamic_cast<const DenseOperator*>(&parent);
  if (dense && k * k <= 2.0 * d * k + d * d) {
    Matrix B = G_.transpose() * (dense->backing() * G_);
    cached_ = 0.5 * (B + B.transpose());
  }
}

double SketchedOperator::eval_bilinear(const Vector& x, const Vector& y) const {
  if (cached_) {
    parent_.vmv_.add(1);
    return x.dot(*cached_ * y);
  }
  return parent_.bilinear(G_ * x, G_ * y);
}

Matrix SketchedOperator::eval_block(const Matrix& X, const Matrix& Y) const {
  if (cached_) {
    parent_.vmv_.add(static_cast<std::int64_t>(X.cols()) * Y.cols());
    return X.transpose() * (*cached_ * Y);
  }
  return parent_.bilinear_block(G_ * X, G_ * Y);
}

Matrix SketchedOperator::eval_gram(const Matrix& X) const {
  if (cached_) {
    const std::int64_t k = X.cols();
    parent_.vmv_.add(k * (k + 1) / 2);
    return X.transpose() * (*cached_ * X);
  }
  return parent_.sketch_gram(G_ * X);
}

AffineShiftOperator::AffineShiftOperator(const VmvOracle& parent, double scale, double shift)
    : parent_(parent), scale_(scale), shift_(shift) {}

double AffineShiftOperator::eval_bilinear(const Vector& x, const Vector& y) const {
  return scale_ * parent_.bilinear(x, y) + shift_ * x.dot(y);
}

Matrix AffineShiftOperator::eval_block(const Matrix& X, const Matrix& Y) const {
  return scale_ * parent_.bilinear_block(X, Y) + shift_ * (X.transpose() * Y);
}

Matrix AffineShiftOperator::eval_gram(const Matrix& X) const {
  return scale_ * parent_.sketch_gram(X) + shift_ * (X.transpose() * X);
}

namespace {

// Thin Q factor of a d×r Gaussian with the sign of R's diagonal folded in.
Matrix haar_columns(Index d, Index r, Rng& rng) {
  Matrix G = rng.gaussian_matrix(d, r);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, r);
  const Matrix& R = qr.matrixQR();
  for (Index j = 0; j < r; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

}  // namespace

Matrix haar_orthogonal(Index d, Rng& rng) { return haar_columns(d, d, rng); }

DenseOperator gen_rotated_diag(const SpectrumInstance& inst) {
  const Index d = static_cast<Index>(inst.eigenvalues.size());
  require(d >= 1, "gen_rotated_diag: need d >= 1");
  Rng rng(inst.rotation_seed);

  // Split off the most frequent eigenvalue c as c·I; only the remaining r
  // directions need random basis vectors. The first r columns of a Haar
  // matrix are distributed like this thin factor, so the law is unchanged.
  std::map<double, Index> freq;
  for (double l : inst.eigenvalues) ++freq[l];
  double c = 0.0;
  Index best = 0;
  for (auto& [val, n] : freq)
    if (n > best) {
      best = n;
      c = val;
    }
  std::vector<double> rest;
  for (double l : inst.eigenvalues)
    if (l != c) rest.push_back(l - c);

  Matrix A = c * Matrix::Identity(d, d);
  const Index r = static_cast<Index>(rest.size());
  if (r > 0) {
    Matrix Q = haar_columns(d, r, rng);
    Vector D = Eigen::Map<const Vector>(rest.data(), r);
    A.noalias() += Q * D.asDiagonal() * Q.transpose();
  }
  Matrix sym = 0.5 * (A + A.transpose());
  return DenseOperator(std::move(sym), inst.rotation_seed);
}

DenseOperator gen_wishart(Index d, std::uint64_t seed) {
  require(d >= 1, "gen_wishart: need d >= 1");
  Rng rng(seed);
  Matrix X = rng.gaussian_matrix(d, d) / std::sqrt(static_cast<double>(d));
  Matrix W = X * X.transpose();
  Matrix sym = 0.5 * (W + W.transpose());
  return DenseOperator(std::move(sym), seed);
}

DenseOperator gen_spiked_sym(Index d, double s, double shift, std::uint64_t seed) {
  require(d >= 1, "gen_spiked_sym: need d >= 1");
  require(s >= 0.0, "gen_spiked_sym: need s >= 0");
  Rng rng(seed);
  Matrix M = rng.gaussian_matrix(d, d);
  Vector u = rng.gaussian_vector(d);
  Vector v = rng.gaussian_vector(d);
  M.noalias() += s * u * v.transpose();
  Matrix A = Matrix::Zero(2 * d, 2 * d);
  A.topRightCorner(d, d) = M;
  A.bottomLeftCorner(d, d) = M.transpose();
  A.diagonal().array() += shift;
  return DenseOperator(std::move(A), seed);
}

std::string InstanceDescriptor::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["dim"] = dim;
  if (!eigenvalues.empty()) j["eigenvalues"] = eigenvalues;
  if (family) j["family"] = *family;
  if (kind == "spiked") {
    j["s"] = s;
    j["shift"] = shift;
  }
  j["seed"] = seed;
  return j.dump();
}

InstanceDescriptor InstanceDescriptor::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("instance descriptor: ") + e.what());
  }
  InstanceDescriptor d;
  d.kind = j.value("kind", std::string("rotated_diag"));
  require(d.kind == "rotated_diag" || d.kind == "wishart" || d.kind == "spiked",
          "instance descriptor: unknown kind '" + d.kind + "'");
  d.dim = j.value("dim", Index{0});
  if (j.contains("eigenvalues")) d.eigenvalues = j["eigenvalues"].get<std::vector<double>>();
  if (j.contains("family")) d.family = j["family"].get<std::string>();
  d.s = j.value("s", 0.0);
  d.shift = j.value("shift", 0.0);
  d.seed = j.value("seed", std::uint64_t{0});
  if (d.dim == 0 && !d.eigenvalues.empty()) d.dim = static_cast<Index>(d.eigenvalues.size());
  require(d.dim >= 1, "instance descriptor: dim must be positive");
  if (d.kind == "rotated_diag" && !d.family)
    require(static_cast<Index>(d.eigenvalues.size()) == d.dim,
            "instance descriptor: eigenvalues must have length dim");
  return d;
}

double schatten_norm(const Vector& ev, double p) {
  if (std::isinf(p)) return ev.cwiseAbs().maxCoeff();
  if (p == 1.0) return ev.cwiseAbs().sum();
  if (p == 2.0) return ev.norm();
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) s += std::pow(std::abs(ev[i]), p);
  return std::pow(s, 1.0 / p);
}

namespace {

// Scale a positive profile so its ℓp mass equals `mass` (the p-th power
// budget left after the negative eigenvalue).
void scale_profile(std::vector<double>& pos, double p, double mass) {
  if (pos.empty()) return;
  if (std::isinf(p)) {
    double mx = *std::max_element(pos.begin(), pos.end());
    for (double& x : pos) x /= mx;
    return;
  }
  double s = 0.0;
  for (double x : pos) s += std::pow(x, p);
  double f = std::pow(mass / s, 1.0 / p);
  for (double& x : pos) x *= f;
}

}  // namespace

std::vector<double> make_family_spectrum(const std::string& family, Index d, double eps,
                                         double p, std::uint64_t seed) {
  require(d >= 1, "make_family_spectrum: need d >= 1");
  std::vector<double> ev;
  if (family == "identity") return std::vector<double>(d, 1.0);
  if (family == "uniform_psd") {
    Rng rng(seed ^ 0x5bd1e995ULL);
    for (Index i = 0; i < d; ++i) ev.push_back(rng.uniform());
    return ev;
  }
  const bool far = family == "far_flat" || family == "far_harmonic";
  const bool gap = family == "gap";
  require(far || gap, "make_family_spectrum: unknown family '" + family + "'");
  require(d >= 2, "make_family_spectrum: far families need d >= 2");
  require(eps > 0.0 && eps < 1.0, "make_family_spectrum: eps must be in (0,1)");
  const double neg = gap ? 0.5 * eps : eps;
  std::vector<double> pos(d - 1);
  for (Index i = 0; i < d - 1; ++i)
    pos[i] = family == "far_harmonic" ? 1.0 / static_cast<double>(i + 1) : 1.0;
  // ‖A‖_p = 1 after scaling, so λ_min = −neg·‖A‖_p.
  double mass = std::isinf(p) ? 1.0 : 1.0 - std::pow(neg, p);
  scale_profile(pos, p, mass);
  ev.push_back(-neg);
  ev.insert(ev.end(), pos.begin(), pos.end());
  return ev;
}

DenseOperator make_instance(const InstanceDescriptor& desc, double eps, double p) {
  if (desc.kind == "wishart") return gen_wishart(desc.dim, desc.seed);
  if (desc.kind == "spiked") return gen_spiked_sym(desc.dim, desc.s, desc.shift, desc.seed);
  SpectrumInstance inst;
  inst.rotation_seed = desc.seed;
  inst.eigenvalues = desc.family ? make_family_spectrum(*desc.family, desc.dim, eps, p, desc.seed)
                                 : desc.eigenvalues;
  return gen_rotated_diag(inst);
}

}  // namespace psdprobe
