#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "psdprobe/kernels.hpp"
#include "psdprobe/oracle.hpp"

using namespace psdprobe;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

DenseOperator random_sym(Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X = rng.gaussian_matrix(d, d);
  return DenseOperator(0.5 * (X + X.transpose()), seed);
}

}  // namespace

TEST(MatVec, Identity) {
  auto op = DenseOperator::identity(3);
  Vector y = op.mat_vec(vec({1, 2, 3}));
  EXPECT_EQ(y, vec({1, 2, 3}));
  EXPECT_EQ(op.mv_queries(), 1);
  EXPECT_EQ(op.vmv_queries(), 0);
}

TEST(MatVec, Diagonal) {
  auto op = DenseOperator::diagonal(vec({2, -3}));
  EXPECT_EQ(op.mat_vec(vec({0, 1})), vec({0, -3}));
}

TEST(MatVec, RotatedEigenvector) {
  auto op = gen_rotated_diag({{-1, 1, 1}, 7});
  auto eig = sym_eig_small(op.backing());
  Vector v = eig.vectors.col(0);
  EXPECT_NEAR(eig.values(0), -1.0, 1e-9);
  EXPECT_LT((op.mat_vec(v) + v).norm(), 1e-9);
}

TEST(MatVec, DimensionMismatch) {
  auto op = DenseOperator::identity(3);
  EXPECT_THROW(op.mat_vec(vec({1, 2})), ContractViolation);
  EXPECT_THROW(op.quad_form(vec({1})), ContractViolation);
  EXPECT_THROW(op.bilinear(vec({1, 2, 3}), vec({1})), ContractViolation);
}

TEST(QuadForm, Examples) {
  EXPECT_DOUBLE_EQ(DenseOperator::identity(2).quad_form(vec({3, 4})), 25.0);
  EXPECT_DOUBLE_EQ(DenseOperator::diagonal(vec({1, -1})).quad_form(vec({1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(DenseOperator::diagonal(vec({1, 2})).quad_form(vec({1, 1})), 3.0);
}

TEST(QuadForm, ZeroVectorIsCounted) {
  auto op = DenseOperator::identity(4);
  EXPECT_EQ(op.quad_form(Vector::Zero(4)), 0.0);
  EXPECT_EQ(op.vmv_queries(), 1);
}

TEST(Bilinear, Examples) {
  EXPECT_DOUBLE_EQ(DenseOperator::identity(2).bilinear(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(DenseOperator::diagonal(vec({1, 2})).bilinear(vec({1, 1}), vec({1, -1})), -1.0);
}

TEST(Bilinear, PolarizationAndSymmetry) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    auto op = random_sym(8, 3 + t);
    Rng rng(1000 + t);
    Vector x = rng.gaussian_vector(8), y = rng.gaussian_vector(8);
    double b = op.bilinear(x, y);
    double pol = 0.5 * (op.quad_form(x + y) - op.quad_form(x) - op.quad_form(y));
    double scale = std::max(1.0, std::abs(b));
    EXPECT_NEAR(b, pol, 1e-9 * scale);
    EXPECT_NEAR(b, op.bilinear(y, x), 1e-12 * scale);
    EXPECT_EQ(op.vmv_queries(), 5);
  }
}

TEST(Counting, BlockHelpersChargePerEntry) {
  auto op = random_sym(6, 1);
  Rng rng(2);
  Matrix X = rng.gaussian_matrix(6, 3), Y = rng.gaussian_matrix(6, 2);
  Matrix B = op.bilinear_block(X, Y);
  EXPECT_EQ(op.vmv_queries(), 6);
  EXPECT_LT((B - X.transpose() * op.backing() * Y).norm(), 1e-12);
  Matrix S = op.sketch_gram(X);
  EXPECT_EQ(op.vmv_queries(), 6 + 6);
  EXPECT_LT((S - S.transpose()).norm(), 1e-15);
  op.mat_mat(X);
  EXPECT_EQ(op.mv_queries(), 3);
}

TEST(Counting, SketchedChargesParent) {
  auto op = random_sym(10, 4);
  Rng rng(5);
  Matrix G = rng.gaussian_matrix(10, 4);
  SketchedOperator sk(op, G);
  Vector x = rng.gaussian_vector(4), y = rng.gaussian_vector(4);
  double v = sk.bilinear(x, y);
  EXPECT_NEAR(v, (G * x).dot(op.backing() * (G * y)), 1e-10);
  EXPECT_EQ(sk.vmv_queries(), 1);
  EXPECT_EQ(op.vmv_queries(), 1);
  sk.sketch_gram(Matrix::Identity(4, 4));
  EXPECT_EQ(op.vmv_queries(), 11);
}

TEST(Counting, AffineShift) {
  auto op = DenseOperator::diagonal(vec({1, 2, 3}));
  AffineShiftOperator sh(op, 2.0, -1.0);
  EXPECT_DOUBLE_EQ(sh.quad_form(vec({0, 1, 0})), 3.0);
  EXPECT_EQ(op.vmv_queries(), 1);
}

TEST(Symmetry, BackingIsSymmetric) {
  for (auto op : {gen_wishart(30, 1), gen_rotated_diag({{-1, 0.5, 2, 3}, 9}),
                  gen_spiked_sym(10, 1.0, 0.0, 2)}) {
    const Matrix& A = op.backing();
    EXPECT_LE((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GenRotatedDiag, IsotropicIsIdentity) {
  auto op = gen_rotated_diag({{1, 1, 1}, 123});
  EXPECT_EQ(op.backing(), Matrix::Identity(3, 3));
}

TEST(GenRotatedDiag, LambdaMin) {
  auto op = gen_rotated_diag({{-0.5, 1, 1, 1}, 11});
  EXPECT_NEAR(lambda_min(op.backing()), -0.5, 1e-9);
}

TEST(GenRotatedDiag, SpectrumRealization) {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    Index d = 2 + static_cast<Index>(rng.uniform() * 40);
    std::vector<double> ev(static_cast<std::size_t>(d));
    for (auto& e : ev) e = rng.gaussian();
    if (t % 2 == 0) ev[1] = ev[0];
    auto op = gen_rotated_diag({ev, static_cast<std::uint64_t>(t)});
    Vector got = eigenvalues_of(op.backing());
    std::sort(ev.begin(), ev.end());
    for (Index i = 0; i < d; ++i)
      EXPECT_NEAR(got(i), ev[static_cast<std::size_t>(i)],
                  1e-9 * std::max(1.0, std::abs(ev[static_cast<std::size_t>(i)])));
  }
}

TEST(GenRotatedDiag, HardInstanceSpectrum) {
  const Index d = 16;
  const double eps = 0.1, p = 2.0;
  std::vector<double> ev(d, 1.0);
  ev[0] = -eps * std::pow(static_cast<double>(d), 1.0 / p);
  auto op = gen_rotated_diag({ev, 5});
  EXPECT_NEAR(lambda_min(op.backing()), ev[0], 1e-9);
}

TEST(GenWishart, Scalar) {
  auto op = gen_wishart(1, 42);
  EXPECT_GE(op.backing()(0, 0), 0.0);
}

TEST(GenWishart, Bounds) {
  auto op = gen_wishart(50, 1);
  Vector ev = eigenvalues_of(op.backing());
  EXPECT_GE(ev(0), -1e-12);
  EXPECT_LE(ev(ev.size() - 1), 5.0);
}

TEST(GenWishart, ShiftedInstanceIsNotPsd) {
  const Index d = 20;
  auto W = gen_wishart(d, 3);
  double t = 1.0 / (2.0 * d * d);
  double lmin = lambda_min(W.backing() - t * Matrix::Identity(d, d));
  EXPECT_NEAR(lmin, lambda_min(W.backing()) - t, 1e-12);
}

TEST(GenSpiked, NullBlock) {
  auto op = gen_spiked_sym(1, 0.0, 0.0, 8);
  const Matrix& A = op.backing();
  ASSERT_EQ(A.rows(), 2);
  EXPECT_EQ(A(0, 0), 0.0);
  EXPECT_EQ(A(1, 1), 0.0);
  Vector ev = eigenvalues_of(A);
  EXPECT_NEAR(ev(0), -std::abs(A(0, 1)), 1e-12);
  EXPECT_NEAR(ev(1), std::abs(A(0, 1)), 1e-12);
}

TEST(GenSpiked, ShiftedNullIsPsd) {
  const Index d = 100;
  const double shift = 2.1 * std::sqrt(static_cast<double>(d));
  int psd = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
    if (lambda_min(gen_spiked_sym(d, 0.0, shift, s).backing()) >= 0.0) ++psd;
  EXPECT_GE(psd, 99);
}

TEST(GenSpiked, SpikeIsFar) {
  const Index d = 100;
  const double shift = 2.1 * std::sqrt(static_cast<double>(d));
  for (std::uint64_t s = 0; s < 10; ++s)
    EXPECT_LE(lambda_min(gen_spiked_sym(d, 1.0, shift, s).backing()), -0.5 * d + shift);
}

TEST(Determinism, SameSeedSameOperator) {
  EXPECT_EQ(gen_wishart(16, 9).backing(), gen_wishart(16, 9).backing());
  EXPECT_EQ(gen_rotated_diag({{-1, 2, 3, 4}, 4}).backing(),
            gen_rotated_diag({{-1, 2, 3, 4}, 4}).backing());
  EXPECT_EQ(gen_spiked_sym(8, 1.0, 0.5, 3).backing(), gen_spiked_sym(8, 1.0, 0.5, 3).backing());
}

TEST(Descriptor, JsonRoundTrip) {
  InstanceDescriptor d;
  d.kind = "rotated_diag";
  d.dim = 4;
  d.eigenvalues = {-0.5, 1, 1, 1};
  d.seed = 11;
  auto back = InstanceDescriptor::from_json(d.to_json());
  EXPECT_EQ(back.kind, d.kind);
  EXPECT_EQ(back.dim, d.dim);
  EXPECT_EQ(back.eigenvalues, d.eigenvalues);
  EXPECT_EQ(back.seed, d.seed);
  EXPECT_EQ(make_instance(back).backing(), make_instance(d).backing());
}

TEST(Descriptor, FarFamiliesHitTheirDepth) {
  for (double p : {1.0, 2.0}) {
    for (const char* fam : {"far_flat", "far_harmonic"}) {
      auto ev = make_family_spectrum(fam, 64, 0.1, p, 3);
      Vector v = Eigen::Map<const Vector>(ev.data(), static_cast<Index>(ev.size()));
      EXPECT_NEAR(v.minCoeff(), -0.1 * schatten_norm(v, p), 1e-12);
    }
  }
}
