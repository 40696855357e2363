#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "psdprobe/rng.hpp"

namespace psdprobe {

class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

// Copyable atomic tally. Copies snapshot the current value.
class QueryCounter {
 public:
  QueryCounter() = default;
  QueryCounter(const QueryCounter& o) : n_(o.load()) {}
  QueryCounter& operator=(const QueryCounter& o) {
    n_.store(o.load());
    return *this;
  }
  void add(std::int64_t k) const { n_.fetch_add(k, std::memory_order_relaxed); }
  std::int64_t load() const { return n_.load(std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::int64_t> n_{0};
};

// Vector-matrix-vector access. Every scalar xᵀAy handed back costs one query;
// the block helpers are conveniences that are charged per returned entry.
class VmvOracle {
 public:
  virtual ~VmvOracle() = default;

  virtual Index dim() const = 0;

  double quad_form(const Vector& x) const;
  double bilinear(const Vector& x, const Vector& y) const;
  // XᵀAY, charged rows(Xᵀ)·cols(Y) queries.
  Matrix bilinear_block(const Matrix& X, const Matrix& Y) const;
  // XᵀAX, charged k(k+1)/2 queries (the distinct entries of a symmetric k×k).
  Matrix sketch_gram(const Matrix& X) const;

  std::int64_t vmv_queries() const { return vmv_.load(); }

 protected:
  friend class SketchedOperator;
  virtual double eval_bilinear(const Vector& x, const Vector& y) const = 0;
  virtual Matrix eval_block(const Matrix& X, const Matrix& Y) const;
  virtual Matrix eval_gram(const Matrix& X) const { return eval_block(X, X); }

 private:
  QueryCounter vmv_;
};

// Matrix-vector access: one query per product Av.
class MvOracle {
 public:
  virtual ~MvOracle() = default;

  virtual Index dim() const = 0;

  Vector mat_vec(const Vector& v) const;
  // AV, charged one query per column.
  Matrix mat_mat(const Matrix& V) const;

  std::int64_t mv_queries() const { return mv_.load(); }

 protected:
  virtual Vector eval_mat_vec(const Vector& v) const = 0;
  virtual Matrix eval_mat_mat(const Matrix& V) const;

 private:
  QueryCounter mv_;
};

// A hidden dense symmetric matrix behind both query models.
class DenseOperator final : public VmvOracle, public MvOracle {
 public:
  DenseOperator(Matrix A, std::uint64_t seed = 0);

  static DenseOperator identity(Index d);
  static DenseOperator diagonal(const Vector& diag);
  static DenseOperator zero(Index d);

  Index dim() const override { return A_->rows(); }
  std::uint64_t seed() const { return seed_; }

  // Uncounted access for ground truth and test re-checks only.
  const Matrix& backing() const { return *A_; }
  double peek_quad_form(const Vector& x) const { return x.dot(*A_ * x); }
  DenseOperator negated() const;

 protected:
  double eval_bilinear(const Vector& x, const Vector& y) const override;
  Matrix eval_block(const Matrix& X, const Matrix& Y) const override;
  Matrix eval_gram(const Matrix& X) const override;
  Vector eval_mat_vec(const Vector& v) const override;
  Matrix eval_mat_mat(const Matrix& V) const override;

 private:
  std::shared_ptr<const Matrix> A_;
  std::uint64_t seed_;
};

// GᵀAG seen through the parent: each query here is one parent query on
// (Gx, Gy). Over a dense parent the m×m product is formed once and the
// parent is charged per query without re-multiplying by G.
class SketchedOperator final : public VmvOracle {
 public:
  SketchedOperator(const VmvOracle& parent, Matrix G);

  Index dim() const override { return G_.cols(); }
  const Matrix& sketch() const { return G_; }
  Vector pullback(const Vector& w) const { return G_ * w; }

 protected:
  double eval_bilinear(const Vector& x, const Vector& y) const override;
  Matrix eval_block(const Matrix& X, const Matrix& Y) const override;
  Matrix eval_gram(const Matrix& X) const override;

 private:
  const VmvOracle& parent_;
  Matrix G_;
  std::optional<Matrix> cached_;
};

// scale·B + shift·I over a parent B; the identity part costs nothing.
class AffineShiftOperator final : public VmvOracle {
 public:
  AffineShiftOperator(const VmvOracle& parent, double scale, double shift);

  Index dim() const override { return parent_.dim(); }
  double scale() const { return scale_; }
  double shift() const { return shift_; }

 protected:
  double eval_bilinear(const Vector& x, const Vector& y) const override;
  Matrix eval_block(const Matrix& X, const Matrix& Y) const override;
  Matrix eval_gram(const Matrix& X) const override;

 private:
  const VmvOracle& parent_;
  double scale_;
  double shift_;
};

struct SpectrumInstance {
  std::vector<double> eigenvalues;
  std::uint64_t rotation_seed = 0;
};

// Haar-random orthogonal matrix: QR of a Gaussian with sign-fixed R diagonal.
Matrix haar_orthogonal(Index d, Rng& rng);

DenseOperator gen_rotated_diag(const SpectrumInstance& inst);
DenseOperator gen_wishart(Index d, std::uint64_t seed);
DenseOperator gen_spiked_sym(Index d, double s, double shift, std::uint64_t seed);

// JSON-serializable instance descriptor. `family` names a parametrized
// spectrum (see make_family_spectrum); otherwise `eigenvalues` is used.
struct InstanceDescriptor {
  std::string kind = "rotated_diag";
  Index dim = 0;
  std::vector<double> eigenvalues;
  std::optional<std::string> family;
  double s = 0.0;
  double shift = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static InstanceDescriptor from_json(const std::string& text);
};

// Named spectra used by the harness. Families: identity, uniform_psd,
// far_flat, far_harmonic, gap. Far families satisfy λ_min = −eps·‖A‖_p
// exactly; gap sits at half that depth.
std::vector<double> make_family_spectrum(const std::string& family, Index d, double eps,
                                         double p, std::uint64_t seed);

DenseOperator make_instance(const InstanceDescriptor& desc, double eps = 0.1, double p = 1.0);

double schatten_norm(const Vector& eigenvalues, double p);

}  // namespace psdprobe
