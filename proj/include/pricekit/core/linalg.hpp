#pragma once

#include "pricekit/core/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <initializer_list>
#include <vector>

namespace pricekit::linalg {

using ColMajorSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

inline SparseMatrix identity(Index n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

inline SparseMatrix zeros(Index rows, Index cols) { return SparseMatrix(rows, cols); }

inline SparseMatrix diagonal(const Vector& v) {
  SparseMatrix m(v.size(), v.size());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) t.emplace_back(i, i, v[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SparseMatrix from_dense(const DenseMatrix& d, double drop = 0.0) {
  SparseMatrix m(d.rows(), d.cols());
  std::vector<Triplet> t;
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      if (!(std::abs(d(i, j)) <= drop)) t.emplace_back(i, j, d(i, j));  // keeps NaN for later checks
    }
  }
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Appends the nonzeros of m to t, shifted by (row0, col0) and scaled.
inline void append_triplets(std::vector<Triplet>& t, const SparseMatrix& m, Index row0, Index col0,
                            double scale = 1.0) {
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
    }
  }
}

/// Stacks matrices with equal column count on top of each other.
inline SparseMatrix vstack(std::initializer_list<const SparseMatrix*> blocks) {
  Index rows = 0;
  Index cols = -1;
  Index nnz = 0;
  for (const auto* b : blocks) {
    if (b->rows() == 0 && b->cols() == 0) continue;
    if (cols < 0) cols = b->cols();
    require(b->cols() == cols, ErrorCode::DimensionMismatch, "vstack column count");
    rows += b->rows();
    nnz += b->nonZeros();
  }
  if (cols < 0) cols = 0;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  Index r0 = 0;
  for (const auto* b : blocks) {
    if (b->rows() == 0 && b->cols() == 0) continue;
    append_triplets(t, *b, r0, 0);
    r0 += b->rows();
  }
  SparseMatrix out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline Vector vconcat(std::initializer_list<const Vector*> parts) {
  Index n = 0;
  for (const auto* p : parts) n += p->size();
  Vector out(n);
  Index k = 0;
  for (const auto* p : parts) {
    out.segment(k, p->size()) = *p;
    k += p->size();
  }
  return out;
}

inline double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

/// Heuristic for switching matrix kernels to dense BLAS-style routines.
inline bool prefer_dense(Index rows, Index cols, Index nnz) {
  if (cols == 0) return true;
  if (cols <= 120) return true;
  if (cols > 2500) return false;
  const double density = static_cast<double>(nnz) / (static_cast<double>(std::max<Index>(rows, 1)) * cols);
  return density > 0.05;
}

/// A symmetric matrix held in whichever representation its producer chose.
struct SymmetricMatrix {
  bool dense = true;
  DenseMatrix full;     // used when dense
  ColMajorSparse lower; // full symmetric pattern when sparse

  Index size() const { return dense ? full.rows() : lower.rows(); }

  Vector multiply(const Vector& x) const {
    if (dense) return full * x;
    return lower * x;
  }

  DenseMatrix to_dense() const { return dense ? full : DenseMatrix(lower); }

  void add_diagonal(const Vector& d) {
    if (dense) {
      full.diagonal() += d;
      return;
    }
    for (Index j = 0; j < lower.outerSize(); ++j) {
      bool found = false;
      for (ColMajorSparse::InnerIterator it(lower, j); it; ++it) {
        if (it.row() == j) {
          it.valueRef() += d[j];
          found = true;
        }
      }
      require(found, ErrorCode::InvalidArgument, "sparse symmetric matrix lacks a structural diagonal");
    }
  }
};

/// A linear map y = M x that keeps both a CSR form and, when profitable, a dense copy.
class LinearMap {
 public:
  LinearMap() = default;

  explicit LinearMap(SparseMatrix m, std::optional<bool> force_dense = std::nullopt) : sparse_(std::move(m)) {
    sparse_.makeCompressed();
    dense_mode_ = force_dense.value_or(prefer_dense(sparse_.rows(), sparse_.cols(), sparse_.nonZeros()));
    if (dense_mode_) dense_ = DenseMatrix(sparse_);
  }

  Index rows() const { return sparse_.rows(); }
  Index cols() const { return sparse_.cols(); }
  bool dense() const { return dense_mode_; }
  const SparseMatrix& sparse() const { return sparse_; }
  const DenseMatrix& dense_matrix() const { return dense_; }

  Vector apply(const Vector& x) const {
    if (rows() == 0) return Vector::Zero(0);
    if (dense_mode_) return dense_ * x;
    return sparse_ * x;
  }

  Vector apply_transpose(const Vector& y) const {
    if (rows() == 0) return Vector::Zero(cols());
    if (dense_mode_) return dense_.transpose() * y;
    return sparse_.transpose() * y;
  }

  /// Returns M^T diag(w) M with w >= 0.
  SymmetricMatrix gram(const Vector& w) const {
    SymmetricMatrix g;
    g.dense = dense_mode_;
    if (dense_mode_) {
      g.full = DenseMatrix::Zero(cols(), cols());
      if (rows() > 0) {
        const DenseMatrix scaled = w.cwiseSqrt().asDiagonal() * dense_;
        g.full.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
        g.full.triangularView<Eigen::StrictlyUpper>() = g.full.transpose();
      }
      return g;
    }
    ColMajorSparse m = sparse_;
    ColMajorSparse wm = w.asDiagonal() * m;
    g.lower = ColMajorSparse(m.transpose()) * wm;
    // Keep a structural diagonal so regularization can be added in place.
    ColMajorSparse eye(cols(), cols());
    eye.setIdentity();
    g.lower = g.lower + 0.0 * eye;
    g.lower.makeCompressed();
    return g;
  }

 private:
  SparseMatrix sparse_;
  DenseMatrix dense_;
  bool dense_mode_ = true;
};

/// Factorization of a symmetric matrix. The sparse path keeps its symbolic analysis and reuses it
/// whenever the same sparsity pattern is factorized again.
class SymmetricSolver {
 public:
  bool factorize(const SymmetricMatrix& m) {
    dense_ = m.dense;
    size_ = m.size();
    if (dense_) {
      llt_.compute(m.full);
      if (llt_.info() == Eigen::Success) {
        use_ldlt_ = false;
        return ok_ = true;
      }
      ldlt_.compute(m.full);
      use_ldlt_ = true;
      return ok_ = (ldlt_.info() == Eigen::Success);
    }
    if (!same_pattern(m.lower)) {
      sparse_ldlt_.analyzePattern(m.lower);
      store_pattern(m.lower);
      ++symbolic_count_;
    }
    sparse_ldlt_.factorize(m.lower);
    return ok_ = (sparse_ldlt_.info() == Eigen::Success);
  }

  Vector solve(const Vector& b) const {
    if (size_ == 0) return Vector::Zero(0);
    if (dense_) return use_ldlt_ ? Vector(ldlt_.solve(b)) : Vector(llt_.solve(b));
    return sparse_ldlt_.solve(b);
  }

  bool ok() const { return ok_; }
  /// Number of symbolic analyses performed so far.
  int symbolic_count() const { return symbolic_count_; }

 private:
  bool same_pattern(const ColMajorSparse& m) const {
    if (pattern_outer_.empty()) return false;
    if (m.rows() != pattern_rows_ || m.nonZeros() != static_cast<Index>(pattern_inner_.size())) return false;
    return std::equal(pattern_outer_.begin(), pattern_outer_.end(), m.outerIndexPtr()) &&
           std::equal(pattern_inner_.begin(), pattern_inner_.end(), m.innerIndexPtr());
  }

  void store_pattern(const ColMajorSparse& m) {
    pattern_rows_ = m.rows();
    pattern_outer_.assign(m.outerIndexPtr(), m.outerIndexPtr() + m.outerSize() + 1);
    pattern_inner_.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  }

  bool dense_ = true;
  bool use_ldlt_ = false;
  bool ok_ = false;
  Index size_ = 0;
  Eigen::LLT<DenseMatrix> llt_;
  Eigen::LDLT<DenseMatrix> ldlt_;
  Eigen::SimplicialLDLT<ColMajorSparse, Eigen::Lower, Eigen::AMDOrdering<int>> sparse_ldlt_;
  Index pattern_rows_ = -1;
  std::vector<int> pattern_outer_;
  std::vector<int> pattern_inner_;
  int symbolic_count_ = 0;
};

/// Solves the saddle-point system
///   [ H  A^T ] [x]   [r1]
///   [ A  -D  ] [y] = [r2]
/// through a regularized factorization followed by iterative refinement against the exact system.
class KktSolver {
 public:
  bool factorize(const SymmetricMatrix& h, const LinearMap& a, const Vector& d, double reg) {
    h_ = &h;
    a_ = &a;
    d_ = d;
    reg_ = reg;
    const Index n = h.size();
    const Index k = a.rows();
    if (!h.dense) return factorize_sparse_kkt(h, a, d, reg);
    DenseMatrix hr = h.full;
    hr.diagonal().array() += reg;
    if (k == 0) {
      mode_ = Mode::HessianOnly;
      SymmetricMatrix hm;
      hm.full = std::move(hr);
      if (!h_solver_.factorize(hm)) return ok_ = false;
      return ok_ = true;
    }
    // The saddle-point matrix is indefinite and, with a singular H block, badly scaled for a
    // Schur complement; a pivoted LU of the whole matrix stays accurate.
    mode_ = Mode::DenseKkt;
    const DenseMatrix ad = a.dense() ? a.dense_matrix() : DenseMatrix(a.sparse());
    const double hmax = std::max(hr.diagonal().cwiseAbs().maxCoeff(), reg);
    const double amax = ad.rowwise().squaredNorm().maxCoeff();
    const double dreg = std::min(reg, 1e-14 * std::max(amax / std::max(hmax, 1e-300), 1e-300));
    DenseMatrix kkt(n + k, n + k);
    kkt.topLeftCorner(n, n) = hr;
    kkt.topRightCorner(n, k) = ad.transpose();
    kkt.bottomLeftCorner(k, n) = ad;
    kkt.bottomRightCorner(k, k) = DenseMatrix((-(d.array() + dreg)).matrix().asDiagonal());
    dense_lu_.compute(kkt);
    if (!std::isfinite(dense_lu_.rcond()) || dense_lu_.rcond() < 1e-300) return ok_ = false;
    return ok_ = true;
  }

  /// Returns (x, y) stacked; x occupies the first H.size() entries.
  Vector solve(const Vector& r1, const Vector& r2, int refine_steps = 10) const {
    const Index n = h_->size();
    const Index k = a_->rows();
    Vector sol = solve_regularized(r1, r2);
    for (int it = 0; it < refine_steps; ++it) {
      const Vector x = sol.head(n);
      const Vector y = sol.tail(k);
      const Vector e1 = r1 - h_->multiply(x) - a_->apply_transpose(y);
      const Vector e2 = r2 - a_->apply(x) + d_.cwiseProduct(y);
      if (inf_norm(e1) <= 1e-14 * (1.0 + inf_norm(r1)) && inf_norm(e2) <= 1e-14 * (1.0 + inf_norm(r2))) break;
      sol += solve_regularized(e1, e2);
    }
    return sol;
  }

  bool ok() const { return ok_; }

 private:
  enum class Mode { HessianOnly, DenseKkt, SparseKkt };

  bool factorize_sparse_kkt(const SymmetricMatrix& h, const LinearMap& a, const Vector& d, double reg) {
    mode_ = Mode::SparseKkt;
    const Index n = h.size();
    const Index k = a.rows();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(h.lower.nonZeros() + 2 * a.sparse().nonZeros() + n + k));
    for (Index j = 0; j < h.lower.outerSize(); ++j) {
      for (ColMajorSparse::InnerIterator it(h.lower, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    }
    for (Index i = 0; i < n; ++i) t.emplace_back(i, i, reg);
    for (Index r = 0; r < a.sparse().outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(a.sparse(), r); it; ++it) {
        t.emplace_back(n + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), n + it.row(), it.value());
      }
    }
    double hmax = reg;
    for (Index j = 0; j < h.lower.outerSize(); ++j) {
      for (ColMajorSparse::InnerIterator it(h.lower, j); it; ++it) {
        if (it.row() == it.col()) hmax = std::max(hmax, std::abs(it.value()));
      }
    }
    double amax = 0.0;
    for (Index r = 0; r < a.sparse().outerSize(); ++r) amax = std::max(amax, a.sparse().row(r).squaredNorm());
    const double dreg = std::min(reg, 1e-14 * std::max(amax / std::max(hmax, 1e-300), 1e-300));
    for (Index i = 0; i < k; ++i) t.emplace_back(n + i, n + i, -(d[i] + dreg));
    ColMajorSparse kkt(n + k, n + k);
    kkt.setFromTriplets(t.begin(), t.end());
    kkt.makeCompressed();
    SymmetricMatrix km;
    km.dense = false;
    km.lower = std::move(kkt);
    return ok_ = kkt_solver_.factorize(km);
  }

  Vector solve_regularized(const Vector& r1, const Vector& r2) const {
    const Index n = h_->size();
    const Index k = a_->rows();
    Vector out(n + k);
    switch (mode_) {
      case Mode::HessianOnly:
        out.head(n) = h_solver_.solve(r1);
        break;
      case Mode::DenseKkt: {
        Vector rhs(n + k);
        rhs << r1, r2;
        out = dense_lu_.solve(rhs);
        break;
      }
      case Mode::SparseKkt: {
        Vector rhs(n + k);
        rhs << r1, r2;
        out = kkt_solver_.solve(rhs);
        break;
      }
    }
    return out;
  }

  const SymmetricMatrix* h_ = nullptr;
  const LinearMap* a_ = nullptr;
  Vector d_;
  double reg_ = 0.0;
  Mode mode_ = Mode::HessianOnly;
  SymmetricSolver h_solver_;
  Eigen::PartialPivLU<DenseMatrix> dense_lu_;
  SymmetricSolver kkt_solver_;
  bool ok_ = false;
};

}  // namespace pricekit::linalg
