#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/field.hpp"
#include "rigidity/parallel.hpp"

namespace rigidity {

// Dense matrix over one exact field, row major.
class ExactMatrix {
 public:
  ExactMatrix(FieldPtr f, long rows, long cols)
      : f_(std::move(f)), rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * cols, FieldElement::zero(f_)) {
    if (rows < 0 || cols < 0)
      throw ConstructionError("ExactMatrix: negative dimensions");
  }

  static ExactMatrix zeros(const FieldPtr& f, long rows, long cols) {
    return ExactMatrix(f, rows, cols);
  }

  static ExactMatrix identity(const FieldPtr& f, long n) {
    ExactMatrix m(f, n, n);
    FieldElement one = FieldElement::one(f);
    for (long i = 0; i < n; ++i) m.at(i, i) = one;
    return m;
  }

  const FieldPtr& field() const { return f_; }
  long rows() const { return rows_; }
  long cols() const { return cols_; }

  FieldElement& at(long i, long j) {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  const FieldElement& at(long i, long j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  bool operator==(const ExactMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || !f_->same(*o.f_)) return false;
    return data_ == o.data_;
  }
  bool operator!=(const ExactMatrix& o) const { return !(*this == o); }

  ExactMatrix operator+(const ExactMatrix& o) const {
    require_shape(o);
    ExactMatrix r = *this;
    for (size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
    return r;
  }

  ExactMatrix operator-(const ExactMatrix& o) const {
    require_shape(o);
    ExactMatrix r = *this;
    for (size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
    return r;
  }

  ExactMatrix operator*(const ExactMatrix& o) const {
    if (cols_ != o.rows_ || !f_->same(*o.f_))
      throw ConstructionError("matrix product: shape or field mismatch");
    ExactMatrix r(f_, rows_, o.cols_);
    parallel_for(0, rows_, [&](long lo, long hi) {
      for (long i = lo; i < hi; ++i)
        for (long k = 0; k < cols_; ++k) {
          const FieldElement& a = at(i, k);
          if (a.is_zero()) continue;
          for (long j = 0; j < o.cols_; ++j) {
            const FieldElement& b = o.at(k, j);
            if (!b.is_zero()) r.at(i, j) += a * b;
          }
        }
    });
    return r;
  }

  ExactMatrix scaled(const FieldElement& c) const {
    ExactMatrix r = *this;
    for (auto& v : r.data_) v *= c;
    return r;
  }

  ExactMatrix transpose() const {
    ExactMatrix r(f_, cols_, rows_);
    for (long i = 0; i < rows_; ++i)
      for (long j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  // Conjugate transpose. Conjugation is the inverse-root automorphism on
  // cyclotomic fields and the identity on prime fields; proper extensions
  // reject it (FieldError from the element op).
  ExactMatrix star() const {
    ExactMatrix r(f_, cols_, rows_);
    for (long i = 0; i < rows_; ++i)
      for (long j = 0; j < cols_; ++j) r.at(j, i) = at(i, j).conj();
    return r;
  }

  ExactMatrix select(const std::vector<long>& row_idx,
                     const std::vector<long>& col_idx) const {
    ExactMatrix r(f_, static_cast<long>(row_idx.size()),
                  static_cast<long>(col_idx.size()));
    for (size_t i = 0; i < row_idx.size(); ++i) {
      if (row_idx[i] < 0 || row_idx[i] >= rows_)
        throw ConstructionError("select: row index out of range");
      for (size_t j = 0; j < col_idx.size(); ++j) {
        if (col_idx[j] < 0 || col_idx[j] >= cols_)
          throw ConstructionError("select: col index out of range");
        r.at(static_cast<long>(i), static_cast<long>(j)) =
            at(row_idx[i], col_idx[j]);
      }
    }
    return r;
  }

  // result(i, j) = this(row_perm[i], col_perm[j])
  ExactMatrix permuted(const std::vector<long>& row_perm,
                       const std::vector<long>& col_perm) const {
    if (static_cast<long>(row_perm.size()) != rows_ ||
        static_cast<long>(col_perm.size()) != cols_)
      throw ConstructionError("permuted: permutation length mismatch");
    return select(row_perm, col_perm);
  }

  std::vector<FieldElement> diagonal() const {
    long n = std::min(rows_, cols_);
    std::vector<FieldElement> d;
    d.reserve(n);
    for (long i = 0; i < n; ++i) d.push_back(at(i, i));
    return d;
  }

  bool is_diagonal() const {
    for (long i = 0; i < rows_; ++i)
      for (long j = 0; j < cols_; ++j)
        if (i != j && !at(i, j).is_zero()) return false;
    return true;
  }

  bool is_zero() const {
    for (const auto& v : data_)
      if (!v.is_zero()) return false;
    return true;
  }

 private:
  void require_shape(const ExactMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || !f_->same(*o.f_))
      throw ConstructionError("matrix op: shape or field mismatch");
  }

  FieldPtr f_;
  long rows_ = 0, cols_ = 0;
  std::vector<FieldElement> data_;
};

inline ExactMatrix kronecker(const ExactMatrix& a, const ExactMatrix& b) {
  if (!a.field()->same(*b.field()))
    throw ConstructionError("kronecker: field mismatch");
  ExactMatrix r(a.field(), a.rows() * b.rows(), a.cols() * b.cols());
  for (long i1 = 0; i1 < a.rows(); ++i1)
    for (long j1 = 0; j1 < a.cols(); ++j1) {
      const FieldElement& v = a.at(i1, j1);
      if (v.is_zero()) continue;
      for (long i2 = 0; i2 < b.rows(); ++i2)
        for (long j2 = 0; j2 < b.cols(); ++j2) {
          const FieldElement& w = b.at(i2, j2);
          if (!w.is_zero())
            r.at(i1 * b.rows() + i2, j1 * b.cols() + j2) = v * w;
        }
    }
  return r;
}

inline ExactMatrix diagonal_matrix(const FieldPtr& f,
                                   const std::vector<FieldElement>& d) {
  ExactMatrix m(f, static_cast<long>(d.size()), static_cast<long>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m.at(static_cast<long>(i),
                                             static_cast<long>(i)) = d[i];
  return m;
}

// Row echelon rank by exact elimination. Pivot choice is deterministic:
// scan columns left to right, take the first row with a nonzero entry.
// If stop_above >= 0, returns early with stop_above + 1 as soon as the
// pivot count exceeds it (enough to refute "rank <= stop_above").
inline long rank(ExactMatrix m, long stop_above = -1) {
  long rows = m.rows(), cols = m.cols();
  long piv_row = 0;
  for (long col = 0; col < cols && piv_row < rows; ++col) {
    long sel = -1;
    for (long i = piv_row; i < rows; ++i)
      if (!m.at(i, col).is_zero()) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    if (sel != piv_row)
      for (long j = col; j < cols; ++j) std::swap(m.at(sel, j), m.at(piv_row, j));
    FieldElement inv = m.at(piv_row, col).inverse();
    parallel_for(piv_row + 1, rows, [&](long lo, long hi) {
      for (long i = lo; i < hi; ++i) {
        if (m.at(i, col).is_zero()) continue;
        FieldElement factor = m.at(i, col) * inv;
        m.at(i, col) = FieldElement::zero(m.field());
        for (long j = col + 1; j < cols; ++j) {
          if (!m.at(piv_row, j).is_zero())
            m.at(i, j) -= factor * m.at(piv_row, j);
        }
      }
    });
    ++piv_row;
    if (stop_above >= 0 && piv_row > stop_above) return piv_row;
  }
  return piv_row;
}

struct RrefResult {
  ExactMatrix mat;              // reduced row echelon form
  std::vector<long> pivot_cols; // one per pivot row, increasing
};

inline RrefResult rref(ExactMatrix m) {
  long rows = m.rows(), cols = m.cols();
  std::vector<long> pivots;
  long piv_row = 0;
  for (long col = 0; col < cols && piv_row < rows; ++col) {
    long sel = -1;
    for (long i = piv_row; i < rows; ++i)
      if (!m.at(i, col).is_zero()) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    if (sel != piv_row)
      for (long j = col; j < cols; ++j) std::swap(m.at(sel, j), m.at(piv_row, j));
    FieldElement inv = m.at(piv_row, col).inverse();
    for (long j = col; j < cols; ++j) m.at(piv_row, j) *= inv;
    parallel_for(0, rows, [&](long lo, long hi) {
      for (long i = lo; i < hi; ++i) {
        if (i == piv_row || m.at(i, col).is_zero()) continue;
        FieldElement factor = m.at(i, col);
        m.at(i, col) = FieldElement::zero(m.field());
        for (long j = col + 1; j < cols; ++j)
          if (!m.at(piv_row, j).is_zero())
            m.at(i, j) -= factor * m.at(piv_row, j);
      }
    });
    pivots.push_back(col);
    ++piv_row;
  }
  return {std::move(m), std::move(pivots)};
}

// Solve A X = B exactly. Returns nullopt when inconsistent. Free variables
// take the corresponding row of `preferred` when given, else zero.
inline std::optional<ExactMatrix> solve(
    const ExactMatrix& a, const ExactMatrix& b,
    const ExactMatrix* preferred = nullptr) {
  if (a.rows() != b.rows() || !a.field()->same(*b.field()))
    throw ConstructionError("solve: shape or field mismatch");
  if (preferred && (preferred->rows() != a.cols() ||
                    preferred->cols() != b.cols() ||
                    !preferred->field()->same(*a.field())))
    throw ConstructionError("solve: preferred assignment shape mismatch");
  long n = a.cols(), rhs = b.cols();
  ExactMatrix aug(a.field(), a.rows(), n + rhs);
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < n; ++j) aug.at(i, j) = a.at(i, j);
    for (long j = 0; j < rhs; ++j) aug.at(i, n + j) = b.at(i, j);
  }
  RrefResult r = rref(std::move(aug));
  // pivot in the RHS block means no solution
  long rank_a = 0;
  for (long c : r.pivot_cols) {
    if (c >= n) return std::nullopt;
    ++rank_a;
  }
  std::vector<char> is_pivot(n, 0);
  for (long c : r.pivot_cols) is_pivot[c] = 1;
  ExactMatrix x(a.field(), n, rhs);
  if (preferred)
    for (long j = 0; j < n; ++j)
      if (!is_pivot[j])
        for (long k = 0; k < rhs; ++k) x.at(j, k) = preferred->at(j, k);
  for (long row = rank_a - 1; row >= 0; --row) {
    long pc = r.pivot_cols[row];
    for (long k = 0; k < rhs; ++k) {
      FieldElement v = r.mat.at(row, n + k);
      for (long j = pc + 1; j < n; ++j)
        if (!is_pivot[j] && !r.mat.at(row, j).is_zero() &&
            !x.at(j, k).is_zero())
          v -= r.mat.at(row, j) * x.at(j, k);
      x.at(pc, k) = v;
    }
  }
  return x;
}

// Indices of a maximal independent column set, chosen greedily left to right.
inline std::vector<long> column_basis(const ExactMatrix& a) {
  return rref(a).pivot_cols;
}

struct SparsityReport {
  long max_row_support = 0;
  long max_col_support = 0;
  long total = 0;
};

// Sparse change set: positions and values to subtract from the host matrix.
// Entries are kept in row-major key order so iteration is deterministic;
// zero values are never stored.
class SparseChanges {
 public:
  using Key = std::pair<long, long>;

  SparseChanges(FieldPtr f, long rows, long cols)
      : f_(std::move(f)), rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0)
      throw ConstructionError("SparseChanges: negative dimensions");
  }

  const FieldPtr& field() const { return f_; }
  long rows() const { return rows_; }
  long cols() const { return cols_; }
  const std::map<Key, FieldElement>& entries() const { return entries_; }
  long nnz() const { return static_cast<long>(entries_.size()); }

  void set(long i, long j, const FieldElement& v) {
    check_index(i, j);
    if (v.is_zero())
      entries_.erase({i, j});
    else
      entries_.insert_or_assign(Key{i, j}, v);
  }

  void add(long i, long j, const FieldElement& v) {
    check_index(i, j);
    if (v.is_zero()) return;
    auto it = entries_.find({i, j});
    if (it == entries_.end()) {
      entries_.emplace(Key{i, j}, v);
    } else {
      it->second += v;
      if (it->second.is_zero()) entries_.erase(it);
    }
  }

  FieldElement get(long i, long j) const {
    check_index(i, j);
    auto it = entries_.find({i, j});
    return it == entries_.end() ? FieldElement::zero(f_) : it->second;
  }

  bool operator==(const SparseChanges& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && f_->same(*o.f_) &&
           entries_ == o.entries_;
  }

  SparsityReport sparsity() const {
    std::vector<long> per_row(rows_, 0), per_col(cols_, 0);
    SparsityReport rep;
    for (const auto& [k, v] : entries_) {
      ++per_row[k.first];
      ++per_col[k.second];
      ++rep.total;
    }
    for (long c : per_row) rep.max_row_support = std::max(rep.max_row_support, c);
    for (long c : per_col) rep.max_col_support = std::max(rep.max_col_support, c);
    return rep;
  }

  ExactMatrix dense() const {
    ExactMatrix m(f_, rows_, cols_);
    for (const auto& [k, v] : entries_) m.at(k.first, k.second) = v;
    return m;
  }

  static SparseChanges from_dense(const ExactMatrix& m) {
    SparseChanges e(m.field(), m.rows(), m.cols());
    for (long i = 0; i < m.rows(); ++i)
      for (long j = 0; j < m.cols(); ++j)
        if (!m.at(i, j).is_zero()) e.entries_.emplace(Key{i, j}, m.at(i, j));
    return e;
  }

  SparseChanges transpose() const {
    SparseChanges r(f_, cols_, rows_);
    for (const auto& [k, v] : entries_)
      r.entries_.emplace(Key{k.second, k.first}, v);
    return r;
  }

  SparseChanges star() const {
    SparseChanges r(f_, cols_, rows_);
    for (const auto& [k, v] : entries_)
      r.entries_.emplace(Key{k.second, k.first}, v.conj());
    return r;
  }

  SparseChanges scaled(const FieldElement& c) const {
    SparseChanges r(f_, rows_, cols_);
    if (c.is_zero()) return r;
    for (const auto& [k, v] : entries_) r.set(k.first, k.second, v * c);
    return r;
  }

  // entry (i, j) scales by row_scale[i] * col_scale[j]
  SparseChanges scaled_rows_cols(const std::vector<FieldElement>& row_scale,
                                 const std::vector<FieldElement>& col_scale) const {
    if (static_cast<long>(row_scale.size()) != rows_ ||
        static_cast<long>(col_scale.size()) != cols_)
      throw ConstructionError("scaled_rows_cols: scale length mismatch");
    SparseChanges r(f_, rows_, cols_);
    for (const auto& [k, v] : entries_)
      r.set(k.first, k.second, v * row_scale[k.first] * col_scale[k.second]);
    return r;
  }

  // entry (i, j) moves to (row_map[i], col_map[j]); maps must be injective
  SparseChanges remapped(const std::vector<long>& row_map,
                         const std::vector<long>& col_map, long new_rows,
                         long new_cols) const {
    SparseChanges r(f_, new_rows, new_cols);
    for (const auto& [k, v] : entries_) {
      long i = row_map.at(k.first), j = col_map.at(k.second);
      if (i < 0 || i >= new_rows || j < 0 || j >= new_cols)
        throw ConstructionError("remapped: target index out of range");
      auto [it, fresh] = r.entries_.emplace(Key{i, j}, v);
      if (!fresh) throw ConstructionError("remapped: map not injective");
    }
    return r;
  }

  SparseChanges operator+(const SparseChanges& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || !f_->same(*o.f_))
      throw ConstructionError("sparse sum: shape or field mismatch");
    SparseChanges r = *this;
    for (const auto& [k, v] : o.entries_) r.add(k.first, k.second, v);
    return r;
  }

 private:
  void check_index(long i, long j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
      throw ConstructionError("SparseChanges: index out of range");
  }

  FieldPtr f_;
  long rows_ = 0, cols_ = 0;
  std::map<Key, FieldElement> entries_;
};

inline ExactMatrix subtract(const ExactMatrix& m, const SparseChanges& e) {
  if (m.rows() != e.rows() || m.cols() != e.cols() ||
      !m.field()->same(*e.field()))
    throw ConstructionError("subtract: shape or field mismatch");
  ExactMatrix r = m;
  for (const auto& [k, v] : e.entries()) r.at(k.first, k.second) -= v;
  return r;
}

inline SparseChanges kronecker(const SparseChanges& a, const SparseChanges& b) {
  if (!a.field()->same(*b.field()))
    throw ConstructionError("kronecker: field mismatch");
  SparseChanges r(a.field(), a.rows() * b.rows(), a.cols() * b.cols());
  for (const auto& [ka, va] : a.entries())
    for (const auto& [kb, vb] : b.entries())
      r.set(ka.first * b.rows() + kb.first, ka.second * b.cols() + kb.second,
            va * vb);
  return r;
}

// Sparse change set for a Kronecker factor carried through a dense cofactor:
// changes E on B lift to E (x) C against the host B (x) C.
inline SparseChanges kronecker_with_dense(const SparseChanges& a,
                                          const ExactMatrix& b) {
  if (!a.field()->same(*b.field()))
    throw ConstructionError("kronecker: field mismatch");
  SparseChanges r(a.field(), a.rows() * b.rows(), a.cols() * b.cols());
  for (const auto& [ka, va] : a.entries())
    for (long i = 0; i < b.rows(); ++i)
      for (long j = 0; j < b.cols(); ++j)
        if (!b.at(i, j).is_zero())
          r.set(ka.first * b.rows() + i, ka.second * b.cols() + j,
                va * b.at(i, j));
  return r;
}

// L * diag(d) * R with sparse L, R. Result support is bounded by the
// support products, so row supports multiply and column supports multiply.
inline SparseChanges mul_diag_mul(const SparseChanges& l,
                                  const std::vector<FieldElement>& d,
                                  const SparseChanges& r) {
  if (l.cols() != static_cast<long>(d.size()) ||
      r.rows() != static_cast<long>(d.size()) || !l.field()->same(*r.field()))
    throw ConstructionError("mul_diag_mul: shape or field mismatch");
  std::vector<std::vector<std::pair<long, FieldElement>>> rows_of_r(r.rows());
  for (const auto& [k, v] : r.entries())
    rows_of_r[k.first].emplace_back(k.second, v);
  SparseChanges out(l.field(), l.rows(), r.cols());
  for (const auto& [k, u] : l.entries()) {
    long i = k.first, mid = k.second;
    if (d[mid].is_zero()) continue;
    FieldElement ud = u * d[mid];
    for (const auto& [j, v] : rows_of_r[mid]) out.add(i, j, ud * v);
  }
  return out;
}

}  // namespace rigidity
