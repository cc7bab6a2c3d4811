#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/field.hpp"
#include "rigidity/matrix.hpp"
#include "rigidity/numtheory.hpp"
#include "rigidity/parallel.hpp"
#include "rigidity/structured.hpp"
#include "rigidity/tuples.hpp"

namespace rigidity {

// Sparse change set E against a reconstructible matrix M, claiming
// rank(M - E) <= claimed_rank with at most claimed_sparsity nonzero changes
// in every row and column. The trace records how the certificate was built;
// verification ignores it entirely.
struct Certificate {
  MatrixDescriptor target;
  FieldPtr field;  // certification field; may be wider than the target's
  SparseChanges changes;
  long claimed_rank = 0;
  long claimed_sparsity = 0;
  bool degenerate = false;
  std::vector<std::string> trace;

  Certificate(MatrixDescriptor t, FieldPtr f, SparseChanges e, long r, long s)
      : target(std::move(t)), field(std::move(f)), changes(std::move(e)),
        claimed_rank(r), claimed_sparsity(s) {}

  void note(std::string line) { trace.push_back(std::move(line)); }
};

struct ClaimResult {
  std::string claim;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  bool verified = false;
  long claimed_rank = 0;
  long claimed_sparsity = 0;
  long achieved_rank = 0;  // exact when rank_exact, else a refuting lower bound
  bool rank_exact = true;
  long achieved_row_sparsity = 0;
  long achieved_col_sparsity = 0;
  std::vector<ClaimResult> claims;

  std::string summary() const {
    std::ostringstream os;
    os << (verified ? "VERIFIED" : "FAILED") << " rank " << achieved_rank
       << (rank_exact ? "" : "+") << "/" << claimed_rank << " row_s "
       << achieved_row_sparsity << "/" << claimed_sparsity << " col_s "
       << achieved_col_sparsity << "/" << claimed_sparsity;
    for (const auto& c : claims)
      if (!c.pass) os << "; " << c.claim << ": " << c.detail;
    return os.str();
  }
};

// Rebuild a descriptor's matrix and re-express every entry in the given field.
inline ExactMatrix realize_in(const MatrixDescriptor& desc, const FieldPtr& f) {
  ExactMatrix m = realize(desc);
  if (m.field()->same(*f)) return m;
  ExactMatrix out(f, m.rows(), m.cols());
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) out.at(i, j) = lift(m.at(i, j), f);
  return out;
}

inline SparseChanges lift_changes(const SparseChanges& e, const FieldPtr& f) {
  if (e.field()->same(*f)) return e;
  SparseChanges out(f, e.rows(), e.cols());
  for (const auto& [k, v] : e.entries()) out.set(k.first, k.second, lift(v, f));
  return out;
}

// Independent check of every claim: rebuilds the matrix from the descriptor
// (or takes the supplied one), measures the change sparsity, and eliminates
// M - E with an early exit as soon as the rank claim is refuted. Failures
// are report entries, never exceptions.
inline VerificationReport verify(const Certificate& cert,
                                 const ExactMatrix* matrix_override = nullptr) {
  VerificationReport rep;
  rep.claimed_rank = cert.claimed_rank;
  rep.claimed_sparsity = cert.claimed_sparsity;
  auto add = [&](const char* name, bool pass, std::string detail) {
    rep.claims.push_back({name, pass, std::move(detail)});
    return pass;
  };

  std::optional<ExactMatrix> m;
  try {
    if (matrix_override) {
      m = matrix_override->field()->same(*cert.field)
              ? *matrix_override
              : throw ConstructionError("matrix override in a different field");
    } else {
      cert.target.validate();
      m = realize_in(cert.target, cert.field);
    }
    add("rebuild", true, "");
  } catch (const std::exception& ex) {
    add("rebuild", false, ex.what());
  }

  bool ok = !rep.claims.empty() && rep.claims.front().pass;
  if (m) {
    bool shape = m->rows() == cert.changes.rows() &&
                 m->cols() == cert.changes.cols() &&
                 m->field()->same(*cert.changes.field());
    ok &= add("shape", shape,
              shape ? "" : "changes do not match the matrix shape or field");
    if (shape) {
      SparsityReport sp = cert.changes.sparsity();
      rep.achieved_row_sparsity = sp.max_row_support;
      rep.achieved_col_sparsity = sp.max_col_support;
      ok &= add("row_sparsity", sp.max_row_support <= cert.claimed_sparsity,
                "worst row has " + std::to_string(sp.max_row_support) +
                    " changes, budget " + std::to_string(cert.claimed_sparsity));
      ok &= add("col_sparsity", sp.max_col_support <= cert.claimed_sparsity,
                "worst column has " + std::to_string(sp.max_col_support) +
                    " changes, budget " + std::to_string(cert.claimed_sparsity));
      long rk = rank(subtract(*m, cert.changes), cert.claimed_rank);
      rep.achieved_rank = rk;
      rep.rank_exact = rk <= cert.claimed_rank;
      ok &= add("rank", rk <= cert.claimed_rank,
                "eliminated rank reaches " + std::to_string(rk) + ", claimed " +
                    std::to_string(cert.claimed_rank));
    }
  }
  rep.verified = ok;
  return rep;
}

// Certificate from an explicit change set: the rank claim is the exact
// eliminated rank and the sparsity claim is the exact worst support.
inline Certificate certificate_from_changes(MatrixDescriptor target,
                                            FieldPtr field, SparseChanges changes,
                                            const std::string& note = "") {
  ExactMatrix m = realize_in(target, field);
  if (m.rows() != changes.rows() || m.cols() != changes.cols() ||
      !changes.field()->same(*field))
    throw ConstructionError("certificate_from_changes: shape or field mismatch");
  long r = rank(subtract(m, changes));
  SparsityReport sp = changes.sparsity();
  Certificate cert(std::move(target), std::move(field), std::move(changes), r,
                   std::max(sp.max_row_support, sp.max_col_support));
  cert.degenerate = cert.claimed_rank >= m.rows();
  cert.note(note.empty() ? "explicit changes" : "explicit changes: " + note);
  return cert;
}

// Transport along M'(i, j) = M(row_perm[i], col_perm[j]): permuting rows and
// columns moves the changes but leaves rank and support sizes alone.
inline Certificate permuted_certificate(const Certificate& cert,
                                        const std::vector<long>& row_perm,
                                        const std::vector<long>& col_perm,
                                        MatrixDescriptor target,
                                        const std::string& note) {
  long rows = cert.changes.rows(), cols = cert.changes.cols();
  if (static_cast<long>(row_perm.size()) != rows ||
      static_cast<long>(col_perm.size()) != cols)
    throw ConstructionError("permuted_certificate: permutation length mismatch");
  std::vector<long> row_inv(rows, -1), col_inv(cols, -1);
  for (long i = 0; i < rows; ++i) {
    if (row_perm[i] < 0 || row_perm[i] >= rows || row_inv[row_perm[i]] != -1)
      throw ConstructionError("permuted_certificate: bad row permutation");
    row_inv[row_perm[i]] = i;
  }
  for (long j = 0; j < cols; ++j) {
    if (col_perm[j] < 0 || col_perm[j] >= cols || col_inv[col_perm[j]] != -1)
      throw ConstructionError("permuted_certificate: bad column permutation");
    col_inv[col_perm[j]] = j;
  }
  Certificate out(std::move(target), cert.field,
                  cert.changes.remapped(row_inv, col_inv, rows, cols),
                  cert.claimed_rank, cert.claimed_sparsity);
  out.degenerate = cert.degenerate;
  out.trace = cert.trace;
  out.note(note);
  return out;
}

// Smallest field over the base hosting the roots needed to build H_{d,n}
// and its square-root rescaling: d-th roots for odd d, 2d-th for even d.
inline FieldPtr field_for_gwh(int d, const FieldPtr& base) {
  if (d < 2) throw ConstructionError("field_for_gwh: d >= 2 required");
  long need = d % 2 == 0 ? 2L * d : d;
  if (base->kind() == Field::Kind::Cyclotomic) {
    long m = base->cyclo_order();
    long mm = std::lcm(m, need);
    return mm == m ? base : Field::cyclotomic(mm);
  }
  Int p = base->characteristic();
  if (std::gcd(static_cast<Int>(d), p) != 1)
    throw ConstructionError("field_for_gwh: characteristic divides d");
  Int k = ord_mod(base->order(), need);
  if (k == 1) return base;
  if (base->kind() != Field::Kind::Prime)
    throw ConstructionError(
        "field_for_gwh: widening a proper extension is not supported");
  return Field::extension_of_degree(p, static_cast<int>(k));
}

// Random symbol on Z_d^n, constant on permutation classes, with small
// nonzero values; deterministic in the seed.
inline std::vector<FieldElement> random_symmetric_symbol(int d, int n,
                                                         const FieldPtr& f,
                                                         unsigned long seed) {
  std::mt19937_64 rng(seed);
  long limit = 97;
  if (f->is_finite())
    limit = std::min<long>(limit, static_cast<long>(f->characteristic()) - 1);
  std::uniform_int_distribution<long> dist(1, std::max<long>(1, limit));
  std::map<std::vector<int>, FieldElement> by_class;
  long size = pow_checked(d, n);
  std::vector<FieldElement> out;
  out.reserve(size);
  for (long idx = 0; idx < size; ++idx) {
    std::vector<int> rep = perm_class(index_to_tuple(idx, d, n), d).rep;
    auto it = by_class.find(rep);
    if (it == by_class.end())
      it = by_class.emplace(std::move(rep), FieldElement::from_int(f, dist(rng)))
               .first;
    out.push_back(it->second);
  }
  return out;
}

namespace detail {

// Distinct permutation classes among the repeated-value tuples; one
// vanishing equation per class suffices because the changed symbol stays
// symmetric.
inline std::vector<std::vector<int>> perm_s_class_reps(const SPlan& plan) {
  std::set<std::vector<int>> reps;
  for (const auto& s : plan.s_members) reps.insert(perm_class(s, plan.d).rep);
  return {reps.begin(), reps.end()};
}

}  // namespace detail

// Changes a symmetric symbol f only on tuples with at least d*m zero
// entries so that its character polynomial vanishes at every point whose
// values all repeat at least m times. The change support stays inside the
// high-zero tuples, so each row and column of the change matrix gets at
// most that many entries.
inline Certificate gwh_symmetric_decompose(std::vector<FieldElement> f_values,
                                           const SPlan& plan) {
  const int d = plan.d, n = plan.n;
  const long size = pow_checked(d, n);
  if (static_cast<long>(f_values.size()) != size)
    throw ConstructionError("gwh_symmetric_decompose: symbol length != d^n");
  const FieldPtr& f = f_values.front().field();

  std::vector<std::vector<int>> tuples(size);
  for (long idx = 0; idx < size; ++idx) tuples[idx] = index_to_tuple(idx, d, n);
  for (long idx = 0; idx < size; ++idx) {
    long rep_idx = tuple_to_index(perm_class(tuples[idx], d).rep, d);
    if (f_values[idx] != f_values[rep_idx])
      throw ConstructionError("gwh_symmetric_decompose: symbol not symmetric");
  }

  RootOfUnity w = primitive_root_of_unity(f, d);
  std::vector<FieldElement> pw(d, FieldElement::one(f));
  for (int k = 1; k < d; ++k) pw[k] = pw[k - 1] * w.element;

  std::vector<std::vector<int>> eq_reps = detail::perm_s_class_reps(plan);
  const long unknowns = static_cast<long>(plan.t_class_reps.size());
  std::vector<std::vector<std::vector<int>>> t_members;
  t_members.reserve(unknowns);
  for (const auto& rep : plan.t_class_reps)
    t_members.push_back(class_members(rep));

  ExactMatrix a(f, static_cast<long>(eq_reps.size()), unknowns);
  ExactMatrix b(f, static_cast<long>(eq_reps.size()), 1);
  const int zero_budget = d * plan.m;
  for (size_t i = 0; i < eq_reps.size(); ++i) {
    const std::vector<int>& point = eq_reps[i];
    for (long j = 0; j < unknowns; ++j) {
      FieldElement acc = FieldElement::zero(f);
      for (const auto& member : t_members[j])
        acc += pw[dot(point, member) % d];
      a.at(static_cast<long>(i), j) = acc;
    }
    FieldElement rhs = FieldElement::zero(f);
    for (long idx = 0; idx < size; ++idx) {
      if (zero_count(tuples[idx]) >= zero_budget) continue;
      if (f_values[idx].is_zero()) continue;
      rhs += f_values[idx] * pw[dot(point, tuples[idx]) % d];
    }
    b.at(static_cast<long>(i), 0) = -rhs;
  }

  ExactMatrix preferred(f, unknowns, 1);
  for (long j = 0; j < unknowns; ++j)
    preferred.at(j, 0) = f_values[tuple_to_index(plan.t_class_reps[j], d)];
  std::optional<ExactMatrix> sol = solve(a, b, &preferred);
  if (!sol)
    throw InvariantViolation(
        "gwh_symmetric_decompose: vanishing system inconsistent");

  std::vector<FieldElement> f2 = f_values;
  for (long j = 0; j < unknowns; ++j)
    for (const auto& member : t_members[j])
      f2[tuple_to_index(member, d)] = sol->at(j, 0);

  AbelianGroupSpec group{std::vector<long>(static_cast<size_t>(n), d)};
  std::vector<std::pair<long, FieldElement>> support;
  for (long idx = 0; idx < size; ++idx) {
    if (zero_count(tuples[idx]) < zero_budget) continue;
    FieldElement diff = f_values[idx] - f2[idx];
    if (!diff.is_zero()) support.emplace_back(idx, diff);
  }
  SparseChanges e(f, size, size);
  for (const auto& [widx, val] : support)
    for (long i = 0; i < size; ++i) e.set(i, group.sub(widx, i), val);

  long claimed_rank = rank_via_roots(group, f2, f);
  long claimed_sparsity = static_cast<long>(support.size());
  Certificate cert(MatrixDescriptor::adjusted_g_circulant(group, f_values), f,
                   std::move(e), claimed_rank, claimed_sparsity);
  cert.degenerate = claimed_rank >= size;
  std::ostringstream os;
  os << "symmetric changes d=" << d << " n=" << n << " m=" << plan.m
     << " equations=" << eq_reps.size() << " unknowns=" << unknowns
     << " support=" << support.size();
  cert.note(os.str());
  return cert;
}

// Certificate for H_{d,n} itself: scale rows and columns so the matrix
// becomes the symmetric symbol zeta^(sum x_i^2), change that symbol, then
// undo the scaling on the change set. Support, rank and sparsity carry over.
inline Certificate gwh_decompose(int d, int n, int m, const FieldPtr& base) {
  FieldPtr f = field_for_gwh(d, base);
  SPlan plan = build_s_plan(d, n, m);
  GwhRescale rs = rescale_gwh(d, n, f);
  Certificate sym = gwh_symmetric_decompose(rs.f_sym, plan);
  std::vector<FieldElement> row_inv, col_inv;
  row_inv.reserve(rs.row_scales.size());
  col_inv.reserve(rs.col_scales.size());
  for (const auto& x : rs.row_scales) row_inv.push_back(x.inverse());
  for (const auto& x : rs.col_scales) col_inv.push_back(x.inverse());
  Certificate cert(MatrixDescriptor::gwh(d, n, f), f,
                   sym.changes.scaled_rows_cols(row_inv, col_inv),
                   sym.claimed_rank, sym.claimed_sparsity);
  cert.degenerate = sym.degenerate;
  cert.trace = sym.trace;
  cert.note("square-root rescale undone on the change set");
  return cert;
}

namespace detail {

inline void require_verified(const Certificate& cert, const char* op) {
  VerificationReport rep = verify(cert);
  if (!rep.verified)
    throw ConstructionError(std::string(op) +
                            ": input certificate failed: " + rep.summary());
}

inline void require_diag_field(const std::vector<FieldElement>& diag,
                               const FieldPtr& f) {
  for (const auto& v : diag)
    if (!v.field()->same(*f))
      throw ConstructionError("diagonal entries in a different field");
}

// Smallest widening of the base hosting a primitive root of every listed
// order. Cyclotomic bases widen by lcm; prime bases grow one extension.
inline FieldPtr widened_for_orders(const FieldPtr& base,
                                   const std::vector<long>& orders) {
  if (base->kind() == Field::Kind::Cyclotomic) {
    long m = base->cyclo_order();
    auto hosted = [&](long o) {
      return m % o == 0 || (m % 2 == 1 && (2 * m) % o == 0);
    };
    long mm = m;
    for (long o : orders)
      if (!hosted(o)) mm = std::lcm(mm, o);
    return mm == m ? base : Field::cyclotomic(mm);
  }
  Int p = base->characteristic();
  Int need = 1;
  for (long o : orders) {
    if (std::gcd(static_cast<Int>(o), p) != 1)
      throw ConstructionError("root order shares a factor with the characteristic");
    need = std::lcm(need, static_cast<Int>(o));
  }
  Int k = ord_mod(base->order(), need);
  if (k == 1) return base;
  if (base->kind() != Field::Kind::Prime)
    throw ConstructionError("widening a proper extension is not supported");
  return Field::extension_of_degree(p, static_cast<int>(k));
}

}  // namespace detail

enum class DiagSide { StarLeft, Plain };

// B = A* D A (or A D A): keeping A's changes on both sides leaves
// B - E*DE = A*D(A-E) + (A*-E*)DE, a sum of two matrices of rank at most
// the input's rank bound. Row and column supports multiply.
inline Certificate diagonalization_transfer(const Certificate& cert_a,
                                            const std::vector<FieldElement>& diag,
                                            DiagSide side,
                                            MatrixDescriptor target) {
  detail::require_verified(cert_a, "diagonalization_transfer");
  detail::require_diag_field(diag, cert_a.field);
  SparseChanges left = side == DiagSide::StarLeft ? cert_a.changes.star()
                                                  : cert_a.changes;
  SparseChanges e = mul_diag_mul(left, diag, cert_a.changes);
  long dim = std::min(e.rows(), e.cols());
  long r = std::min(2 * cert_a.claimed_rank, dim);
  long s = cert_a.claimed_sparsity * cert_a.claimed_sparsity;
  Certificate out(std::move(target), cert_a.field, std::move(e), r, s);
  out.degenerate = cert_a.degenerate || r >= dim;
  out.trace = cert_a.trace;
  out.note(side == DiagSide::StarLeft ? "transferred through A*DA"
                                      : "transferred through ADA");
  return out;
}

// Two-certificate form for B = L D R: B - E_L D E_R =
// (L - E_L) D R + E_L D (R - E_R), so the rank bounds add and the
// sparsity bounds multiply.
inline Certificate diagonalization_transfer2(const Certificate& cert_left,
                                             const std::vector<FieldElement>& diag,
                                             const Certificate& cert_right,
                                             MatrixDescriptor target) {
  detail::require_verified(cert_left, "diagonalization_transfer2");
  detail::require_verified(cert_right, "diagonalization_transfer2");
  if (!cert_left.field->same(*cert_right.field))
    throw ConstructionError("diagonalization_transfer2: field mismatch");
  detail::require_diag_field(diag, cert_left.field);
  SparseChanges e = mul_diag_mul(cert_left.changes, diag, cert_right.changes);
  long dim = std::min(e.rows(), e.cols());
  long r = std::min(cert_left.claimed_rank + cert_right.claimed_rank, dim);
  long s = cert_left.claimed_sparsity * cert_right.claimed_sparsity;
  Certificate out(std::move(target), cert_left.field, std::move(e), r, s);
  out.degenerate = cert_left.degenerate || cert_right.degenerate || r >= dim;
  out.trace = cert_left.trace;
  for (const auto& line : cert_right.trace) out.trace.push_back(line);
  out.note("transferred through LDR");
  return out;
}

// M(x + y) = H diag(w) H with w[k] = hat f(-k) / |G|, so a certificate for
// the character matrix carries over to any group function's adjusted
// matrix: rank doubles, sparsity squares.
inline Certificate general_group_fn_decompose(int d, int n, int m,
                                              const std::vector<FieldElement>& f_values,
                                              const FieldPtr& base) {
  Certificate h = gwh_decompose(d, n, m, base);
  const FieldPtr& fw = h.field;
  AbelianGroupSpec g{std::vector<long>(static_cast<size_t>(n), d)};
  long size = g.order();
  if (static_cast<long>(f_values.size()) != size)
    throw ConstructionError("general_group_fn_decompose: symbol length != d^n");
  std::vector<FieldElement> lifted;
  lifted.reserve(size);
  for (const auto& v : f_values) lifted.push_back(lift(v, fw));
  std::vector<FieldElement> hat = group_character_transform(g, lifted, fw);
  FieldElement inv_size = FieldElement::from_int(fw, size).inverse();
  std::vector<FieldElement> w;
  w.reserve(size);
  for (long k = 0; k < size; ++k) w.push_back(hat[g.neg(k)] * inv_size);
  Certificate out = diagonalization_transfer2(
      h, w, h, MatrixDescriptor::adjusted_g_circulant(g, lifted));
  out.note("group function through the character matrix");
  return out;
}

// M ⊗ N - E ⊗ F = (M - E) ⊗ N + E ⊗ (N - F): rank bounds cross-multiply
// with the dimensions and add; supports multiply.
inline Certificate kronecker_transfer(const Certificate& cert_a,
                                      const Certificate& cert_b,
                                      MatrixDescriptor target) {
  if (!cert_a.field->same(*cert_b.field))
    throw ConstructionError("kronecker_transfer: field mismatch");
  long na = std::min(cert_a.changes.rows(), cert_a.changes.cols());
  long nb = std::min(cert_b.changes.rows(), cert_b.changes.cols());
  SparseChanges e = kronecker(cert_a.changes, cert_b.changes);
  long dim = std::min(e.rows(), e.cols());
  long r = std::min(cert_a.claimed_rank * nb + cert_b.claimed_rank * na, dim);
  long s = cert_a.claimed_sparsity * cert_b.claimed_sparsity;
  Certificate out(std::move(target), cert_a.field, std::move(e), r, s);
  out.degenerate = cert_a.degenerate || cert_b.degenerate || r >= dim;
  out.trace = cert_a.trace;
  for (const auto& line : cert_b.trace) out.trace.push_back(line);
  out.note("kronecker composition");
  return out;
}

// One factor of a Kronecker product, split as dense low-rank plus sparse.
struct SplitPart {
  ExactMatrix low_rank;  // A_i
  SparseChanges sparse;  // E_i; the factor itself is A_i + E_i
  long rank_bound = 0;
  long sparsity_bound = 0;
};

inline SplitPart split_part(const Certificate& cert) {
  ExactMatrix m = realize_in(cert.target, cert.field);
  return {subtract(m, cert.changes), cert.changes, cert.claimed_rank,
          cert.claimed_sparsity};
}

struct BinomialSplit {
  ExactMatrix low_rank;   // N_1
  SparseChanges sparse;   // N_2; N_1 + N_2 = ⊗(A_i + E_i) exactly
  long rank_bound = 0;
  long sparsity_bound = 0;
};

// Expands ⊗(A_i + E_i) and groups the terms by how many A factors appear:
// terms with at least l go into N_1, assembled so that each group of them
// is a single Kronecker product with l low-rank factors (the subset S is
// the l lowest A positions; factors above max(S) stay unexpanded). Terms
// with fewer than l stay sparse and form N_2.
inline BinomialSplit binomial_split(const std::vector<SplitPart>& parts, int l) {
  const int b = static_cast<int>(parts.size());
  if (b == 0) throw ConstructionError("binomial_split: no parts");
  if (b > 20) throw ConstructionError("binomial_split: too many parts");
  if (l < 0 || l > b) throw ConstructionError("binomial_split: need 0 <= l <= parts");
  const FieldPtr& f = parts.front().low_rank.field();
  long rows = 1, cols = 1;
  for (const auto& p : parts) {
    if (!p.low_rank.field()->same(*f) || !p.sparse.field()->same(*f))
      throw ConstructionError("binomial_split: field mismatch");
    if (p.low_rank.rows() != p.sparse.rows() ||
        p.low_rank.cols() != p.sparse.cols())
      throw ConstructionError("binomial_split: part shape mismatch");
    rows *= p.low_rank.rows();
    cols *= p.low_rank.cols();
  }

  BinomialSplit out{ExactMatrix(f, rows, cols), SparseChanges(f, rows, cols), 0, 0};
  ExactMatrix unit(f, 1, 1);
  unit.at(0, 0) = FieldElement::one(f);

  for (unsigned mask = 0; mask < (1u << b); ++mask) {
    int bits = std::popcount(mask);
    if (bits == l) {
      int top = l == 0 ? -1 : std::bit_width(mask) - 1;
      ExactMatrix term = unit;
      long rb = 1;
      for (int i = 0; i < b; ++i) {
        const SplitPart& p = parts[static_cast<size_t>(i)];
        long ni = std::min(p.low_rank.rows(), p.low_rank.cols());
        if (mask >> i & 1u) {
          term = kronecker(term, p.low_rank);
          rb *= p.rank_bound;
        } else if (i < top) {
          term = kronecker(term, p.sparse.dense());
          rb *= ni;
        } else {
          term = kronecker(term, p.low_rank + p.sparse.dense());
          rb *= ni;
        }
      }
      out.low_rank = out.low_rank + term;
      out.rank_bound += rb;
    } else if (bits < l) {
      SparseChanges term = SparseChanges::from_dense(unit);
      long sb = 1;
      for (int i = 0; i < b; ++i) {
        const SplitPart& p = parts[static_cast<size_t>(i)];
        if (mask >> i & 1u) {
          term = kronecker(term, SparseChanges::from_dense(p.low_rank));
          sb *= std::max(p.low_rank.rows(), p.low_rank.cols());
        } else {
          term = kronecker(term, p.sparse);
          sb *= p.sparsity_bound;
        }
      }
      out.sparse = out.sparse + term;
      out.sparsity_bound += sb;
    }
  }
  return out;
}

struct ProductFactor {
  long t = 0;  // repeated modulus
  int a = 0;   // multiplicity
};

// Plan for a character matrix of Z_{t_1}^{a_1} x ... x Z_{t_b}^{a_b}:
// factors are grouped into doubling ranges [k^(2^(j-1)), k^(2^j)) by
// modulus, each group certified and split, groups composed by Kronecker.
// Factors below k or with too few repetitions ride along unchanged.
struct ProductPlan {
  std::vector<ProductFactor> factors;
  double epsilon = 0.5;
  long k = 2;  // bucket base
  int split_l = 1;
  bool require_nondegenerate = false;

  void validate() const {
    if (factors.empty()) throw ConstructionError("product plan: no factors");
    long prev = 0;
    for (const auto& [t, a] : factors) {
      if (t < 2 || a < 1) throw ConstructionError("product plan: bad factor");
      if (t < prev)
        throw ConstructionError("product plan: moduli must be non-decreasing");
      prev = t;
    }
    if (k < 2) throw ConstructionError("product plan: bucket base >= 2");
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
      throw ConstructionError("product plan: need 0 < epsilon < 1");
    if (split_l < 1) throw ConstructionError("product plan: split threshold >= 1");
  }

  mpz_class product() const {
    mpz_class p = 1;
    for (const auto& [t, a] : factors)
      for (int i = 0; i < a; ++i) p *= t;
    return p;
  }

  // 0 means below the first range; j >= 1 indexes [k^(2^(j-1)), k^(2^j)).
  int bucket_of(long t) const {
    if (t < k) return 0;
    int j = 1;
    mpz_class hi = mpz_class(k) * k;
    while (hi <= t) {
      ++j;
      hi *= hi;
    }
    return j;
  }

  // ceil(2 log log P), stretched so every modulus lands in a range.
  int level_count() const {
    double lp = std::log(product().get_d());
    int levels = lp > 1.0 ? static_cast<int>(std::ceil(2.0 * std::log(lp))) : 1;
    levels = std::max(levels, 1);
    for (const auto& [t, a] : factors) levels = std::max(levels, bucket_of(t));
    return levels;
  }
};

// Certificate for DFT of the plan's product group. Viable factor groups
// (enough repetitions for at least one vanishing level) get character
// matrix certificates; each bucket is combined with binomial_split, the
// buckets with Kronecker, and the carried remainder multiplies in as an
// unchanged dense factor.
inline Certificate productbound_decompose(const ProductPlan& plan,
                                          const FieldPtr& base) {
  plan.validate();
  struct Item {
    long t;
    int a, bucket, m;
  };
  std::vector<Item> viable;
  std::vector<ProductFactor> carried;
  for (const auto& [t, a] : plan.factors) {
    int bucket = plan.bucket_of(t);
    if (a >= t && bucket >= 1) {
      viable.push_back(
          {t, a, bucket, m_from_epsilon(static_cast<int>(t), a, plan.epsilon)});
    } else {
      carried.push_back({t, a});
    }
  }
  if (plan.require_nondegenerate && !carried.empty()) {
    std::ostringstream os;
    os << "productbound_decompose: no nondegenerate plan for moduli";
    for (const auto& [t, a] : carried) os << " " << t << "^" << a;
    throw ConstructionError(os.str());
  }

  std::vector<long> orders;
  for (const auto& it : viable)
    orders.push_back(it.t % 2 == 0 ? 2 * it.t : it.t);
  for (const auto& [t, a] : carried) orders.push_back(t);
  FieldPtr f = detail::widened_for_orders(base, orders);

  std::stable_sort(viable.begin(), viable.end(),
                   [](const Item& x, const Item& y) { return x.bucket < y.bucket; });

  std::optional<Certificate> acc;
  std::vector<long> acc_moduli;
  size_t i = 0;
  while (i < viable.size()) {
    size_t j = i;
    std::vector<SplitPart> parts;
    std::vector<long> bucket_moduli;
    while (j < viable.size() && viable[j].bucket == viable[i].bucket) {
      const Item& it = viable[j];
      parts.push_back(split_part(
          gwh_decompose(static_cast<int>(it.t), it.a, it.m, f)));
      bucket_moduli.insert(bucket_moduli.end(), static_cast<size_t>(it.a), it.t);
      ++j;
    }
    int l = std::min<int>(plan.split_l, static_cast<int>(parts.size()));
    BinomialSplit bs = binomial_split(parts, l);
    long dim = bs.low_rank.rows();
    Certificate bucket_cert(
        MatrixDescriptor::dft_g(AbelianGroupSpec{bucket_moduli}, f), f,
        std::move(bs.sparse), std::min(bs.rank_bound, dim), bs.sparsity_bound);
    bucket_cert.degenerate = bucket_cert.claimed_rank >= dim;
    {
      std::ostringstream os;
      os << "bucket " << viable[i].bucket << ": " << parts.size()
         << " factor group(s), split threshold " << l;
      bucket_cert.note(os.str());
    }
    if (!acc) {
      acc = std::move(bucket_cert);
      acc_moduli = bucket_moduli;
    } else {
      std::vector<long> merged = acc_moduli;
      merged.insert(merged.end(), bucket_moduli.begin(), bucket_moduli.end());
      acc = kronecker_transfer(
          *acc, bucket_cert,
          MatrixDescriptor::dft_g(AbelianGroupSpec{merged}, f));
      acc_moduli = std::move(merged);
    }
    i = j;
  }

  std::vector<long> all_moduli = acc_moduli;
  for (const auto& [t, a] : carried)
    all_moduli.insert(all_moduli.end(), static_cast<size_t>(a), t);
  MatrixDescriptor target =
      MatrixDescriptor::dft_g(AbelianGroupSpec{all_moduli}, f);

  if (!acc) {
    long dim = AbelianGroupSpec{all_moduli}.order();
    Certificate out(std::move(target), f, SparseChanges(f, dim, dim), dim, 0);
    out.degenerate = true;
    out.note("every modulus carried; trivial full-rank certificate");
    return out;
  }
  if (carried.empty()) {
    acc->note("no carried moduli");
    return std::move(*acc);
  }

  std::vector<long> carried_moduli;
  for (const auto& [t, a] : carried)
    carried_moduli.insert(carried_moduli.end(), static_cast<size_t>(a), t);
  ExactMatrix c = realize_in(
      MatrixDescriptor::dft_g(AbelianGroupSpec{carried_moduli}, f), f);
  long csize = c.rows();
  long dim = acc->changes.rows() * csize;
  Certificate out(std::move(target), f,
                  kronecker_with_dense(acc->changes, c),
                  std::min(acc->claimed_rank * csize, dim),
                  acc->claimed_sparsity * csize);
  out.degenerate = acc->degenerate || out.claimed_rank >= dim;
  out.trace = acc->trace;
  {
    std::ostringstream os;
    os << "carried dense factor of size " << csize;
    out.note(os.str());
  }
  return out;
}

// Plan for certifying DFT_N with N a product of distinct primes: which
// subsets get change matrices and which rows and columns are dropped into
// the low-rank budget.
struct DftBlockPlan {
  FactorableWitness witness;
  int k0 = 1;           // subsets of at least this size get changes
  int m_threshold = 1;  // remove indices divisible by this many primes

  void validate() const {
    if (witness.primes.empty())
      throw ConstructionError("dft plan: no primes");
    Int prod = 1, prev = 1;
    for (Int q : witness.primes) {
      if (q <= prev)
        throw ConstructionError("dft plan: primes must be distinct and increasing");
      if (!is_prime(q)) throw ConstructionError("dft plan: factor not prime");
      prod *= q;
      prev = q;
    }
    if (prod != witness.n)
      throw ConstructionError("dft plan: product does not match N");
    if (k0 < 1 || k0 > static_cast<int>(witness.primes.size()))
      throw ConstructionError("dft plan: subset threshold out of range");
    if (m_threshold < 1)
      throw ConstructionError("dft plan: removal threshold must be positive");
  }
};

// How each block's cyclic-product structure is certified.
struct DftSubsetPlan {
  int c_min = 1;  // keep a prime power only if it repeats this often
  double epsilon = 0.5;
  std::map<long, int> m_for_t;  // vanishing level override per modulus
};

// One subset S of the prime positions: all copies of the canonical block
// M(S), which after the discrete-log relabeling is the adjusted circulant
// of `symbol` over the product of Z_{q-1} factors.
struct DftSubsetRecord {
  std::vector<int> positions;  // indices into witness.primes
  long mult = 1;               // product of q over S
  long fact = 1;               // product of q - 1 over S
  long pair_count = 0;         // |T_S|
  AbelianGroupSpec dlog_group; // only populated when S is nonempty
  std::vector<FieldElement> symbol;
  std::vector<std::vector<long>> copy_rows;  // ambient index per block row
  std::vector<std::vector<long>> copy_cols;
  std::vector<int> copy_row_zeros;  // zero residues in the copy's row pattern
  std::vector<int> copy_col_zeros;
};

struct DftBlocksResult {
  DftBlockPlan plan;
  FieldPtr field;
  std::vector<DftSubsetRecord> subsets;  // indexed by subset bitmask
};

// Splits [0,N)^2 into the cells T_S (pairs whose entries are coprime to
// exactly the primes in S), proves the split covers everything, and checks
// every copy of every cell against the canonical symbol entrywise.
inline DftBlocksResult dft_blocks(const DftBlockPlan& plan, const FieldPtr& f) {
  plan.validate();
  const long n = static_cast<long>(plan.witness.n);
  const int l = static_cast<int>(plan.witness.primes.size());
  std::vector<long> q(l);
  for (int s = 0; s < l; ++s) q[s] = static_cast<long>(plan.witness.primes[s]);

  RootOfUnity w = primitive_root_of_unity(f, n);
  std::vector<long> idem(l);
  std::vector<std::vector<long>> gpow(l);
  std::vector<std::vector<FieldElement>> gam_pow(l);
  for (int s = 0; s < l; ++s) {
    long co = n / q[s];
    idem[s] = co % n * invmod(co % q[s], q[s]) % n;
    long g = static_cast<long>(primitive_root(q[s]));
    gpow[s].resize(static_cast<size_t>(q[s] - 1));
    long v = 1;
    for (long x = 0; x < q[s] - 1; ++x) {
      gpow[s][x] = v;
      v = v * g % q[s];
    }
    FieldElement gamma = w.element.pow(idem[s]);
    gam_pow[s].assign(1, FieldElement::one(f));
    for (long e = 1; e < q[s]; ++e) gam_pow[s].push_back(gam_pow[s].back() * gamma);
  }

  ExactMatrix dft = realize_in(MatrixDescriptor::dft(n, f), f);

  DftBlocksResult out{plan, f, {}};
  out.subsets.resize(1u << l);
  long covered = 0;
  for (unsigned mask = 0; mask < (1u << l); ++mask) {
    DftSubsetRecord& rec = out.subsets[mask];
    std::vector<int> comp;
    for (int s = 0; s < l; ++s)
      (mask >> s & 1u ? rec.positions : comp).push_back(s);
    for (int s : rec.positions) {
      rec.mult *= q[s];
      rec.fact *= q[s] - 1;
    }

    if (!rec.positions.empty()) {
      std::vector<long> moduli;
      for (int s : rec.positions) moduli.push_back(q[s] - 1);
      rec.dlog_group = AbelianGroupSpec{std::move(moduli)};
    }
    rec.symbol.reserve(rec.fact);
    for (long widx = 0; widx < rec.fact; ++widx) {
      FieldElement val = FieldElement::one(f);
      if (!rec.positions.empty()) {
        std::vector<long> digits = rec.dlog_group.index_to_element(widx);
        for (size_t i = 0; i < rec.positions.size(); ++i)
          val *= gam_pow[rec.positions[i]][gpow[rec.positions[i]][digits[i]]];
      }
      rec.symbol.push_back(val);
    }

    // Residue patterns over the complement: per position, a pair with at
    // least one zero, encoded 0 -> (0,0), 1..q-1 -> (0,c), q..2q-2 -> (c,0).
    std::vector<long> radix;
    long copies = 1;
    for (int s : comp) {
      radix.push_back(2 * q[s] - 1);
      copies *= 2 * q[s] - 1;
    }
    for (long pat = 0; pat < copies; ++pat) {
      std::vector<long> c1(comp.size(), 0), c2(comp.size(), 0);
      long rest = pat;
      for (size_t i = comp.size(); i-- > 0;) {
        long code = rest % radix[i];
        rest /= radix[i];
        long qq = q[comp[i]];
        if (code == 0) continue;
        if (code < qq)
          c2[i] = code;
        else
          c1[i] = code - qq + 1;
      }
      std::vector<long> rows(rec.fact), cols(rec.fact);
      for (long u = 0; u < rec.fact; ++u) {
        long a = 0, b = 0;
        std::vector<long> digits =
            rec.positions.empty() ? std::vector<long>{}
                                  : rec.dlog_group.index_to_element(u);
        for (size_t i = 0; i < rec.positions.size(); ++i) {
          int s = rec.positions[i];
          a = (a + gpow[s][digits[i]] * idem[s]) % n;
          b = (b + gpow[s][digits[i]] * idem[s]) % n;
        }
        for (size_t i = 0; i < comp.size(); ++i) {
          int s = comp[i];
          a = (a + c1[i] * idem[s]) % n;
          b = (b + c2[i] * idem[s]) % n;
        }
        rows[u] = a;
        cols[u] = b;
      }
      int z1 = 0, z2 = 0;
      for (size_t i = 0; i < comp.size(); ++i) {
        if (c1[i] == 0) ++z1;
        if (c2[i] == 0) ++z2;
      }
      for (long u = 0; u < rec.fact; ++u)
        for (long v = 0; v < rec.fact; ++v) {
          long su = rec.positions.empty()
                        ? 0
                        : rec.dlog_group.add(u, v);
          if (dft.at(rows[u], cols[v]) != rec.symbol[su])
            throw InvariantViolation(
                "dft_blocks: copy disagrees with the canonical block");
        }
      rec.copy_rows.push_back(std::move(rows));
      rec.copy_cols.push_back(std::move(cols));
      rec.copy_row_zeros.push_back(z1);
      rec.copy_col_zeros.push_back(z2);
    }
    rec.pair_count = copies * rec.fact * rec.fact;
    covered += rec.pair_count;
  }
  if (covered != n * n)
    throw InvariantViolation("dft_blocks: cells do not cover the index square");
  std::vector<long> count(1u << l, 0);
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) {
      unsigned mask = 0;
      for (int s = 0; s < l; ++s)
        if (a % q[s] != 0 && b % q[s] != 0) mask |= 1u << s;
      ++count[mask];
    }
  for (unsigned mask = 0; mask < (1u << l); ++mask)
    if (count[mask] != out.subsets[mask].pair_count)
      throw InvariantViolation("dft_blocks: cell count mismatch");
  return out;
}

namespace detail {

inline bool hosts_root(const FieldPtr& f, long order) {
  try {
    primitive_root_of_unity(f, order);
    return true;
  } catch (const ConstructionError&) {
    return false;
  }
}

inline bool gwh_fits_field(long t, const FieldPtr& f) {
  try {
    return field_for_gwh(static_cast<int>(t), f)->same(*f);
  } catch (const ConstructionError&) {
    return false;
  }
}

inline SparseChanges dense_kron_sparse(const ExactMatrix& c,
                                       const SparseChanges& e) {
  SparseChanges r(e.field(), c.rows() * e.rows(), c.cols() * e.cols());
  for (long i = 0; i < c.rows(); ++i)
    for (long j = 0; j < c.cols(); ++j) {
      if (c.at(i, j).is_zero()) continue;
      for (const auto& [k, v] : e.entries())
        r.set(i * e.rows() + k.first, j * e.cols() + k.second,
              c.at(i, j) * v);
    }
  return r;
}

// Left-to-right Kronecker fold over certified factors and carried dense
// factors. Carried factors multiply the current bounds by their size; a
// pure-dense prefix is held back until the first certificate arrives.
struct KronAccum {
  FieldPtr f;
  bool has_cert = false;
  ExactMatrix carry;
  SparseChanges changes;
  long rank_bound = 0, sparsity_bound = 0, rows = 1, cols = 1;

  explicit KronAccum(FieldPtr field)
      : f(std::move(field)), carry(f, 1, 1), changes(f, 1, 1) {
    carry.at(0, 0) = FieldElement::one(f);
  }

  void append_dense(const ExactMatrix& c) {
    if (!has_cert) {
      carry = kronecker(carry, c);
    } else {
      changes = kronecker_with_dense(changes, c);
      long size = std::min(c.rows(), c.cols());
      rank_bound *= size;
      sparsity_bound *= size;
    }
    rows *= c.rows();
    cols *= c.cols();
  }

  void append_cert(const Certificate& cert) {
    if (!cert.field->same(*f))
      throw ConstructionError("kronecker fold: field mismatch");
    long n_new = std::min(cert.changes.rows(), cert.changes.cols());
    if (!has_cert) {
      has_cert = true;
      long n_carry = std::min(rows, cols);
      changes = dense_kron_sparse(carry, cert.changes);
      rank_bound = n_carry * cert.claimed_rank;
      sparsity_bound = n_carry * cert.claimed_sparsity;
    } else {
      long n_old = std::min(rows, cols);
      SparseChanges e = kronecker(changes, cert.changes);
      rank_bound = rank_bound * n_new + cert.claimed_rank * n_old;
      sparsity_bound = sparsity_bound * cert.claimed_sparsity;
      changes = std::move(e);
    }
    rows *= cert.changes.rows();
    cols *= cert.changes.cols();
  }

  Certificate finish(MatrixDescriptor target, const std::string& note) const {
    long dim = std::min(rows, cols);
    if (!has_cert) {
      Certificate out(std::move(target), f, SparseChanges(f, rows, cols), dim,
                      0);
      out.degenerate = true;
      out.note(note + "; every factor carried");
      return out;
    }
    Certificate out(std::move(target), f, changes, std::min(rank_bound, dim),
                    sparsity_bound);
    out.degenerate = out.claimed_rank >= dim;
    out.note(note);
    return out;
  }
};

// Certificate for DFT of Z_{t_1}^{c_1} x ... (t ascending): groups with
// enough repetitions and a compatible field go through the character
// matrix path, the rest ride along dense.
inline Certificate grouped_dft_certificate(
    const std::vector<std::pair<long, int>>& counts, const DftSubsetPlan& sub,
    const FieldPtr& f) {
  KronAccum acc(f);
  std::vector<long> moduli;
  for (const auto& [t, c] : counts) {
    moduli.insert(moduli.end(), static_cast<size_t>(c), t);
    if (c >= t && gwh_fits_field(t, f)) {
      auto it = sub.m_for_t.find(t);
      int m = it != sub.m_for_t.end()
                  ? it->second
                  : m_from_epsilon(static_cast<int>(t), c, sub.epsilon);
      acc.append_cert(gwh_decompose(static_cast<int>(t), c, m, f));
    } else {
      acc.append_dense(realize_in(
          MatrixDescriptor::dft_g(
              AbelianGroupSpec{std::vector<long>(static_cast<size_t>(c), t)}, f),
          f));
    }
  }
  std::ostringstream os;
  os << "grouped basis factors:";
  for (const auto& [t, c] : counts) os << " " << t << "^" << c;
  return acc.finish(
      MatrixDescriptor::dft_g(AbelianGroupSpec{std::move(moduli)}, f), f ? os.str() : "");
}

// Coset-splitting data for one subset: per coordinate, the kept part T_s
// of q_s - 1 (the prime powers that repeat often enough and whose roots
// the field hosts) and the grid part d_s = (q_s - 1) / T_s.
struct SubsetBasis {
  std::vector<long> t_sizes, d_sizes;
  std::vector<size_t> active;  // coordinates with T_s > 1
  long p = 1, d = 1;
  std::optional<Certificate> x_cert;  // for DFT of the active T_s product
};

inline SubsetBasis subset_basis(const DftSubsetRecord& rec,
                                const DftSubsetPlan& sub, const FieldPtr& f) {
  const std::vector<long>& qm1 = rec.dlog_group.invariant_factors;
  size_t k = qm1.size();
  std::vector<std::vector<long>> parts(k);
  std::map<long, int> count;
  for (size_t s = 0; s < k; ++s) {
    for (const PrimePower& pp : factorize(qm1[s])) {
      parts[s].push_back(pp.value);
      ++count[pp.value];
    }
    std::sort(parts[s].begin(), parts[s].end());
  }
  auto useful = [&](long t) {
    return count[t] >= sub.c_min && hosts_root(f, t);
  };

  SubsetBasis out;
  out.t_sizes.assign(k, 1);
  out.d_sizes.assign(k, 1);
  for (size_t s = 0; s < k; ++s) {
    for (long t : parts[s])
      if (useful(t)) out.t_sizes[s] *= t;
    out.d_sizes[s] = qm1[s] / out.t_sizes[s];
    out.p *= out.t_sizes[s];
    out.d *= out.d_sizes[s];
    if (out.t_sizes[s] > 1) out.active.push_back(s);
  }
  if (out.active.empty()) return out;

  // Regroup the active coordinates' prime powers: slots ordered by modulus
  // then coordinate, matching the grouped certificate's axis order.
  std::vector<std::pair<long, size_t>> slots;  // (t, coordinate)
  std::map<long, int> active_count;
  for (size_t s : out.active)
    for (long t : parts[s])
      if (useful(t)) {
        slots.emplace_back(t, s);
        ++active_count[t];
      }
  std::stable_sort(slots.begin(), slots.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<long, int>> counts(active_count.begin(),
                                           active_count.end());
  Certificate inner = grouped_dft_certificate(counts, sub, f);

  // X row Y decodes coordinate-wise; each coordinate value splits into
  // residues mod its slots. Columns additionally absorb the relabeling
  // between the coordinate root's induced t-th root and the canonical one.
  std::vector<long> active_t;
  for (size_t s : out.active) active_t.push_back(out.t_sizes[s]);
  AbelianGroupSpec gx{active_t};
  std::map<std::pair<long, size_t>, long> relabel;
  for (size_t s : out.active) {
    long ts = out.t_sizes[s];
    FieldElement wt = primitive_root_of_unity(f, ts).element;
    for (long t : parts[s]) {
      if (!useful(t)) continue;
      long co = ts / t;
      long e = co == 1 ? 1 : co % ts * invmod(co % t, t) % ts;
      FieldElement induced = wt.pow(e);
      FieldElement canon = primitive_root_of_unity(f, t).element;
      long u = -1;
      FieldElement probe = FieldElement::one(f);
      for (long v = 0; v < t; ++v) {
        if (v > 0) probe *= canon;
        if (v > 0 && probe == induced) {
          u = v;
          break;
        }
      }
      if (u < 0)
        throw InvariantViolation("subset basis: root relabeling not found");
      relabel[{t, s}] = u;
    }
  }
  std::vector<long> slot_radix;
  for (const auto& [t, s] : slots) slot_radix.push_back(t);
  std::vector<long> row_map(out.p), col_map(out.p);
  for (long y = 0; y < out.p; ++y) {
    std::vector<long> coord = gx.index_to_element(y);
    long ri = 0, ci = 0;
    for (size_t sl = 0; sl < slots.size(); ++sl) {
      auto [t, s] = slots[sl];
      size_t ai = static_cast<size_t>(
          std::find(out.active.begin(), out.active.end(), s) -
          out.active.begin());
      long digit = coord[ai] % t;
      ri = ri * t + digit;
      ci = ci * t + relabel[{t, s}] * digit % t;
    }
    row_map[y] = ri;
    col_map[y] = ci;
  }

  MatrixDescriptor x_desc = MatrixDescriptor::dft_g(gx, f);
  ExactMatrix lhs = realize_in(x_desc, f);
  ExactMatrix rhs = realize_in(inner.target, f).permuted(row_map, col_map);
  if (!(lhs == rhs))
    throw InvariantViolation("subset basis: regrouped factors do not match");
  out.x_cert = permuted_certificate(inner, row_map, col_map, x_desc,
                                    "prime-power regrouping");
  return out;
}

}  // namespace detail

// Certificate for the canonical block M(S): split each coordinate into a
// grid of cosets, diagonalize every grid cell through the kept basis X,
// and reuse X's changes in every cell. The two-term split per cell makes
// the whole grid's rank at most 2 * d * rank(X - E_X).
inline Certificate dft_subset_certificate(const DftSubsetRecord& rec,
                                          const DftSubsetPlan& sub,
                                          const FieldPtr& f) {
  if (rec.positions.empty())
    throw ConstructionError("dft_subset_certificate: empty subset");
  MatrixDescriptor target =
      MatrixDescriptor::adjusted_g_circulant(rec.dlog_group, rec.symbol);
  detail::SubsetBasis sb = detail::subset_basis(rec, sub, f);
  const long fact = rec.fact;
  if (!sb.x_cert) {
    Certificate out(std::move(target), f, SparseChanges(f, fact, fact), fact, 0);
    out.degenerate = true;
    out.note("no usable basis factors; trivial block certificate");
    return out;
  }
  const Certificate& xc = *sb.x_cert;
  const std::vector<long>& qm1 = rec.dlog_group.invariant_factors;
  const size_t k = qm1.size();
  std::vector<long> active_t;
  for (size_t s : sb.active) active_t.push_back(sb.t_sizes[s]);
  AbelianGroupSpec gz{active_t};
  const long p = sb.p, d = sb.d;
  FieldElement invp = FieldElement::from_int(f, p).inverse();

  auto offset_at = [&](long idx) {
    std::vector<long> a(k, 0);
    for (size_t s = k; s-- > 0;) {
      a[s] = idx % sb.d_sizes[s];
      idx /= sb.d_sizes[s];
    }
    return a;
  };
  auto grid_index = [&](const std::vector<long>& a, const std::vector<long>& y) {
    std::vector<long> x(k);
    for (size_t s = 0; s < k; ++s) x[s] = a[s];
    for (size_t i = 0; i < sb.active.size(); ++i)
      x[sb.active[i]] += sb.d_sizes[sb.active[i]] * y[i];
    return rec.dlog_group.element_to_index(x);
  };

  bool check_cells = p <= 16 && d <= 8;
  ExactMatrix x_dense =
      check_cells ? realize_in(xc.target, f) : ExactMatrix(f, 0, 0);

  SparseChanges e(f, fact, fact);
  for (long ai = 0; ai < d; ++ai) {
    std::vector<long> a1 = offset_at(ai);
    std::vector<long> rmap(p);
    for (long y = 0; y < p; ++y) rmap[y] = grid_index(a1, gz.index_to_element(y));
    for (long aj = 0; aj < d; ++aj) {
      std::vector<long> a2 = offset_at(aj);
      std::vector<long> cmap(p);
      for (long y = 0; y < p; ++y)
        cmap[y] = grid_index(a2, gz.index_to_element(y));
      std::vector<FieldElement> cell_symbol;
      cell_symbol.reserve(p);
      for (long z = 0; z < p; ++z) {
        std::vector<long> zz = gz.index_to_element(z);
        std::vector<long> x(k);
        for (size_t s = 0; s < k; ++s) x[s] = (a1[s] + a2[s]) % qm1[s];
        for (size_t i = 0; i < sb.active.size(); ++i) {
          size_t s = sb.active[i];
          x[s] = (a1[s] + a2[s] + sb.d_sizes[s] * zz[i]) % qm1[s];
        }
        cell_symbol.push_back(rec.symbol[rec.dlog_group.element_to_index(x)]);
      }
      std::vector<FieldElement> hat =
          group_character_transform(gz, cell_symbol, f);
      std::vector<FieldElement> diag;
      diag.reserve(p);
      for (long z = 0; z < p; ++z) diag.push_back(hat[gz.neg(z)] * invp);
      if (check_cells) {
        ExactMatrix back = x_dense * diagonal_matrix(f, diag) * x_dense;
        for (long u = 0; u < p; ++u)
          for (long v = 0; v < p; ++v)
            if (back.at(u, v) !=
                rec.symbol[rec.dlog_group.add(rmap[u], cmap[v])])
              throw InvariantViolation(
                  "dft_subset_certificate: cell diagonalization mismatch");
      }
      SparseChanges cell = mul_diag_mul(xc.changes, diag, xc.changes);
      e = e + cell.remapped(rmap, cmap, fact, fact);
    }
  }

  long r = std::min(2 * d * xc.claimed_rank, fact);
  long s = d * xc.claimed_sparsity * xc.claimed_sparsity;
  Certificate out(std::move(target), f, std::move(e), r, s);
  out.degenerate = r >= fact;
  out.trace = xc.trace;
  {
    std::ostringstream os;
    os << "coset grid " << d << " x " << d << " of blocks of size " << p;
    out.note(os.str());
  }
  return out;
}

// Certificate for DFT_N: indices divisible by at least m_threshold primes
// are absorbed into the low-rank budget (rows and columns each); every
// surviving copy of every cell gets that cell's changes. The cells tile
// the surviving square, so the cell rank bounds add up.
inline Certificate dft_decompose(const DftBlockPlan& plan,
                                 const DftSubsetPlan& sub, const FieldPtr& f) {
  DftBlocksResult blocks = dft_blocks(plan, f);
  const long n = static_cast<long>(plan.witness.n);
  const int l = static_cast<int>(plan.witness.primes.size());
  if (l - 2 * (plan.m_threshold - 1) < plan.k0)
    throw ConstructionError(
        "dft_decompose: surviving copies could fall below the subset threshold");

  std::vector<char> removed(n, 0);
  long removed_count = 0;
  for (long a = 0; a < n; ++a) {
    int z = 0;
    for (Int q : plan.witness.primes)
      if (a % static_cast<long>(q) == 0) ++z;
    if (z >= plan.m_threshold) {
      removed[a] = 1;
      ++removed_count;
    }
  }

  SparseChanges e(f, n, n);
  long r = 2 * removed_count;
  long kept_copies = 0;
  std::ostringstream note;
  note << "N=" << n << " removed " << removed_count << " rows and columns";
  for (const DftSubsetRecord& rec : blocks.subsets) {
    std::vector<size_t> kept;
    for (size_t c = 0; c < rec.copy_rows.size(); ++c)
      if (rec.copy_row_zeros[c] < plan.m_threshold &&
          rec.copy_col_zeros[c] < plan.m_threshold)
        kept.push_back(c);
    if (kept.empty()) continue;
    if (static_cast<int>(rec.positions.size()) < plan.k0)
      throw InvariantViolation("dft_decompose: kept copy below subset threshold");
    Certificate cs = dft_subset_certificate(rec, sub, f);
    for (size_t c : kept) {
      for (long idx : rec.copy_rows[c])
        if (removed[idx])
          throw InvariantViolation("dft_decompose: kept copy uses a removed row");
      for (long idx : rec.copy_cols[c])
        if (removed[idx])
          throw InvariantViolation("dft_decompose: kept copy uses a removed column");
      e = e + cs.changes.remapped(rec.copy_rows[c], rec.copy_cols[c], n, n);
      r += cs.claimed_rank;
      ++kept_copies;
    }
    note << "; subset of size " << rec.positions.size() << ": " << kept.size()
         << " copies at rank " << cs.claimed_rank;
  }

  r = std::min(r, n);
  SparsityReport sp = e.sparsity();
  Certificate out(MatrixDescriptor::dft(n, f), f, std::move(e), r,
                  std::max(sp.max_row_support, sp.max_col_support));
  out.degenerate = r >= n;
  note << "; " << kept_copies << " kept copies";
  out.note(note.str());
  VerificationReport rep = verify(out);
  if (!rep.verified)
    throw ConstructionError(
        "dft_decompose: assembled certificate failed verification: " +
        rep.summary());
  return out;
}

}  // namespace rigidity
