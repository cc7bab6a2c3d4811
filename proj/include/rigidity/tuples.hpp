#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/field.hpp"

namespace rigidity {

// Index tuples over Z_d^n. Indexing is big endian: entry 0 is the most
// significant digit, matching Kronecker-product row ordering.

inline long pow_checked(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<long>::max() / base)
      throw ConstructionError("tuple space too large");
    r *= base;
  }
  return r;
}

inline std::vector<int> index_to_tuple(long idx, int d, int n) {
  std::vector<int> t(n);
  for (int k = n - 1; k >= 0; --k) {
    t[k] = static_cast<int>(idx % d);
    idx /= d;
  }
  return t;
}

inline long tuple_to_index(const std::vector<int>& t, int d) {
  long idx = 0;
  for (int v : t) {
    if (v < 0 || v >= d) throw ConstructionError("tuple entry out of range");
    idx = idx * d + v;
  }
  return idx;
}

inline int zero_count(const std::vector<int>& t) {
  return static_cast<int>(std::count(t.begin(), t.end(), 0));
}

inline std::vector<int> value_counts(const std::vector<int>& t, int d) {
  std::vector<int> c(d, 0);
  for (int v : t) {
    if (v < 0 || v >= d) throw ConstructionError("tuple entry out of range");
    ++c[v];
  }
  return c;
}

inline long dot(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ConstructionError("dot: length mismatch");
  long s = 0;
  for (size_t k = 0; k < a.size(); ++k) s += static_cast<long>(a[k]) * b[k];
  return s;
}

inline std::vector<int> tuple_add(const std::vector<int>& a,
                                  const std::vector<int>& b, int d) {
  if (a.size() != b.size()) throw ConstructionError("tuple_add: length mismatch");
  std::vector<int> r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = (a[k] + b[k]) % d;
  return r;
}

struct PermClass {
  std::vector<int> rep;  // sorted non-decreasing canonical representative
  mpz_class size;        // number of distinct permutations
};

inline PermClass perm_class(const std::vector<int>& t, int d) {
  PermClass pc;
  pc.rep = t;
  std::sort(pc.rep.begin(), pc.rep.end());
  std::vector<int> counts = value_counts(t, d);
  // multinomial n! / prod(count_v!), built as a product of binomials
  mpz_class size = 1;
  unsigned long rem = t.size();
  for (int v = 0; v < d; ++v) {
    mpz_class bin;
    mpz_bin_uiui(bin.get_mpz_t(), rem, static_cast<unsigned long>(counts[v]));
    size *= bin;
    rem -= static_cast<unsigned long>(counts[v]);
  }
  pc.size = size;
  return pc;
}

// All distinct permutations of a class representative, in lexicographic order.
inline std::vector<std::vector<int>> class_members(std::vector<int> rep) {
  std::sort(rep.begin(), rep.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(rep);
  } while (std::next_permutation(rep.begin(), rep.end()));
  return out;
}

// Canonical representatives of every permutation class of Z_d^n,
// i.e. all non-decreasing tuples, in lexicographic order.
inline std::vector<std::vector<int>> all_class_reps(int d, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  while (true) {
    out.push_back(cur);
    int k = n - 1;
    while (k >= 0 && cur[k] == d - 1) --k;
    if (k < 0) break;
    int v = cur[k] + 1;
    for (int j = k; j < n; ++j) cur[j] = v;
  }
  return out;
}

// Anchored tuple family: the first d*m positions hold m copies of each value
// in order (positions [v*m, (v+1)*m) carry value v), the remaining n - d*m
// positions range freely. Change support lives on the classes of tuples with
// at least d*m zero entries.
struct SPlan {
  int d = 0, n = 0, m = 0;
  std::vector<std::vector<int>> s_members;     // |S| = d^(n - d*m)
  std::vector<std::vector<int>> t_class_reps;  // sorted reps, >= d*m zeros
};

inline SPlan build_s_plan(int d, int n, int m) {
  if (d < 2 || n < 1 || m < 1)
    throw ConstructionError("build_s_plan: need d >= 2, n >= 1, m >= 1");
  if (static_cast<long>(d) * m > n)
    throw ConstructionError("build_s_plan: d*m exceeds n");
  SPlan plan;
  plan.d = d;
  plan.n = n;
  plan.m = m;
  int free_len = n - d * m;
  long free_count = pow_checked(d, free_len);
  plan.s_members.reserve(free_count);
  std::vector<int> base(n, 0);
  for (int v = 0; v < d; ++v)
    for (int k = 0; k < m; ++k) base[v * m + k] = v;
  for (long idx = 0; idx < free_count; ++idx) {
    std::vector<int> t = base;
    std::vector<int> suffix = index_to_tuple(idx, d, free_len);
    std::copy(suffix.begin(), suffix.end(), t.begin() + d * m);
    plan.s_members.push_back(std::move(t));
  }
  // classes with >= d*m zeros: pick the zero count, then a non-decreasing
  // filling of the rest with values 1..d-1
  for (int z = n; z >= d * m; --z) {
    int rest = n - z;
    std::vector<int> tail(rest, 1);
    while (true) {
      std::vector<int> rep(n, 0);
      std::copy(tail.begin(), tail.end(), rep.begin() + z);
      plan.t_class_reps.push_back(std::move(rep));
      if (rest == 0) break;
      int k = rest - 1;
      while (k >= 0 && tail[k] == d - 1) --k;
      if (k < 0) break;
      int v = tail[k] + 1;
      for (int j = k; j < rest; ++j) tail[j] = v;
    }
  }
  std::sort(plan.t_class_reps.begin(), plan.t_class_reps.end());
  return plan;
}

inline bool has_all_counts_at_least(const std::vector<int>& t, int d, int m) {
  std::vector<int> c = value_counts(t, d);
  return std::all_of(c.begin(), c.end(), [m](int x) { return x >= m; });
}

// |perm(S)|: tuples in which every value 0..d-1 appears at least m times.
inline mpz_class count_perm_s(const SPlan& plan) {
  int d = plan.d, n = plan.n, m = plan.m;
  // ways[r] after processing k symbols = #sequences of the remaining symbols
  // over r chosen positions; process symbols one at a time
  std::vector<mpz_class> ways(n + 1, mpz_class(0));
  ways[0] = 1;
  for (int sym = 0; sym < d; ++sym) {
    std::vector<mpz_class> next(n + 1, mpz_class(0));
    for (int r = 0; r <= n; ++r) {
      if (ways[r] == 0) continue;
      for (int c = m; c + r <= n; ++c) {
        mpz_class bin;
        mpz_bin_uiui(bin.get_mpz_t(), static_cast<unsigned long>(r + c),
                     static_cast<unsigned long>(c));
        next[r + c] += ways[r] * bin;
      }
    }
    ways = std::move(next);
  }
  return ways[n];
}

// Parameter helper: m from the sparsity target eps, per the asymptotic
// recipe delta = eps / (10 log2(1/eps)), m = ceil(n (1 - delta) / d),
// clamped so that d*m <= n stays satisfiable.
inline int m_from_epsilon(int d, int n, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw ConstructionError("m_from_epsilon: need 0 < eps < 1");
  double delta = eps / (10.0 * std::log2(1.0 / eps));
  int m = static_cast<int>(std::ceil(n * (1.0 - delta) / d));
  m = std::min(m, n / d);
  return std::max(m, 1);
}

// P_f evaluated at the point (omega^{j_1}, ..., omega^{j_n}):
// sum over I of f(I) * omega^(I . J).
inline FieldElement eval_pf(int d,
                            const std::map<std::vector<int>, FieldElement>& f,
                            const RootOfUnity& omega,
                            const std::vector<int>& j) {
  if (omega.order != d)
    throw ConstructionError("eval_pf: root order does not match d");
  const FieldPtr& fld = omega.element.field();
  std::vector<FieldElement> pw(d, FieldElement::one(fld));
  for (int k = 1; k < d; ++k) pw[k] = pw[k - 1] * omega.element;
  FieldElement acc = FieldElement::zero(fld);
  for (const auto& [i, v] : f) {
    if (v.is_zero()) continue;
    acc += v * pw[dot(i, j) % d];
  }
  return acc;
}

// All d^n evaluations at once via axis-by-axis transforms; w[index(J)] =
// P_f at omega^{[J]}. Cost n * d^(n+1) field operations.
inline std::vector<FieldElement> eval_pf_all(std::vector<FieldElement> v,
                                             const RootOfUnity& omega, int d,
                                             int n) {
  if (omega.order != d)
    throw ConstructionError("eval_pf_all: root order does not match d");
  if (static_cast<long>(v.size()) != pow_checked(d, n))
    throw ConstructionError("eval_pf_all: value vector has wrong length");
  const FieldPtr& fld = omega.element.field();
  std::vector<FieldElement> pw(d, FieldElement::one(fld));
  for (int k = 1; k < d; ++k) pw[k] = pw[k - 1] * omega.element;
  long size = static_cast<long>(v.size());
  std::vector<FieldElement> buf(d, FieldElement::zero(fld));
  for (int axis = n - 1; axis >= 0; --axis) {
    long stride = pow_checked(d, n - 1 - axis);
    long block = stride * d;
    for (long base = 0; base < size; base += block) {
      for (long off = 0; off < stride; ++off) {
        long at = base + off;
        for (int out = 0; out < d; ++out) {
          FieldElement acc = FieldElement::zero(fld);
          for (int in = 0; in < d; ++in) {
            const FieldElement& x = v[at + in * stride];
            if (!x.is_zero()) acc += pw[(out * in) % d] * x;
          }
          buf[out] = std::move(acc);
        }
        for (int out = 0; out < d; ++out) v[at + out * stride] = buf[out];
      }
    }
  }
  return v;
}

}  // namespace rigidity
