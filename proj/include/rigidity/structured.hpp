#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/field.hpp"
#include "rigidity/matrix.hpp"
#include "rigidity/numtheory.hpp"
#include "rigidity/tuples.hpp"

namespace rigidity {

// Re-expresses x in a compatible field: cyclotomic order m into any multiple
// of m, prime subfield into an extension of the same characteristic, and an
// extension element that happens to sit in the prime subfield back down.
inline FieldElement lift(const FieldElement& x, const FieldPtr& target) {
  const FieldPtr& src = x.field();
  if (src->same(*target)) return x;
  if (src->is_finite() && target->kind() == Field::Kind::Prime &&
      target->characteristic() == src->characteristic()) {
    if (!x.in_prime_subfield())
      throw ConstructionError("lift: element not in the prime subfield");
    return FieldElement::from_int(target, x.residue_value());
  }
  if (src->kind() == Field::Kind::Cyclotomic &&
      target->kind() == Field::Kind::Cyclotomic) {
    long m = src->cyclo_order(), mm = target->cyclo_order();
    if (mm % m != 0)
      throw ConstructionError("lift: target cyclotomic order not a multiple");
    long step = mm / m;
    std::vector<Rational> acc(target->degree(), Rational(0));
    const std::vector<Rational>& cs = x.rational_coeffs();
    for (size_t k = 0; k < cs.size(); ++k) {
      if (cs[k] == 0) continue;
      const std::vector<mpz_class>& row =
          target->zeta_power(step * static_cast<long>(k));
      for (size_t t = 0; t < row.size(); ++t)
        if (row[t] != 0) acc[t] += cs[k] * Rational(row[t]);
    }
    for (auto& c : acc) c.canonicalize();
    return FieldElement::from_coeffs(target, std::move(acc));
  }
  if (src->kind() == Field::Kind::Prime && target->is_finite() &&
      target->characteristic() == src->characteristic()) {
    std::vector<Int> rs(target->degree(), 0);
    rs[0] = x.residue_value();
    return FieldElement::from_residues(target, std::move(rs));
  }
  throw ConstructionError("lift: no embedding between these fields");
}

// Finite abelian group as a product of cyclic factors; elements are tuples
// in mixed radix, big endian (first factor most significant).
struct AbelianGroupSpec {
  std::vector<long> invariant_factors;

  void validate() const {
    if (invariant_factors.empty())
      throw ConstructionError("group: no invariant factors");
    for (long n : invariant_factors)
      if (n < 2) throw ConstructionError("group: factors must be >= 2");
    order();  // overflow check
  }

  long order() const {
    long r = 1;
    for (long n : invariant_factors) {
      if (r > std::numeric_limits<long>::max() / n)
        throw ConstructionError("group: order too large");
      r *= n;
    }
    return r;
  }

  std::vector<long> index_to_element(long idx) const {
    std::vector<long> e(invariant_factors.size());
    for (size_t k = invariant_factors.size(); k-- > 0;) {
      e[k] = idx % invariant_factors[k];
      idx /= invariant_factors[k];
    }
    return e;
  }

  long element_to_index(const std::vector<long>& e) const {
    long idx = 0;
    for (size_t k = 0; k < invariant_factors.size(); ++k)
      idx = idx * invariant_factors[k] + (e[k] % invariant_factors[k]);
    return idx;
  }

  long add(long a, long b) const {
    std::vector<long> ea = index_to_element(a), eb = index_to_element(b);
    for (size_t k = 0; k < ea.size(); ++k)
      ea[k] = (ea[k] + eb[k]) % invariant_factors[k];
    return element_to_index(ea);
  }

  long neg(long a) const {
    std::vector<long> ea = index_to_element(a);
    for (size_t k = 0; k < ea.size(); ++k)
      ea[k] = (invariant_factors[k] - ea[k]) % invariant_factors[k];
    return element_to_index(ea);
  }

  long sub(long a, long b) const { return add(a, neg(b)); }

  bool operator==(const AbelianGroupSpec&) const = default;
};

enum class MatrixKind {
  Gwh,
  Dft,
  Circulant,
  AdjustedCirculant,
  Toeplitz,
  Hankel,
  GCirculant,
  AdjustedGCirculant,
  DftG,
  VandermondeGeometric,
};

inline const char* matrix_kind_name(MatrixKind k) {
  switch (k) {
    case MatrixKind::Gwh: return "gwh";
    case MatrixKind::Dft: return "dft";
    case MatrixKind::Circulant: return "circulant";
    case MatrixKind::AdjustedCirculant: return "adjusted_circulant";
    case MatrixKind::Toeplitz: return "toeplitz";
    case MatrixKind::Hankel: return "hankel";
    case MatrixKind::GCirculant: return "g_circulant";
    case MatrixKind::AdjustedGCirculant: return "adjusted_g_circulant";
    case MatrixKind::DftG: return "dft_g";
    case MatrixKind::VandermondeGeometric: return "vandermonde_geometric";
  }
  throw InvariantViolation("matrix_kind_name: unknown kind");
}

// Self-describing handle: enough data to rebuild the matrix exactly.
struct MatrixDescriptor {
  MatrixKind kind = MatrixKind::Dft;
  FieldPtr field;
  int d = 0, n = 0;                  // gwh
  long size = 0;                     // dft N, vandermonde N
  AbelianGroupSpec group;            // g_circulant / adjusted / dft_g
  std::vector<FieldElement> symbol;  // stored values, meaning depends on kind
  FieldElement va, vb;               // vandermonde parameters

  static MatrixDescriptor gwh(int d, int n, FieldPtr f) {
    MatrixDescriptor m;
    m.kind = MatrixKind::Gwh;
    m.d = d;
    m.n = n;
    m.field = std::move(f);
    m.validate();
    return m;
  }
  static MatrixDescriptor dft(long n, FieldPtr f) {
    MatrixDescriptor m;
    m.kind = MatrixKind::Dft;
    m.size = n;
    m.field = std::move(f);
    m.validate();
    return m;
  }
  static MatrixDescriptor circulant(std::vector<FieldElement> top_row) {
    return symbol_kind(MatrixKind::Circulant, std::move(top_row));
  }
  static MatrixDescriptor adjusted_circulant(std::vector<FieldElement> f) {
    return symbol_kind(MatrixKind::AdjustedCirculant, std::move(f));
  }
  static MatrixDescriptor toeplitz(std::vector<FieldElement> diagonals) {
    return symbol_kind(MatrixKind::Toeplitz, std::move(diagonals));
  }
  static MatrixDescriptor hankel(std::vector<FieldElement> antidiagonals) {
    return symbol_kind(MatrixKind::Hankel, std::move(antidiagonals));
  }
  static MatrixDescriptor g_circulant(AbelianGroupSpec g,
                                      std::vector<FieldElement> f) {
    MatrixDescriptor m = symbol_kind(MatrixKind::GCirculant, std::move(f));
    m.group = std::move(g);
    m.validate();
    return m;
  }
  static MatrixDescriptor adjusted_g_circulant(AbelianGroupSpec g,
                                               std::vector<FieldElement> f) {
    MatrixDescriptor m =
        symbol_kind(MatrixKind::AdjustedGCirculant, std::move(f));
    m.group = std::move(g);
    m.validate();
    return m;
  }
  static MatrixDescriptor dft_g(AbelianGroupSpec g, FieldPtr f) {
    MatrixDescriptor m;
    m.kind = MatrixKind::DftG;
    m.group = std::move(g);
    m.field = std::move(f);
    m.validate();
    return m;
  }
  static MatrixDescriptor vandermonde_geometric(const FieldElement& a,
                                                const FieldElement& b,
                                                long n) {
    MatrixDescriptor m;
    m.kind = MatrixKind::VandermondeGeometric;
    m.va = a;
    m.vb = b;
    m.size = n;
    m.field = a.field();
    m.validate();
    return m;
  }

  long rows() const {
    switch (kind) {
      case MatrixKind::Gwh: return pow_checked(d, n);
      case MatrixKind::Dft: return size;
      case MatrixKind::Circulant:
      case MatrixKind::AdjustedCirculant:
        return static_cast<long>(symbol.size());
      case MatrixKind::Toeplitz:
      case MatrixKind::Hankel:
        return (static_cast<long>(symbol.size()) + 1) / 2;
      case MatrixKind::GCirculant:
      case MatrixKind::AdjustedGCirculant:
      case MatrixKind::DftG:
        return group.order();
      case MatrixKind::VandermondeGeometric: return size;
    }
    throw InvariantViolation("rows: unknown kind");
  }
  long cols() const { return rows(); }

  void validate() const {
    if (!field) throw ConstructionError("descriptor: field not set");
    switch (kind) {
      case MatrixKind::Gwh:
        if (d < 2 || n < 1)
          throw ConstructionError("gwh: need d >= 2, n >= 1");
        break;
      case MatrixKind::Dft:
        if (size < 1) throw ConstructionError("dft: need N >= 1");
        break;
      case MatrixKind::Circulant:
      case MatrixKind::AdjustedCirculant:
        if (symbol.empty()) throw ConstructionError("circulant: empty symbol");
        break;
      case MatrixKind::Toeplitz:
      case MatrixKind::Hankel:
        if (symbol.empty() || symbol.size() % 2 == 0)
          throw ConstructionError("band matrix: need odd symbol length");
        break;
      case MatrixKind::GCirculant:
      case MatrixKind::AdjustedGCirculant:
        group.validate();
        if (static_cast<long>(symbol.size()) != group.order())
          throw ConstructionError("g_circulant: symbol length != group order");
        break;
      case MatrixKind::DftG:
        group.validate();
        break;
      case MatrixKind::VandermondeGeometric:
        if (size < 1) throw ConstructionError("vandermonde: need N >= 1");
        if (va.is_zero() || vb.is_zero())
          throw ConstructionError("vandermonde: a, b must be nonzero");
        break;
    }
    for (const FieldElement& v : symbol)
      if (!v.field()->same(*field))
        throw ConstructionError("descriptor: symbol entry in wrong field");
  }

 private:
  // group kinds get their group assigned by the caller before validation
  static MatrixDescriptor symbol_kind(MatrixKind k,
                                      std::vector<FieldElement> sym) {
    if (sym.empty()) throw ConstructionError("descriptor: empty symbol");
    MatrixDescriptor m;
    m.kind = k;
    m.field = sym.front().field();
    m.symbol = std::move(sym);
    if (k != MatrixKind::GCirculant && k != MatrixKind::AdjustedGCirculant)
      m.validate();
    return m;
  }
};

inline ExactMatrix realize(const MatrixDescriptor& desc) {
  desc.validate();
  const FieldPtr& f = desc.field;
  switch (desc.kind) {
    case MatrixKind::Gwh: {
      long n = desc.rows();
      RootOfUnity w = primitive_root_of_unity(f, desc.d);
      std::vector<FieldElement> pw(desc.d, FieldElement::one(f));
      for (int k = 1; k < desc.d; ++k) pw[k] = pw[k - 1] * w.element;
      ExactMatrix m(f, n, n);
      std::vector<std::vector<int>> tuples(n);
      for (long i = 0; i < n; ++i) tuples[i] = index_to_tuple(i, desc.d, desc.n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
          m.at(i, j) = pw[dot(tuples[i], tuples[j]) % desc.d];
      return m;
    }
    case MatrixKind::Dft: {
      long n = desc.size;
      RootOfUnity w = primitive_root_of_unity(f, n);
      std::vector<FieldElement> pw(n, FieldElement::one(f));
      for (long k = 1; k < n; ++k) pw[k] = pw[k - 1] * w.element;
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m.at(i, j) = pw[(i * j) % n];
      return m;
    }
    case MatrixKind::Circulant: {
      long n = desc.rows();
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
          m.at(i, j) = desc.symbol[((i - j) % n + n) % n];
      return m;
    }
    case MatrixKind::AdjustedCirculant: {
      long n = desc.rows();
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m.at(i, j) = desc.symbol[(i + j) % n];
      return m;
    }
    case MatrixKind::Toeplitz: {
      long n = desc.rows();
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m.at(i, j) = desc.symbol[i - j + n - 1];
      return m;
    }
    case MatrixKind::Hankel: {
      long n = desc.rows();
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m.at(i, j) = desc.symbol[i + j];
      return m;
    }
    case MatrixKind::GCirculant: {
      long n = desc.rows();
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m.at(i, j) = desc.symbol[desc.group.sub(i, j)];
      return m;
    }
    case MatrixKind::AdjustedGCirculant: {
      long n = desc.rows();
      ExactMatrix m(f, n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) m.at(i, j) = desc.symbol[desc.group.add(i, j)];
      return m;
    }
    case MatrixKind::DftG: {
      const auto& factors = desc.group.invariant_factors;
      ExactMatrix m = ExactMatrix::identity(f, 1);
      for (long nk : factors)
        m = kronecker(m, realize(MatrixDescriptor::dft(nk, f)));
      return m;
    }
    case MatrixKind::VandermondeGeometric: {
      long n = desc.size;
      ExactMatrix m(f, n, n);
      FieldElement gen = desc.va;  // a * b^i
      for (long i = 0; i < n; ++i) {
        FieldElement cur = FieldElement::one(f);
        for (long j = 0; j < n; ++j) {
          m.at(i, j) = cur;
          cur *= gen;
        }
        gen *= desc.vb;
      }
      return m;
    }
  }
  throw InvariantViolation("realize: unknown kind");
}

// Character transform over G: out[b] = sum_z v[z] * prod_i w_i^(z_i b_i),
// where w_i is the canonical primitive root of order n_i. Axis by axis.
inline std::vector<FieldElement> group_character_transform(
    const AbelianGroupSpec& g, std::vector<FieldElement> v, const FieldPtr& f) {
  g.validate();
  long size = g.order();
  if (static_cast<long>(v.size()) != size)
    throw ConstructionError("group transform: value length != group order");
  long stride = 1;
  for (size_t axis = g.invariant_factors.size(); axis-- > 0;) {
    long d = g.invariant_factors[axis];
    RootOfUnity w = primitive_root_of_unity(f, d);
    std::vector<FieldElement> pw(d, FieldElement::one(f));
    for (long k = 1; k < d; ++k) pw[k] = pw[k - 1] * w.element;
    long block = stride * d;
    std::vector<FieldElement> buf(d, FieldElement::zero(f));
    for (long base = 0; base < size; base += block)
      for (long off = 0; off < stride; ++off) {
        long at = base + off;
        for (long out = 0; out < d; ++out) {
          FieldElement acc = FieldElement::zero(f);
          for (long in = 0; in < d; ++in) {
            const FieldElement& x = v[at + in * stride];
            if (!x.is_zero()) acc += pw[(out * in) % d] * x;
          }
          buf[out] = std::move(acc);
        }
        for (long out = 0; out < d; ++out) v[at + out * stride] = buf[out];
      }
    stride = block;
  }
  return v;
}

// Diagonal of DFT_G * M_G(f) * DFT_G for the adjusted form f(x + y):
// entry b equals |G| * sum_z f(z) chi_b(z). The triple product's
// off-diagonal vanishing is a verifier-side assertion, not assumed here.
inline std::vector<FieldElement> diagonalize_adjusted(
    const AbelianGroupSpec& g, const std::vector<FieldElement>& f_values,
    const FieldPtr& f) {
  std::vector<FieldElement> hat = group_character_transform(g, f_values, f);
  FieldElement order = FieldElement::from_int(f, g.order());
  for (auto& v : hat) v *= order;
  return hat;
}

// rank(M_G(f)) = |G| - #{b : hat f(b) = 0}, via the diagonalization.
inline long rank_via_roots(const AbelianGroupSpec& g,
                           const std::vector<FieldElement>& f_values,
                           const FieldPtr& f) {
  std::vector<FieldElement> hat = group_character_transform(g, f_values, f);
  long zeros = 0;
  for (const auto& v : hat)
    if (v.is_zero()) ++zeros;
  return g.order() - zeros;
}

struct GwhRescale {
  std::vector<FieldElement> row_scales;  // zeta^(I.I)
  std::vector<FieldElement> col_scales;  // zeta^(J.J)
  std::vector<FieldElement> f_sym;       // f(x) = zeta^(sum x_k^2)
  FieldElement zeta;
};

// diag(row) * H_{d,n} * diag(col) = M(f_sym): the square root zeta of omega
// turns the character kernel into a function of I + J. Odd d stays inside
// the d-th roots; even d needs a primitive 2d-th root in the field.
inline GwhRescale rescale_gwh(int d, int n, const FieldPtr& f) {
  if (d < 2 || n < 1) throw ConstructionError("rescale_gwh: bad d, n");
  FieldElement zeta = FieldElement::one(f);
  if (d % 2 == 1) {
    RootOfUnity w = primitive_root_of_unity(f, d);
    zeta = w.element.pow((d + 1) / 2);
  } else {
    zeta = primitive_root_of_unity(f, 2L * d).element;
  }
  long sz = pow_checked(d, n);
  GwhRescale out;
  out.zeta = zeta;
  out.row_scales.reserve(sz);
  out.f_sym.reserve(sz);
  for (long idx = 0; idx < sz; ++idx) {
    std::vector<int> t = index_to_tuple(idx, d, n);
    long q = 0;
    for (int x : t) q += static_cast<long>(x) * x;
    out.row_scales.push_back(zeta.pow(q));
  }
  out.col_scales = out.row_scales;
  out.f_sym = out.row_scales;
  return out;
}

inline ExactMatrix scale_rows_cols(const ExactMatrix& m,
                                   const std::vector<FieldElement>& row_scales,
                                   const std::vector<FieldElement>& col_scales) {
  if (static_cast<long>(row_scales.size()) != m.rows() ||
      static_cast<long>(col_scales.size()) != m.cols())
    throw ConstructionError("scale_rows_cols: scale length mismatch");
  ExactMatrix r = m;
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      r.at(i, j) = row_scales[i] * m.at(i, j) * col_scales[j];
  return r;
}

// Length-N symbol g with circulant(g)'s upper-left N'xN' block equal to
// circulant(f): g(j mod N) = f(j mod N') for -(N'-1) <= j <= N'-1, zero
// elsewhere. Sizes N >= 2N' keep the two index ranges from colliding.
inline std::vector<FieldElement> embed_circulant(
    const std::vector<FieldElement>& f, long n) {
  long np = static_cast<long>(f.size());
  if (np < 1) throw ConstructionError("embed_circulant: empty symbol");
  if (n < 2 * np) throw ConstructionError("embed_circulant: need N >= 2N'");
  const FieldPtr& fld = f.front().field();
  std::vector<FieldElement> g(n, FieldElement::zero(fld));
  for (long j = 0; j <= np - 1; ++j) g[j] = f[j % np];
  for (long j = 1; j <= np - 1; ++j) g[n - j] = f[((np - j) % np + np) % np];
  return g;
}

// Same for the adjusted form: upper-left N'xN' block of the adjusted
// circulant of g equals the Hankel with the given antidiagonals
// (length 2N'-1), needing only N >= 2N'-1.
inline std::vector<FieldElement> embed_hankel_adjusted(
    const std::vector<FieldElement>& antidiagonals, long n) {
  long len = static_cast<long>(antidiagonals.size());
  if (len < 1 || len % 2 == 0)
    throw ConstructionError("embed_hankel_adjusted: need odd symbol length");
  if (n < len) throw ConstructionError("embed_hankel_adjusted: N too small");
  const FieldPtr& fld = antidiagonals.front().field();
  std::vector<FieldElement> g(n, FieldElement::zero(fld));
  for (long k = 0; k < len; ++k) g[k] = antidiagonals[k];
  return g;
}

struct VandermondeScales {
  std::vector<FieldElement> row_scales;
  std::vector<FieldElement> col_scales;
  std::vector<FieldElement> hankel;  // h(k) = a^k b^(k choose 2), length 2N-1
};

// Geometric Vandermonde V[i,j] = (a b^i)^j turns into a Hankel matrix under
// u_i = a^i b^(-C(i,2)), v_j = b^(-C(j,2)), because
// ij = C(i+j,2) - C(i,2) - C(j,2): u_i V[i,j] v_j = a^(i+j) b^C(i+j,2).
inline VandermondeScales vandermonde_to_hankel(const FieldElement& a,
                                               const FieldElement& b, long n) {
  if (a.is_zero() || b.is_zero())
    throw ConstructionError("vandermonde_to_hankel: a, b must be nonzero");
  if (n < 1) throw ConstructionError("vandermonde_to_hankel: N >= 1");
  VandermondeScales out;
  auto choose2 = [](long k) { return k * (k - 1) / 2; };
  for (long i = 0; i < n; ++i) {
    out.row_scales.push_back(a.pow(i) * b.pow(choose2(i)));
    out.col_scales.push_back(b.pow(choose2(i)));
  }
  for (long k = 0; k <= 2 * (n - 1); ++k)
    out.hankel.push_back(a.pow(k) * b.pow(choose2(k)));
  return out;
}

struct CrtSplit {
  std::vector<long> moduli;      // pairwise coprime, product n
  std::vector<long> idempotents; // e_k = 1 mod x_k, 0 mod others
  std::vector<long> permutation; // perm[mixed-radix index] = CRT value
};

// Coprime split of N into prime powers (ascending) plus the index
// permutation under which DFT_N factors as the Kronecker product of the
// DFT_{x_k} built on the roots omega^{e_k}.
inline CrtSplit crt_split(long n) {
  if (n < 1) throw ConstructionError("crt_split: N >= 1 required");
  CrtSplit out;
  for (const PrimePower& pp : factorize(n)) out.moduli.push_back(pp.value);
  if (out.moduli.empty()) out.moduli.push_back(1);
  for (long x : out.moduli) {
    if (x == 1) {
      out.idempotents.push_back(0);
      continue;
    }
    long q = n / x;
    out.idempotents.push_back((q * invmod(q % x, x)) % n);
  }
  out.permutation.resize(n);
  std::vector<long> digits(out.moduli.size(), 0);
  for (long pos = 0; pos < n; ++pos) {
    long value = 0;
    for (size_t k = 0; k < out.moduli.size(); ++k)
      value = (value + digits[k] * out.idempotents[k]) % n;
    out.permutation[pos] = value;
    for (size_t k = out.moduli.size(); k-- > 0;) {
      if (++digits[k] < out.moduli[k]) break;
      digits[k] = 0;
    }
  }
  return out;
}

}  // namespace rigidity
