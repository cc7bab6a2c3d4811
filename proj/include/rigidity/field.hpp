#pragma once

// Exact field arithmetic for the certificate machinery.
//
// Three field kinds share one runtime element type:
//   * cyclotomic(m): Q[x]/(Phi_m), elements are rational-coefficient
//     polynomials of degree < phi(m);
//   * prime(p): F_p;
//   * extension(p, minpoly): F_p[x]/(minpoly), minpoly monic irreducible.
//
// There is no floating point anywhere in this header.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/errors.hpp"

namespace rigidity {

using Int = long long;
using Rational = mpq_class;

inline Int mulmod(Int a, Int b, Int p) {
  return static_cast<Int>(static_cast<__int128>(a) * b % p);
}

inline Int addmod(Int a, Int b, Int p) {
  Int s = a + b;
  if (s >= p) s -= p;
  return s;
}

inline Int submod(Int a, Int b, Int p) {
  Int s = a - b;
  if (s < 0) s += p;
  return s;
}

inline Int powmod(Int a, Int e, Int p) {
  if (p == 1) return 0;
  Int r = 1 % p;
  a %= p;
  if (a < 0) a += p;
  while (e > 0) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

// Inverse mod p via extended Euclid; p need not be prime but gcd(a,p)=1 must hold.
inline Int invmod(Int a, Int p) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) throw FieldError("invmod: zero has no inverse");
  Int t = 0, new_t = 1, r = p, new_r = a;
  while (new_r != 0) {
    Int q = r / new_r;
    std::swap(t -= q * new_t, new_t);
    std::swap(r -= q * new_r, new_r);
  }
  if (r != 1) throw FieldError("invmod: not invertible");
  if (t < 0) t += p;
  return t;
}

namespace detail {

// ---- integer polynomial helpers (ascending coefficients) ----

inline void trim_z(std::vector<mpz_class>& v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
}

// Exact division of integer polynomials; remainder must be zero.
inline std::vector<mpz_class> divide_exact_z(std::vector<mpz_class> num,
                                             const std::vector<mpz_class>& den) {
  trim_z(num);
  if (den.empty() || den.back() == 0)
    throw InvariantViolation("polynomial division by zero");
  if (num.size() < den.size()) {
    if (!num.empty()) throw InvariantViolation("polynomial division not exact");
    return {};
  }
  std::vector<mpz_class> q(num.size() - den.size() + 1, mpz_class(0));
  for (long k = static_cast<long>(q.size()) - 1; k >= 0; --k) {
    mpz_class lead = num[k + den.size() - 1];
    if (lead % den.back() != 0)
      throw InvariantViolation("polynomial division not exact");
    mpz_class c = lead / den.back();
    q[k] = c;
    if (c != 0)
      for (size_t i = 0; i < den.size(); ++i) num[k + i] -= c * den[i];
  }
  trim_z(num);
  if (!num.empty()) throw InvariantViolation("polynomial division not exact");
  return q;
}

// ---- F_p polynomial helpers (ascending coefficients, values in [0,p)) ----

inline void trim_p(std::vector<Int>& v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
}

inline std::vector<Int> poly_mul_p(const std::vector<Int>& a,
                                   const std::vector<Int>& b, Int p) {
  if (a.empty() || b.empty()) return {};
  std::vector<Int> c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; j < b.size(); ++j)
      c[i + j] = (c[i + j] + static_cast<__int128>(a[i]) * b[j]) % p;
  }
  trim_p(c);
  return c;
}

inline std::vector<Int> poly_mod_p(std::vector<Int> a, const std::vector<Int>& m,
                                   Int p) {
  trim_p(a);
  Int lead_inv = invmod(m.back(), p);
  while (a.size() >= m.size()) {
    Int c = mulmod(a.back(), lead_inv, p);
    size_t shift = a.size() - m.size();
    if (c != 0)
      for (size_t i = 0; i < m.size(); ++i)
        a[shift + i] = submod(a[shift + i], mulmod(c, m[i], p), p);
    a.pop_back();  // leading coefficient eliminated exactly
    trim_p(a);
  }
  return a;
}

inline std::vector<Int> poly_powmod_p(std::vector<Int> base, mpz_class e,
                                      const std::vector<Int>& m, Int p) {
  std::vector<Int> r{1};
  base = poly_mod_p(std::move(base), m, p);
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t()))
      r = poly_mod_p(poly_mul_p(r, base, p), m, p);
    base = poly_mod_p(poly_mul_p(base, base, p), m, p);
    e >>= 1;
  }
  return r;
}

inline std::vector<Int> poly_gcd_p(std::vector<Int> a, std::vector<Int> b, Int p) {
  trim_p(a);
  trim_p(b);
  while (!b.empty()) {
    a = poly_mod_p(std::move(a), b, p);
    std::swap(a, b);
  }
  return a;
}

// Monic irreducibility over F_p: x^{p^d} == x (mod f) and
// gcd(x^{p^{d/l}} - x, f) = 1 for every prime l | d.
inline bool poly_irreducible_p(const std::vector<Int>& f, Int p) {
  long d = static_cast<long>(f.size()) - 1;
  if (d < 1) return false;
  if (d == 1) return true;
  std::vector<Int> x{0, 1};
  mpz_class q;
  mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p),
                static_cast<unsigned long>(d));
  std::vector<Int> xq = poly_powmod_p(x, q, f, p);
  // x^{p^d} - x must vanish mod f
  std::vector<Int> diff = xq;
  if (diff.size() < 2) diff.resize(2, 0);
  diff[1] = submod(diff[1], 1, p);
  trim_p(diff);
  if (!diff.empty()) return false;
  long dd = d;
  std::vector<long> prime_divs;
  for (long l = 2; l * l <= dd; ++l)
    if (dd % l == 0) {
      prime_divs.push_back(l);
      while (dd % l == 0) dd /= l;
    }
  if (dd > 1) prime_divs.push_back(dd);
  for (long l : prime_divs) {
    mpz_class qe;
    mpz_ui_pow_ui(qe.get_mpz_t(), static_cast<unsigned long>(p),
                  static_cast<unsigned long>(d / l));
    std::vector<Int> xe = poly_powmod_p(x, qe, f, p);
    std::vector<Int> g = xe;
    if (g.size() < 2) g.resize(2, 0);
    g[1] = submod(g[1], 1, p);
    trim_p(g);
    g = poly_gcd_p(g, f, p);
    if (g.size() != 1) return false;
  }
  return true;
}

}  // namespace detail

inline long euler_phi(long m) {
  long result = m, n = m;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) {
      result -= result / d;
      while (n % d == 0) n /= d;
    }
  if (n > 1) result -= result / n;
  return result;
}

// Phi_m, ascending integer coefficients, computed by exact division of
// x^m - 1 by the product of Phi_d over proper divisors d of m.
inline std::vector<mpz_class> cyclotomic_polynomial(long m) {
  if (m < 1) throw ConstructionError("cyclotomic_polynomial: m must be >= 1");
  static std::map<long, std::vector<mpz_class>> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
  }
  std::vector<mpz_class> result;
  if (m == 1) {
    result = {mpz_class(-1), mpz_class(1)};
  } else {
    std::vector<mpz_class> num(m + 1, mpz_class(0));
    num[0] = -1;
    num[m] = 1;
    std::vector<mpz_class> den{mpz_class(1)};
    for (long d = 1; d < m; ++d)
      if (m % d == 0) {
        auto phi_d = cyclotomic_polynomial(d);
        std::vector<mpz_class> prod(den.size() + phi_d.size() - 1, mpz_class(0));
        for (size_t i = 0; i < den.size(); ++i)
          for (size_t j = 0; j < phi_d.size(); ++j) prod[i + j] += den[i] * phi_d[j];
        den = std::move(prod);
      }
    result = detail::divide_exact_z(std::move(num), den);
  }
  if (static_cast<long>(result.size()) != euler_phi(m) + 1)
    throw InvariantViolation("cyclotomic_polynomial: degree != phi(m)");
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(m, result);
  return result;
}

class Field;
using FieldPtr = std::shared_ptr<const Field>;

class FieldElement;

// Immutable field descriptor plus precomputed reduction data.
class Field : public std::enable_shared_from_this<Field> {
 public:
  enum class Kind { Cyclotomic, Prime, Extension };

  static FieldPtr cyclotomic(long m) {
    if (m < 1) throw ConstructionError("cyclotomic field: m >= 1 required");
    auto f = std::shared_ptr<Field>(new Field());
    f->kind_ = Kind::Cyclotomic;
    f->m_ = m;
    auto phi = cyclotomic_polynomial(m);
    f->degree_ = static_cast<int>(phi.size()) - 1;
    f->cyclo_ = std::move(phi);
    f->build_cyclo_tables();
    std::vector<mpz_class> unit(f->degree_, mpz_class(0));
    unit[0] = 1;
    f->zeta_cache_.emplace(0, std::move(unit));
    return f;
  }

  static FieldPtr prime(Int p) {
    if (p < 2 || !is_prime_int(p))
      throw ConstructionError("prime field: p must be prime, got " + std::to_string(p));
    auto f = std::shared_ptr<Field>(new Field());
    f->kind_ = Kind::Prime;
    f->p_ = p;
    f->degree_ = 1;
    return f;
  }

  // minpoly: ascending coefficients over F_p, monic, irreducible, degree >= 2.
  static FieldPtr extension(Int p, std::vector<Int> minpoly) {
    if (p < 2 || !is_prime_int(p))
      throw ConstructionError("extension field: p must be prime");
    for (auto& c : minpoly) {
      c %= p;
      if (c < 0) c += p;
    }
    detail::trim_p(minpoly);
    if (minpoly.size() < 3)
      throw ConstructionError("extension field: degree must be >= 2");
    if (minpoly.back() != 1)
      throw ConstructionError("extension field: minpoly must be monic");
    if (!detail::poly_irreducible_p(minpoly, p))
      throw ConstructionError("extension field: minpoly is reducible");
    auto f = std::shared_ptr<Field>(new Field());
    f->kind_ = Kind::Extension;
    f->p_ = p;
    f->degree_ = static_cast<int>(minpoly.size()) - 1;
    f->minpoly_ = std::move(minpoly);
    f->build_ext_tables();
    return f;
  }

  // Deterministic search: smallest monic irreducible of the given degree,
  // ordered by the base-p encoding of the non-leading coefficients.
  static FieldPtr extension_of_degree(Int p, int deg) {
    if (deg == 1) return prime(p);
    if (deg < 1) throw ConstructionError("extension_of_degree: degree >= 1 required");
    mpz_class total;
    mpz_ui_pow_ui(total.get_mpz_t(), static_cast<unsigned long>(p),
                  static_cast<unsigned long>(deg));
    for (mpz_class code = 0; code < total; ++code) {
      std::vector<Int> poly(deg + 1, 0);
      mpz_class rest = code;
      const mpz_class pz(static_cast<long>(p));
      for (int i = 0; i < deg; ++i) {
        mpz_class digit = rest % pz;
        poly[i] = static_cast<Int>(digit.get_si());
        rest /= pz;
      }
      poly[deg] = 1;
      if (detail::poly_irreducible_p(poly, p)) return extension(p, poly);
    }
    throw InvariantViolation("extension_of_degree: no irreducible found");
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ != Kind::Cyclotomic; }
  long cyclo_order() const {
    if (kind_ != Kind::Cyclotomic) throw FieldError("cyclo_order: not cyclotomic");
    return m_;
  }
  Int characteristic() const { return kind_ == Kind::Cyclotomic ? 0 : p_; }
  int degree() const { return degree_; }
  const std::vector<Int>& minpoly() const { return minpoly_; }
  const std::vector<mpz_class>& cyclo_modulus() const { return cyclo_; }

  // Field size p^degree; finite fields only. Throws if it overflows Int.
  Int order() const {
    if (!is_finite()) throw FieldError("order: infinite field");
    Int q = 1;
    for (int i = 0; i < degree_; ++i) {
      if (q > (std::numeric_limits<Int>::max)() / p_)
        throw FieldError("order: p^degree overflows");
      q *= p_;
    }
    return q;
  }

  bool same(const Field& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
      case Kind::Cyclotomic: return m_ == o.m_;
      case Kind::Prime: return p_ == o.p_;
      case Kind::Extension: return p_ == o.p_ && minpoly_ == o.minpoly_;
    }
    return false;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Cyclotomic:
        if (m_ <= 2) os << "Q";
        else os << "Q[zeta_" << m_ << "]";
        break;
      case Kind::Prime: os << "F_" << p_; break;
      case Kind::Extension: os << "F_" << p_ << "^" << degree_; break;
    }
    return os.str();
  }

  // zeta_m^j reduced mod Phi_m, integer coefficients, j taken mod m.
  // Computed on demand and cached; intermediate powers are cached too, so a
  // sweep over many exponents amortizes to one multiply-by-x per power.
  const std::vector<mpz_class>& zeta_power(long j) const {
    if (kind_ != Kind::Cyclotomic) throw FieldError("zeta_power: not cyclotomic");
    j %= m_;
    if (j < 0) j += m_;
    std::lock_guard<std::mutex> lock(zeta_mu_);
    auto it = zeta_cache_.find(j);
    if (it != zeta_cache_.end()) return it->second;
    // start from the largest cached exponent below j
    long base = 0;
    auto lb = zeta_cache_.upper_bound(j);
    if (lb != zeta_cache_.begin()) base = std::prev(lb)->first;
    std::vector<mpz_class> cur = zeta_cache_.at(base);
    long deg = degree_;
    for (long e = base + 1; e <= j; ++e) {
      std::vector<mpz_class> nxt(deg, mpz_class(0));
      mpz_class top = cur[deg - 1];
      for (long i = deg - 1; i >= 1; --i) nxt[i] = cur[i - 1];
      if (top != 0)
        for (long i = 0; i < deg; ++i) nxt[i] += top * cyclo_red_[0][i];
      cur = nxt;
      zeta_cache_.emplace(e, std::move(nxt));
    }
    return zeta_cache_.at(j);
  }

  // reduction row for x^{degree + k} mod minpoly (extension fields)
  const std::vector<Int>& ext_reduction(size_t k) const { return ext_red_[k]; }
  // reduction row for x^{degree + k} mod Phi_m (cyclotomic)
  const std::vector<mpz_class>& cyclo_reduction(size_t k) const { return cyclo_red_[k]; }

  static bool is_prime_int(Int n) {
    if (n < 2) return false;
    for (Int d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  }

 private:
  Field() = default;

  void build_cyclo_tables() {
    // rows for x^{deg}, ..., x^{2 deg - 2} mod Phi_m (enough for products)
    long deg = degree_;
    cyclo_red_.assign(std::max<long>(deg - 1, 0) + 1, {});
    std::vector<mpz_class> cur(deg, mpz_class(0));
    // x^deg mod Phi = -(c_0 + c_1 x + ... + c_{deg-1} x^{deg-1}) since Phi monic
    for (long i = 0; i < deg; ++i) cur[i] = -cyclo_[i];
    cyclo_red_[0] = cur;
    for (long k = 1; k + deg <= 2 * deg - 2; ++k) {
      // multiply cur by x, reduce once
      std::vector<mpz_class> nxt(deg, mpz_class(0));
      mpz_class top = cur[deg - 1];
      for (long i = deg - 1; i >= 1; --i) nxt[i] = cur[i - 1];
      nxt[0] = 0;
      if (top != 0)
        for (long i = 0; i < deg; ++i) nxt[i] += top * cyclo_red_[0][i];
      cyclo_red_[k] = nxt;
      cur = std::move(nxt);
    }
  }

  void build_ext_tables() {
    long deg = degree_;
    ext_red_.assign(std::max<long>(deg - 1, 0) + 1, {});
    std::vector<Int> cur(deg, 0);
    for (long i = 0; i < deg; ++i) cur[i] = submod(0, minpoly_[i], p_);
    ext_red_[0] = cur;
    for (long k = 1; k + deg <= 2 * deg - 2; ++k) {
      std::vector<Int> nxt(deg, 0);
      Int top = cur[deg - 1];
      for (long i = deg - 1; i >= 1; --i) nxt[i] = cur[i - 1];
      nxt[0] = 0;
      if (top != 0)
        for (long i = 0; i < deg; ++i)
          nxt[i] = addmod(nxt[i], mulmod(top, ext_red_[0][i], p_), p_);
      ext_red_[k] = nxt;
      cur = std::move(nxt);
    }
  }

  Kind kind_ = Kind::Prime;
  long m_ = 0;   // cyclotomic order
  Int p_ = 0;    // characteristic
  int degree_ = 1;
  std::vector<mpz_class> cyclo_;             // Phi_m ascending
  std::vector<Int> minpoly_;                 // ascending, monic
  std::vector<std::vector<mpz_class>> cyclo_red_;
  std::vector<std::vector<Int>> ext_red_;
  mutable std::map<long, std::vector<mpz_class>> zeta_cache_;
  mutable std::mutex zeta_mu_;
};

// A value in one of the three field kinds. Coefficient vector is dense:
// rationals for cyclotomic fields, residues in [0, p) otherwise.
class FieldElement {
 public:
  FieldElement() = default;

  static FieldElement zero(const FieldPtr& f) {
    FieldElement e;
    e.f_ = f;
    if (f->kind() == Field::Kind::Cyclotomic)
      e.qc_.assign(f->degree(), Rational(0));
    else
      e.fc_.assign(f->degree(), 0);
    return e;
  }

  static FieldElement one(const FieldPtr& f) {
    FieldElement e = zero(f);
    if (f->kind() == Field::Kind::Cyclotomic) e.qc_[0] = 1;
    else e.fc_[0] = 1 % f->characteristic();
    return e;
  }

  static FieldElement from_int(const FieldPtr& f, Int v) {
    FieldElement e = zero(f);
    if (f->kind() == Field::Kind::Cyclotomic) {
      e.qc_[0] = static_cast<long>(v);
    } else {
      Int p = f->characteristic();
      Int r = v % p;
      if (r < 0) r += p;
      e.fc_[0] = r;
    }
    return e;
  }

  static FieldElement from_rational(const FieldPtr& f, const Rational& v) {
    if (f->kind() == Field::Kind::Cyclotomic) {
      FieldElement e = zero(f);
      e.qc_[0] = v;
      e.qc_[0].canonicalize();
      return e;
    }
    // rational into finite field: numerator / denominator mod p
    Int p = f->characteristic();
    mpz_class num = v.get_num(), den = v.get_den();
    Int n = static_cast<Int>(mpz_fdiv_ui(num.get_mpz_t(), static_cast<unsigned long>(p)));
    Int d = static_cast<Int>(mpz_fdiv_ui(den.get_mpz_t(), static_cast<unsigned long>(p)));
    if (d == 0) throw FieldError("from_rational: denominator divisible by p");
    FieldElement e = zero(f);
    e.fc_[0] = mulmod(n, invmod(d, p), p);
    return e;
  }

  // cyclotomic: rational coefficient vector (ascending, size = degree)
  static FieldElement from_coeffs(const FieldPtr& f, std::vector<Rational> coeffs) {
    if (f->kind() != Field::Kind::Cyclotomic)
      throw FieldError("from_coeffs(rational): cyclotomic fields only");
    if (static_cast<int>(coeffs.size()) != f->degree())
      throw FieldError("from_coeffs: wrong length");
    FieldElement e;
    e.f_ = f;
    for (auto& c : coeffs) c.canonicalize();
    e.qc_ = std::move(coeffs);
    return e;
  }

  // finite: residue vector (ascending, size = degree)
  static FieldElement from_residues(const FieldPtr& f, std::vector<Int> coeffs) {
    if (f->kind() == Field::Kind::Cyclotomic)
      throw FieldError("from_residues: finite fields only");
    if (static_cast<int>(coeffs.size()) != f->degree())
      throw FieldError("from_residues: wrong length");
    Int p = f->characteristic();
    for (auto& c : coeffs) {
      c %= p;
      if (c < 0) c += p;
    }
    FieldElement e;
    e.f_ = f;
    e.fc_ = std::move(coeffs);
    return e;
  }

  // class of x in F_p[x]/(minpoly) (the presentation generator alpha)
  static FieldElement generator(const FieldPtr& f) {
    if (f->kind() != Field::Kind::Extension)
      throw FieldError("generator: extension fields only");
    FieldElement e = zero(f);
    e.fc_[1] = 1;
    return e;
  }

  const FieldPtr& field() const { return f_; }
  bool valid() const { return static_cast<bool>(f_); }

  bool is_zero() const {
    if (f_->kind() == Field::Kind::Cyclotomic) {
      for (const auto& c : qc_)
        if (c != 0) return false;
    } else {
      for (Int c : fc_)
        if (c != 0) return false;
    }
    return true;
  }

  bool operator==(const FieldElement& o) const {
    check_same(o);
    return f_->kind() == Field::Kind::Cyclotomic ? qc_ == o.qc_ : fc_ == o.fc_;
  }
  bool operator!=(const FieldElement& o) const { return !(*this == o); }

  FieldElement operator+(const FieldElement& o) const {
    check_same(o);
    FieldElement r = *this;
    r += o;
    return r;
  }

  FieldElement& operator+=(const FieldElement& o) {
    check_same(o);
    if (f_->kind() == Field::Kind::Cyclotomic) {
      for (size_t i = 0; i < qc_.size(); ++i) qc_[i] += o.qc_[i];
    } else {
      Int p = f_->characteristic();
      for (size_t i = 0; i < fc_.size(); ++i) fc_[i] = addmod(fc_[i], o.fc_[i], p);
    }
    return *this;
  }

  FieldElement operator-(const FieldElement& o) const {
    check_same(o);
    FieldElement r = *this;
    r -= o;
    return r;
  }

  FieldElement& operator-=(const FieldElement& o) {
    check_same(o);
    if (f_->kind() == Field::Kind::Cyclotomic) {
      for (size_t i = 0; i < qc_.size(); ++i) qc_[i] -= o.qc_[i];
    } else {
      Int p = f_->characteristic();
      for (size_t i = 0; i < fc_.size(); ++i) fc_[i] = submod(fc_[i], o.fc_[i], p);
    }
    return *this;
  }

  FieldElement operator-() const {
    FieldElement r = *this;
    if (f_->kind() == Field::Kind::Cyclotomic) {
      for (auto& c : r.qc_) c = -c;
    } else {
      Int p = f_->characteristic();
      for (auto& c : r.fc_) c = submod(0, c, p);
    }
    return r;
  }

  FieldElement operator*(const FieldElement& o) const {
    check_same(o);
    FieldElement r;
    r.f_ = f_;
    switch (f_->kind()) {
      case Field::Kind::Prime:
        r.fc_ = {mulmod(fc_[0], o.fc_[0], f_->characteristic())};
        break;
      case Field::Kind::Extension: {
        Int p = f_->characteristic();
        int deg = f_->degree();
        std::vector<Int> conv(2 * deg - 1, 0);
        for (int i = 0; i < deg; ++i) {
          if (fc_[i] == 0) continue;
          for (int j = 0; j < deg; ++j)
            if (o.fc_[j] != 0)
              conv[i + j] = (conv[i + j] +
                             static_cast<__int128>(fc_[i]) * o.fc_[j]) % p;
        }
        r.fc_.assign(deg, 0);
        for (int i = 0; i < deg; ++i) r.fc_[i] = conv[i];
        for (int k = 2 * deg - 2; k >= deg; --k) {
          Int c = conv[k];
          if (c == 0) continue;
          const auto& row = f_->ext_reduction(k - deg);
          for (int i = 0; i < deg; ++i)
            r.fc_[i] = addmod(r.fc_[i], mulmod(c, row[i], p), p);
        }
        break;
      }
      case Field::Kind::Cyclotomic: {
        int deg = f_->degree();
        std::vector<Rational> conv(2 * deg - 1, Rational(0));
        for (int i = 0; i < deg; ++i) {
          if (qc_[i] == 0) continue;
          for (int j = 0; j < deg; ++j)
            if (o.qc_[j] != 0) conv[i + j] += qc_[i] * o.qc_[j];
        }
        r.qc_.assign(conv.begin(), conv.begin() + deg);
        for (int k = 2 * deg - 2; k >= deg; --k) {
          if (conv[k] == 0) continue;
          const auto& row = f_->cyclo_reduction(k - deg);
          for (int i = 0; i < deg; ++i)
            if (row[i] != 0) r.qc_[i] += conv[k] * row[i];
        }
        break;
      }
    }
    return r;
  }

  FieldElement& operator*=(const FieldElement& o) {
    *this = *this * o;
    return *this;
  }

  FieldElement inverse() const {
    if (is_zero()) throw FieldError("inverse of zero");
    switch (f_->kind()) {
      case Field::Kind::Prime: {
        FieldElement r = *this;
        r.fc_[0] = invmod(fc_[0], f_->characteristic());
        return r;
      }
      case Field::Kind::Extension: {
        // extended Euclid in F_p[x] against the minimal polynomial
        Int p = f_->characteristic();
        std::vector<Int> r0 = f_->minpoly(), r1 = fc_;
        detail::trim_p(r1);
        std::vector<Int> s0{}, s1{1};
        while (true) {
          detail::trim_p(r1);
          if (r1.empty()) throw InvariantViolation("inverse: gcd hit zero");
          if (r1.size() == 1) break;
          // divide r0 by r1
          std::vector<Int> q(r0.size() >= r1.size() ? r0.size() - r1.size() + 1 : 0, 0);
          std::vector<Int> rem = r0;
          Int lead_inv = invmod(r1.back(), p);
          for (long k = static_cast<long>(q.size()) - 1; k >= 0; --k) {
            if (static_cast<size_t>(k) + r1.size() - 1 >= rem.size()) continue;
            Int c = mulmod(rem[k + r1.size() - 1], lead_inv, p);
            q[k] = c;
            if (c != 0)
              for (size_t i = 0; i < r1.size(); ++i)
                rem[k + i] = submod(rem[k + i], mulmod(c, r1[i], p), p);
          }
          detail::trim_p(rem);
          // s_{k+1} = s_{k-1} - q * s_k
          std::vector<Int> qs = detail::poly_mul_p(q, s1, p);
          std::vector<Int> s2(std::max(s0.size(), qs.size()), 0);
          for (size_t i = 0; i < s0.size(); ++i) s2[i] = s0[i];
          for (size_t i = 0; i < qs.size(); ++i) s2[i] = submod(s2[i], qs[i], p);
          detail::trim_p(s2);
          r0 = std::move(r1);
          r1 = std::move(rem);
          s0 = std::move(s1);
          s1 = std::move(s2);
        }
        Int c_inv = invmod(r1[0], p);
        std::vector<Int> inv(f_->degree(), 0);
        for (size_t i = 0; i < s1.size() && i < inv.size(); ++i)
          inv[i] = mulmod(s1[i], c_inv, p);
        // s1 may have degree >= deg only transiently; reduce defensively
        if (s1.size() > inv.size()) {
          std::vector<Int> full = s1;
          for (auto& c : full) c = mulmod(c, c_inv, p);
          full = detail::poly_mod_p(std::move(full), f_->minpoly(), p);
          inv.assign(f_->degree(), 0);
          for (size_t i = 0; i < full.size(); ++i) inv[i] = full[i];
        }
        FieldElement r;
        r.f_ = f_;
        r.fc_ = std::move(inv);
        return r;
      }
      case Field::Kind::Cyclotomic: {
        // extended Euclid in Q[x] against Phi_m
        int deg = f_->degree();
        std::vector<Rational> r0(f_->cyclo_modulus().size());
        for (size_t i = 0; i < r0.size(); ++i) r0[i] = Rational(f_->cyclo_modulus()[i]);
        std::vector<Rational> r1(qc_.begin(), qc_.end());
        auto trim = [](std::vector<Rational>& v) {
          while (!v.empty() && v.back() == 0) v.pop_back();
        };
        trim(r1);
        std::vector<Rational> s0{}, s1{Rational(1)};
        while (true) {
          trim(r1);
          if (r1.empty()) throw InvariantViolation("inverse: gcd hit zero");
          if (r1.size() == 1) break;
          std::vector<Rational> q(r0.size() >= r1.size() ? r0.size() - r1.size() + 1 : 0,
                                  Rational(0));
          std::vector<Rational> rem = r0;
          Rational lead_inv = 1 / r1.back();
          for (long k = static_cast<long>(q.size()) - 1; k >= 0; --k) {
            if (static_cast<size_t>(k) + r1.size() - 1 >= rem.size()) continue;
            Rational c = rem[k + r1.size() - 1] * lead_inv;
            q[k] = c;
            if (c != 0)
              for (size_t i = 0; i < r1.size(); ++i) rem[k + i] -= c * r1[i];
          }
          trim(rem);
          std::vector<Rational> qs;
          if (!q.empty() && !s1.empty()) {
            qs.assign(q.size() + s1.size() - 1, Rational(0));
            for (size_t i = 0; i < q.size(); ++i)
              if (q[i] != 0)
                for (size_t j = 0; j < s1.size(); ++j) qs[i + j] += q[i] * s1[j];
          }
          std::vector<Rational> s2(std::max(s0.size(), qs.size()), Rational(0));
          for (size_t i = 0; i < s0.size(); ++i) s2[i] = s0[i];
          for (size_t i = 0; i < qs.size(); ++i) s2[i] -= qs[i];
          trim(s2);
          r0 = std::move(r1);
          r1 = std::move(rem);
          s0 = std::move(s1);
          s1 = std::move(s2);
        }
        Rational c_inv = 1 / r1[0];
        std::vector<Rational> inv(deg, Rational(0));
        for (size_t i = 0; i < s1.size() && i < inv.size(); ++i) inv[i] = s1[i] * c_inv;
        FieldElement r;
        r.f_ = f_;
        r.qc_ = std::move(inv);
        return r;
      }
    }
    throw InvariantViolation("inverse: unreachable");
  }

  FieldElement operator/(const FieldElement& o) const { return *this * o.inverse(); }

  FieldElement pow(Int e) const {
    if (e < 0) return inverse().pow(-e);
    FieldElement base = *this, r = one(f_);
    while (e > 0) {
      if (e & 1) r *= base;
      base *= base;
      e >>= 1;
    }
    return r;
  }

  // Complex conjugation zeta -> zeta^{-1} on cyclotomic fields; identity on
  // prime fields. Proper extension fields do not carry this map.
  FieldElement conj() const {
    switch (f_->kind()) {
      case Field::Kind::Prime: return *this;
      case Field::Kind::Extension:
        throw FieldError("conj: not defined on proper extension fields");
      case Field::Kind::Cyclotomic: {
        long m = f_->cyclo_order();
        int deg = f_->degree();
        std::vector<Rational> out(deg, Rational(0));
        // zeta^k -> zeta^{m-k}; express via the reduced power table
        for (int k = 0; k < deg; ++k) {
          if (qc_[k] == 0) continue;
          const auto& row = f_->zeta_power((m - k) % m);
          for (int i = 0; i < deg; ++i)
            if (row[i] != 0) out[i] += qc_[k] * row[i];
        }
        FieldElement r;
        r.f_ = f_;
        r.qc_ = std::move(out);
        return r;
      }
    }
    throw InvariantViolation("conj: unreachable");
  }

  // x -> x^p, the base-p Frobenius; finite fields only.
  FieldElement frobenius() const {
    if (!f_->is_finite()) throw FieldError("frobenius: finite fields only");
    return pow(f_->characteristic());
  }

  // Constant-term view; requires the element to be a base/prime-field constant.
  Rational rational_value() const {
    if (f_->kind() != Field::Kind::Cyclotomic)
      throw FieldError("rational_value: cyclotomic fields only");
    for (size_t i = 1; i < qc_.size(); ++i)
      if (qc_[i] != 0) throw FieldError("rational_value: element not rational");
    return qc_.empty() ? Rational(0) : qc_[0];
  }

  Int residue_value() const {
    if (f_->kind() == Field::Kind::Cyclotomic)
      throw FieldError("residue_value: finite fields only");
    for (size_t i = 1; i < fc_.size(); ++i)
      if (fc_[i] != 0) throw FieldError("residue_value: element not in prime subfield");
    return fc_.empty() ? 0 : fc_[0];
  }

  bool in_prime_subfield() const {
    if (f_->kind() == Field::Kind::Cyclotomic) {
      for (size_t i = 1; i < qc_.size(); ++i)
        if (qc_[i] != 0) return false;
      return true;
    }
    for (size_t i = 1; i < fc_.size(); ++i)
      if (fc_[i] != 0) return false;
    return true;
  }

  const std::vector<Rational>& rational_coeffs() const { return qc_; }
  const std::vector<Int>& residue_coeffs() const { return fc_; }

  // ascending coefficients as decimal strings ("a/b" for rationals)
  std::vector<std::string> encode() const {
    std::vector<std::string> out;
    if (f_->kind() == Field::Kind::Cyclotomic) {
      out.reserve(qc_.size());
      for (const auto& c : qc_) out.push_back(c.get_str());
    } else {
      out.reserve(fc_.size());
      for (Int c : fc_) out.push_back(std::to_string(c));
    }
    return out;
  }

  static FieldElement decode(const FieldPtr& f, const std::vector<std::string>& enc) {
    if (static_cast<int>(enc.size()) != f->degree())
      throw ParseError("field element: coefficient count != field degree");
    if (f->kind() == Field::Kind::Cyclotomic) {
      std::vector<Rational> cs(enc.size());
      for (size_t i = 0; i < enc.size(); ++i) {
        if (enc[i].empty() ||
            enc[i].find_first_not_of("-0123456789/") != std::string::npos)
          throw ParseError("field element: bad rational '" + enc[i] + "'");
        cs[i] = Rational(enc[i]);
        cs[i].canonicalize();
      }
      return from_coeffs(f, std::move(cs));
    }
    std::vector<Int> cs(enc.size());
    for (size_t i = 0; i < enc.size(); ++i) {
      if (enc[i].empty() ||
          enc[i].find_first_not_of("-0123456789") != std::string::npos)
        throw ParseError("field element: bad integer '" + enc[i] + "'");
      cs[i] = std::stoll(enc[i]);
    }
    return from_residues(f, std::move(cs));
  }

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    auto term = [&](const std::string& coeff, size_t k) {
      if (!first) os << " + ";
      first = false;
      if (k == 0) os << coeff;
      else if (k == 1) os << coeff << "*a";
      else os << coeff << "*a^" << k;
    };
    if (f_->kind() == Field::Kind::Cyclotomic) {
      for (size_t k = 0; k < qc_.size(); ++k)
        if (qc_[k] != 0) term(qc_[k].get_str(), k);
    } else {
      for (size_t k = 0; k < fc_.size(); ++k)
        if (fc_[k] != 0) term(std::to_string(fc_[k]), k);
    }
    if (first) os << "0";
    return os.str();
  }

 private:
  void check_same(const FieldElement& o) const {
    if (f_.get() == o.f_.get()) return;
    if (!f_ || !o.f_ || !f_->same(*o.f_))
      throw FieldError("field mismatch between operands");
  }

  FieldPtr f_;
  std::vector<Rational> qc_;
  std::vector<Int> fc_;
};

// A verified primitive n-th root of unity.
struct RootOfUnity {
  FieldElement element;
  long order = 1;

  // Exact order check: element^n = 1 and element^{n/l} != 1 for prime l | n.
  static void verify_order(const FieldElement& e, long n) {
    if (n < 1) throw ConstructionError("root of unity: order >= 1 required");
    FieldElement one = FieldElement::one(e.field());
    if (e.pow(n) != one) throw InvariantViolation("root of unity: e^n != 1");
    long nn = n;
    for (long l = 2; l * l <= nn; ++l)
      if (nn % l == 0) {
        if (e.pow(n / l) == one)
          throw InvariantViolation("root of unity: order divides n/" + std::to_string(l));
        while (nn % l == 0) nn /= l;
      }
    if (nn > 1 && e.pow(n / nn) == one)
      throw InvariantViolation("root of unity: order divides n/" + std::to_string(nn));
  }
};

namespace detail {

inline std::vector<Int> prime_factors_int(Int n) {
  std::vector<Int> out;
  for (Int d = 2; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  if (n > 1) out.push_back(n);
  return out;
}

// smallest multiplicative generator of F_q^*, by base-p coefficient encoding
inline FieldElement smallest_generator(const FieldPtr& f) {
  Int q = f->order();
  Int group = q - 1;
  auto primes = prime_factors_int(group);
  FieldElement one = FieldElement::one(f);
  int deg = f->degree();
  Int p = f->characteristic();
  std::vector<Int> coeffs(deg, 0);
  for (Int code = 1; code < q; ++code) {
    Int rest = code;
    for (int i = 0; i < deg; ++i) {
      coeffs[i] = rest % p;
      rest /= p;
    }
    FieldElement cand = FieldElement::from_residues(f, coeffs);
    bool ok = true;
    for (Int l : primes)
      if (cand.pow(group / l) == one) {
        ok = false;
        break;
      }
    if (ok) return cand;
  }
  throw InvariantViolation("no multiplicative generator found");
}

}  // namespace detail

// Primitive n-th root of unity, or ConstructionError when the field has none.
// Cyclotomic(m): requires n | m, returns zeta_m^{m/n}.
// Finite of order q: requires n | q - 1, returns g^{(q-1)/n} for the smallest
// generator g.
inline RootOfUnity primitive_root_of_unity(const FieldPtr& f, long n) {
  if (n < 1) throw ConstructionError("primitive_root_of_unity: n >= 1");
  RootOfUnity r;
  r.order = n;
  if (f->kind() == Field::Kind::Cyclotomic) {
    long m = f->cyclo_order();
    auto zeta_pow = [&](long j) {
      const auto& row = f->zeta_power(j % m);
      std::vector<Rational> cs(f->degree());
      for (int i = 0; i < f->degree(); ++i) cs[i] = Rational(row[i]);
      return FieldElement::from_coeffs(f, std::move(cs));
    };
    if (m % n == 0) {
      r.element = zeta_pow(m / n);
    } else if (m % 2 == 1 && (2 * m) % n == 0) {
      // Q[zeta_m] = Q[zeta_2m] for odd m: -zeta^((m+1)/2) has order 2m
      r.element = (-zeta_pow((m + 1) / 2)).pow(2 * m / n);
    } else {
      throw ConstructionError("Q[zeta_" + std::to_string(m) + "] has no primitive " +
                              std::to_string(n) + "-th root");
    }
  } else {
    Int q = f->order();
    if ((q - 1) % n != 0)
      throw ConstructionError(f->describe() + " has no primitive " + std::to_string(n) +
                              "-th root (n does not divide q-1)");
    FieldElement g = detail::smallest_generator(f);
    r.element = g.pow((q - 1) / n);
  }
  RootOfUnity::verify_order(r.element, n);
  return r;
}

// Frobenius orbit [x, x^p, x^{p^2}, ...] up to (excluding) the first repeat.
inline std::vector<FieldElement> frobenius_conjugates(const FieldElement& x) {
  if (!x.field()->is_finite())
    throw FieldError("frobenius_conjugates: finite fields only");
  std::vector<FieldElement> orbit{x};
  FieldElement cur = x.frobenius();
  while (cur != x) {
    orbit.push_back(cur);
    if (static_cast<int>(orbit.size()) > x.field()->degree())
      throw InvariantViolation("frobenius orbit longer than field degree");
    cur = cur.frobenius();
  }
  return orbit;
}

// Smallest k in [0, g) with sum_i conj[i]^k != 0, plus that sum. Such k exists:
// the conjugates are distinct, so the g x g Vandermonde in them is invertible
// and not all power sums can vanish.
inline std::pair<long, FieldElement> power_sum_weight(
    const std::vector<FieldElement>& conjugates) {
  if (conjugates.empty()) throw ConstructionError("power_sum_weight: empty input");
  const FieldPtr& f = conjugates.front().field();
  long g = static_cast<long>(conjugates.size());
  for (long k = 0; k < g; ++k) {
    FieldElement sum = FieldElement::zero(f);
    for (const auto& c : conjugates) sum += c.pow(k);
    if (!sum.is_zero()) return {k, sum};
  }
  throw InvariantViolation("power_sum_weight: all power sums vanished");
}

}  // namespace rigidity
