#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/field.hpp"

namespace rigidity {

struct PrimePower {
  Int p = 0;
  int e = 0;
  Int value = 0;  // p^e
  bool operator==(const PrimePower&) const = default;
};

inline bool is_prime(Int n) { return Field::is_prime_int(n); }

inline std::vector<PrimePower> factorize(Int n) {
  if (n < 1) throw ConstructionError("factorize: n >= 1 required");
  std::vector<PrimePower> out;
  for (Int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    PrimePower pp{p, 0, 1};
    while (n % p == 0) {
      n /= p;
      ++pp.e;
      pp.value *= p;
    }
    out.push_back(pp);
  }
  if (n > 1) out.push_back({n, 1, n});
  return out;
}

// Largest prime factor; 1 by convention for n = 1.
inline Int rho_plus(Int n) {
  if (n < 1) throw ConstructionError("rho_plus: n >= 1 required");
  if (n == 1) return 1;
  auto f = factorize(n);
  return f.back().p;
}

inline std::vector<Int> primes_in(Int lo, Int hi) {
  std::vector<Int> out;
  for (Int q = std::max<Int>(2, lo); q <= hi; ++q)
    if (is_prime(q)) out.push_back(q);
  return out;
}

// Number of primes a < p <= x with p - a smooth over primes <= y.
inline long pi_a(Int a, Int x, Int y) {
  if (a < 1 || x < a) throw ConstructionError("pi_a: need a >= 1, x >= a");
  long count = 0;
  for (Int p : primes_in(a + 1, x))
    if (rho_plus(p - a) <= y) ++count;
  return count;
}

struct GoodPrimeConfig {
  Int lower_bound = 0;
  Int upper_bound = 0;
  Int max_prime_power = 2;
  double alpha = 0.3;

  // Interval- and cap-from-scale: [x / (ln x)^{c0}, x] with cap x^alpha.
  static GoodPrimeConfig from_scale(double x, double alpha = 0.3,
                                    double c0 = 1.0) {
    if (x < 2) throw ConstructionError("from_scale: x >= 2 required");
    GoodPrimeConfig cfg;
    cfg.lower_bound =
        std::max<Int>(2, static_cast<Int>(x / std::pow(std::log(x), c0)));
    cfg.upper_bound = static_cast<Int>(x);
    cfg.max_prime_power =
        std::max<Int>(2, static_cast<Int>(std::pow(x, alpha)));
    cfg.alpha = alpha;
    return cfg;
  }
};

// q is good when it is prime, falls in the interval, and every prime power
// exactly dividing q - 1 is at most the cap.
inline bool is_good_prime(Int q, const GoodPrimeConfig& cfg) {
  if (cfg.max_prime_power < 2)
    throw ConstructionError("good primes: max_prime_power >= 2 required");
  if (q < cfg.lower_bound || q > cfg.upper_bound || !is_prime(q)) return false;
  for (const PrimePower& pp : factorize(q - 1))
    if (pp.value > cfg.max_prime_power) return false;
  return true;
}

inline std::vector<Int> good_primes(const GoodPrimeConfig& cfg) {
  std::vector<Int> out;
  for (Int q : primes_in(cfg.lower_bound, cfg.upper_bound))
    if (is_good_prime(q, cfg)) out.push_back(q);
  return out;
}

struct FactorableWitness {
  Int n = 1;
  std::vector<Int> primes;  // strictly increasing, n = product
  GoodPrimeConfig config;

  void validate() const {
    if (primes.empty()) throw ConstructionError("witness: no primes");
    Int prod = 1;
    Int prev = 0;
    for (Int q : primes) {
      if (q <= prev) throw ConstructionError("witness: primes not increasing");
      if (!is_good_prime(q, config))
        throw ConstructionError("witness: prime fails the good predicate");
      prod *= q;
      prev = q;
    }
    if (prod != n) throw ConstructionError("witness: product mismatch");
  }
};

// Product of the l largest good primes under the config.
inline FactorableWitness find_factorable(int l, const GoodPrimeConfig& cfg) {
  if (l < 1) throw ConstructionError("find_factorable: l >= 1 required");
  std::vector<Int> pool = good_primes(cfg);
  if (static_cast<int>(pool.size()) < l)
    throw ConstructionError("find_factorable: fewer good primes than requested");
  FactorableWitness w;
  w.config = cfg;
  w.primes.assign(pool.end() - l, pool.end());
  w.n = 1;
  for (Int q : w.primes) w.n *= q;
  return w;
}

namespace detail {

// Smallest in-window product of a subset of pool (distinct ascending primes)
// with at least min_primes factors.  Products only grow along a branch, so
// any branch at or past the current best (or the window top) is dead.
inline void smallest_window_dfs(const std::vector<Int>& pool, size_t i,
                                Int prod, std::vector<Int>& cur, Int lo, Int hi,
                                int min_primes, Int& best,
                                std::vector<Int>& best_set) {
  if (prod > lo && static_cast<int>(cur.size()) >= min_primes &&
      (best == 0 || prod < best)) {
    best = prod;
    best_set = cur;
  }
  Int cap = best == 0 ? hi : best;
  for (size_t j = i; j < pool.size(); ++j) {
    if (prod > (cap - 1) / pool[j]) break;  // ascending: rest exceed too
    cur.push_back(pool[j]);
    smallest_window_dfs(pool, j + 1, prod * pool[j], cur, lo, hi, min_primes,
                        best, best_set);
    cur.pop_back();
    cap = best == 0 ? hi : best;
  }
}

}  // namespace detail

// Smallest squarefree product of distinct odd good primes that lands in the
// window K < N < K (ln K)^2, using at least min_primes factors and skipping
// avoid_prime; the good-prime pool is rebuilt at doubling scales until the
// window is hit.
inline FactorableWitness scales_search(Int k, int min_primes = 1,
                                       Int avoid_prime = 0, double alpha = 0.7,
                                       double c0 = 2.0, Int x0 = 16) {
  if (k < 3) throw ConstructionError("scales_search: K >= 3 required");
  if (min_primes < 1)
    throw ConstructionError("scales_search: min_primes >= 1 required");
  double lk = std::log(static_cast<double>(k));
  Int window = static_cast<Int>(static_cast<double>(k) * lk * lk);
  if (window <= k + 1)
    throw ConstructionError("scales_search: window K < N < K (ln K)^2 is empty");
  double x = static_cast<double>(x0);
  for (int attempt = 0; attempt <= 20; ++attempt, x *= 2) {
    GoodPrimeConfig cfg = GoodPrimeConfig::from_scale(x, alpha, c0);
    std::vector<Int> pool;
    for (Int q : good_primes(cfg))
      if (q >= 3 && q != avoid_prime) pool.push_back(q);
    if (pool.empty()) continue;
    Int best = 0;
    std::vector<Int> used;
    std::vector<Int> cur;
    detail::smallest_window_dfs(pool, 0, 1, cur, k, window, min_primes, best,
                                used);
    if (best != 0) {
      FactorableWitness w;
      w.n = best;
      w.primes = std::move(used);
      w.config = cfg;
      w.validate();
      return w;
    }
  }
  throw ConstructionError("scales_search: no factorable N in window at any scale");
}

// Smallest generator of Z_p^*.
inline Int primitive_root(Int p) {
  if (!is_prime(p)) throw ConstructionError("primitive_root: p must be prime");
  if (p == 2) return 1;
  auto factors = factorize(p - 1);
  for (Int g = 2; g < p; ++g) {
    bool primitive = true;
    for (const PrimePower& pp : factors)
      if (powmod(g, (p - 1) / pp.p, p) == 1) {
        primitive = false;
        break;
      }
    if (primitive) return g;
  }
  throw InvariantViolation("primitive_root: none found");
}

// Exponent e in [0, p-2] with g^e = t mod p, brute force.
inline Int discrete_log(Int g, Int t, Int p) {
  if (!is_prime(p)) throw ConstructionError("discrete_log: p must be prime");
  t %= p;
  if (t < 0) t += p;
  if (t == 0) throw ConstructionError("discrete_log: t is 0 mod p");
  Int cur = 1;
  for (Int e = 0; e < p - 1; ++e) {
    if (cur == t) return e;
    cur = mulmod(cur, g, p);
  }
  throw ConstructionError("discrete_log: g is not a primitive root");
}

// Multiplicative order of q modulo n.
inline Int ord_mod(Int q, Int n) {
  if (n < 1) throw ConstructionError("ord_mod: n >= 1 required");
  if (n == 1) return 1;
  Int r = q % n;
  if (r < 0) r += n;
  if (std::gcd(r, n) != 1) throw ConstructionError("ord_mod: gcd(q, n) != 1");
  Int cur = r % n;
  for (Int e = 1; e <= n; ++e) {
    if (cur == 1) return e;
    cur = mulmod(cur, r, n);
  }
  throw InvariantViolation("ord_mod: order not found");
}

struct ExtensionDegreeReport {
  Int m = 1;                  // cyclotomic order the pipeline needs
  Int cube_polylog_bound = 0; // N'^3 * (ceil(log2 N') + 1)^2
  bool within = false;
};

// Cyclotomic order used by the full embedding pipeline for DFT of size
// target: the target's own root (doubled when even, for the square-root
// rescale), the witness modulus N, and the per-factor roots 2(q_i - 1)
// consumed by the block constructions.
inline ExtensionDegreeReport extension_degree_account(
    const FactorableWitness& w, Int target) {
  w.validate();
  if (target < 1 || 2 * target > w.n)
    throw ConstructionError(
        "extension_degree_account: need 1 <= target <= N/2");
  Int m = target % 2 == 0 ? 2 * target : target;
  m = std::lcm(m, w.n);
  for (Int q : w.primes)
    if (q > 2) m = std::lcm(m, 2 * (q - 1));
  ExtensionDegreeReport rep;
  rep.m = m;
  int lg = 0;
  while ((Int{1} << lg) < target) ++lg;
  rep.cube_polylog_bound = target * target * target *
                           static_cast<Int>(lg + 1) * static_cast<Int>(lg + 1);
  rep.within = m <= rep.cube_polylog_bound;
  return rep;
}

}  // namespace rigidity
