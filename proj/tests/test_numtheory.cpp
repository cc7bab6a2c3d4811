#include <catch2/catch_amalgamated.hpp>

#include "rigidity/numtheory.hpp"

using namespace rigidity;

TEST_CASE("factorization and largest prime factor") {
  CHECK(factorize(12) == std::vector<PrimePower>{{2, 2, 4}, {3, 1, 3}});
  CHECK(factorize(97) == std::vector<PrimePower>{{97, 1, 97}});
  CHECK(factorize(720) ==
        std::vector<PrimePower>{{2, 4, 16}, {3, 2, 9}, {5, 1, 5}});
  CHECK(rho_plus(12) == 3);
  CHECK(rho_plus(97) == 97);
  CHECK(rho_plus(720) == 5);
  CHECK(rho_plus(1) == 1);
  CHECK_THROWS_AS(factorize(0), ConstructionError);
  CHECK_THROWS_AS(rho_plus(-3), ConstructionError);
}

TEST_CASE("smooth shifted-prime counting") {
  CHECK(pi_a(1, 3, 2) == 2);
  // primes p <= 50 with p-1 5-smooth: 2,3,5,7,11,13,17,19,31,37,41
  CHECK(pi_a(1, 50, 5) == 11);
  // every p-1 < x is x-smooth
  for (Int x : {10, 30, 100}) {
    long pi_x = static_cast<long>(primes_in(2, x).size());
    CHECK(pi_a(1, x, x) == pi_x);
  }
  // monotone in both arguments
  for (Int x = 3; x < 60; x += 7) {
    CHECK(pi_a(1, x, 3) <= pi_a(1, x + 5, 3));
    CHECK(pi_a(1, x, 3) <= pi_a(1, x, 7));
  }
  CHECK_THROWS_AS(pi_a(0, 10, 2), ConstructionError);
}

TEST_CASE("good prime enumeration") {
  GoodPrimeConfig cfg{10, 50, 10, 0.3};
  std::vector<Int> got = good_primes(cfg);
  CHECK(got == std::vector<Int>{11, 13, 19, 29, 31, 37, 41, 43});
  // 17 fails: 16 | 16 > 10; 41 passes: 40 = 8 * 5
  CHECK_FALSE(is_good_prime(17, cfg));
  CHECK(is_good_prime(41, cfg));
  CHECK(good_primes({2, 3, 2, 0.3}) == std::vector<Int>{2, 3});
  CHECK(good_primes({30, 20, 5, 0.3}).empty());
  // every reported prime re-validates by exact factorization
  for (Int q : got) {
    CHECK(is_prime(q));
    for (const PrimePower& pp : factorize(q - 1)) CHECK(pp.value <= 10);
  }
}

TEST_CASE("factorable witnesses from the largest good primes") {
  GoodPrimeConfig cfg{3, 20, 4, 0.3};
  // good primes here: 3, 5, 7, 13
  FactorableWitness w = find_factorable(2, cfg);
  CHECK(w.primes == std::vector<Int>{7, 13});
  CHECK(w.n == 91);
  w.validate();
  CHECK(find_factorable(1, cfg).n == 13);
  CHECK_THROWS_AS(find_factorable(5, cfg), ConstructionError);

  FactorableWitness bad = w;
  bad.n = 90;
  CHECK_THROWS_AS(bad.validate(), ConstructionError);
}

TEST_CASE("scale window search") {
  for (Int k : {20, 100, 500, 2000}) {
    FactorableWitness w = scales_search(k);
    w.validate();
    double lk = std::log(static_cast<double>(k));
    CHECK(w.n > k);
    CHECK(w.n < static_cast<Int>(k * lk * lk));
  }
  CHECK_THROWS_AS(scales_search(2), ConstructionError);
}

TEST_CASE("primitive roots and discrete logs") {
  CHECK(primitive_root(7) == 3);
  CHECK(primitive_root(2) == 1);
  CHECK(primitive_root(13) == 2);
  CHECK(discrete_log(2, 3, 5) == 3);
  for (Int p : {5, 13, 101}) {
    Int g = primitive_root(p);
    for (Int t = 1; t < p; ++t)
      CHECK(powmod(g, discrete_log(g, t, p), p) == t);
  }
  CHECK_THROWS_AS(discrete_log(2, 0, 5), ConstructionError);
  CHECK_THROWS_AS(discrete_log(4, 2, 5), ConstructionError);  // 4 has order 2
}

TEST_CASE("multiplicative orders") {
  CHECK(ord_mod(5, 3) == 2);
  CHECK(ord_mod(1, 17) == 1);
  CHECK(ord_mod(2, 7) == 3);
  // Euler: the order divides phi(n)
  for (Int n = 2; n <= 200; ++n)
    for (Int q = 2; q <= 20; ++q) {
      if (std::gcd(q, n) != 1) continue;
      CHECK(euler_phi(n) % ord_mod(q, n) == 0);
    }
  CHECK_THROWS_AS(ord_mod(6, 9), ConstructionError);
}

TEST_CASE("cyclotomic order accounting for the embedding pipeline") {
  GoodPrimeConfig cfg{2, 6, 4, 0.3};
  FactorableWitness w;
  w.n = 15;
  w.primes = {3, 5};
  w.config = cfg;
  w.validate();
  ExtensionDegreeReport rep = extension_degree_account(w, 5);
  CHECK(rep.m == 120);  // lcm(5, 15, 4, 8)
  CHECK(rep.m % w.n == 0);
  CHECK(rep.cube_polylog_bound == 125 * 16);
  CHECK(rep.within);
  // even target doubles its own root requirement
  CHECK(extension_degree_account(w, 6).m == std::lcm<Int>(12, 120));
  CHECK_THROWS_AS(extension_degree_account(w, 8), ConstructionError);
}
