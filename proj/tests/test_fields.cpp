#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rigidity/field.hpp"

using namespace rigidity;

namespace {

// Oracle: multiply out prod_{d | m} Phi_d with plain integer convolution.
std::vector<mpz_class> poly_mul_z(const std::vector<mpz_class>& a,
                                  const std::vector<mpz_class>& b) {
  std::vector<mpz_class> c(a.size() + b.size() - 1, mpz_class(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

FieldElement random_element(const FieldPtr& f, std::mt19937_64& rng) {
  if (f->kind() == Field::Kind::Cyclotomic) {
    std::uniform_int_distribution<int> num(-9, 9);
    std::uniform_int_distribution<int> den(1, 5);
    std::vector<Rational> cs(f->degree());
    for (auto& c : cs) {
      c = Rational(num(rng), den(rng));
      c.canonicalize();
    }
    return FieldElement::from_coeffs(f, std::move(cs));
  }
  std::uniform_int_distribution<Int> pick(0, f->characteristic() - 1);
  std::vector<Int> cs(f->degree());
  for (auto& c : cs) c = pick(rng);
  return FieldElement::from_residues(f, std::move(cs));
}

}  // namespace

TEST_CASE("cyclotomic polynomials match known small cases") {
  CHECK(cyclotomic_polynomial(1) == std::vector<mpz_class>{-1, 1});
  CHECK(cyclotomic_polynomial(2) == std::vector<mpz_class>{1, 1});
  CHECK(cyclotomic_polynomial(4) == std::vector<mpz_class>{1, 0, 1});
  CHECK(cyclotomic_polynomial(6) == std::vector<mpz_class>{1, -1, 1});
  CHECK(cyclotomic_polynomial(12) == std::vector<mpz_class>{1, 0, -1, 0, 1});
}

TEST_CASE("product of Phi_d over divisors reconstructs x^m - 1") {
  for (long m = 1; m <= 30; ++m) {
    std::vector<mpz_class> prod{mpz_class(1)};
    for (long d = 1; d <= m; ++d)
      if (m % d == 0) prod = poly_mul_z(prod, cyclotomic_polynomial(d));
    std::vector<mpz_class> expect(m + 1, mpz_class(0));
    expect[0] = -1;
    expect[m] = 1;
    INFO("m = " << m);
    CHECK(prod == expect);
  }
}

TEST_CASE("degree of Q[zeta_m] equals phi(m)") {
  CHECK(Field::cyclotomic(1)->degree() == 1);
  CHECK(Field::cyclotomic(2)->degree() == 1);
  CHECK(Field::cyclotomic(12)->degree() == 4);
  CHECK(Field::cyclotomic(15)->degree() == 8);
  CHECK(Field::cyclotomic(60)->degree() == 16);
}

TEST_CASE("prime field division matches exhaustive oracle in F_5") {
  auto f5 = Field::prime(5);
  // oracle by brute force: a/b is the unique c with c*b = a
  for (Int a = 0; a < 5; ++a)
    for (Int b = 1; b < 5; ++b) {
      FieldElement ea = FieldElement::from_int(f5, a);
      FieldElement eb = FieldElement::from_int(f5, b);
      FieldElement q = ea / eb;
      Int found = -1;
      for (Int c = 0; c < 5; ++c)
        if ((c * b) % 5 == a) found = c;
      REQUIRE(found >= 0);
      CHECK(q == FieldElement::from_int(f5, found));
    }
  // frozen spot value
  CHECK(FieldElement::from_int(f5, 3) / FieldElement::from_int(f5, 2) ==
        FieldElement::from_int(f5, 4));
}

TEST_CASE("field axioms hold on random triples") {
  std::mt19937_64 rng(20240817);
  std::vector<FieldPtr> fields = {Field::cyclotomic(12), Field::prime(97),
                                  Field::extension_of_degree(3, 2)};
  for (const auto& f : fields) {
    FieldElement one = FieldElement::one(f);
    for (int trial = 0; trial < 1000; ++trial) {
      FieldElement a = random_element(f, rng);
      FieldElement b = random_element(f, rng);
      FieldElement c = random_element(f, rng);
      CHECK((a + b) + c == a + (b + c));
      CHECK((a * b) * c == a * (b * c));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK(a + b == b + a);
      CHECK(a * b == b * a);
      CHECK(a - a == FieldElement::zero(f));
      if (!a.is_zero()) {
        CHECK(a * a.inverse() == one);
        CHECK((b / a) * a == b);
      }
    }
  }
}

TEST_CASE("deterministic extension presentations") {
  // smallest irreducible monic quadratics by ascending coefficient encoding
  auto f9 = Field::extension_of_degree(3, 2);
  CHECK(f9->minpoly() == std::vector<Int>{1, 0, 1});  // x^2 + 1
  CHECK(f9->order() == 9);
  auto f25 = Field::extension_of_degree(5, 2);
  CHECK(f25->minpoly() == std::vector<Int>{2, 0, 1});  // x^2 + 2
  CHECK(f25->order() == 25);
  CHECK_THROWS_AS(Field::extension(5, std::vector<Int>{4, 0, 1}),  // x^2+4=(x+2)(x+3)
                  ConstructionError);
}

TEST_CASE("primitive roots of unity exist exactly when the order divides") {
  auto q12 = Field::cyclotomic(12);
  for (long n : {1L, 2L, 3L, 4L, 6L, 12L}) {
    RootOfUnity r = primitive_root_of_unity(q12, n);
    CHECK(r.order == n);
    // sum of all n-th powers vanishes for n >= 2
    if (n >= 2) {
      FieldElement s = FieldElement::zero(q12);
      for (long k = 0; k < n; ++k) s += r.element.pow(k);
      CHECK(s.is_zero());
    }
  }
  CHECK_THROWS_AS(primitive_root_of_unity(q12, 5), ConstructionError);
  CHECK_THROWS_AS(primitive_root_of_unity(q12, 8), ConstructionError);

  auto f13 = Field::prime(13);
  RootOfUnity r4 = primitive_root_of_unity(f13, 4);
  // smallest generator of F_13 is 2, so the canonical 4th root is 2^3 = 8
  CHECK(r4.element == FieldElement::from_int(f13, 8));
  CHECK_THROWS_AS(primitive_root_of_unity(f13, 5), ConstructionError);

  auto f9 = Field::extension_of_degree(3, 2);
  RootOfUnity r8 = primitive_root_of_unity(f9, 8);
  FieldElement s = FieldElement::zero(f9);
  for (long k = 0; k < 8; ++k) s += r8.element.pow(k);
  CHECK(s.is_zero());
  CHECK_THROWS_AS(primitive_root_of_unity(f9, 7), ConstructionError);
}

TEST_CASE("cyclotomic conjugation is the inverse-root automorphism") {
  auto q12 = Field::cyclotomic(12);
  std::mt19937_64 rng(7);
  FieldElement zeta = primitive_root_of_unity(q12, 12).element;
  CHECK(zeta.conj() == zeta.pow(11));
  CHECK(zeta * zeta.conj() == FieldElement::one(q12));
  for (int t = 0; t < 50; ++t) {
    FieldElement a = random_element(q12, rng);
    FieldElement b = random_element(q12, rng);
    CHECK(a.conj().conj() == a);
    CHECK((a * b).conj() == a.conj() * b.conj());
    CHECK((a + b).conj() == a.conj() + b.conj());
  }
  // On Q[i]: conj(a + b i) = a - b i
  auto qi = Field::cyclotomic(4);
  FieldElement i = primitive_root_of_unity(qi, 4).element;
  FieldElement x = FieldElement::from_int(qi, 3) + FieldElement::from_int(qi, 2) * i;
  CHECK(x.conj() == FieldElement::from_int(qi, 3) - FieldElement::from_int(qi, 2) * i);
  // Prime fields: conjugation is the identity
  auto f7 = Field::prime(7);
  CHECK(FieldElement::from_int(f7, 4).conj() == FieldElement::from_int(f7, 4));
  // Proper extensions refuse entrywise conjugation
  auto f9 = Field::extension_of_degree(3, 2);
  CHECK_THROWS_AS(FieldElement::generator(f9).conj(), FieldError);
}

TEST_CASE("frobenius orbits") {
  auto f25 = Field::extension_of_degree(5, 2);
  FieldElement gamma = primitive_root_of_unity(f25, 3).element;
  auto orbit = frobenius_conjugates(gamma);
  REQUIRE(orbit.size() == 2);  // ord_5(3) = 2
  CHECK(orbit[0] == gamma);
  CHECK(orbit[1] == gamma * gamma);  // gamma^5 = gamma^2 for a cube root
  // prime-subfield elements are Frobenius-fixed
  auto f7 = Field::prime(7);
  CHECK(frobenius_conjugates(FieldElement::from_int(f7, 3)).size() == 1);
  CHECK(frobenius_conjugates(FieldElement::zero(f25)).size() == 1);
  CHECK_THROWS_AS(frobenius_conjugates(FieldElement::one(Field::cyclotomic(4))),
                  FieldError);
}

TEST_CASE("power sum weights") {
  auto f25 = Field::extension_of_degree(5, 2);
  FieldElement gamma = primitive_root_of_unity(f25, 3).element;
  auto [k, sum] = power_sum_weight(frobenius_conjugates(gamma));
  CHECK(k == 0);
  CHECK(sum == FieldElement::from_int(f25, 2));

  // Fourth root gamma in F_9 has conjugates [gamma, -gamma]; k = 0 gives 2.
  auto f9 = Field::extension_of_degree(3, 2);
  FieldElement i4 = primitive_root_of_unity(f9, 4).element;
  auto conj = frobenius_conjugates(i4);
  REQUIRE(conj.size() == 2);
  CHECK(conj[1] == -i4);
  auto [k2, sum2] = power_sum_weight(conj);
  CHECK(k2 == 0);
  CHECK(sum2 == FieldElement::from_int(f9, 2));

  // sums are Frobenius-fixed
  CHECK(sum.frobenius() == sum);
}

TEST_CASE("element encoding round trips") {
  std::mt19937_64 rng(99);
  for (const auto& f : {Field::cyclotomic(12), Field::prime(97),
                        Field::extension_of_degree(3, 2)}) {
    for (int t = 0; t < 20; ++t) {
      FieldElement a = random_element(f, rng);
      CHECK(FieldElement::decode(f, a.encode()) == a);
    }
  }
  auto q = Field::cyclotomic(1);
  CHECK_THROWS_AS(FieldElement::decode(q, {"1", "2"}), ParseError);
  CHECK_THROWS_AS(FieldElement::decode(q, {"x"}), ParseError);
}

TEST_CASE("rationals stay canonical") {
  auto q = Field::cyclotomic(1);
  FieldElement half = FieldElement::from_rational(q, Rational(2, 4));
  CHECK(half.encode() == std::vector<std::string>{"1/2"});
  FieldElement sum = half + half;
  CHECK(sum.encode() == std::vector<std::string>{"1"});
  CHECK(FieldElement::from_rational(q, Rational(-6, 4)).encode() ==
        std::vector<std::string>{"-3/2"});
}
