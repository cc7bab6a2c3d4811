#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "rigidity/matrix.hpp"
#include "rigidity/tuples.hpp"

using namespace rigidity;

TEST_CASE("tuple indexing round trips big endian") {
  CHECK(index_to_tuple(0, 3, 2) == std::vector<int>{0, 0});
  CHECK(index_to_tuple(5, 3, 2) == std::vector<int>{1, 2});
  for (long idx = 0; idx < 81; ++idx)
    CHECK(tuple_to_index(index_to_tuple(idx, 3, 4), 3) == idx);
}

TEST_CASE("permutation class sizes") {
  CHECK(perm_class({0, 0, 1}, 2).size == 3);
  CHECK(perm_class({0, 1, 2}, 3).size == 6);
  CHECK(perm_class({1, 1, 1}, 2).size == 1);
  CHECK(perm_class({2, 0, 1, 0}, 3).rep == std::vector<int>{0, 0, 1, 2});
  CHECK(perm_class({2, 0, 1, 0}, 3).size == 12);
  CHECK(static_cast<long>(class_members({0, 0, 1}).size()) == 3);
}

TEST_CASE("class sizes partition the tuple space") {
  for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 5}, {3, 4}}) {
    mpz_class total = 0;
    std::set<std::vector<int>> seen;
    for (const auto& rep : all_class_reps(d, n)) {
      CHECK(std::is_sorted(rep.begin(), rep.end()));
      CHECK(seen.insert(rep).second);
      total += perm_class(rep, d).size;
    }
    CHECK(total == pow_checked(d, n));
  }
}

TEST_CASE("anchored family layout") {
  SPlan p = build_s_plan(2, 8, 3);
  CHECK(p.s_members.size() == 4);  // 2^(8-6)
  long t_total = 0;
  for (const auto& rep : p.t_class_reps) {
    CHECK(zero_count(rep) >= 6);
    t_total += perm_class(rep, 2).size.get_si();
  }
  CHECK(p.t_class_reps.size() == 3);
  CHECK(t_total == 37);  // C(8,6)+C(8,7)+C(8,8)

  CHECK(build_s_plan(3, 4, 1).s_members.size() == 3);

  SPlan tiny = build_s_plan(2, 2, 1);
  REQUIRE(tiny.s_members.size() == 1);
  CHECK(tiny.s_members[0] == std::vector<int>{0, 1});

  CHECK_THROWS_AS(build_s_plan(3, 5, 2), ConstructionError);  // d*m = 6 > 5

  // every member carries at least m copies of each value
  for (const auto& t : build_s_plan(3, 7, 2).s_members)
    CHECK(has_all_counts_at_least(t, 3, 2));
}

TEST_CASE("closure counting") {
  CHECK(count_perm_s(build_s_plan(2, 8, 3)) == 182);
  CHECK(count_perm_s(build_s_plan(3, 4, 1)) == 36);
  CHECK(count_perm_s(build_s_plan(2, 2, 1)) == 2);

  // cross-check against exhaustive enumeration, and against the closure of S
  for (auto [d, n, m] : std::vector<std::array<int, 3>>{{2, 6, 2}, {3, 4, 1}}) {
    SPlan p = build_s_plan(d, n, m);
    std::set<std::vector<int>> closure;
    for (const auto& s : p.s_members)
      for (const auto& t : class_members(s)) closure.insert(t);
    long direct = 0;
    for (long idx = 0; idx < pow_checked(d, n); ++idx) {
      std::vector<int> t = index_to_tuple(idx, d, n);
      bool in = has_all_counts_at_least(t, d, m);
      if (in) ++direct;
      CHECK(in == (closure.count(t) > 0));
    }
    CHECK(count_perm_s(p) == direct);
  }
}

TEST_CASE("parameter helper stays feasible") {
  for (double eps : {0.5, 0.1, 0.01}) {
    int m = m_from_epsilon(2, 16, eps);
    CHECK(m >= 1);
    CHECK(2 * m <= 16);
  }
  CHECK_THROWS_AS(m_from_epsilon(2, 16, 0.0), ConstructionError);
}

TEST_CASE("monomial evaluation at root powers") {
  auto q = Field::cyclotomic(12);
  RootOfUnity w3 = primitive_root_of_unity(q, 3);

  std::map<std::vector<int>, FieldElement> empty;
  CHECK(eval_pf(3, empty, w3, {0, 0}).is_zero());

  std::map<std::vector<int>, FieldElement> delta;
  delta[{0, 0}] = FieldElement::one(q);
  for (long idx = 0; idx < 9; ++idx)
    CHECK(eval_pf(3, delta, w3, index_to_tuple(idx, 3, 2)) ==
          FieldElement::one(q));

  // d=2, n=1, f constant one: evaluation at omega^[1] gives 1 + (-1) = 0
  RootOfUnity w2 = primitive_root_of_unity(q, 2);
  std::map<std::vector<int>, FieldElement> ones;
  ones[{0}] = FieldElement::one(q);
  ones[{1}] = FieldElement::one(q);
  CHECK(eval_pf(2, ones, w2, {1}).is_zero());
  CHECK(eval_pf(2, ones, w2, {0}) == FieldElement::from_int(q, 2));

  CHECK_THROWS_AS(eval_pf(4, delta, w3, {0, 0}), ConstructionError);
}

TEST_CASE("evaluation agrees with the character matrix product") {
  auto q = Field::cyclotomic(3);
  RootOfUnity w = primitive_root_of_unity(q, 3);
  int d = 3, n = 3;
  long size = pow_checked(d, n);
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> pick(-3, 3);
  std::vector<FieldElement> f;
  std::map<std::vector<int>, FieldElement> fmap;
  for (long idx = 0; idx < size; ++idx) {
    FieldElement v = FieldElement::from_int(q, pick(rng));
    f.push_back(v);
    fmap[index_to_tuple(idx, d, n)] = v;
  }
  // H[J,I] = w^(I.J) applied to the value vector
  ExactMatrix h(q, size, size);
  for (long a = 0; a < size; ++a) {
    std::vector<int> ja = index_to_tuple(a, d, n);
    for (long b = 0; b < size; ++b)
      h.at(a, b) = w.element.pow(dot(ja, index_to_tuple(b, d, n)));
  }
  ExactMatrix fv(q, size, 1);
  for (long idx = 0; idx < size; ++idx) fv.at(idx, 0) = f[idx];
  ExactMatrix prod = h * fv;
  std::vector<FieldElement> fast = eval_pf_all(f, w, d, n);
  for (long idx = 0; idx < size; ++idx) {
    std::vector<int> j = index_to_tuple(idx, d, n);
    CHECK(prod.at(idx, 0) == eval_pf(d, fmap, w, j));
    CHECK(fast[idx] == prod.at(idx, 0));
  }
}
