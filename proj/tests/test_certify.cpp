#include <catch2/catch_amalgamated.hpp>

#include "rigidity/certify.hpp"

using namespace rigidity;

namespace {

std::vector<FieldElement> changed_symbol(const Certificate& cert,
                                         const std::vector<FieldElement>& f) {
  // Row 0 of the change set reads off g = f - f' directly.
  std::vector<FieldElement> out = f;
  for (const auto& [k, v] : cert.changes.entries()) {
    if (k.first != 0) continue;
    out[k.second] = out[k.second] - v;
  }
  return out;
}

}  // namespace

TEST_CASE("symmetric changes, two values on eight axes") {
  FieldPtr q = Field::cyclotomic(1);
  SPlan plan = build_s_plan(2, 8, 3);
  REQUIRE(plan.s_members.size() == 4);
  REQUIRE(plan.t_class_reps.size() == 3);
  REQUIRE(count_perm_s(plan) == 182);

  std::vector<FieldElement> f = random_symmetric_symbol(2, 8, q, 20260821);
  Certificate cert = gwh_symmetric_decompose(f, plan);

  CHECK(cert.claimed_sparsity <= 37);
  CHECK(cert.claimed_rank <= 74);
  CHECK_FALSE(cert.degenerate);

  // The changed symbol's character polynomial vanishes wherever every
  // value shows up at least three times.
  std::vector<FieldElement> f2 = changed_symbol(cert, f);
  RootOfUnity w = primitive_root_of_unity(q, 2);
  std::vector<FieldElement> evals = eval_pf_all(f2, w, 2, 8);
  long vanishing = 0;
  for (long idx = 0; idx < 256; ++idx) {
    if (!has_all_counts_at_least(index_to_tuple(idx, 2, 8), 2, 3)) continue;
    CHECK(evals[idx].is_zero());
    ++vanishing;
  }
  CHECK(vanishing == 182);

  // Elimination agrees with the root count.
  AbelianGroupSpec g{std::vector<long>(8, 2)};
  CHECK(cert.claimed_rank == rank_via_roots(g, f2, q));

  VerificationReport rep = verify(cert);
  INFO(rep.summary());
  CHECK(rep.verified);
  CHECK(rep.rank_exact);
}

TEST_CASE("symmetric changes over a cube-root field") {
  FieldPtr f3 = Field::cyclotomic(3);
  SPlan plan = build_s_plan(3, 4, 1);
  REQUIRE(count_perm_s(plan) == 36);
  REQUIRE(plan.t_class_reps.size() == 3);

  std::vector<FieldElement> f = random_symmetric_symbol(3, 4, f3, 7);
  Certificate cert = gwh_symmetric_decompose(f, plan);
  CHECK(cert.claimed_rank <= 45);
  CHECK(cert.claimed_sparsity <= 9);

  VerificationReport rep = verify(cert);
  INFO(rep.summary());
  CHECK(rep.verified);
}

TEST_CASE("already-vanishing symbol needs no changes") {
  FieldPtr q = Field::cyclotomic(1);
  SPlan plan = build_s_plan(2, 8, 3);
  std::vector<FieldElement> f = random_symmetric_symbol(2, 8, q, 20260821);
  Certificate first = gwh_symmetric_decompose(f, plan);
  std::vector<FieldElement> f2 = changed_symbol(first, f);

  Certificate second = gwh_symmetric_decompose(f2, plan);
  CHECK(second.claimed_sparsity == 0);
  CHECK(second.changes.entries().empty());
  CHECK(second.claimed_rank == first.claimed_rank);
}

TEST_CASE("character matrix certificate via rescaling") {
  FieldPtr q = Field::cyclotomic(1);
  Certificate cert = gwh_decompose(2, 4, 2, q);
  CHECK(cert.field->describe() == "Q[zeta_4]");
  CHECK(cert.claimed_rank <= 10);
  CHECK(cert.claimed_sparsity <= 1);

  VerificationReport rep = verify(cert);
  INFO(rep.summary());
  CHECK(rep.verified);
}

TEST_CASE("explicit changes get exact claims") {
  FieldPtr f7 = Field::prime(7);
  std::vector<FieldElement> ones(3, FieldElement::one(f7));
  MatrixDescriptor desc = MatrixDescriptor::circulant(ones);
  SparseChanges e(f7, 3, 3);
  e.set(0, 0, FieldElement::one(f7));

  Certificate cert = certificate_from_changes(desc, f7, e);
  CHECK(cert.claimed_rank == 2);
  CHECK(cert.claimed_sparsity == 1);
  CHECK_FALSE(cert.degenerate);
  CHECK(verify(cert).verified);
}

TEST_CASE("permuted certificate tracks the moved matrix") {
  FieldPtr q = Field::cyclotomic(1);
  Certificate cert = gwh_decompose(2, 2, 1, q);
  REQUIRE(verify(cert).verified);

  std::vector<long> rp = {2, 0, 3, 1}, cp = {1, 3, 0, 2};
  ExactMatrix moved = realize_in(cert.target, cert.field).permuted(rp, cp);
  Certificate cert2 = permuted_certificate(cert, rp, cp, cert.target, "moved");
  VerificationReport rep = verify(cert2, &moved);
  INFO(rep.summary());
  CHECK(rep.verified);
  CHECK(cert2.claimed_rank == cert.claimed_rank);

  std::vector<long> bad = {0, 0, 1, 2};
  CHECK_THROWS_AS(
      permuted_certificate(cert, bad, cp, cert.target, "dup"),
      ConstructionError);
}

TEST_CASE("field choice for character matrices") {
  FieldPtr q = Field::cyclotomic(1);
  CHECK(field_for_gwh(3, q)->describe() == "Q[zeta_3]");
  CHECK(field_for_gwh(2, q)->describe() == "Q[zeta_4]");
  CHECK(field_for_gwh(3, Field::prime(7))->describe() == "F_7");
  CHECK(field_for_gwh(3, Field::prime(5))->describe() == "F_5^2");
  CHECK_THROWS_AS(field_for_gwh(5, Field::prime(5)), ConstructionError);
  FieldPtr f4 = Field::extension_of_degree(2, 2);
  CHECK_THROWS_AS(field_for_gwh(5, f4), ConstructionError);
}

TEST_CASE("diagonal transfer bounds both sides") {
  FieldPtr q = Field::cyclotomic(1);
  Certificate h = gwh_decompose(2, 3, 1, q);
  REQUIRE(verify(h).verified);
  const FieldPtr& fw = h.field;

  // Random group-function matrix M(x + y) = H diag(w) H.
  AbelianGroupSpec g{std::vector<long>(3, 2)};
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> dist(0, 11);
  std::vector<FieldElement> f_vals;
  for (long i = 0; i < 8; ++i)
    f_vals.push_back(FieldElement::from_int(fw, dist(rng)));
  std::vector<FieldElement> hat = group_character_transform(g, f_vals, fw);
  FieldElement inv8 = FieldElement::from_int(fw, 8).inverse();
  std::vector<FieldElement> w;
  for (long k = 0; k < 8; ++k) w.push_back(hat[g.neg(k)] * inv8);

  MatrixDescriptor target = MatrixDescriptor::adjusted_g_circulant(g, f_vals);
  Certificate moved =
      diagonalization_transfer(h, w, DiagSide::Plain, target);
  CHECK(moved.claimed_rank == 2 * h.claimed_rank);
  CHECK(moved.claimed_sparsity == h.claimed_sparsity * h.claimed_sparsity);
  VerificationReport rep = verify(moved);
  INFO(rep.summary());
  CHECK(rep.verified);

  Certificate packaged = general_group_fn_decompose(2, 3, 1, f_vals, q);
  CHECK(packaged.claimed_rank == moved.claimed_rank);
  CHECK(verify(packaged).verified);
}

TEST_CASE("star transfer identity on random matrices") {
  FieldPtr f7 = Field::prime(7);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> dist(0, 6);
  for (int trial = 0; trial < 10; ++trial) {
    ExactMatrix a(f7, 5, 5);
    for (long i = 0; i < 5; ++i)
      for (long j = 0; j < 5; ++j)
        a.at(i, j) = FieldElement::from_int(f7, dist(rng));
    SparseChanges e(f7, 5, 5);
    e.set(dist(rng) % 5, 3, FieldElement::from_int(f7, 1 + dist(rng) % 6));
    e.set(2, dist(rng) % 5, FieldElement::from_int(f7, 1 + dist(rng) % 6));
    std::vector<FieldElement> d;
    for (long i = 0; i < 5; ++i)
      d.push_back(FieldElement::from_int(f7, dist(rng)));

    ExactMatrix b = a.star() * diagonal_matrix(f7, d) * a;
    SparseChanges eb = mul_diag_mul(e.star(), d, e);
    long ra = rank(subtract(a, e));
    CHECK(rank(subtract(b, eb)) <= 2 * ra);
    SparsityReport sp = eb.sparsity();
    CHECK(sp.max_row_support <= 4);
    CHECK(sp.max_col_support <= 4);
  }
}

TEST_CASE("kronecker transfer composes certificates") {
  FieldPtr q = Field::cyclotomic(1);
  Certificate a = gwh_decompose(2, 2, 1, q);
  Certificate b = gwh_decompose(2, 2, 1, q);
  Certificate ab =
      kronecker_transfer(a, b, MatrixDescriptor::gwh(2, 4, a.field));
  CHECK(ab.claimed_rank == a.claimed_rank * 4 + b.claimed_rank * 4);
  CHECK(ab.claimed_sparsity == a.claimed_sparsity * b.claimed_sparsity);
  VerificationReport rep = verify(ab);
  INFO(rep.summary());
  CHECK(rep.verified);

  SparsityReport sp = ab.changes.sparsity();
  CHECK(sp.max_row_support == a.changes.sparsity().max_row_support *
                                  b.changes.sparsity().max_row_support);
}

TEST_CASE("binomial split is an exact regrouping") {
  FieldPtr q = Field::cyclotomic(1);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long> dist(-3, 3);
  auto rand_part = [&](long n) {
    ExactMatrix a(q, n, n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        a.at(i, j) = FieldElement::from_int(q, dist(rng));
    SparseChanges e(q, n, n);
    e.set(dist(rng) >= 0 ? 0 : 1, 1, FieldElement::from_int(q, 2));
    return SplitPart{a, e, rank(a), 1};
  };

  std::vector<SplitPart> parts = {rand_part(2), rand_part(2), rand_part(3)};
  ExactMatrix full = kronecker(
      kronecker(parts[0].low_rank + parts[0].sparse.dense(),
                parts[1].low_rank + parts[1].sparse.dense()),
      parts[2].low_rank + parts[2].sparse.dense());

  for (int l = 0; l <= 3; ++l) {
    BinomialSplit bs = binomial_split(parts, l);
    ExactMatrix back = bs.low_rank + bs.sparse.dense();
    CHECK(back == full);
    CHECK(rank(bs.low_rank) <= bs.rank_bound);
    SparsityReport sp = bs.sparse.sparsity();
    CHECK(sp.max_row_support <= bs.sparsity_bound);
    CHECK(sp.max_col_support <= bs.sparsity_bound);
  }

  // b = 2, l = 1 grouping: N_1 = A_1 ⊗ M_2 + E_1 ⊗ A_2, N_2 = E_1 ⊗ E_2.
  std::vector<SplitPart> two = {parts[0], parts[1]};
  BinomialSplit bs = binomial_split(two, 1);
  ExactMatrix m2 = two[1].low_rank + two[1].sparse.dense();
  ExactMatrix n1 = kronecker(two[0].low_rank, m2) +
                   kronecker(two[0].sparse.dense(), two[1].low_rank);
  CHECK(bs.low_rank == n1);
  CHECK(bs.sparse == kronecker(two[0].sparse, two[1].sparse));
}

TEST_CASE("product plan buckets and carries") {
  ProductPlan plan;
  plan.factors = {{2, 4}, {3, 2}};
  plan.split_l = 1;
  Certificate cert = productbound_decompose(plan, Field::cyclotomic(6));
  CHECK(cert.field->describe() == "Q[zeta_12]");
  CHECK(cert.changes.rows() == 144);
  CHECK_FALSE(cert.degenerate);

  // One viable bucket (2^4, m = 2: r = 10, s = 1) times a carried dense
  // factor of size 9.
  CHECK(cert.claimed_rank == 90);
  CHECK(cert.claimed_sparsity == 9);
  VerificationReport rep = verify(cert);
  INFO(rep.summary());
  CHECK(rep.verified);

  ProductPlan strict = plan;
  strict.require_nondegenerate = true;
  CHECK_THROWS_AS(productbound_decompose(strict, Field::cyclotomic(6)),
                  ConstructionError);
}

TEST_CASE("single-group plan matches the direct certificate") {
  ProductPlan plan;
  plan.factors = {{2, 8}};
  Certificate via_plan = productbound_decompose(plan, Field::cyclotomic(1));
  Certificate direct =
      gwh_decompose(2, 8, m_from_epsilon(2, 8, plan.epsilon), Field::cyclotomic(1));
  CHECK(via_plan.claimed_rank == direct.claimed_rank);
  CHECK(via_plan.claimed_sparsity == direct.claimed_sparsity);
  CHECK(via_plan.changes.entries() == direct.changes.entries());
  CHECK(verify(via_plan).verified);
}

TEST_CASE("all-carried plan is trivial and degenerate") {
  ProductPlan plan;
  plan.factors = {{3, 2}, {5, 1}};
  Certificate cert = productbound_decompose(plan, Field::cyclotomic(1));
  CHECK(cert.degenerate);
  CHECK(cert.claimed_rank == 45);
  CHECK(cert.changes.entries().empty());
  CHECK(verify(cert).verified);
}

TEST_CASE("tampered claims are refuted") {
  FieldPtr q = Field::cyclotomic(1);
  Certificate cert = gwh_decompose(2, 4, 2, q);
  REQUIRE(verify(cert).verified);

  Certificate low_rank = cert;
  low_rank.claimed_rank -= 1;
  VerificationReport rep = verify(low_rank);
  CHECK_FALSE(rep.verified);
  CHECK_FALSE(rep.rank_exact);
  CHECK(rep.achieved_rank == low_rank.claimed_rank + 1);

  Certificate low_s = cert;
  low_s.claimed_sparsity = 0;
  CHECK_FALSE(verify(low_s).verified);

  Certificate bad_shape = cert;
  bad_shape.changes = SparseChanges(cert.field, 3, 3);
  VerificationReport rep2 = verify(bad_shape);
  CHECK_FALSE(rep2.verified);
  bool shape_failed = false;
  for (const auto& c : rep2.claims)
    if (c.claim == "shape" && !c.pass) shape_failed = true;
  CHECK(shape_failed);
}
