#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "regmem/bounds.hpp"

using namespace regmem::bounds;

TEST_CASE("simple bound normalizes to N/(N-f)", "[bounds]") {
  REQUIRE(bound_thm1({21, 10, 1, 4}).normalized_total == Rational(21, 11));
  REQUIRE(bound_thm1({21, 1, 1, 4}).normalized_total == Rational(21, 20));
  BoundResult r = bound_thm1({3, 1, 1, 8});
  REQUIRE(r.product_form.rhs == 8);
  REQUIRE(r.product_form.lhs_constant == 1);
  REQUIRE(r.product_form.max_exponent == 0);
}

TEST_CASE("no-gossip bound", "[bounds]") {
  REQUIRE(bound_thm2({21, 10, 1, 4}).normalized_total == Rational(42, 12));
  REQUIRE(bound_thm2({21, 10, 1, 4}).normalized_total == Rational(7, 2));
  REQUIRE_THROWS_AS(bound_thm2({21, 1, 1, 4}), regmem::InvalidParams);

  SECTION("degenerate two-value domain") {
    BoundResult r = bound_thm2({4, 2, 1, 2});
    // log2 2 + log2 1 - log2 2 = 0
    REQUIRE(std::abs(r.total_bits.approx()) < 1e-12);
  }
  SECTION("exact operands at N=4 f=2 V=4") {
    BoundResult r = bound_thm2({4, 2, 1, 4});
    REQUIRE(r.product_form.rhs == 12);
    REQUIRE(r.product_form.lhs_constant == 2);  // N-f
    REQUIRE(r.product_form.max_exponent == 1);
    REQUIRE(std::abs(r.total_bits.approx() - (2.0 + std::log2(3.0) - 1.0)) < 1e-12);
  }
}

TEST_CASE("universal bound", "[bounds]") {
  REQUIRE(bound_thm3({21, 10, 1, 4}).normalized_total == Rational(42, 13));
  SECTION("never stronger than the no-gossip bound") {
    for (int n = 3; n <= 12; ++n)
      for (int f = 2; f < n; ++f)
        REQUIRE(bound_thm3({n, f, 1, 4}).normalized_total <=
                bound_thm2({n, f, 1, 4}).normalized_total);
  }
  SECTION("exact operands at N=4 f=2 V=16") {
    BoundResult r = bound_thm3({4, 2, 1, 16});
    REQUIRE(r.product_form.lhs_constant == 4);  // (N-f)^2
    REQUIRE(r.product_form.max_exponent == 2);
    REQUIRE(r.product_form.rhs == 240);
    REQUIRE(std::abs(r.total_bits.approx() - (4.0 + std::log2(15.0) - 2.0)) < 1e-12);
  }
}

TEST_CASE("restricted-class bound", "[bounds]") {
  SECTION("replication-optimal regime") {
    for (int nu : {11, 12, 20})
      REQUIRE(bound_thm4({21, 10, nu, 4}).normalized_total == Rational(11));
  }
  SECTION("single-writer degenerate case collapses to the simple bound") {
    REQUIRE(bound_thm4({21, 10, 1, 4}).normalized_total ==
            bound_thm1({21, 10, 1, 4}).normalized_total);
  }
  SECTION("exact operands at N=4 f=2 nu=2 V=16") {
    BoundResult r = bound_thm4({4, 2, 2, 16});
    // 2! * 3^2 on the left, 15*14 ordered pairs on the right
    REQUIRE(r.product_form.lhs_constant == 18);
    REQUIRE(r.product_form.rhs == 210);
    double expect = std::log2(105.0) - 2.0 * std::log2(3.0) - 1.0;
    REQUIRE(std::abs(r.total_bits.approx() - expect) < 1e-12);
    REQUIRE(!r.note.empty());  // binomial/falling-factorial discrepancy is flagged
  }
  SECTION("monotone in nu, constant beyond f+1") {
    Rational prev(0);
    for (int nu = 1; nu <= 15; ++nu) {
      Rational cur = bound_thm4({21, 10, nu, 4}).normalized_total;
      REQUIRE(cur >= prev);
      prev = cur;
    }
    REQUIRE(bound_thm4({21, 10, 12, 4}).normalized_total ==
            bound_thm4({21, 10, 11, 4}).normalized_total);
  }
}

TEST_CASE("normalized ordering across the bounds", "[bounds]") {
  // thm1 <= thm3 needs N-f >= 2: at N-f = 1 the simple bound N/(N-f) = N
  // already exceeds 2N/(N-f+2).
  for (int n = 4; n <= 10; ++n) {
    for (int f = 2; f <= n - 2; ++f) {
      BoundParams p{n, f, 1, 4};
      REQUIRE(bound_thm1(p).normalized_total <= bound_thm3(p).normalized_total);
      REQUIRE(bound_thm3(p).normalized_total <= bound_thm2(p).normalized_total);
    }
  }
}

TEST_CASE("figure-1 table", "[bounds]") {
  Figure1Table t = figure1_table(21, 10, 15);
  REQUIRE(t.rows.size() == 15);
  REQUIRE(t.crossover_nu == 6);
  REQUIRE(t.rows[0].erasure == Rational(21, 11));
  REQUIRE(t.rows[0].erasure < t.rows[0].abd);
  REQUIRE(t.rows[5].erasure == Rational(126, 11));
  REQUIRE(t.rows[5].erasure > t.rows[5].abd);
  for (const auto& row : t.rows) {
    REQUIRE(row.abd == Rational(11));
    REQUIRE(row.thm1 == Rational(21, 11));
    REQUIRE(row.thm3 == Rational(42, 13));
    int nu_star = std::min(row.nu, 11);
    REQUIRE(row.thm4 == Rational(21 * nu_star, 10 + nu_star));
  }
  SECTION("minimal N = f+1 makes the erasure column nu(f+1)") {
    Figure1Table m = figure1_table(3, 2, 4);
    for (const auto& row : m.rows) REQUIRE(row.erasure == Rational(3 * row.nu));
  }
}

TEST_CASE("figure-1 csv golden bytes", "[bounds]") {
  Figure1Table t = figure1_table(21, 10, 3);
  REQUIRE(figure1_csv(t) ==
          "nu,abd,erasure,thm1,thm3,thm4\n"
          "1,11,21/11,21/11,42/13,21/11\n"
          "2,11,42/11,21/11,42/13,7/2\n"
          "3,11,63/11,21/11,42/13,63/13\n");
}

TEST_CASE("parameter validation", "[bounds]") {
  REQUIRE_THROWS_AS(bound_thm1({3, 0, 1, 4}), regmem::InvalidParams);
  REQUIRE_THROWS_AS(bound_thm1({3, 3, 1, 4}), regmem::InvalidParams);
  REQUIRE_THROWS_AS(bound_thm4({3, 1, 0, 4}), regmem::InvalidParams);
  REQUIRE_THROWS_AS(bound_thm1({3, 1, 1, 1}), regmem::InvalidParams);
  REQUIRE_THROWS_AS(figure1_table(3, 3, 5), regmem::InvalidParams);
}

TEST_CASE("product form arithmetic is exact", "[bounds]") {
  ProductForm form{BigInt(6), 2, BigInt(100)};
  std::vector<BigInt> counts{BigInt(2), BigInt(3)};
  // 6 * (2*3) * 3^2 = 324
  REQUIRE(form.lhs(counts) == 324);
  REQUIRE(form.holds(counts));
  REQUIRE(!form.holds({BigInt(1), BigInt(1)}));
}
