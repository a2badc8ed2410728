#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "regmem/errors.hpp"

namespace regmem::bounds {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<long long>;

inline std::string rational_str(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << "/" << r.denominator();
  return os.str();
}

struct BoundParams {
  int num_servers = 0;  // N
  int max_failures = 0; // f
  int max_active_writes = 1;  // nu
  BigInt value_count = 2;     // |V|

  int effective_concurrency() const {  // nu* = min(nu, f+1)
    return std::min(max_active_writes, max_failures + 1);
  }

  void validate() const {
    if (max_failures < 1 || max_failures >= num_servers)
      throw InvalidParams("need 1 <= f < N");
    if (max_active_writes < 1) throw InvalidParams("need nu >= 1");
    if (value_count < 2) throw InvalidParams("need |V| >= 2");
  }
};

// Sum of coeff * log2(arg) terms, carried symbolically so non-power-of-two
// arguments never force floating point into a comparison.
struct BitsBound {
  struct Term {
    long long coeff;
    BigInt arg;
  };
  std::vector<Term> terms;

  double approx() const {
    double acc = 0.0;
    for (const auto& t : terms) {
      if (t.arg <= 0) continue;
      acc += static_cast<double>(t.coeff) * std::log2(t.arg.convert_to<double>());
    }
    return acc;
  }
};

// The theorem's counting inequality in multiplicative integer form:
//   lhs_constant * (max_n |S_n|)^max_exponent * prod_n |S_n|  >=  rhs.
struct ProductForm {
  BigInt lhs_constant = 1;
  int max_exponent = 0;
  BigInt rhs = 1;

  BigInt lhs(const std::vector<BigInt>& per_server_counts) const {
    BigInt prod = 1;
    BigInt maxc = 0;
    for (const BigInt& c : per_server_counts) {
      prod *= c;
      if (c > maxc) maxc = c;
    }
    BigInt lhs = lhs_constant * prod;
    for (int i = 0; i < max_exponent; ++i) lhs *= maxc;
    return lhs;
  }

  bool holds(const std::vector<BigInt>& per_server_counts) const {
    return lhs(per_server_counts) >= rhs;
  }
};

struct BoundResult {
  Rational normalized_total;  // coefficient of log2|V| as |V| -> infinity
  Rational normalized_max;
  BitsBound total_bits;  // the exact closed form at the given |V|
  ProductForm product_form;
  int fingerprint_servers = 0;  // how many servers the witness tuple spans
  std::string note;
};

inline BigInt falling_factorial(const BigInt& top, int count) {
  BigInt acc = 1;
  for (int i = 0; i < count; ++i) acc *= top - i;
  return acc;
}

inline BigInt factorial(int n) {
  BigInt acc = 1;
  for (int i = 2; i <= n; ++i) acc *= i;
  return acc;
}

inline BigInt binomial(const BigInt& top, int count) {
  return falling_factorial(top, count) / factorial(count);
}

// Total >= N log2|V| / (N-f); witness product over any (N-f)-subset >= |V|.
inline BoundResult bound_thm1(const BoundParams& p) {
  p.validate();
  int live = p.num_servers - p.max_failures;
  BoundResult r;
  r.normalized_total = Rational(p.num_servers, live);
  r.normalized_max = Rational(1, live);
  r.total_bits.terms = {{1, p.value_count}};
  r.product_form = {1, 0, p.value_count};
  r.fingerprint_servers = live;
  r.note = "sum over the (N-f)-subset; total/max follow by the corollary";
  return r;
}

// No-gossip bound: sum + max >= log2 V + log2(V-1) - log2(N-f); stated for f >= 2.
inline BoundResult bound_thm2(const BoundParams& p) {
  p.validate();
  if (p.max_failures < 2) throw InvalidParams("no-gossip bound is stated for f >= 2");
  int live = p.num_servers - p.max_failures;
  BoundResult r;
  r.normalized_total = Rational(2LL * p.num_servers, live + 1);
  r.normalized_max = Rational(2, live + 1);
  r.total_bits.terms = {{1, p.value_count}, {1, p.value_count - 1}, {-1, BigInt(live)}};
  r.product_form = {BigInt(live), 1, p.value_count * (p.value_count - 1)};
  r.fingerprint_servers = live;
  return r;
}

// Universal (gossip allowed): sum + 2 max >= log2 V + log2(V-1) - 2 log2(N-f).
inline BoundResult bound_thm3(const BoundParams& p) {
  p.validate();
  int live = p.num_servers - p.max_failures;
  BoundResult r;
  r.normalized_total = Rational(2LL * p.num_servers, live + 2);
  r.normalized_max = Rational(2, live + 2);
  r.total_bits.terms = {{1, p.value_count}, {1, p.value_count - 1}, {-2, BigInt(live)}};
  r.product_form = {BigInt(live) * BigInt(live), 2, p.value_count * (p.value_count - 1)};
  r.fingerprint_servers = live;
  return r;
}

// Restricted-class bound over the first N-f+nu*-1 servers:
//   sum log2|S_n| >= log2 C(V-1, nu*) - nu* log2(N-f+nu*-1) - log2(nu*!).
// The proof's tuple set V0 is the set of ordered distinct nu*-tuples, whose
// size is the falling factorial (V-1)(V-2)...(V-nu*); the stated bits bound
// uses the binomial. The product form carries the falling factorial and the
// discrepancy is flagged in the note.
inline BoundResult bound_thm4(const BoundParams& p) {
  p.validate();
  int nu_star = p.effective_concurrency();
  int span = std::min(p.num_servers - p.max_failures + nu_star - 1, p.num_servers);
  BoundResult r;
  r.normalized_total = Rational(static_cast<long long>(nu_star) * p.num_servers, span);
  r.normalized_max = Rational(nu_star, span);
  r.total_bits.terms = {{1, binomial(p.value_count - 1, nu_star)},
                        {-nu_star, BigInt(span)},
                        {-1, factorial(nu_star)}};
  BigInt constant = factorial(nu_star);
  for (int i = 0; i < nu_star; ++i) constant *= span;
  r.product_form = {constant, 0, falling_factorial(p.value_count - 1, nu_star)};
  r.fingerprint_servers = span;
  r.note =
      "product form counts ordered distinct tuples (falling factorial); the stated "
      "bits bound uses C(|V|-1, nu*), smaller by nu*! -- discrepancy carried, not resolved";
  return r;
}

struct Figure1Row {
  int nu;
  Rational abd;
  Rational erasure;
  Rational thm1;
  Rational thm3;
  Rational thm4;
};

struct Figure1Table {
  std::vector<Figure1Row> rows;
  int crossover_nu = -1;  // smallest nu with erasure > abd, -1 if none in range
};

// Normalized storage-cost comparison: ABD at f+1, erasure upper bound at
// nu N/(N-f), against the three lower-bound curves.
inline Figure1Table figure1_table(int num_servers, int max_failures, int nu_max) {
  if (max_failures < 1 || max_failures >= num_servers) throw InvalidParams("need 1 <= f < N");
  if (nu_max < 1) throw InvalidParams("need nu_max >= 1");
  Figure1Table t;
  int live = num_servers - max_failures;
  Rational abd(max_failures + 1);
  for (int nu = 1; nu <= nu_max; ++nu) {
    BoundParams p{num_servers, max_failures, nu, 4};
    Figure1Row row;
    row.nu = nu;
    row.abd = abd;
    row.erasure = Rational(static_cast<long long>(nu) * num_servers, live);
    row.thm1 = bound_thm1(p).normalized_total;
    row.thm3 = bound_thm3(p).normalized_total;
    row.thm4 = bound_thm4(p).normalized_total;
    t.rows.push_back(row);
    if (t.crossover_nu < 0 && row.erasure > abd) t.crossover_nu = nu;
  }
  return t;
}

inline std::string figure1_csv(const Figure1Table& t) {
  std::ostringstream os;
  os << "nu,abd,erasure,thm1,thm3,thm4\n";
  for (const auto& row : t.rows) {
    os << row.nu << "," << rational_str(row.abd) << "," << rational_str(row.erasure) << ","
       << rational_str(row.thm1) << "," << rational_str(row.thm3) << ","
       << rational_str(row.thm4) << "\n";
  }
  return os.str();
}

}  // namespace regmem::bounds
