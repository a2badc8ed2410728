#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "regmem/errors.hpp"
#include "regmem/gf.hpp"

namespace regmem::coding {

using Symbol = std::vector<uint8_t>;

// (n, k) MDS code over GF(2^m), Vandermonde evaluation at the first n nonzero
// field elements in generator order. k is the decode threshold.
struct CodeParams {
  int n = 0;
  int k = 0;
  int m = 4;

  const gf::Field& field() const { return m == 4 ? gf::field16() : gf::field256(); }

  void validate() const {
    if (m != 4 && m != 8) throw InvalidParams("field degree must be 4 or 8");
    uint32_t max_n = (1u << m) - 1;
    if (k < 1 || n < k || static_cast<uint32_t>(n) > max_n)
      throw InvalidParams("need 1 <= k <= n <= 2^m - 1");
  }
};

struct Codeword {
  std::map<int, Symbol> symbols;  // server index (1-based) -> symbol
  size_t value_len = 0;           // field elements in the encoded value
};

namespace detail {

// Pad the value to a whole number of k-element stripes.
inline std::vector<uint8_t> padded(const std::vector<uint8_t>& value, int k) {
  std::vector<uint8_t> v = value;
  while (v.size() % static_cast<size_t>(k) != 0) v.push_back(0);
  return v;
}

}  // namespace detail

inline Codeword encode(const std::vector<uint8_t>& value, const CodeParams& p) {
  p.validate();
  if (value.empty()) throw InvalidParams("cannot encode an empty value");
  const gf::Field& f = p.field();
  for (uint8_t e : value)
    if (e >= f.size()) throw InvalidParams("value element outside field");

  std::vector<uint8_t> v = detail::padded(value, p.k);
  size_t stripes = v.size() / static_cast<size_t>(p.k);

  Codeword cw;
  cw.value_len = value.size();
  for (int i = 1; i <= p.n; ++i) {
    uint8_t alpha = f.eval_point(i);
    Symbol sym(stripes);
    for (size_t s = 0; s < stripes; ++s) {
      // Stripe s holds coefficients v[s*k .. s*k+k-1]; symbol = polynomial at alpha.
      uint8_t acc = 0;
      for (int j = 0; j < p.k; ++j) {
        acc = f.add(acc, f.mul(v[s * p.k + j], f.pow(alpha, j)));
      }
      sym[s] = acc;
    }
    cw.symbols[i] = std::move(sym);
  }
  return cw;
}

// Recover the value from at least k (index, symbol) pairs. Extra pairs beyond
// the first k act as consistency checks.
inline std::vector<uint8_t> decode(const std::vector<std::pair<int, Symbol>>& pairs,
                                   const CodeParams& p, size_t value_len) {
  p.validate();
  if (pairs.size() < static_cast<size_t>(p.k))
    throw InvalidParams("decode needs at least k symbols");
  const gf::Field& f = p.field();

  std::vector<std::pair<int, Symbol>> use(pairs.begin(), pairs.begin() + p.k);
  for (size_t a = 0; a < use.size(); ++a)
    for (size_t b = a + 1; b < use.size(); ++b)
      if (use[a].first == use[b].first) throw SingularSystem("duplicate symbol indices");

  size_t stripes = use[0].second.size();
  for (const auto& [idx, sym] : pairs) {
    (void)idx;
    if (sym.size() != stripes) throw InvalidParams("symbol length mismatch");
  }

  size_t padded_len = stripes * static_cast<size_t>(p.k);
  if (value_len > padded_len) throw InvalidParams("declared value length exceeds stripes");

  // Solve the k x k Vandermonde system per stripe by Gaussian elimination.
  std::vector<uint8_t> out(padded_len, 0);
  int k = p.k;
  for (size_t s = 0; s < stripes; ++s) {
    std::vector<std::vector<uint8_t>> a(k, std::vector<uint8_t>(k + 1, 0));
    for (int r = 0; r < k; ++r) {
      uint8_t alpha = f.eval_point(use[r].first);
      for (int c = 0; c < k; ++c) a[r][c] = f.pow(alpha, c);
      a[r][k] = use[r].second[s];
    }
    for (int col = 0; col < k; ++col) {
      int pivot = -1;
      for (int r = col; r < k; ++r)
        if (a[r][col] != 0) {
          pivot = r;
          break;
        }
      if (pivot < 0) throw SingularSystem("singular decode system");
      std::swap(a[col], a[pivot]);
      uint8_t piv_inv = f.inv(a[col][col]);
      for (int c = col; c <= k; ++c) a[col][c] = f.mul(a[col][c], piv_inv);
      for (int r = 0; r < k; ++r) {
        if (r == col || a[r][col] == 0) continue;
        uint8_t factor = a[r][col];
        for (int c = col; c <= k; ++c) a[r][c] = f.sub(a[r][c], f.mul(factor, a[col][c]));
      }
    }
    for (int c = 0; c < k; ++c) out[s * k + c] = a[c][k];
  }

  // Over-determined rows must agree with the interpolated polynomial.
  for (size_t extra = static_cast<size_t>(p.k); extra < pairs.size(); ++extra) {
    uint8_t alpha = f.eval_point(pairs[extra].first);
    for (size_t s = 0; s < stripes; ++s) {
      uint8_t acc = 0;
      for (int j = 0; j < k; ++j) acc = f.add(acc, f.mul(out[s * k + j], f.pow(alpha, j)));
      if (acc != pairs[extra].second[s])
        throw InconsistentSymbols("check symbol disagrees with decoded value");
    }
  }

  out.resize(value_len);
  return out;
}

// Brute-force count of values consistent with the given symbols. With k-1
// symbols an MDS code must give exactly |field|^stripes; with k it gives 1.
// Stripes are independent, so the enumeration runs per stripe over every
// coefficient vector and the counts multiply.
inline uint64_t ambiguity_count(const std::vector<std::pair<int, Symbol>>& pairs,
                                const CodeParams& p, size_t value_len) {
  p.validate();
  if (pairs.size() > static_cast<size_t>(p.k))
    throw InvalidParams("ambiguity_count takes at most k symbols");
  for (size_t a = 0; a < pairs.size(); ++a)
    for (size_t b = a + 1; b < pairs.size(); ++b)
      if (pairs[a].first == pairs[b].first) throw SingularSystem("duplicate symbol indices");
  if (value_len == 0) throw InvalidParams("empty value");
  const gf::Field& f = p.field();

  size_t k = static_cast<size_t>(p.k);
  size_t stripes = (value_len + k - 1) / k;
  for (const auto& [idx, sym] : pairs) {
    (void)idx;
    if (sym.size() != stripes) throw InvalidParams("symbol length mismatch");
  }

  uint64_t count = 1;
  for (size_t s = 0; s < stripes; ++s) {
    // Free coefficients of this stripe; the padding pins the rest to zero.
    size_t free_dims = std::min(k, value_len - s * k);
    double space = 1.0;
    for (size_t i = 0; i < free_dims; ++i) space *= f.size();
    if (space > 2e7) throw FieldTooLarge("brute-force space exceeds budget");

    std::vector<uint8_t> coeff(k, 0);
    uint64_t stripe_count = 0;
    while (true) {
      bool ok = true;
      for (const auto& [idx, sym] : pairs) {
        uint8_t alpha = f.eval_point(idx);
        uint8_t acc = 0;
        for (size_t j = 0; j < k; ++j) acc = f.add(acc, f.mul(coeff[j], f.pow(alpha, static_cast<uint32_t>(j))));
        if (acc != sym[s]) {
          ok = false;
          break;
        }
      }
      if (ok) ++stripe_count;
      size_t pos = 0;
      while (pos < free_dims) {
        if (++coeff[pos] < f.size()) break;
        coeff[pos] = 0;
        ++pos;
      }
      if (pos == free_dims) break;
    }
    count *= stripe_count;
  }
  return count;
}

}  // namespace regmem::coding
