#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "regmem/coding.hpp"

using namespace regmem;
using coding::CodeParams;
using coding::Symbol;

namespace {

// Enumerate all k-subsets of {1..n}.
std::vector<std::vector<int>> subsets_of_size(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i <= n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

}  // namespace

TEST_CASE("field arithmetic is a field", "[gf]") {
  for (int m : {4, 8}) {
    const gf::Field f(m);
    for (uint32_t a = 1; a < f.size(); ++a) {
      REQUIRE(f.mul(static_cast<uint8_t>(a), f.inv(static_cast<uint8_t>(a))) == 1);
    }
    // distributivity spot checks
    for (uint32_t a = 0; a < f.size(); a += 3)
      for (uint32_t b = 0; b < f.size(); b += 5)
        for (uint32_t c = 0; c < f.size(); c += 7) {
          uint8_t lhs = f.mul(static_cast<uint8_t>(a), f.add(static_cast<uint8_t>(b), static_cast<uint8_t>(c)));
          uint8_t rhs = f.add(f.mul(static_cast<uint8_t>(a), static_cast<uint8_t>(b)),
                              f.mul(static_cast<uint8_t>(a), static_cast<uint8_t>(c)));
          REQUIRE(lhs == rhs);
        }
  }
}

TEST_CASE("evaluation points are distinct and nonzero", "[gf]") {
  const gf::Field& f = gf::field16();
  std::set<uint8_t> seen;
  for (int i = 1; i <= 15; ++i) {
    uint8_t p = f.eval_point(i);
    REQUIRE(p != 0);
    REQUIRE(seen.insert(p).second);
  }
  REQUIRE_THROWS_AS(f.eval_point(16), InvalidParams);
}

TEST_CASE("k=1 replication stores the value at every server", "[coding]") {
  CodeParams p{3, 1, 4};
  auto cw = coding::encode({9}, p);
  for (int i = 1; i <= 3; ++i) REQUIRE(cw.symbols.at(i) == Symbol{9});
}

TEST_CASE("k=2 n=3 symbols are the Vandermonde evaluations", "[coding]") {
  CodeParams p{3, 2, 4};
  const gf::Field& f = gf::field16();
  uint8_t a = 6, b = 11;
  auto cw = coding::encode({a, b}, p);
  for (int i = 1; i <= 3; ++i) {
    uint8_t alpha = f.eval_point(i);
    REQUIRE(cw.symbols.at(i) == Symbol{f.add(a, f.mul(b, alpha))});
  }
}

TEST_CASE("every k-subset decodes, exhaustively at n <= 6", "[coding][acceptance7]") {
  for (int n = 1; n <= 6; ++n) {
    for (int k = 1; k <= n; ++k) {
      CodeParams p{n, k, 4};
      std::vector<uint8_t> value;
      for (int i = 0; i < k; ++i) value.push_back(static_cast<uint8_t>((3 * i + n + k) % 16));
      auto cw = coding::encode(value, p);
      for (const auto& subset : subsets_of_size(n, k)) {
        std::vector<std::pair<int, Symbol>> pairs;
        for (int idx : subset) pairs.push_back({idx, cw.symbols.at(idx)});
        REQUIRE(coding::decode(pairs, p, value.size()) == value);
      }
    }
  }
}

TEST_CASE("symbol size per server is ceil(len/k) elements", "[coding]") {
  CodeParams p{5, 3, 4};
  auto cw = coding::encode({1, 2, 3, 4}, p);  // 4 elements pad to 6 -> 2 stripes
  for (int i = 1; i <= 5; ++i) REQUIRE(cw.symbols.at(i).size() == 2);
}

TEST_CASE("decode error paths", "[coding]") {
  CodeParams p{4, 2, 4};
  auto cw = coding::encode({7, 2}, p);
  std::vector<std::pair<int, Symbol>> one = {{1, cw.symbols.at(1)}};
  REQUIRE_THROWS_AS(coding::decode(one, p, 2), InvalidParams);

  std::vector<std::pair<int, Symbol>> dup = {{1, cw.symbols.at(1)}, {1, cw.symbols.at(1)}};
  REQUIRE_THROWS_AS(coding::decode(dup, p, 2), SingularSystem);

  std::vector<std::pair<int, Symbol>> bad = {
      {1, cw.symbols.at(1)}, {2, cw.symbols.at(2)}, {3, {static_cast<uint8_t>(cw.symbols.at(3)[0] ^ 1)}}};
  REQUIRE_THROWS_AS(coding::decode(bad, p, 2), InconsistentSymbols);
}

TEST_CASE("ambiguity counts match the MDS property", "[coding][acceptance7]") {
  SECTION("k=2, one symbol, one stripe: the whole field remains possible") {
    CodeParams p{3, 2, 4};
    auto cw = coding::encode({5, 12}, p);
    REQUIRE(coding::ambiguity_count({{2, cw.symbols.at(2)}}, p, 2) == 16);
  }
  SECTION("k=1, zero symbols") {
    CodeParams p{3, 1, 4};
    REQUIRE(coding::ambiguity_count({}, p, 1) == 16);
  }
  SECTION("k=2, two symbols pin the value") {
    CodeParams p{3, 2, 4};
    auto cw = coding::encode({5, 12}, p);
    REQUIRE(coding::ambiguity_count({{1, cw.symbols.at(1)}, {3, cw.symbols.at(3)}}, p, 2) == 1);
  }
  SECTION("k-1 symbols leave |field|^stripes candidates across k") {
    for (int k = 2; k <= 4; ++k) {
      CodeParams p{5, k, 4};
      std::vector<uint8_t> value;
      for (int i = 0; i < k; ++i) value.push_back(static_cast<uint8_t>(i + 1));
      auto cw = coding::encode(value, p);
      std::vector<std::pair<int, Symbol>> pairs;
      for (int i = 1; i < k; ++i) pairs.push_back({i, cw.symbols.at(i)});
      REQUIRE(coding::ambiguity_count(pairs, p, value.size()) == 16);
    }
  }
  SECTION("budget guard") {
    CodeParams p{7, 6, 8};
    std::vector<std::pair<int, Symbol>> none;
    REQUIRE_THROWS_AS(coding::ambiguity_count(none, p, 6), FieldTooLarge);
  }
}

TEST_CASE("invalid parameters are rejected", "[coding]") {
  REQUIRE_THROWS_AS((CodeParams{3, 4, 4}.validate()), InvalidParams);
  REQUIRE_THROWS_AS((CodeParams{16, 2, 4}.validate()), InvalidParams);
  REQUIRE_THROWS_AS((CodeParams{3, 0, 4}.validate()), InvalidParams);
  CodeParams p{3, 2, 4};
  REQUIRE_THROWS_AS(coding::encode({}, p), InvalidParams);
  REQUIRE_THROWS_AS(coding::encode({16}, p), InvalidParams);
}
