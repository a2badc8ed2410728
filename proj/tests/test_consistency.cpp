#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "regmem/consistency.hpp"
#include "regmem/consistency_io.hpp"

using namespace regmem;
using namespace regmem::consistency;
using regmem::sim::reader;
using regmem::sim::writer;

namespace {

Operation make_op(uint32_t id, sim::NodeId client, bool is_write, uint32_t value, size_t inv,
                  std::optional<size_t> resp) {
  Operation op;
  op.op_id = id;
  op.client = client;
  op.is_write = is_write;
  op.value = value;
  op.invoke_point = inv;
  op.respond_point = resp;
  return op;
}

}  // namespace

TEST_CASE("regularity accepts the latest completed write", "[consistency]") {
  History h;
  h.ops = {make_op(1, writer(0), true, 5, 0, 1), make_op(2, reader(0), false, 5, 2, 3)};
  REQUIRE(check_regular(h).ok);
  h.ops[1].value = 7;
  Verdict v = check_regular(h);
  REQUIRE(!v.ok);
  REQUIRE(v.violation->read_op == 2);
  REQUIRE(v.violation->candidate_values == std::vector<uint32_t>{5});
}

TEST_CASE("a read with no writes must return the initial value", "[consistency]") {
  History h;
  h.ops = {make_op(1, reader(0), false, 0, 0, 1)};
  REQUIRE(check_regular(h).ok);
  h.ops[0].value = 3;
  REQUIRE(!check_regular(h).ok);
}

TEST_CASE("an overlapping write widens the legal set, a third value does not", "[consistency]") {
  // write(v1) complete; write(v2) overlaps the read
  History h;
  h.ops = {make_op(1, writer(0), true, 1, 0, 1), make_op(2, writer(0), true, 2, 2, 6),
           make_op(3, reader(0), false, 1, 3, 4)};
  REQUIRE(check_regular(h).ok);
  h.ops[2].value = 2;
  REQUIRE(check_regular(h).ok);
  h.ops[2].value = 3;  // neither serialization yields a third value
  REQUIRE(!check_regular(h).ok);
}

TEST_CASE("linearizable sequential history", "[consistency]") {
  History h;
  h.ops = {make_op(1, writer(0), true, 1, 0, 1), make_op(2, reader(0), false, 1, 2, 3),
           make_op(3, writer(1), true, 2, 4, 5), make_op(4, reader(0), false, 2, 6, 7)};
  Verdict v = check_atomic(h);
  REQUIRE(v.ok);
  REQUIRE(v.serialization == std::vector<uint32_t>{1, 2, 3, 4});
}

TEST_CASE("a new-old read inversion is not atomic", "[consistency]") {
  History h;
  h.ops = {make_op(1, writer(0), true, 1, 0, 1), make_op(2, writer(1), true, 2, 2, 3),
           make_op(3, reader(0), false, 2, 4, 5), make_op(4, reader(0), false, 1, 6, 7)};
  REQUIRE(!check_atomic(h).ok);
}

TEST_CASE("reading the first value after the second write completes is the contradiction",
          "[consistency]") {
  // Two sequential writes followed by a read of the overwritten value: the
  // spliced execution the pair witness replays on a collision.
  History h;
  h.ops = {make_op(1, writer(0), true, 1, 0, 1), make_op(2, writer(0), true, 2, 2, 3),
           make_op(3, reader(0), false, 1, 4, 5)};
  REQUIRE(!check_atomic(h).ok);
  REQUIRE(!check_regular(h).ok);
  h.ops[2].value = 2;
  REQUIRE(check_atomic(h).ok);
  REQUIRE(check_regular(h).ok);
}

TEST_CASE("incomplete writes may be dropped or take effect", "[consistency]") {
  History h;
  h.ops = {make_op(1, writer(0), true, 1, 0, std::nullopt),
           make_op(2, reader(0), false, 1, 1, 2)};
  REQUIRE(check_atomic(h).ok);
  h.ops[1].value = 0;  // or the write never happened
  REQUIRE(check_atomic(h).ok);
  h.ops[1].value = 9;
  REQUIRE(!check_atomic(h).ok);
}

TEST_CASE("weak regularity admits any pending write's value", "[consistency]") {
  History h;
  h.ops = {make_op(1, writer(0), true, 1, 0, std::nullopt),
           make_op(2, writer(1), true, 2, 1, std::nullopt),
           make_op(3, writer(2), true, 3, 2, std::nullopt),
           make_op(4, reader(0), false, 2, 3, 4)};
  REQUIRE(check_weakly_regular(h).ok);
  h.ops[3].value = 0;
  REQUIRE(check_weakly_regular(h).ok);
  h.ops[3].value = 7;  // never written
  Verdict v = check_weakly_regular(h);
  REQUIRE(!v.ok);
  REQUIRE(v.violation->read_op == 4);
}

TEST_CASE("atomic implies weakly regular implies known values", "[consistency]") {
  // Randomized small histories; the implication chain must never break.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    History h;
    size_t t = 0;
    int ops = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < ops; ++i) {
      bool is_write = rng() % 2 == 0;
      uint32_t value = 1 + static_cast<uint32_t>(rng() % 3);
      size_t inv = t++;
      std::optional<size_t> resp;
      if (rng() % 4 != 0) resp = t++;
      h.ops.push_back(make_op(static_cast<uint32_t>(i + 1),
                              is_write ? writer(i % 2) : reader(0), is_write, value, inv, resp));
    }
    bool any_incomplete_read = false;
    for (const auto& op : h.ops)
      if (!op.is_write && !op.complete()) any_incomplete_read = true;
    if (any_incomplete_read) continue;
    bool atomic = check_atomic(h).ok;
    bool weak = check_weakly_regular(h).ok;
    if (atomic) REQUIRE(weak);
    if (weak) {
      for (const auto* r : h.reads()) {
        if (!r->complete()) continue;
        bool known = *r->value == h.initial_value;
        for (const auto* w : h.writes())
          if (w->value == r->value) known = true;
        REQUIRE(known);
      }
    }
  }
}

TEST_CASE("malformed histories are rejected", "[consistency]") {
  History two_readers;
  two_readers.ops = {make_op(1, reader(0), false, 0, 0, 1),
                     make_op(2, reader(1), false, 0, 2, 3)};
  REQUIRE_THROWS_AS(check_atomic(two_readers), MalformedHistory);

  History incomplete_read;
  incomplete_read.ops = {make_op(1, reader(0), false, 0, 0, std::nullopt)};
  REQUIRE_THROWS_AS(check_regular(incomplete_read), MalformedHistory);

  History two_writers;
  two_writers.ops = {make_op(1, writer(0), true, 1, 0, 1), make_op(2, writer(1), true, 2, 2, 3)};
  REQUIRE_THROWS_AS(check_regular(two_writers), MalformedHistory);
}

TEST_CASE("linearization search has a budget", "[consistency]") {
  History h;
  for (uint32_t i = 0; i < 14; ++i)
    h.ops.push_back(make_op(i + 1, writer(0), true, i, 2 * i, 2 * i + 1));
  REQUIRE_THROWS_AS(check_atomic(h), SearchBudgetExceeded);
}

TEST_CASE("histories round-trip through json lines and verdicts serialize", "[consistency]") {
  History h;
  h.ops = {make_op(1, writer(0), true, 5, 0, 1), make_op(2, writer(1), true, 6, 2, std::nullopt),
           make_op(3, reader(0), false, 5, 3, 4)};
  History back = history_from_jsonl(history_jsonl(h));
  REQUIRE(back.ops.size() == h.ops.size());
  for (size_t i = 0; i < h.ops.size(); ++i) {
    REQUIRE(back.ops[i].op_id == h.ops[i].op_id);
    REQUIRE(back.ops[i].client == h.ops[i].client);
    REQUIRE(back.ops[i].is_write == h.ops[i].is_write);
    REQUIRE(back.ops[i].invoke_point == h.ops[i].invoke_point);
    REQUIRE(back.ops[i].respond_point == h.ops[i].respond_point);
    REQUIRE(back.ops[i].value == h.ops[i].value);
  }

  Verdict ok = check_atomic(h);
  REQUIRE(verdict_json(ok)["ok"] == true);
  h.ops[2].value = 9;
  Verdict bad = check_atomic(h);
  auto j = verdict_json(bad);
  REQUIRE(j["ok"] == false);
  REQUIRE(j["violation"]["read_op"] == 3);
}
