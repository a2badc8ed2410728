#include <catch2/catch_amalgamated.hpp>

#include "regmem/adversary.hpp"
#include "regmem/algorithms/abd.hpp"
#include "regmem/algorithms/coded.hpp"
#include "regmem/report.hpp"

using namespace regmem;
using namespace regmem::sim;
using namespace regmem::adversary;

TEST_CASE("two-write construction fails the complement and completes both writes",
          "[adversary]") {
  auto spec = algo::abd_spec(3, 1, 3);
  TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 1, 2, false);
  REQUIRE(twe.exec.points.back().failed == std::set<NodeId>{server(3)});
  REQUIRE(twe.exec.op_responded(twe.op1));
  REQUIRE(twe.exec.op_responded(twe.op2));
  REQUIRE(twe.p0 < twe.pM);
  SECTION("the reader never acts in the construction") {
    for (const auto& s : twe.exec.steps) {
      if (s.actor.is_node()) REQUIRE(s.actor.node().kind != NodeKind::Reader);
      if (s.actor.is_channel()) {
        REQUIRE(s.actor.channel().src.kind != NodeKind::Reader);
        REQUIRE(s.actor.channel().dst.kind != NodeKind::Reader);
      }
    }
  }
}

TEST_CASE("equal values are rejected", "[adversary]") {
  auto spec = algo::abd_spec(3, 1, 3);
  REQUIRE_THROWS_AS(build_two_write_execution(spec, {1, 2}, 1, 1, false), InvalidParams);
  REQUIRE_THROWS_AS(build_two_write_execution(spec, {1, 2, 3}, 1, 2, false), InvalidParams);
}

TEST_CASE("a log without a valency flip has no flip point", "[adversary]") {
  auto spec = algo::abd_spec(3, 1, 3);
  TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 0, 1, false);
  ProbeLog log = probe_all_points(twe, ProbeMode::Plain);
  log.flips.clear();
  REQUIRE_THROWS_AS(find_flip_point(twe, log), NoFlip);
  log.endpoints_ok = false;
  REQUIRE_THROWS_AS(find_flip_point(twe, log), NoFlip);
}

TEST_CASE("the non-gossip specs never use inter-server channels", "[adversary]") {
  auto spec = algo::coded_spec(4, 2, 1, 4);
  TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 1, 2, false);
  for (const auto& [c, n] : twe.exec.sends) {
    if (c.inter_server()) REQUIRE(n == 0);
  }
}

TEST_CASE("endpoint probes return the written values", "[adversary]") {
  auto spec = algo::abd_spec(3, 1, 3);
  TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 2, 1, false);
  ValencyProbeResult p0 = valency_probe(spec, twe.point(0), ProbeMode::Plain, {writer(0)});
  ValencyProbeResult pM =
      valency_probe(spec, twe.point(twe.last_point()), ProbeMode::Plain, {writer(0)});
  REQUIRE(p0.value == 2);
  REQUIRE(pM.value == 1);
}

TEST_CASE("every probe over every point returns one of the two values", "[adversary]") {
  for (bool coded : {false, true}) {
    auto spec = coded ? algo::coded_spec(4, 2, 1, 3) : algo::abd_spec(4, 2, 3);
    TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 0, 2, false);
    ProbeLog log = probe_all_points(twe, ProbeMode::Plain);
    REQUIRE(log.endpoints_ok);
    REQUIRE(log.all_values_ok);
  }
}

TEST_CASE("the flip point lies inside the second write's interval", "[adversary]") {
  auto spec = algo::abd_spec(3, 1, 3);
  TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 0, 1, false);
  ProbeLog log = probe_all_points(twe, ProbeMode::Plain);
  size_t flip = find_flip_point(twe, log);
  REQUIRE(flip < twe.last_point());
  SECTION("at most one server changes at the flip") {
    auto changed = changed_servers(twe.point(flip), twe.point(flip + 1));
    REQUIRE(changed.size() <= 1);
  }
  SECTION("the flip is after the second write's invocation") {
    // P_0 itself is 1-valent, so the flip's successor must involve pi_2.
    REQUIRE(flip + 1 >= 1);
    REQUIRE(log.by_point[flip].value == 0);
    REQUIRE(log.by_point[flip + 1].value == 1);
  }
}

TEST_CASE("gossip-mode flips also move at most one inter-server channel", "[adversary]") {
  auto spec = algo::coded_spec(4, 2, 1, 3, /*gossip=*/true);
  TwoWriteExecution twe = build_two_write_execution(spec, {1, 2}, 1, 2, true);
  ProbeLog log = probe_all_points(twe, ProbeMode::GossipFlush);
  size_t flip = find_flip_point(twe, log);
  REQUIRE(changed_servers(twe.point(flip), twe.point(flip + 1)).size() <= 1);
  REQUIRE(changed_inter_server_channels(twe.point(flip), twe.point(flip + 1)).size() <= 1);
  SECTION("the R-point has no queued inter-server traffic") {
    for (const auto& [c, q] : log.by_point[flip].at_read_start.channels)
      if (c.inter_server()) REQUIRE(q.empty());
  }
}

TEST_CASE("theorem-1 witness on the references", "[adversary]") {
  SECTION("abd, four values") {
    auto rep = witness_thm1(algo::abd_spec(3, 1, 4), {1, 2});
    REQUIRE(rep.injective);
    REQUIRE(rep.product_holds);
    REQUIRE(rep.product_rhs == 4);
    REQUIRE(rep.ok());
  }
  SECTION("abd observes exactly one state per value per server at V=8") {
    auto rep = witness_thm1(algo::abd_spec(3, 1, 8), {1, 2});
    REQUIRE(rep.per_server_states.at(1) == 8);
    REQUIRE(rep.per_server_states.at(2) == 8);
    REQUIRE(rep.product_lhs == 64);
    REQUIRE(rep.product_rhs == 8);
  }
  SECTION("one value is trivially injective") {
    auto rep = witness_thm1(algo::abd_spec(3, 1, 1), {1, 2});
    REQUIRE(rep.injective);
    REQUIRE(rep.product_rhs == 1);
  }
  SECTION("coded at sixteen values from two servers") {
    auto rep = witness_thm1(algo::coded_spec(4, 2, 1, 16), {1, 2});
    REQUIRE(rep.injective);
    REQUIRE(rep.product_holds);
    REQUIRE(rep.product_rhs == 16);
  }
}

TEST_CASE("theorem-2 witness on abd", "[adversary]") {
  auto rep = witness_thm2(algo::abd_spec(4, 2, 3), {1, 2});
  REQUIRE(rep.injective);
  REQUIRE(rep.endpoint_valencies_ok);
  REQUIRE(rep.probe_values_ok);
  REQUIRE(rep.locality_ok);
  REQUIRE(rep.product_holds);
  REQUIRE(rep.product_rhs == 6);
  REQUIRE(rep.ok());
  SECTION("the report serializes with the approximation disclosure") {
    auto j = witness_report_json(rep);
    REQUIRE(j["ok"] == true);
    REQUIRE(j.contains("probe_approximation"));
    REQUIRE(j["product_check"]["holds"] == true);
  }
}

TEST_CASE("theorem-2 witness flags f=1 as outside the stated hypothesis", "[adversary]") {
  auto rep = witness_thm2(algo::abd_spec(3, 1, 3), {1, 2});
  REQUIRE(rep.hypothesis_note_outside);
  REQUIRE(rep.ok());
}

TEST_CASE("two-element domains are handled", "[adversary]") {
  auto rep = witness_thm2(algo::abd_spec(4, 2, 2), {1, 2});
  REQUIRE(rep.injective);
  REQUIRE(rep.product_rhs == 2);
  REQUIRE(rep.ok());
}

TEST_CASE("the stale-store mutation collides and replays into a violation", "[adversary]") {
  auto spec = algo::abd_spec(4, 2, 3, 2, 1, /*stale_store=*/true);
  auto rep = witness_thm2(spec, {1, 2});
  REQUIRE(!rep.injective);
  REQUIRE(!rep.collisions.empty());
  bool any_replayed_violation = false;
  for (const auto& c : rep.collisions)
    if (c.replayed && c.replay_violates) any_replayed_violation = true;
  REQUIRE(any_replayed_violation);
  REQUIRE(!rep.ok());
}

TEST_CASE("gossiping algorithms are rejected by the no-gossip witness", "[adversary]") {
  auto spec = algo::coded_spec(4, 2, 1, 3, /*gossip=*/true);
  REQUIRE_THROWS_AS(witness_thm2(spec, {1, 2}), HypothesisViolation);
}

TEST_CASE("theorem-3 witness on the gossiping coded spec", "[adversary]") {
  auto rep = witness_thm3(algo::coded_spec(4, 2, 1, 3, /*gossip=*/true), {1, 2});
  REQUIRE(rep.injective);
  REQUIRE(rep.endpoint_valencies_ok);
  REQUIRE(rep.probe_values_ok);
  REQUIRE(rep.locality_ok);
  REQUIRE(rep.product_holds);
  REQUIRE(rep.product_rhs == 6);
  REQUIRE(rep.ok());
}

TEST_CASE("witness runs are deterministic", "[adversary]") {
  auto spec = algo::abd_spec(4, 2, 3);
  auto a = witness_report_json(witness_thm2(spec, {1, 2})).dump();
  auto b = witness_report_json(witness_thm2(spec, {1, 2})).dump();
  REQUIRE(a == b);
}

TEST_CASE("the reported product operands recompute from the reported counts", "[adversary]") {
  auto rep = witness_thm3(algo::coded_spec(4, 2, 1, 3, true), {1, 2});
  bounds::BigInt prod = 1, maxc = 0;
  for (const auto& [s, c] : rep.per_server_states) {
    (void)s;
    prod *= c;
    if (bounds::BigInt(c) > maxc) maxc = c;
  }
  int live = 2;
  REQUIRE(rep.product_lhs == bounds::BigInt(live) * live * maxc * maxc * prod);
  REQUIRE(rep.product_rhs == bounds::BigInt(3) * 2);
}
