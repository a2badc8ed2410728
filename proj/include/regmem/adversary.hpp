#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "regmem/algorithm.hpp"
#include "regmem/bounds.hpp"
#include "regmem/consistency.hpp"
#include "regmem/engine.hpp"
#include "regmem/errors.hpp"
#include "regmem/history.hpp"

namespace regmem::adversary {

using namespace regmem::sim;

// Canonical probes are single deterministic extensions. A probe returning v_k
// is a sound one-sided witness of k-valency; "not k-valent" is approximated by
// the canonical extension not returning v_k.
inline const char* kProbeDisclosure =
    "valency is existential in the underlying argument; this harness probes one "
    "canonical deterministic extension, so a returned value certifies valency while "
    "its absence is an approximation";

enum class ProbeMode { Plain, GossipFlush, ValueDependentSettle };

struct ValencyProbeResult {
  uint32_t value = 0;
  ProbeMode mode = ProbeMode::Plain;
  std::set<NodeId> restricted_clients;  // writers barred from value-dependent actions
  std::string extension_digest;
  Configuration at_read_start;  // the R-point for gossip probes
};

struct TwoWriteExecution {
  const AlgorithmSpec* spec = nullptr;
  Execution exec;
  std::vector<int> live;  // the (N-f)-subset, ascending
  uint32_t v1 = 0, v2 = 0;
  size_t p0 = 0;  // global step index of P_0 (after pi_1 terminates)
  size_t pM = 0;  // global step index of P_M (after pi_2 terminates and one flush)
  int writer_index = 0;
  uint32_t op1 = 1, op2 = 2;

  size_t last_point() const { return pM - p0; }  // M in relabeled coordinates

  const Configuration& point(size_t i) const { return exec.points.at(p0 + i); }

  size_t global_index(size_t i) const { return p0 + i; }
};

namespace detail {

inline std::set<int> complement(int num_servers, const std::vector<int>& live) {
  std::set<int> out;
  std::set<int> keep(live.begin(), live.end());
  for (int i = 1; i <= num_servers; ++i)
    if (!keep.count(i)) out.insert(i);
  return out;
}

inline uint64_t inter_server_sends(const Execution& exec) {
  uint64_t total = 0;
  for (const auto& [c, n] : exec.sends)
    if (c.inter_server()) total += n;
  return total;
}

// Drain every channel and outbox to quiescence with all clients stopped.
inline void flush_everything(Engine& eng) {
  const AlgorithmSpec& spec = eng.spec();
  Constraints saved = eng.constraints();
  for (int i = 0; i < spec.num_writers; ++i) eng.constraints().frozen.insert(ActorId(writer(i)));
  for (int i = 0; i < spec.num_readers; ++i) eng.constraints().frozen.insert(ActorId(reader(i)));
  eng.run_fair([](const Engine&) { return false; }, 0, /*quiesce_ok=*/true);
  eng.constraints() = saved;
}

}  // namespace detail

// The proofs' two-write construction: fail the complement of the live subset,
// run pi_1(v1) to termination at a single writer, mark P_0, run pi_2(v2) to
// termination, then one full flush; the readers and their channels never act.
inline TwoWriteExecution build_two_write_execution(const AlgorithmSpec& spec,
                                                   const std::vector<int>& live, uint32_t v1,
                                                   uint32_t v2, bool allow_gossip) {
  if (v1 == v2) throw InvalidParams("two-write construction needs v1 != v2");
  if (static_cast<int>(live.size()) != spec.num_servers - spec.max_failures)
    throw InvalidParams("live subset must have N-f servers");

  Configuration cfg = initial_configuration(spec);
  Constraints cons;
  for (int i = 0; i < spec.num_readers; ++i) cons.freeze_node_and_channels(cfg, reader(i));

  Engine eng(spec, std::move(cfg), cons);
  TwoWriteExecution out;
  out.spec = &spec;
  out.live = live;
  out.v1 = v1;
  out.v2 = v2;

  std::set<int> dead = detail::complement(spec.num_servers, live);
  if (!dead.empty()) eng.fail_servers(dead);

  eng.invoke_write(out.writer_index, out.op1, v1);
  eng.run_fair([&](const Engine& e) { return e.execution().op_responded(out.op1); });
  out.p0 = eng.execution().steps.size() - 1;

  eng.invoke_write(out.writer_index, out.op2, v2);
  eng.run_fair([&](const Engine& e) { return e.execution().op_responded(out.op2); });
  detail::flush_everything(eng);
  out.pM = eng.execution().steps.size() - 1;

  out.exec = eng.execution();
  if (!allow_gossip && detail::inter_server_sends(out.exec) > 0)
    throw HypothesisViolation("algorithm sent inter-server messages under the no-gossip hypothesis");
  return out;
}

// Clone the configuration at a point, apply the probe mode's freezing
// discipline, start one read, and run the canonical fair extension until the
// read returns. frozen_servers holds the staged construction's pivot servers,
// which stop taking actions for the whole extension.
inline ValencyProbeResult valency_probe(const AlgorithmSpec& spec, const Configuration& at,
                                        ProbeMode mode,
                                        const std::set<NodeId>& restricted_writers,
                                        const std::set<int>& frozen_servers = {}) {
  Configuration cfg = at;
  Constraints cons;
  ValencyProbeResult res;
  res.mode = mode;
  res.restricted_clients = restricted_writers;

  Engine eng(spec, std::move(cfg), cons);
  eng.set_record_points(false);

  if (mode == ProbeMode::ValueDependentSettle) {
    // Restricted writers lose only their value-dependent actions; everything
    // else settles until some write terminates or the system quiesces, after
    // which the writers and their channels stop for good.
    for (const NodeId& w : restricted_writers) {
      eng.constraints().vd_send_blocked.insert(w);
      eng.constraints().vd_delivery_held.insert(w);
    }
    for (int s : frozen_servers)
      eng.constraints().freeze_node_and_channels(eng.config(), server(s));
    for (int i = 0; i < spec.num_readers; ++i)
      eng.constraints().freeze_node_and_channels(eng.config(), reader(i));
    size_t responded_before = eng.execution().responded.size();
    eng.run_fair(
        [&](const Engine& e) { return e.execution().responded.size() > responded_before; }, 0,
        /*quiesce_ok=*/true);
    eng.constraints() = Constraints{};
    for (int s : frozen_servers)
      eng.constraints().freeze_node_and_channels(eng.config(), server(s));
    for (int i = 0; i < spec.num_writers; ++i)
      eng.constraints().freeze_node_and_channels(eng.config(), writer(i));
  } else {
    // All messages from and to the writers are delayed indefinitely.
    for (int i = 0; i < spec.num_writers; ++i)
      eng.constraints().freeze_node_and_channels(eng.config(), writer(i));
    if (mode == ProbeMode::GossipFlush) eng.flush_inter_server();
  }

  res.at_read_start = eng.config();

  const uint32_t read_op = 900000;
  eng.invoke_read(0, read_op);
  eng.run_fair([&](const Engine& e) { return e.execution().op_responded(read_op); });
  res.value = eng.execution().op_values.at(read_op);
  res.extension_digest = digest_hex(execution_trace_jsonl(eng.execution()));
  return res;
}

struct ProbeLog {
  std::vector<ValencyProbeResult> by_point;
  bool endpoints_ok = false;   // probe(0) = v1 and probe(M) = v2
  bool all_values_ok = false;  // every probe returned v1 or v2
  std::vector<size_t> flips;   // every i with probe(i)=v1, probe(i+1)=v2
};

inline ProbeLog probe_all_points(const TwoWriteExecution& twe, ProbeMode mode) {
  ProbeLog log;
  size_t M = twe.last_point();
  for (size_t i = 0; i <= M; ++i)
    log.by_point.push_back(valency_probe(*twe.spec, twe.point(i), mode, {writer(0)}));
  log.endpoints_ok = log.by_point.front().value == twe.v1 && log.by_point.back().value == twe.v2;
  log.all_values_ok = true;
  for (const auto& p : log.by_point)
    if (p.value != twe.v1 && p.value != twe.v2) log.all_values_ok = false;
  for (size_t i = 0; i + 1 <= M; ++i)
    if (log.by_point[i].value == twe.v1 && log.by_point[i + 1].value == twe.v2)
      log.flips.push_back(i);
  return log;
}

// First flip under a forward linear scan. Valency need not be monotone, so a
// binary search would be unsound; all flips are recorded and the first used.
inline size_t find_flip_point(const TwoWriteExecution&, const ProbeLog& log) {
  if (!log.endpoints_ok)
    throw NoFlip("endpoint valencies do not hold; no flip point exists");
  if (log.flips.empty()) throw NoFlip("no adjacent 1-valent/2-valent pair found");
  return log.flips.front();
}

// -- Witness reports ---------------------------------------------------------
struct CollisionRecord {
  std::vector<uint32_t> tuple_a;
  std::vector<uint32_t> tuple_b;
  bool replayed = false;
  bool replay_violates = false;
  std::string replay_detail;
};

struct ViolationRecord {
  std::vector<uint32_t> tuple;
  std::string detail;
};

struct WitnessReport {
  std::string theorem;
  std::string algorithm;
  int num_servers = 0;
  int max_failures = 0;
  int max_active_writes = 1;
  uint64_t value_count = 0;
  std::vector<int> subset;
  bool injective = false;
  bool endpoint_valencies_ok = true;
  bool probe_values_ok = true;
  bool locality_ok = true;
  bool hypothesis_note_outside = false;  // e.g. thm2 at f=1
  std::vector<CollisionRecord> collisions;
  std::vector<ViolationRecord> violations;
  uint64_t family_size = 0;           // executions / tuples fingerprinted
  uint64_t distinct_fingerprints = 0;
  std::map<int, uint64_t> per_server_states;
  bounds::BigInt product_lhs = 0;
  bounds::BigInt product_rhs = 0;
  bool product_holds = false;
  std::string approximation_note = kProbeDisclosure;

  bool ok() const {
    return injective && probe_values_ok && endpoint_valencies_ok && locality_ok &&
           product_holds && violations.empty();
  }
};

namespace detail {

inline void fill_product(WitnessReport& rep, const ReachableStateLedger& ledger,
                         const std::vector<int>& subset, const bounds::ProductForm& form) {
  std::vector<bounds::BigInt> counts;
  for (int s : subset) {
    uint64_t c = ledger.count(s);
    rep.per_server_states[s] = c;
    counts.push_back(bounds::BigInt(c));
  }
  rep.product_lhs = form.lhs(counts);
  rep.product_rhs = form.rhs;
  rep.product_holds = form.holds(counts);
}

inline std::vector<uint32_t> all_values(uint32_t value_count) {
  std::vector<uint32_t> v;
  for (uint32_t i = 0; i < value_count; ++i) v.push_back(i);
  return v;
}

}  // namespace detail

// Theorem-1 witness: one execution per value; fail the complement, write v to
// completion, flush all channels, fingerprint the live subset.
inline WitnessReport witness_thm1(const AlgorithmSpec& spec, const std::vector<int>& live) {
  WitnessReport rep;
  rep.theorem = "thm1";
  rep.algorithm = spec.name;
  rep.num_servers = spec.num_servers;
  rep.max_failures = spec.max_failures;
  rep.value_count = spec.value_count;
  rep.subset = live;

  ReachableStateLedger ledger;
  std::map<StateFingerprint, uint32_t> seen;
  rep.injective = true;

  for (uint32_t v : detail::all_values(spec.value_count)) {
    Configuration cfg = initial_configuration(spec);
    Constraints cons;
    for (int i = 0; i < spec.num_readers; ++i) cons.freeze_node_and_channels(cfg, reader(i));
    Engine eng(spec, std::move(cfg), cons);
    eng.set_record_points(false);
    std::set<int> dead = detail::complement(spec.num_servers, live);
    if (!dead.empty()) eng.fail_servers(dead);
    eng.invoke_write(0, 1, v);
    eng.run_fair([&](const Engine& e) { return e.execution().op_responded(1); });
    detail::flush_everything(eng);

    StateFingerprint fp = snapshot_fingerprint(eng.config(), live);
    fp.variant = "thm1";
    ledger.observe_fingerprint(live, fp);
    auto [it, inserted] = seen.emplace(fp, v);
    if (!inserted) {
      rep.injective = false;
      CollisionRecord rec;
      rec.tuple_a = {it->second};
      rec.tuple_b = {v};
      rep.collisions.push_back(std::move(rec));
    }
  }

  rep.family_size = spec.value_count;
  rep.distinct_fingerprints = seen.size();
  bounds::ProductForm form{1, 0, bounds::BigInt(spec.value_count)};
  detail::fill_product(rep, ledger, live, form);
  return rep;
}

namespace detail {

// Splice replay for a fingerprint collision: re-run the canonical probe at the
// colliding point of execution A and check the resulting single-reader history
// against regularity. The collision makes the probe's visible state identical
// to execution B's, so the read behaves as it did there.
inline void replay_collision(const AlgorithmSpec& spec, const TwoWriteExecution& twe, size_t q,
                             CollisionRecord& rec) {
  ValencyProbeResult probe = valency_probe(spec, twe.point(q), ProbeMode::Plain, {writer(0)});

  consistency::History h;
  h.initial_value = 0;
  consistency::Operation w1;
  w1.op_id = twe.op1;
  w1.client = writer(0);
  w1.is_write = true;
  w1.value = twe.v1;
  w1.invoke_point = 0;
  w1.respond_point = 1;
  consistency::Operation w2;
  w2.op_id = twe.op2;
  w2.client = writer(0);
  w2.is_write = true;
  w2.value = twe.v2;
  w2.invoke_point = 2;
  // pi_2 completed within the spliced prefix only if its respond step is at or
  // before the splice point.
  size_t respond_global = 0;
  bool responded = false;
  for (size_t i = 0; i < twe.exec.steps.size(); ++i) {
    const auto& ev = twe.exec.steps[i].event;
    if (ev && !ev->is_invoke && ev->op_id == twe.op2) {
      respond_global = i;
      responded = true;
    }
  }
  if (responded && respond_global <= twe.global_index(q)) w2.respond_point = 3;
  consistency::Operation rd;
  rd.op_id = 999;
  rd.client = reader(0);
  rd.is_write = false;
  rd.value = probe.value;
  rd.invoke_point = 4;
  rd.respond_point = 5;
  h.ops = {w1, w2, rd};

  consistency::Verdict verdict = consistency::check_regular(h);
  rec.replayed = true;
  rec.replay_violates = !verdict.ok;
  rec.replay_detail = verdict.ok ? "spliced read is regular (no violation exhibited)"
                                 : verdict.violation->detail;
}

}  // namespace detail

struct PairWitnessOptions {
  ProbeMode mode = ProbeMode::Plain;
  bool allow_gossip = false;
  std::string theorem = "thm2";
};

// Shared machinery of the theorem-2 and theorem-3 witnesses: for every ordered
// pair of distinct values, build the two-write execution, locate the flip, and
// extract the variant fingerprint.
inline WitnessReport witness_pairs(const AlgorithmSpec& spec, const std::vector<int>& live,
                                   const PairWitnessOptions& opt) {
  if (spec.value_count < 2) throw InvalidParams("pair witness needs at least two values");
  if (opt.theorem == "thm2" && spec.gossips)
    throw HypothesisViolation("no-gossip witness cannot run a gossiping algorithm");

  WitnessReport rep;
  rep.theorem = opt.theorem;
  rep.algorithm = spec.name;
  rep.num_servers = spec.num_servers;
  rep.max_failures = spec.max_failures;
  rep.value_count = spec.value_count;
  rep.subset = live;
  rep.hypothesis_note_outside = opt.theorem == "thm2" && spec.max_failures < 2;
  rep.injective = true;

  int live_count = static_cast<int>(live.size());
  ReachableStateLedger ledger;
  struct Entry {
    StateFingerprint fp;
    TwoWriteExecution twe;
    size_t q1_rel;
    size_t q2_rel;
  };
  std::map<Bytes, std::pair<std::vector<uint32_t>, size_t>> seen;
  std::vector<Entry> entries;

  for (uint32_t v1 : detail::all_values(spec.value_count)) {
    for (uint32_t v2 : detail::all_values(spec.value_count)) {
      if (v1 == v2) continue;
      TwoWriteExecution twe =
          build_two_write_execution(spec, live, v1, v2, opt.allow_gossip);
      ProbeLog log = probe_all_points(twe, opt.mode);
      if (!log.endpoints_ok) rep.endpoint_valencies_ok = false;
      if (!log.all_values_ok) {
        rep.probe_values_ok = false;
        for (const auto& p : log.by_point)
          if (p.value != v1 && p.value != v2)
            rep.violations.push_back(
                ViolationRecord{{v1, v2}, "a probe returned a value outside {v1, v2}"});
      }

      size_t q1_rel, q2_rel;
      if (!log.flips.empty()) {
        q1_rel = log.flips.front();
        q2_rel = q1_rel + 1;
      } else {
        // Degenerate: only reachable for a non-regular algorithm under test.
        q1_rel = 0;
        q2_rel = twe.last_point();
        rep.violations.push_back(ViolationRecord{
            {v1, v2}, "no valency flip found; fingerprinting the endpoint pair instead"});
      }

      const Configuration& q1 = twe.point(q1_rel);
      const Configuration& q2 = twe.point(q2_rel);
      std::set<NodeId> changed = changed_servers(q1, q2);
      if (changed.size() > 1) rep.locality_ok = false;
      int s = changed.empty() ? live.front() : changed.begin()->index;

      StateFingerprint fp;
      fp.variant = opt.theorem;
      if (opt.mode == ProbeMode::Plain) {
        fp = snapshot_fingerprint(q1, live);
        fp.variant = opt.theorem;
        fp.changed.push_back({s, q2.server_states.at(server(s))});
      } else {
        // Gossip variant: fingerprints live at the post-flush R-points; the
        // flush delivers in a fixed global order so the paired extensions see
        // the same delivery order by construction.
        std::set<ChannelId> chan_changed = changed_inter_server_channels(q1, q2);
        if (chan_changed.size() > 1) rep.locality_ok = false;
        int s_prime = chan_changed.empty() ? live.front() : chan_changed.begin()->dst.index;
        const Configuration& r1 = log.by_point[q1_rel].at_read_start;
        const Configuration& r2 = log.by_point[q2_rel].at_read_start;
        fp = snapshot_fingerprint(r1, live);
        fp.variant = opt.theorem;
        fp.changed.push_back({s, r2.server_states.at(server(s))});
        fp.changed.push_back({s_prime, r2.server_states.at(server(s_prime))});
      }
      ledger.observe_fingerprint(live, fp);

      Bytes key = fp.encode();
      auto it = seen.find(key);
      if (it != seen.end()) {
        rep.injective = false;
        CollisionRecord rec;
        rec.tuple_a = it->second.first;
        rec.tuple_b = {v1, v2};
        const Entry& prior = entries[it->second.second];
        // Case (I) of the counting argument splices at Q1, case (II) at Q2.
        bool case_one = rec.tuple_b[0] != prior.twe.v1 && rec.tuple_b[0] != prior.twe.v2;
        detail::replay_collision(spec, prior.twe, case_one ? prior.q1_rel : prior.q2_rel, rec);
        rep.collisions.push_back(std::move(rec));
      } else {
        seen.emplace(key, std::make_pair(std::vector<uint32_t>{v1, v2}, entries.size()));
        entries.push_back(Entry{fp, std::move(twe), q1_rel, q2_rel});
      }
    }
  }

  rep.family_size = static_cast<uint64_t>(spec.value_count) * (spec.value_count - 1);
  rep.distinct_fingerprints = seen.size();
  bounds::BigInt pair_count =
      bounds::BigInt(spec.value_count) * bounds::BigInt(spec.value_count - 1);
  bounds::ProductForm form;
  if (opt.theorem == "thm2") {
    form = bounds::ProductForm{bounds::BigInt(live_count), 1, pair_count};
  } else {
    form = bounds::ProductForm{bounds::BigInt(live_count) * live_count, 2, pair_count};
  }
  detail::fill_product(rep, ledger, live, form);
  return rep;
}

inline WitnessReport witness_thm2(const AlgorithmSpec& spec, const std::vector<int>& live) {
  PairWitnessOptions opt;
  opt.mode = ProbeMode::Plain;
  opt.allow_gossip = false;
  opt.theorem = "thm2";
  return witness_pairs(spec, live, opt);
}

inline WitnessReport witness_thm3(const AlgorithmSpec& spec, const std::vector<int>& live) {
  PairWitnessOptions opt;
  opt.mode = ProbeMode::GossipFlush;
  opt.allow_gossip = true;
  opt.theorem = "thm3";
  return witness_pairs(spec, live, opt);
}

}  // namespace regmem::adversary
