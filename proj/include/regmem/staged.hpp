#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "regmem/adversary.hpp"
#include "regmem/algorithm.hpp"
#include "regmem/bounds.hpp"
#include "regmem/engine.hpp"
#include "regmem/errors.hpp"
#include "regmem/validate.hpp"

namespace regmem::adversary {

using namespace regmem::sim;

// A staged multi-writer execution: nu writers run up to and through their one
// value-dependent phase with those messages parked in the channels, then the
// parked messages are delivered server range by server range according to the
// thresholds, skipping already-extracted writers per the permutation.
struct StagedExecution {
  const AlgorithmSpec* spec = nullptr;
  Execution exec;
  std::vector<uint32_t> values;      // values[0] is the initial value v0
  std::vector<int> sigma;            // extraction order, entries in 1..nu
  std::vector<int> thresholds;       // a_1..a_i of the built pattern
  std::vector<size_t> stage_points;  // global point indices of P_0..P_i
  std::vector<int> span;             // servers 1..N-f+nu-1
  int nu = 0;

  const Configuration& point_at_stage(size_t i) const {
    return exec.points.at(stage_points.at(i));
  }
};

namespace staged_detail {

inline int op_id_for(int write_index) { return 10 + write_index; }  // write_index is 1..nu

// Stop once the writer has pushed every send of its value-dependent phase
// onto the channels (or finished without one).
inline bool vd_sends_parked(const Engine& eng, int writer_index, int vd_phase) {
  WriterCore core = eng.writer_core(writer_index);
  if (!core.active) return true;
  return vd_phase >= 0 && core.phase == static_cast<uint32_t>(vd_phase) &&
         core.pending_sends.empty();
}

}  // namespace staged_detail

// The construction's alpha_0 prefix: fail the last f+1-nu servers, run each
// writer in turn to its parked value-dependent sends, deliver all gossip, then
// deliver the remaining value-independent client messages.
inline StagedExecution build_alpha0(const AlgorithmSpec& spec,
                                    const std::vector<uint32_t>& values) {
  int nu = static_cast<int>(values.size()) - 1;
  if (nu < 1) throw InvalidParams("need at least one write value");
  if (nu > spec.max_failures + 1)
    throw InvalidParams("staged construction needs nu <= f+1");
  if (spec.num_writers < nu) throw InvalidParams("not enough write clients configured");
  std::set<uint32_t> distinct(values.begin(), values.end());
  if (distinct.size() != values.size())
    throw InvalidParams("value vector components must be distinct");
  if (values[0] != 0) throw InvalidParams("values[0] must be the initial value");

  StagedExecution out;
  out.spec = &spec;
  out.values = values;
  out.nu = nu;
  int span_count = spec.num_servers - spec.max_failures + nu - 1;
  for (int i = 1; i <= span_count; ++i) out.span.push_back(i);

  Configuration cfg = initial_configuration(spec);
  Constraints cons;
  for (int i = 0; i < spec.num_readers; ++i) cons.freeze_node_and_channels(cfg, reader(i));
  Engine eng(spec, std::move(cfg), cons);

  std::set<int> dead;
  for (int i = span_count + 1; i <= spec.num_servers; ++i) dead.insert(i);
  if (!dead.empty()) eng.fail_servers(dead);

  int vd_phase = spec.writer_plan.value_dependent_phase();
  for (int i = 1; i <= nu; ++i) {
    int w = i - 1;
    Constraints stage = eng.constraints();
    for (int j = 0; j < nu; ++j)
      if (j != w) stage.freeze_node_and_channels(eng.config(), writer(j));
    stage.vd_delivery_held.insert(writer(w));
    std::swap(eng.constraints(), stage);
    eng.invoke_write(w, staged_detail::op_id_for(i), values[i]);
    eng.run_fair([&](const Engine& e) {
      return staged_detail::vd_sends_parked(e, w, vd_phase);
    });
    std::swap(eng.constraints(), stage);
  }

  eng.flush_inter_server();
  std::vector<ChannelId> client_to_server;
  for (const auto& [c, q] : eng.config().channels) {
    (void)q;
    if (c.from_client() && c.dst.is_server() && c.src.kind == NodeKind::Writer)
      client_to_server.push_back(c);
  }
  eng.deliver_value_independent(client_to_server);

  out.exec = eng.execution();
  out.stage_points.push_back(out.exec.steps.size() - 1);  // P_0
  return out;
}

// Extend alpha_0 by the staged deliveries. thresholds may be any prefix
// a_1..a_i; sigma must cover at least i-1 entries. Stage j delivers the parked
// messages of every writer not yet extracted to servers (a_{j-1}, a_j].
inline StagedExecution build_staged_execution(const AlgorithmSpec& spec,
                                              const std::vector<uint32_t>& values,
                                              const std::vector<int>& sigma,
                                              const std::vector<int>& thresholds) {
  int nu = static_cast<int>(values.size()) - 1;
  int span_count = spec.num_servers - spec.max_failures + nu - 1;
  for (size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 0 || thresholds[i] > span_count)
      throw InvalidParams("threshold outside 0..N-f+nu-1");
    if (i > 0 && thresholds[i] < thresholds[i - 1])
      throw InvalidParams("thresholds must be non-decreasing");
  }
  if (!thresholds.empty() && sigma.size() + 1 < thresholds.size())
    throw InvalidParams("sigma must cover every stage but the first");

  StagedExecution out = build_alpha0(spec, values);
  out.sigma = sigma;
  out.thresholds = thresholds;

  Engine eng(spec, out.exec.points.back(), Constraints{});
  // Continue recording on top of the alpha_0 trace.
  Execution& base = out.exec;

  int prev = 0;
  for (size_t stage = 0; stage < thresholds.size(); ++stage) {
    int upto = thresholds[stage];
    std::set<int> skip;  // writers already extracted, as write indices 1..nu
    for (size_t j = 0; j < stage && j < sigma.size(); ++j) skip.insert(sigma[j]);
    std::vector<ChannelId> channels;
    for (int n = prev + 1; n <= upto; ++n)
      for (int i = 1; i <= nu; ++i)
        if (!skip.count(i)) channels.push_back(ChannelId{writer(i - 1), server(n)});
    if (!channels.empty()) eng.deliver_all(channels);
    prev = std::max(prev, upto);
    out.stage_points.push_back(out.stage_points.front() + eng.execution().steps.size());
  }

  // Merge the extension trace into the base trace.
  const Execution& ext = eng.execution();
  for (size_t i = 0; i < ext.steps.size(); ++i) {
    base.steps.push_back(ext.steps[i]);
    base.points.push_back(ext.points[i]);
  }
  for (const auto& [c, n] : ext.sends) base.sends[c] += n;
  for (const auto& [c, n] : ext.deliveries) base.deliveries[c] += n;
  for (const auto& [c, n] : ext.dropped) base.dropped[c] += n;
  for (const auto& d : ext.drops) base.drops.push_back(d);
  return out;
}

// -- Extraction-order threshold search --------------------------------------------

struct ExtractionPlan {
  std::vector<int> sigma;       // extraction order over write indices 1..nu
  std::vector<int> thresholds;  // strictly increasing, a_1 >= 1
};

namespace staged_detail {

inline std::set<NodeId> restricted_set(const std::vector<int>& sigma_prefix, int candidate) {
  std::set<NodeId> out;
  for (int i : sigma_prefix) out.insert(writer(i - 1));
  out.insert(writer(candidate - 1));
  return out;
}

}  // namespace staged_detail

// Iteratively pick a_i as the smallest workable threshold and sigma(i) as the
// order-minimal value recoverable there without its own writer's help.
// Membership is tested by the canonical settle-probe on the prefix with the
// established thresholds shifted down by one, mirroring the recursive set
// construction. The probe freezes the pivot servers a_1..a_{i-1}: the
// extracted values live there, and a read that could still lean on them would
// mask whether the new servers carry sufficient information of a new value.
inline ExtractionPlan extraction_order_search(const AlgorithmSpec& spec,
                                              const std::vector<uint32_t>& values) {
  int nu = static_cast<int>(values.size()) - 1;
  ExtractionPlan res;

  for (int stage = 1; stage <= nu; ++stage) {
    int lo = stage == 1 ? 0 : res.thresholds.back();
    int hi = spec.num_servers - spec.max_failures + stage - 1;
    std::set<int> pivots(res.thresholds.begin(), res.thresholds.end());
    bool found = false;
    for (int cand = lo; cand <= hi && !found; ++cand) {
      // Established thresholds enter the membership pattern shifted down by
      // one; cand >= a_{i-1} keeps the pattern monotone.
      std::vector<int> pattern;
      for (int j = 0; j + 1 < stage; ++j) pattern.push_back(res.thresholds[j] - 1);
      pattern.push_back(cand);
      StagedExecution prefix = build_staged_execution(spec, values, res.sigma, pattern);
      const Configuration& at = prefix.point_at_stage(stage);

      std::optional<int> best_j;
      for (int j = 1; j <= nu; ++j) {
        if (std::find(res.sigma.begin(), res.sigma.end(), j) != res.sigma.end()) continue;
        ValencyProbeResult probe =
            valency_probe(spec, at, ProbeMode::ValueDependentSettle,
                          staged_detail::restricted_set(res.sigma, j), pivots);
        if (probe.value != values[j]) continue;
        if (!best_j || values[j] < values[*best_j]) best_j = j;  // numeric order on V
      }
      if (best_j) {
        if (stage == 1 && cand == 0)
          throw SearchFailed(
              "a threshold of zero qualified at the first stage, which the construction rules out");
        if (stage > 1 && cand <= res.thresholds.back())
          throw SearchFailed("thresholds failed to increase strictly");
        res.thresholds.push_back(cand);
        res.sigma.push_back(*best_j);
        found = true;
      }
    }
    if (!found) throw SearchFailed("no qualifying threshold within the stage's server range");
  }
  return res;
}

// Re-check a search result with canonical probes: at each stage point of the
// shifted pattern, (i) the extraction-order value is recoverable without its
// writer's help, and (ii) no earlier extracted value is, once its own writer
// is also restricted.
inline bool verify_extraction_conditions(const AlgorithmSpec& spec,
                                         const std::vector<uint32_t>& values,
                                         const ExtractionPlan& res) {
  int nu = static_cast<int>(values.size()) - 1;
  for (int i = 1; i <= nu; ++i) {
    std::vector<int> pattern;
    for (int j = 0; j + 1 < i; ++j) pattern.push_back(res.thresholds[j] - 1);
    pattern.push_back(res.thresholds[i - 1]);
    StagedExecution prefix =
        build_staged_execution(spec, values, res.sigma, pattern);
    const Configuration& at = prefix.point_at_stage(i);
    std::vector<int> sigma_prefix(res.sigma.begin(), res.sigma.begin() + (i - 1));
    std::set<int> pivots(res.thresholds.begin(), res.thresholds.begin() + (i - 1));

    ValencyProbeResult pi = valency_probe(
        spec, at, ProbeMode::ValueDependentSettle,
        staged_detail::restricted_set(sigma_prefix, res.sigma[i - 1]), pivots);
    if (pi.value != values[res.sigma[i - 1]]) return false;  // condition (i)

    for (int j = 1; j < i; ++j) {
      std::set<NodeId> restricted = staged_detail::restricted_set(sigma_prefix, res.sigma[j - 1]);
      ValencyProbeResult pj =
          valency_probe(spec, at, ProbeMode::ValueDependentSettle, restricted, pivots);
      if (pj.value == values[res.sigma[j - 1]]) return false;  // condition (ii)
    }
  }
  return true;
}

// -- Theorem-4 witness -------------------------------------------------------------

inline WitnessReport witness_thm4(const AlgorithmSpec& spec, int nu) {
  validate_assumptions(spec).raise_if_failed();
  if (spec.value_count < static_cast<uint32_t>(nu) + 1)
    throw InvalidParams("need at least nu+1 values");

  WitnessReport rep;
  rep.theorem = "thm4";
  rep.algorithm = spec.name;
  rep.num_servers = spec.num_servers;
  rep.max_failures = spec.max_failures;
  rep.max_active_writes = nu;
  rep.value_count = spec.value_count;
  int span_count = spec.num_servers - spec.max_failures + nu - 1;
  for (int i = 1; i <= span_count; ++i) rep.subset.push_back(i);
  rep.injective = true;

  // Ordered distinct nu-tuples over V - {v0}.
  std::vector<std::vector<uint32_t>> tuples;
  std::vector<uint32_t> pool;
  for (uint32_t v = 1; v < spec.value_count; ++v) pool.push_back(v);
  std::vector<uint32_t> cur;
  std::function<void()> gen = [&]() {
    if (static_cast<int>(cur.size()) == nu) {
      tuples.push_back(cur);
      return;
    }
    for (uint32_t v : pool) {
      if (std::find(cur.begin(), cur.end(), v) != cur.end()) continue;
      cur.push_back(v);
      gen();
      cur.pop_back();
    }
  };
  gen();

  ReachableStateLedger ledger;
  std::map<Bytes, std::vector<uint32_t>> seen;

  for (const auto& tuple : tuples) {
    std::vector<uint32_t> values{0};
    for (uint32_t v : tuple) values.push_back(v);
    ExtractionPlan lem = extraction_order_search(spec, values);

    for (size_t i = 0; i < lem.thresholds.size(); ++i) {
      if (lem.thresholds[i] < 1)
        rep.violations.push_back(ViolationRecord{tuple, "threshold below one"});
      if (i > 0 && lem.thresholds[i] <= lem.thresholds[i - 1])
        rep.violations.push_back(ViolationRecord{tuple, "thresholds not strictly increasing"});
    }

    StagedExecution staged =
        build_staged_execution(spec, values, lem.sigma, lem.thresholds);
    StateFingerprint fp = snapshot_fingerprint(staged.point_at_stage(nu), rep.subset);
    fp.variant = "thm4";
    for (int s : lem.sigma) fp.shape.push_back(static_cast<uint32_t>(s));
    for (int a : lem.thresholds) fp.shape.push_back(static_cast<uint32_t>(a));
    ledger.observe_fingerprint(rep.subset, fp);

    Bytes key = fp.encode();
    auto it = seen.find(key);
    if (it != seen.end()) {
      rep.injective = false;
      CollisionRecord rec;
      rec.tuple_a = it->second;
      rec.tuple_b = tuple;
      rep.collisions.push_back(std::move(rec));
    } else {
      seen.emplace(key, tuple);
    }
  }

  rep.family_size = tuples.size();
  rep.distinct_fingerprints = seen.size();
  bounds::BoundParams bp{spec.num_servers, spec.max_failures, nu,
                         bounds::BigInt(spec.value_count)};
  detail::fill_product(rep, ledger, rep.subset, bounds::bound_thm4(bp).product_form);
  return rep;
}

// Data that must not depend on the value vector: the servers' view of the
// world at P_0, and the channel/metadata view at every staged point.
struct InvarianceSignature {
  Bytes servers;           // all server states (only meaningful at P_0)
  Bytes server_channels;   // every channel whose source is a server
  Bytes writer_metadata;   // metadata components of every writer
};

inline InvarianceSignature invariance_signature(const AlgorithmSpec& spec,
                                                const Configuration& cfg) {
  InvarianceSignature sig;
  ByteWriter servers, chans, meta;
  for (const auto& [n, st] : cfg.server_states) {
    (void)n;
    servers.bytes(st);
  }
  for (const auto& [c, q] : cfg.channels) {
    if (!c.src.is_server()) continue;
    chans.u32(static_cast<uint32_t>(q.size()));
    for (const Message& m : q) chans.bytes(m.payload);
  }
  for (int i = 0; i < spec.num_writers; ++i) {
    WriterCore core = WriterCore::decode(cfg.client_states.at(writer(i)));
    meta.bytes(core.metadata());
  }
  sig.servers = servers.take();
  sig.server_channels = chans.take();
  sig.writer_metadata = meta.take();
  return sig;
}

}  // namespace regmem::adversary
