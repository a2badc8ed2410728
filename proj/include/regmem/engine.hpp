#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "regmem/algorithm.hpp"
#include "regmem/config.hpp"
#include "regmem/errors.hpp"

namespace regmem::sim {

// -- Server wrapper state ------------------------------------------------------
//
// A server's automaton state is its protocol core plus an outbox of messages
// it has produced but not yet put on a channel. Receiving and sending are
// separate steps, so between adjacent points at most one channel changes.
struct ServerWrap {
  Bytes core;
  std::vector<Outgoing> outbox;

  Bytes encode() const {
    ByteWriter w;
    w.bytes(core);
    w.u32(static_cast<uint32_t>(outbox.size()));
    for (const auto& o : outbox) {
      w.u8(static_cast<uint8_t>(o.dst.kind));
      w.u32(static_cast<uint32_t>(o.dst.index));
      w.bytes(o.payload);
      w.u8(static_cast<uint8_t>(o.tag));
    }
    return w.take();
  }

  static ServerWrap decode(const Bytes& b) {
    ByteReader r(b);
    ServerWrap s;
    s.core = r.bytes();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
      Outgoing o;
      o.dst.kind = static_cast<NodeKind>(r.u8());
      o.dst.index = static_cast<int>(r.u32());
      o.payload = r.bytes();
      o.tag = static_cast<MsgTag>(r.u8());
      s.outbox.push_back(std::move(o));
    }
    return s;
  }
};

// -- Execution records ---------------------------------------------------------
struct OpEvent {
  uint32_t op_id = 0;
  NodeId client;
  bool is_write = true;
  bool is_invoke = true;
  bool has_value = false;
  uint32_t value = 0;
};

struct StepRecord {
  ActorId actor;
  std::string label;
  std::optional<OpEvent> event;
};

struct DropRecord {
  uint64_t step = 0;
  ChannelId channel;
  std::string payload_digest;
  std::string reason;
};

struct Execution {
  Configuration initial;
  std::vector<StepRecord> steps;
  std::vector<Configuration> points;  // points[i] = configuration after steps[i]
  std::vector<DropRecord> drops;
  std::map<ChannelId, uint64_t> sends, deliveries, dropped;
  std::map<uint32_t, uint32_t> op_values;  // op_id -> written/returned value
  std::set<uint32_t> responded;
  bool record_points = true;

  size_t point_count() const { return points.size(); }

  const Configuration& point(size_t i) const { return points.at(i); }

  bool op_responded(uint32_t op_id) const { return responded.count(op_id) > 0; }
};

// Scheduling restrictions layered on top of Configuration.failed/frozen.
struct Constraints {
  std::set<ActorId> frozen;
  std::set<NodeId> vd_send_blocked;   // writers that may not emit value-dependent sends
  std::set<NodeId> vd_delivery_held;  // channels from these clients skip value-dependent messages

  bool is_frozen(const ActorId& a) const { return frozen.count(a) > 0; }

  void freeze_node_and_channels(const Configuration& cfg, const NodeId& n) {
    frozen.insert(ActorId(n));
    for (const auto& [c, q] : cfg.channels) {
      (void)q;
      if (c.src == n || c.dst == n) frozen.insert(ActorId(c));
    }
  }
};

namespace detail {

struct StepEffects {
  std::string label;
  std::optional<OpEvent> event;
};

}  // namespace detail

// -- Initial configuration ------------------------------------------------------
inline Configuration initial_configuration(const AlgorithmSpec& spec) {
  Configuration cfg;
  std::vector<NodeId> clients;
  for (int i = 0; i < spec.num_writers; ++i) clients.push_back(writer(i));
  for (int i = 0; i < spec.num_readers; ++i) clients.push_back(reader(i));

  for (int i = 1; i <= spec.num_servers; ++i) {
    ServerWrap w{spec.server_init(i), {}};
    cfg.server_states[server(i)] = w.encode();
  }
  for (const NodeId& c : clients) {
    if (c.kind == NodeKind::Writer)
      cfg.client_states[c] = WriterCore{}.encode();
    else
      cfg.client_states[c] = ReaderCore{}.encode();
  }
  for (const NodeId& c : clients) {
    for (int i = 1; i <= spec.num_servers; ++i) {
      cfg.channels[{c, server(i)}] = {};
      cfg.channels[{server(i), c}] = {};
    }
  }
  for (int i = 1; i <= spec.num_servers; ++i)
    for (int j = 1; j <= spec.num_servers; ++j)
      if (i != j) cfg.channels[{server(i), server(j)}] = {};
  return cfg;
}

// -- The engine ------------------------------------------------------------------
class Engine {
 public:
  Engine(const AlgorithmSpec& spec, Configuration cfg, Constraints cons = {},
         uint64_t step_budget = default_step_budget())
      : spec_(spec), cons_(std::move(cons)), budget_(step_budget) {
    exec_.initial = cfg;
    cfg_ = std::move(cfg);
  }

  static uint64_t default_step_budget() {
    if (const char* env = std::getenv("REGMEM_STEP_BUDGET")) {
      uint64_t v = std::strtoull(env, nullptr, 10);
      if (v > 0) return v;
    }
    return 1000000;
  }

  const Configuration& config() const { return cfg_; }
  const AlgorithmSpec& spec() const { return spec_; }
  Execution& execution() { return exec_; }
  const Execution& execution() const { return exec_; }
  Constraints& constraints() { return cons_; }

  void set_record_points(bool b) { exec_.record_points = b; }

  // Last recorded point index.
  size_t here() const { return exec_.steps.size() - 1; }

  // ---- external (harness) actions ----
  void invoke_write(int writer_index, uint32_t op_id, uint32_t value) {
    NodeId w = writer(writer_index);
    if (value >= spec_.value_count) throw InvalidParams("value outside the register's domain");
    WriterCore core = WriterCore::decode(cfg_.client_states.at(w));
    if (core.active) throw Error("write invoked at a busy client");
    core.active = 1;
    core.op_id = op_id;
    core.value = value;
    core.phase = 0;
    core.tag = Tag{};
    core.responses.clear();
    core.pending_sends = phase_destinations(core, writer_index, 0);
    cfg_.client_states[w] = core.encode();
    OpEvent ev{op_id, w, true, true, true, value};
    record(ActorId(w), "invoke-write", ev);
  }

  void invoke_read(int reader_index, uint32_t op_id) {
    NodeId r = reader(reader_index);
    ReaderCore core = ReaderCore::decode(cfg_.client_states.at(r));
    if (core.active) throw Error("read invoked at a busy client");
    core.active = 1;
    core.op_id = op_id;
    core.phase = 0;
    core.decided = 0;
    core.responses.clear();
    core.pending_sends.clear();
    for (int i = 1; i <= spec_.num_servers; ++i)
      core.pending_sends.push_back(static_cast<uint8_t>(i));
    cfg_.client_states[r] = core.encode();
    OpEvent ev{op_id, r, false, true, false, 0};
    record(ActorId(r), "invoke-read", ev);
  }

  void fail_servers(const std::set<int>& which) {
    if (which.empty()) return;
    for (int i : which) {
      if (i < 1 || i > spec_.num_servers) throw InvalidParams("server index out of range");
      cfg_.failed.insert(server(i));
    }
    // Crash model: in-flight messages to or from a failed server are dropped.
    for (auto& [c, q] : cfg_.channels) {
      if (!cfg_.is_failed(c.src) && !cfg_.is_failed(c.dst)) continue;
      for (const Message& m : q) drop(c, m, "endpoint failed");
      q.clear();
    }
    record(ActorId(server(*which.begin())), "fail-servers", std::nullopt);
  }

  // ---- scheduling ----
  bool actor_enabled(const ActorId& a) const {
    if (cfg_.is_frozen(a) || cons_.is_frozen(a)) return false;
    if (a.is_channel()) return channel_enabled(a.channel());
    const NodeId& n = a.node();
    if (cfg_.is_failed(n)) return false;
    switch (n.kind) {
      case NodeKind::Server:
        return !ServerWrap::decode(cfg_.server_states.at(n)).outbox.empty();
      case NodeKind::Writer:
        return writer_action(n).has_value();
      case NodeKind::Reader:
        return reader_action(n).has_value();
    }
    return false;
  }

  // One automaton step by the given actor.
  void step_actor(const ActorId& a) {
    if (a.is_node()) {
      const NodeId& n = a.node();
      if (cfg_.is_failed(n)) throw ActorUnavailable("actor has failed");
    }
    if (cfg_.is_frozen(a) || cons_.is_frozen(a)) throw ActorUnavailable("actor is frozen");
    if (!actor_enabled(a)) throw NoEnabledAction("actor has no enabled action");
    detail::StepEffects fx;
    if (a.is_channel()) {
      fx = apply_channel(a.channel());
    } else {
      switch (a.node().kind) {
        case NodeKind::Server:
          fx = apply_server_emit(a.node());
          break;
        case NodeKind::Writer:
          fx = apply_writer(a.node());
          break;
        case NodeKind::Reader:
          fx = apply_reader(a.node());
          break;
      }
    }
    record(a, fx.label, fx.event);
  }

  using StopFn = std::function<bool(const Engine&)>;

  enum class RunOutcome { Stopped, Quiesced };

  // Deterministic round-robin over live actors in fixed ActorId order, with a
  // seed-controlled rotation offset. Halts when stop holds; a quiescent
  // system (nothing enabled) returns Quiesced when allowed and is otherwise a
  // liveness failure.
  RunOutcome run_fair(const StopFn& stop, uint64_t seed = 0, bool quiesce_ok = false) {
    std::vector<ActorId> order = actor_order();
    size_t cursor = order.empty() ? 0 : seed % order.size();
    while (!stop(*this)) {
      bool acted = false;
      for (size_t scan = 0; scan < order.size(); ++scan) {
        const ActorId& a = order[(cursor + scan) % order.size()];
        if (!actor_enabled(a)) continue;
        step_actor(a);
        cursor = (cursor + scan + 1) % order.size();
        acted = true;
        break;
      }
      if (!acted) {
        if (quiesce_ok) return RunOutcome::Quiesced;
        throw NonTermination("no enabled actions before the stop condition held");
      }
      if (exec_.steps.size() > budget_)
        throw NonTermination("step budget exhausted before the stop condition held");
    }
    return RunOutcome::Stopped;
  }

  // Seeded random scheduling among enabled actors; used by the consistency
  // sweeps. Fair with probability one, deterministic per seed.
  template <class Rng>
  RunOutcome run_random(const StopFn& stop, Rng& rng, bool quiesce_ok = false) {
    std::vector<ActorId> order = actor_order();
    while (!stop(*this)) {
      std::vector<size_t> enabled;
      for (size_t i = 0; i < order.size(); ++i)
        if (actor_enabled(order[i])) enabled.push_back(i);
      if (enabled.empty()) {
        if (quiesce_ok) return RunOutcome::Quiesced;
        throw NonTermination("no enabled actions before the stop condition held");
      }
      size_t pick = enabled[rng() % enabled.size()];
      step_actor(order[pick]);
      if (exec_.steps.size() > budget_)
        throw NonTermination("step budget exhausted before the stop condition held");
    }
    return RunOutcome::Stopped;
  }

  // Drain the given channels in order, FIFO within each channel, applying
  // receive transitions. Deliveries to failed endpoints are dropped into the
  // drop log.
  void deliver_all(const std::vector<ChannelId>& channels) {
    for (const ChannelId& c : channels) {
      auto it = cfg_.channels.find(c);
      if (it == cfg_.channels.end()) throw InvalidParams("no such channel");
      while (!it->second.empty()) {
        Message m = it->second.front();
        it->second.pop_front();
        if (cfg_.is_failed(m.dst) || cfg_.is_failed(m.src)) {
          drop(c, m, "delivery to failed endpoint");
          record(ActorId(c), "deliver-all-drop", std::nullopt);
          continue;
        }
        exec_.deliveries[c]++;
        detail::StepEffects fx = receive(m);
        record(ActorId(c), "deliver-all", fx.event);
      }
    }
  }

  // Drain only the value-independent messages of the given channels,
  // preserving queue order among the held value-dependent ones.
  void deliver_value_independent(const std::vector<ChannelId>& channels) {
    for (const ChannelId& c : channels) {
      auto it = cfg_.channels.find(c);
      if (it == cfg_.channels.end()) throw InvalidParams("no such channel");
      size_t pos = 0;
      while (pos < it->second.size()) {
        if (it->second[pos].value_dependent()) {
          ++pos;
          continue;
        }
        Message m = it->second[pos];
        it->second.erase(it->second.begin() + static_cast<long>(pos));
        if (cfg_.is_failed(m.dst) || cfg_.is_failed(m.src)) {
          drop(c, m, "delivery to failed endpoint");
          record(ActorId(c), "deliver-all-drop", std::nullopt);
          continue;
        }
        exec_.deliveries[c]++;
        detail::StepEffects fx = receive(m);
        record(ActorId(c), "deliver-vi", fx.event);
      }
    }
  }

  // All inter-server traffic delivered, in fixed global channel order, until
  // no server-to-server message remains in a channel or an outbox. This is
  // the gossip-flush step that reaches the proofs' R-points.
  void flush_inter_server() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (int i = 1; i <= spec_.num_servers; ++i) {
        NodeId s = server(i);
        if (cfg_.is_failed(s)) continue;
        while (true) {
          ServerWrap w = ServerWrap::decode(cfg_.server_states.at(s));
          bool has_gossip = std::any_of(w.outbox.begin(), w.outbox.end(),
                                        [](const Outgoing& o) { return o.dst.is_server(); });
          if (!has_gossip) break;
          step_actor(ActorId(s));  // emit the outbox head (FIFO)
          progress = true;
        }
      }
      std::vector<ChannelId> gossip;
      for (const auto& [c, q] : cfg_.channels)
        if (c.inter_server() && !q.empty()) gossip.push_back(c);
      if (!gossip.empty()) {
        deliver_all(gossip);
        progress = true;
      }
    }
  }

  // ---- state inspection ----
  WriterCore writer_core(int index) const {
    return WriterCore::decode(cfg_.client_states.at(writer(index)));
  }
  ReaderCore reader_core(int index) const {
    return ReaderCore::decode(cfg_.client_states.at(reader(index)));
  }

 private:
  bool channel_enabled(const ChannelId& c) const {
    auto it = cfg_.channels.find(c);
    if (it == cfg_.channels.end() || it->second.empty()) return false;
    if (cfg_.is_failed(c.src) || cfg_.is_failed(c.dst)) return false;
    if (c.from_client() && cons_.vd_delivery_held.count(c.src)) {
      for (const Message& m : it->second)
        if (!m.value_dependent()) return true;
      return false;
    }
    return true;
  }

  std::vector<ActorId> actor_order() const {
    std::vector<ActorId> order;
    for (int i = 1; i <= spec_.num_servers; ++i) order.push_back(ActorId(server(i)));
    for (int i = 0; i < spec_.num_writers; ++i) order.push_back(ActorId(writer(i)));
    for (int i = 0; i < spec_.num_readers; ++i) order.push_back(ActorId(reader(i)));
    for (const auto& [c, q] : cfg_.channels) {
      (void)q;
      order.push_back(ActorId(c));
    }
    return order;
  }

  std::vector<uint8_t> phase_destinations(const WriterCore& core, int client_index,
                                          uint32_t phase) const {
    WriterView view{client_index, &core, spec_.num_servers, spec_.value_count};
    const PhaseDef& def = spec_.writer_plan.phases.at(phase);
    std::vector<int> dst = def.destinations ? def.destinations(view) : spec_.all_servers();
    std::vector<uint8_t> out;
    for (int s : dst) out.push_back(static_cast<uint8_t>(s));
    return out;
  }

  void send_message(const NodeId& src, const NodeId& dst, Bytes payload, MsgTag tag) {
    ChannelId c{src, dst};
    exec_.sends[c]++;
    if (cfg_.is_failed(dst)) {
      drop(c, Message{src, dst, payload, tag}, "send to failed server");
      return;
    }
    cfg_.channels.at(c).push_back(Message{src, dst, std::move(payload), tag});
  }

  void drop(const ChannelId& c, const Message& m, const std::string& reason) {
    exec_.dropped[c]++;
    exec_.drops.push_back(DropRecord{cfg_.step_count, c, digest_hex(m.payload), reason});
  }

  detail::StepEffects apply_channel(const ChannelId& c) {
    auto& q = cfg_.channels.at(c);
    size_t pick = 0;
    if (c.from_client() && cons_.vd_delivery_held.count(c.src)) {
      while (pick < q.size() && q[pick].value_dependent()) ++pick;
    }
    Message m = q[pick];
    q.erase(q.begin() + static_cast<long>(pick));
    exec_.deliveries[c]++;
    return receive(m);
  }

  detail::StepEffects receive(const Message& m) {
    detail::StepEffects fx;
    fx.label = "deliver";
    switch (m.dst.kind) {
      case NodeKind::Server: {
        ServerWrap w = ServerWrap::decode(cfg_.server_states.at(m.dst));
        auto [core, out] = spec_.server_on_receive(m.dst.index, w.core, m);
        w.core = std::move(core);
        for (auto& o : out) w.outbox.push_back(std::move(o));
        cfg_.server_states[m.dst] = w.encode();
        break;
      }
      case NodeKind::Writer: {
        WriterCore core = WriterCore::decode(cfg_.client_states.at(m.dst));
        Envelope e = unpack_envelope(m.payload);
        if (core.active && e.op_id == core.op_id && e.phase == core.phase)
          core.responses.push_back(Response{m.src.index, e.body});
        cfg_.client_states[m.dst] = core.encode();
        break;
      }
      case NodeKind::Reader: {
        ReaderCore core = ReaderCore::decode(cfg_.client_states.at(m.dst));
        Envelope e = unpack_envelope(m.payload);
        if (core.active && e.op_id == core.op_id && e.phase == core.phase)
          core.responses.push_back(Response{m.src.index, e.body});
        cfg_.client_states[m.dst] = core.encode();
        break;
      }
    }
    return fx;
  }

  detail::StepEffects apply_server_emit(const NodeId& s) {
    ServerWrap w = ServerWrap::decode(cfg_.server_states.at(s));
    Outgoing o = w.outbox.front();
    w.outbox.erase(w.outbox.begin());
    cfg_.server_states[s] = w.encode();
    send_message(s, o.dst, std::move(o.payload), o.tag);
    return {"emit", std::nullopt};
  }

  // Writer actions in priority order: emit the next pending phase message,
  // else complete the phase once a quorum answered.
  std::optional<std::string> writer_action(const NodeId& w) const {
    WriterCore core = WriterCore::decode(cfg_.client_states.at(w));
    if (!core.active) return std::nullopt;
    const PhaseDef& def = spec_.writer_plan.phases.at(core.phase);
    if (!core.pending_sends.empty()) {
      if (def.value_dependent && cons_.vd_send_blocked.count(w)) return std::nullopt;
      return "send:" + def.label;
    }
    if (static_cast<int>(core.responses.size()) >= def.quorum) return "complete:" + def.label;
    return std::nullopt;
  }

  detail::StepEffects apply_writer(const NodeId& w) {
    WriterCore core = WriterCore::decode(cfg_.client_states.at(w));
    const PhaseDef& def = spec_.writer_plan.phases.at(core.phase);
    WriterView view{w.index, &core, spec_.num_servers, spec_.value_count};
    if (!core.pending_sends.empty()) {
      int dst = core.pending_sends.front();
      core.pending_sends.erase(core.pending_sends.begin());
      Bytes body = def.build(view, dst);
      Bytes payload = pack_envelope(core.op_id, core.phase, body);
      cfg_.client_states[w] = core.encode();
      send_message(w, server(dst), std::move(payload),
                   def.value_dependent ? MsgTag::ValueDependent : MsgTag::ValueIndependent);
      return {"send:" + def.label, std::nullopt};
    }
    // Quorum reached: internal phase-completion action.
    if (def.on_complete) def.on_complete(core, view);
    core.phase++;
    if (core.phase < spec_.writer_plan.phases.size()) {
      core.responses.clear();
      core.pending_sends = phase_destinations(core, w.index, core.phase);
      cfg_.client_states[w] = core.encode();
      return {"complete:" + def.label, std::nullopt};
    }
    core.active = 0;
    core.ops_done++;
    OpEvent ev{core.op_id, w, true, false, true, core.value};
    cfg_.client_states[w] = core.encode();
    return {"write-done", ev};
  }

  std::optional<std::string> reader_action(const NodeId& r) const {
    ReaderCore core = ReaderCore::decode(cfg_.client_states.at(r));
    if (!core.active) return std::nullopt;
    if (!core.pending_sends.empty()) return core.phase == 0 ? "send:query" : "send:write-back";
    if (core.phase == 0) {
      ReaderView view{&core, spec_.num_servers, spec_.value_count};
      if (spec_.reader_plan.decide(view).has_value()) return "decide";
      return std::nullopt;
    }
    if (static_cast<int>(core.responses.size()) >= static_cast<int>(core.wb_quorum))
      return "read-done";
    return std::nullopt;
  }

  detail::StepEffects apply_reader(const NodeId& r) {
    ReaderCore core = ReaderCore::decode(cfg_.client_states.at(r));
    ReaderView view{&core, spec_.num_servers, spec_.value_count};
    if (!core.pending_sends.empty()) {
      int dst = core.pending_sends.front();
      core.pending_sends.erase(core.pending_sends.begin());
      Bytes body = core.phase == 0 ? spec_.reader_plan.query_build(view, dst) : core.wb_body;
      Bytes payload = pack_envelope(core.op_id, core.phase, body);
      MsgTag tag = core.phase == 0 ? MsgTag::ValueIndependent : core.wb_tag();
      std::string label = core.phase == 0 ? "send:query" : "send:write-back";
      cfg_.client_states[r] = core.encode();
      send_message(r, server(dst), std::move(payload), tag);
      return {label, std::nullopt};
    }
    if (core.phase == 0) {
      auto decision = spec_.reader_plan.decide(view);
      core.cache = decision->new_cache;
      core.decided = 1;
      core.decided_value = decision->value;
      if (decision->write_back) {
        core.phase = 1;
        core.responses.clear();
        core.wb_body = decision->wb_body;
        core.wb_quorum = static_cast<uint32_t>(decision->wb_quorum);
        core.wb_value_dependent = decision->wb_tag == MsgTag::ValueDependent ? 1 : 0;
        for (int i = 1; i <= spec_.num_servers; ++i)
          core.pending_sends.push_back(static_cast<uint8_t>(i));
        cfg_.client_states[r] = core.encode();
        return {"decide", std::nullopt};
      }
      core.active = 0;
      core.ops_done++;
      OpEvent ev{core.op_id, r, false, false, true, core.decided_value};
      cfg_.client_states[r] = core.encode();
      return {"read-done", ev};
    }
    core.active = 0;
    core.ops_done++;
    OpEvent ev{core.op_id, r, false, false, true, core.decided_value};
    cfg_.client_states[r] = core.encode();
    return {"read-done", ev};
  }

  void record(const ActorId& actor, const std::string& label, std::optional<OpEvent> ev) {
    cfg_.step_count++;
    if (ev && !ev->is_invoke && ev->has_value) {
      exec_.op_values[ev->op_id] = ev->value;
      exec_.responded.insert(ev->op_id);
    }
    exec_.steps.push_back(StepRecord{actor, label, ev});
    if (exec_.record_points) exec_.points.push_back(cfg_);
  }

  const AlgorithmSpec& spec_;
  Configuration cfg_;
  Constraints cons_;
  Execution exec_;
  uint64_t budget_;
};

// -- Spec-level convenience wrappers --------------------------------------------
inline Configuration step(const AlgorithmSpec& spec, const Configuration& cfg,
                          const ActorId& actor, const Constraints& cons = {}) {
  Engine e(spec, cfg, cons);
  e.set_record_points(false);
  e.step_actor(actor);
  return e.config();
}

inline Execution run_fair(const AlgorithmSpec& spec, const Configuration& cfg,
                          const std::set<ActorId>& frozen, const Engine::StopFn& stop,
                          uint64_t seed) {
  Constraints cons;
  cons.frozen = frozen;
  Engine e(spec, cfg, cons);
  e.run_fair(stop, seed);
  return e.execution();
}

inline Configuration fail_servers(const AlgorithmSpec& spec, const Configuration& cfg,
                                  const std::set<int>& which) {
  if (which.empty()) return cfg;
  Engine e(spec, cfg);
  e.set_record_points(false);
  e.fail_servers(which);
  return e.config();
}

inline Configuration deliver_all(const AlgorithmSpec& spec, const Configuration& cfg,
                                 const std::vector<ChannelId>& channels) {
  Engine e(spec, cfg);
  e.set_record_points(false);
  e.deliver_all(channels);
  return e.config();
}

// -- Fingerprints ----------------------------------------------------------------
struct StateFingerprint {
  std::vector<Bytes> components;  // ordered serialized server states
  std::vector<std::pair<int, Bytes>> changed;  // (server index, state) records
  std::vector<uint32_t> shape;    // variant-specific integers (sigma, thresholds)
  std::string variant;            // thm1 | thm2 | thm3 | thm4

  Bytes encode() const {
    ByteWriter w;
    w.bytes(variant);
    w.u32(static_cast<uint32_t>(shape.size()));
    for (uint32_t v : shape) w.u32(v);
    w.u32(static_cast<uint32_t>(components.size()));
    for (const Bytes& c : components) w.bytes(c);
    w.u32(static_cast<uint32_t>(changed.size()));
    for (const auto& [idx, st] : changed) {
      w.u32(static_cast<uint32_t>(idx));
      w.bytes(st);
    }
    return w.take();
  }

  bool operator==(const StateFingerprint& o) const { return encode() == o.encode(); }
  bool operator<(const StateFingerprint& o) const { return encode() < o.encode(); }
};

inline StateFingerprint snapshot_fingerprint(const Configuration& cfg,
                                             const std::vector<int>& servers) {
  StateFingerprint fp;
  for (int i : servers) {
    NodeId s = server(i);
    if (cfg.is_failed(s)) throw FailedServerInFingerprint("fingerprint over a failed server");
    fp.components.push_back(cfg.server_states.at(s));
  }
  return fp;
}

// Distinct serialized states per server, accumulated over an execution family.
class ReachableStateLedger {
 public:
  void observe(int server_index, const Bytes& state) { states_[server_index].insert(state); }

  void observe_fingerprint(const std::vector<int>& servers, const StateFingerprint& fp) {
    for (size_t i = 0; i < servers.size(); ++i) observe(servers[i], fp.components[i]);
    for (const auto& [idx, st] : fp.changed) observe(idx, st);
  }

  uint64_t count(int server_index) const {
    auto it = states_.find(server_index);
    return it == states_.end() ? 1 : static_cast<uint64_t>(it->second.size());
  }

  std::vector<uint64_t> counts(const std::vector<int>& servers) const {
    std::vector<uint64_t> out;
    for (int s : servers) out.push_back(count(s));
    return out;
  }

  const std::map<int, std::set<Bytes>>& per_server() const { return states_; }

 private:
  std::map<int, std::set<Bytes>> states_;
};

// -- Trace export -----------------------------------------------------------------
inline std::string execution_trace_jsonl(const Execution& exec) {
  std::ostringstream os;
  for (size_t i = 0; i < exec.steps.size(); ++i) {
    const StepRecord& s = exec.steps[i];
    os << "{\"step\":" << i << ",\"actor\":\"" << to_string(s.actor) << "\",\"label\":\""
       << s.label << "\"";
    if (i < exec.points.size()) {
      const Configuration& cfg = exec.points[i];
      os << ",\"servers\":[";
      bool first = true;
      for (const auto& [n, st] : cfg.server_states) {
        (void)n;
        if (!first) os << ",";
        first = false;
        Bytes raw;
        uint64_t h = fnv1a64(st);
        for (int b = 7; b >= 0; --b) raw.push_back(static_cast<char>((h >> (8 * b)) & 0xff));
        os << "\"" << base64(raw) << "\"";
      }
      os << "]";
    }
    if (s.event) {
      os << ",\"op\":" << s.event->op_id << ",\"event\":\""
         << (s.event->is_invoke ? "invoke" : "respond") << "\"";
      if (s.event->has_value) os << ",\"value\":" << s.event->value;
    }
    os << "}\n";
  }
  return os.str();
}

inline std::string drop_log_csv(const Execution& exec) {
  std::ostringstream os;
  os << "step,channel,payload_digest,reason\n";
  for (const DropRecord& d : exec.drops)
    os << d.step << "," << to_string(d.channel) << "," << d.payload_digest << "," << d.reason
       << "\n";
  return os.str();
}

}  // namespace regmem::sim
