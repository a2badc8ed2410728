#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regmem/actor.hpp"
#include "regmem/bytes.hpp"
#include "regmem/errors.hpp"
#include "regmem/message.hpp"

namespace regmem::sim {

// Tags are (counter, client) pairs ordered lexicographically.
struct Tag {
  uint32_t counter = 0;
  uint32_t client = 0;

  auto operator<=>(const Tag&) const = default;
};

inline void put_tag(ByteWriter& w, const Tag& t) {
  w.u32(t.counter);
  w.u32(t.client);
}

inline Tag get_tag(ByteReader& r) {
  Tag t;
  t.counter = r.u32();
  t.client = r.u32();
  return t;
}

// Every client<->server payload carries (op_id, phase, body); servers echo the
// envelope of the request they are answering so clients can drop stale
// responses by equality.
struct Envelope {
  uint32_t op_id = 0;
  uint32_t phase = 0;
  Bytes body;
};

inline Bytes pack_envelope(uint32_t op_id, uint32_t phase, const Bytes& body) {
  ByteWriter w;
  w.u32(op_id);
  w.u32(phase);
  w.bytes(body);
  return w.take();
}

inline Envelope unpack_envelope(const Bytes& payload) {
  ByteReader r(payload);
  Envelope e;
  e.op_id = r.u32();
  e.phase = r.u32();
  e.body = r.bytes();
  return e;
}

// Response collected during one client phase, in arrival order.
struct Response {
  int server = 0;
  Bytes body;
};

// -- Generic write-client state (Assumption-1 shape) -------------------------
//
// The writer's state is the triple (v, m, h): the value, the metadata the
// phase machinery tracks, and a finite-range value/metadata mix h. The
// shipped algorithms use an empty h; the field exists so the staged-execution
// machinery can house hash-style state.
struct WriterCore {
  uint8_t active = 0;
  uint32_t op_id = 0;
  uint32_t value = 0;
  uint32_t phase = 0;
  std::vector<uint8_t> pending_sends;  // server indices still to message
  std::vector<Response> responses;     // current phase, arrival order
  Tag tag;
  uint32_t ops_done = 0;

  Bytes encode() const {
    ByteWriter w;
    w.u8(active);
    w.u32(op_id);
    w.u32(value);
    w.u32(phase);
    w.u32(static_cast<uint32_t>(pending_sends.size()));
    for (uint8_t s : pending_sends) w.u8(s);
    w.u32(static_cast<uint32_t>(responses.size()));
    for (const auto& r : responses) {
      w.u8(static_cast<uint8_t>(r.server));
      w.bytes(r.body);
    }
    put_tag(w, tag);
    w.u32(ops_done);
    return w.take();
  }

  static WriterCore decode(const Bytes& b) {
    ByteReader r(b);
    WriterCore c;
    c.active = r.u8();
    c.op_id = r.u32();
    c.value = r.u32();
    c.phase = r.u32();
    uint32_t np = r.u32();
    for (uint32_t i = 0; i < np; ++i) c.pending_sends.push_back(r.u8());
    uint32_t nr = r.u32();
    for (uint32_t i = 0; i < nr; ++i) {
      Response resp;
      resp.server = r.u8();
      resp.body = r.bytes();
      c.responses.push_back(std::move(resp));
    }
    c.tag = get_tag(r);
    c.ops_done = r.u32();
    return c;
  }

  // Metadata component: the state with the value blanked out.
  Bytes metadata() const {
    WriterCore m = *this;
    m.value = 0;
    return m.encode();
  }
};

// View handed to phase callbacks.
struct WriterView {
  int client_index = 0;
  const WriterCore* core = nullptr;
  int num_servers = 0;
  uint32_t value_count = 0;
};

struct PhaseDef {
  std::string label;
  bool value_dependent = false;
  int quorum = 0;
  // Destination servers, in send order. Empty function means all of 1..N.
  std::function<std::vector<int>(const WriterView&)> destinations;
  // Body of the message to one server. The engine wraps it in an envelope and
  // tags it per value_dependent.
  std::function<Bytes(const WriterView&, int server)> build;
  // Metadata update when the quorum is reached (e.g. pick the next tag).
  std::function<void(WriterCore&, const WriterView&)> on_complete;
};

struct PhasePlan {
  std::vector<PhaseDef> phases;

  int value_dependent_phase() const {  // -1 if none
    for (size_t i = 0; i < phases.size(); ++i)
      if (phases[i].value_dependent) return static_cast<int>(i);
    return -1;
  }
};

// -- Generic read-client state ------------------------------------------------
struct ReaderCore {
  uint8_t active = 0;
  uint32_t op_id = 0;
  uint32_t phase = 0;  // 0 = query, 1 = write-back
  std::vector<uint8_t> pending_sends;
  std::vector<Response> responses;
  uint8_t decided = 0;
  uint32_t decided_value = 0;
  Bytes wb_body;
  uint32_t wb_quorum = 0;
  uint8_t wb_value_dependent = 0;
  Bytes cache;  // algorithm-private memory that persists across operations
  uint32_t ops_done = 0;

  MsgTag wb_tag() const {
    return wb_value_dependent ? MsgTag::ValueDependent : MsgTag::ValueIndependent;
  }

  Bytes encode() const {
    ByteWriter w;
    w.u8(active);
    w.u32(op_id);
    w.u32(phase);
    w.u32(static_cast<uint32_t>(pending_sends.size()));
    for (uint8_t s : pending_sends) w.u8(s);
    w.u32(static_cast<uint32_t>(responses.size()));
    for (const auto& r : responses) {
      w.u8(static_cast<uint8_t>(r.server));
      w.bytes(r.body);
    }
    w.u8(decided);
    w.u32(decided_value);
    w.bytes(wb_body);
    w.u32(wb_quorum);
    w.u8(wb_value_dependent);
    w.bytes(cache);
    w.u32(ops_done);
    return w.take();
  }

  static ReaderCore decode(const Bytes& b) {
    ByteReader r(b);
    ReaderCore c;
    c.active = r.u8();
    c.op_id = r.u32();
    c.phase = r.u32();
    uint32_t np = r.u32();
    for (uint32_t i = 0; i < np; ++i) c.pending_sends.push_back(r.u8());
    uint32_t nr = r.u32();
    for (uint32_t i = 0; i < nr; ++i) {
      Response resp;
      resp.server = r.u8();
      resp.body = r.bytes();
      c.responses.push_back(std::move(resp));
    }
    c.decided = r.u8();
    c.decided_value = r.u32();
    c.wb_body = r.bytes();
    c.wb_quorum = r.u32();
    c.wb_value_dependent = r.u8();
    c.cache = r.bytes();
    c.ops_done = r.u32();
    return c;
  }
};

struct ReaderView {
  const ReaderCore* core = nullptr;
  int num_servers = 0;
  uint32_t value_count = 0;
};

struct ReaderDecision {
  uint32_t value = 0;
  Bytes new_cache;
  bool write_back = false;
  Bytes wb_body;
  MsgTag wb_tag = MsgTag::ValueIndependent;
  int wb_quorum = 0;
};

struct ReaderPlan {
  std::function<Bytes(const ReaderView&, int server)> query_build;
  // Called whenever the reader could decide; nullopt keeps waiting for more
  // responses (the channel layer guarantees every live server answers
  // eventually in a fair run).
  std::function<std::optional<ReaderDecision>(const ReaderView&)> decide;
};

// -- The pluggable register-emulation protocol --------------------------------
struct AlgorithmSpec {
  std::string name;
  int num_servers = 0;
  int max_failures = 0;
  uint32_t value_count = 0;
  int num_writers = 1;
  int num_readers = 1;
  bool gossips = false;  // sends inter-server messages

  std::function<Bytes(int server_index)> server_init;
  std::function<std::pair<Bytes, std::vector<Outgoing>>(int server_index, const Bytes& state,
                                                        const Message& msg)>
      server_on_receive;
  PhasePlan writer_plan;
  ReaderPlan reader_plan;

  std::vector<int> all_servers() const {
    std::vector<int> v;
    for (int i = 1; i <= num_servers; ++i) v.push_back(i);
    return v;
  }
};

}  // namespace regmem::sim
