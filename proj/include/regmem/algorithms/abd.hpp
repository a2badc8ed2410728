#pragma once

#include <utility>

#include "regmem/algorithm.hpp"
#include "regmem/errors.hpp"

namespace regmem::algo {

using namespace regmem::sim;

// Replication-based register emulation: a query phase learns the highest tag,
// a store phase replicates (tag, value) to all servers. Quorums are the
// N-f-sized sets that stay live under f crash failures; for N > 2f any two
// such quorums intersect, which is what the consistency sweeps exercise.
//
// Message bodies (inside the envelope):
//   kind 0: query                     -> response {tag, value}
//   kind 1: store {tag, value}        -> response {} (ack)
namespace abd_detail {

constexpr uint8_t kQuery = 0;
constexpr uint8_t kStore = 1;

struct ServerState {
  Tag tag;
  uint32_t value = 0;

  Bytes encode() const {
    ByteWriter w;
    put_tag(w, tag);
    w.u32(value);
    return w.take();
  }

  static ServerState decode(const Bytes& b) {
    ByteReader r(b);
    ServerState s;
    s.tag = get_tag(r);
    s.value = r.u32();
    return s;
  }
};

inline Bytes query_body() {
  ByteWriter w;
  w.u8(kQuery);
  return w.take();
}

inline Bytes store_body(const Tag& t, uint32_t value) {
  ByteWriter w;
  w.u8(kStore);
  put_tag(w, t);
  w.u32(value);
  return w.take();
}

inline Tag max_response_tag(const std::vector<Response>& responses) {
  Tag best;
  for (const Response& r : responses) {
    ByteReader br(r.body);
    Tag t = get_tag(br);
    if (t > best) best = t;
  }
  return best;
}

}  // namespace abd_detail

// stale_store: mutation hook used by the harness's negative tests. A stale
// server adopts incoming tags but keeps the first value it ever stored.
inline AlgorithmSpec abd_spec(int num_servers, int max_failures, uint32_t value_count,
                              int num_writers = 2, int num_readers = 1,
                              bool stale_store = false) {
  using namespace abd_detail;
  if (max_failures < 1 || max_failures >= num_servers)
    throw InvalidParams("need 1 <= f < N");
  if (value_count < 1) throw InvalidParams("need at least one value");

  AlgorithmSpec spec;
  spec.name = stale_store ? "abd-stale-store" : "abd";
  spec.num_servers = num_servers;
  spec.max_failures = max_failures;
  spec.value_count = value_count;
  spec.num_writers = num_writers;
  spec.num_readers = num_readers;
  int quorum = num_servers - max_failures;

  spec.server_init = [](int) { return ServerState{}.encode(); };

  spec.server_on_receive = [stale_store](int, const Bytes& state, const Message& msg)
      -> std::pair<Bytes, std::vector<Outgoing>> {
    ServerState s = ServerState::decode(state);
    Envelope e = unpack_envelope(msg.payload);
    ByteReader br(e.body);
    uint8_t kind = br.u8();
    std::vector<Outgoing> out;
    if (kind == kQuery) {
      ByteWriter resp;
      put_tag(resp, s.tag);
      resp.u32(s.value);
      out.push_back(Outgoing{msg.src, pack_envelope(e.op_id, e.phase, resp.take()),
                             MsgTag::ValueDependent});
    } else {
      Tag t = get_tag(br);
      uint32_t v = br.u32();
      if (t > s.tag) {
        bool first_store = s.tag == Tag{};
        s.tag = t;
        if (!stale_store || first_store) s.value = v;
      }
      out.push_back(
          Outgoing{msg.src, pack_envelope(e.op_id, e.phase, Bytes{}), MsgTag::ValueIndependent});
    }
    return {s.encode(), std::move(out)};
  };

  PhaseDef query;
  query.label = "query";
  query.value_dependent = false;
  query.quorum = quorum;
  query.build = [](const WriterView&, int) { return query_body(); };
  query.on_complete = [](WriterCore& core, const WriterView& view) {
    Tag t = max_response_tag(core.responses);
    core.tag = Tag{t.counter + 1, static_cast<uint32_t>(view.client_index)};
  };

  PhaseDef store;
  store.label = "store";
  store.value_dependent = true;
  store.quorum = quorum;
  store.build = [](const WriterView& view, int) {
    return store_body(view.core->tag, view.core->value);
  };

  spec.writer_plan.phases = {query, store};

  spec.reader_plan.query_build = [](const ReaderView&, int) { return query_body(); };
  spec.reader_plan.decide = [quorum](const ReaderView& view) -> std::optional<ReaderDecision> {
    if (static_cast<int>(view.core->responses.size()) < quorum) return std::nullopt;
    Tag best;
    uint32_t value = 0;
    for (const Response& r : view.core->responses) {
      ByteReader br(r.body);
      Tag t = get_tag(br);
      uint32_t v = br.u32();
      if (t >= best) {
        best = t;
        value = v;
      }
    }
    ReaderDecision d;
    d.value = value;
    d.write_back = true;
    d.wb_body = store_body(best, value);
    d.wb_tag = MsgTag::ValueDependent;
    d.wb_quorum = quorum;
    return d;
  };

  return spec;
}

}  // namespace regmem::algo
