#pragma once

#include <utility>

#include "regmem/algorithm.hpp"
#include "regmem/errors.hpp"
#include "regmem/gf.hpp"

namespace regmem::algo {

using namespace regmem::sim;

// Deliberately inconsistent demo store over GF(16): two servers accumulate the
// field sum of every value they receive, so no stored bit belongs to any one
// write. Subtracting one server's content from the other's recovers a removed
// value without the stored size ever changing. Reads return server 1's raw
// sum, which is exactly why this spec never appears in a consistency
// acceptance suite.
//
// Message bodies:
//   kind 0: read-query          -> response {sum}
//   kind 1: add {element}       -> response {} (ack)
//   kind 2: remove {element}    -> response {} (ack)
namespace xor_detail {

constexpr uint8_t kQuery = 0;
constexpr uint8_t kAdd = 1;
constexpr uint8_t kRemove = 2;

}  // namespace xor_detail

inline AlgorithmSpec xor_demo_spec(int num_writers = 3) {
  using namespace xor_detail;
  AlgorithmSpec spec;
  spec.name = "xor-demo";
  spec.num_servers = 2;
  spec.max_failures = 1;
  spec.value_count = gf::field16().size();
  spec.num_writers = num_writers;
  spec.num_readers = 1;

  spec.server_init = [](int) {
    ByteWriter w;
    w.u8(0);
    return w.take();
  };

  spec.server_on_receive = [](int, const Bytes& state, const Message& msg)
      -> std::pair<Bytes, std::vector<Outgoing>> {
    ByteReader sr(state);
    uint8_t sum = sr.u8();
    Envelope e = unpack_envelope(msg.payload);
    ByteReader br(e.body);
    uint8_t kind = br.u8();
    std::vector<Outgoing> out;
    const gf::Field& f = gf::field16();
    if (kind == kQuery) {
      ByteWriter resp;
      resp.u8(sum);
      out.push_back(Outgoing{msg.src, pack_envelope(e.op_id, e.phase, resp.take()),
                             MsgTag::ValueDependent});
    } else if (kind == kAdd) {
      sum = f.add(sum, br.u8());
      out.push_back(
          Outgoing{msg.src, pack_envelope(e.op_id, e.phase, Bytes{}), MsgTag::ValueIndependent});
    } else {
      sum = f.sub(sum, br.u8());
      out.push_back(
          Outgoing{msg.src, pack_envelope(e.op_id, e.phase, Bytes{}), MsgTag::ValueIndependent});
    }
    ByteWriter w;
    w.u8(sum);
    return {w.take(), std::move(out)};
  };

  PhaseDef store;
  store.label = "accumulate";
  store.value_dependent = true;
  store.quorum = 2;
  store.build = [](const WriterView& view, int) {
    ByteWriter w;
    w.u8(kAdd);
    w.u8(static_cast<uint8_t>(view.core->value));
    return w.take();
  };
  spec.writer_plan.phases = {store};

  spec.reader_plan.query_build = [](const ReaderView&, int) {
    ByteWriter w;
    w.u8(kQuery);
    return w.take();
  };
  spec.reader_plan.decide = [](const ReaderView& view) -> std::optional<ReaderDecision> {
    for (const Response& r : view.core->responses) {
      if (r.server != 1) continue;
      ByteReader br(r.body);
      ReaderDecision d;
      d.value = br.u8();
      d.write_back = false;
      return d;
    }
    return std::nullopt;
  };

  return spec;
}

// Pure transition helpers for the subtraction scenario; they run the server
// protocol function directly.
namespace xor_demo {

inline uint8_t stored_sum(const Bytes& state) {
  ByteReader r(state);
  return r.u8();
}

inline Bytes apply(const AlgorithmSpec& spec, const Bytes& state, uint8_t kind, uint8_t element) {
  ByteWriter body;
  body.u8(kind);
  body.u8(element);
  Message m{writer(0), server(1), pack_envelope(0, 0, body.take()), MsgTag::ValueDependent};
  return spec.server_on_receive(1, state, m).first;
}

inline Bytes add(const AlgorithmSpec& spec, const Bytes& state, uint8_t element) {
  return apply(spec, state, xor_detail::kAdd, element);
}

inline Bytes remove(const AlgorithmSpec& spec, const Bytes& state, uint8_t element) {
  return apply(spec, state, xor_detail::kRemove, element);
}

}  // namespace xor_demo

}  // namespace regmem::algo
