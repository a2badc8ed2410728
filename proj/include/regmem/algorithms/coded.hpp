#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "regmem/algorithm.hpp"
#include "regmem/coding.hpp"
#include "regmem/errors.hpp"

namespace regmem::algo {

using namespace regmem::sim;

// Erasure-coded register emulation in the CAS style: query for the highest
// tag, store codeword symbol i at server i, then broadcast a finalize label.
// A server retains up to nu most recent unfinalized coded versions plus the
// latest finalized one. The reader returns the newest finalized version it
// can decode from k = N-f matching-tag symbols, waiting for more responses
// when the first N-f do not suffice, and remembers what it returned so a
// later read never goes backwards.
//
// The gossip variant forwards finalize labels between servers; everything
// else is unchanged. It exists to exercise the inter-server-channel machinery.
//
// Message bodies (inside the envelope):
//   kind 0: query                       -> response {max tag}
//   kind 1: store {tag, symbol}         -> response {} (ack)
//   kind 2: finalize {tag}              -> response {} (ack), gossip fan-out
//   kind 3: gossip-finalize {tag}       -> no response
//   kind 4: read-query                  -> response {full server core}
namespace coded_detail {

constexpr uint8_t kQuery = 0;
constexpr uint8_t kStore = 1;
constexpr uint8_t kFinalize = 2;
constexpr uint8_t kGossip = 3;
constexpr uint8_t kRead = 4;

struct Version {
  Tag tag;
  Bytes symbol;
};

struct ServerState {
  Tag max_tag;
  Tag finalized_tag;
  uint8_t has_finalized_symbol = 1;
  Bytes finalized_symbol;
  std::vector<Version> unfinalized;  // sorted by tag ascending

  Bytes encode() const {
    ByteWriter w;
    put_tag(w, max_tag);
    put_tag(w, finalized_tag);
    w.u8(has_finalized_symbol);
    w.bytes(finalized_symbol);
    w.u32(static_cast<uint32_t>(unfinalized.size()));
    for (const Version& v : unfinalized) {
      put_tag(w, v.tag);
      w.bytes(v.symbol);
    }
    return w.take();
  }

  static ServerState decode(const Bytes& b) {
    ByteReader r(b);
    ServerState s;
    s.max_tag = get_tag(r);
    s.finalized_tag = get_tag(r);
    s.has_finalized_symbol = r.u8();
    s.finalized_symbol = r.bytes();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
      Version v;
      v.tag = get_tag(r);
      v.symbol = r.bytes();
      s.unfinalized.push_back(std::move(v));
    }
    return s;
  }

  void note_tag(const Tag& t) {
    if (t > max_tag) max_tag = t;
  }

  void store_symbol(const Tag& t, Bytes symbol, int retain) {
    note_tag(t);
    if (t == finalized_tag) {
      finalized_symbol = std::move(symbol);
      has_finalized_symbol = 1;
      return;
    }
    if (t < finalized_tag) return;  // superseded version
    auto it = std::find_if(unfinalized.begin(), unfinalized.end(),
                           [&](const Version& v) { return v.tag == t; });
    if (it != unfinalized.end()) {
      it->symbol = std::move(symbol);
      return;
    }
    Version v{t, std::move(symbol)};
    auto pos = std::upper_bound(unfinalized.begin(), unfinalized.end(), v,
                                [](const Version& a, const Version& b) { return a.tag < b.tag; });
    unfinalized.insert(pos, std::move(v));
    while (static_cast<int>(unfinalized.size()) > retain)
      unfinalized.erase(unfinalized.begin());  // evict the oldest unfinalized version
  }

  void finalize(const Tag& t) {
    note_tag(t);
    if (t <= finalized_tag) return;
    finalized_tag = t;
    has_finalized_symbol = 0;
    finalized_symbol.clear();
    auto it = std::find_if(unfinalized.begin(), unfinalized.end(),
                           [&](const Version& v) { return v.tag == t; });
    if (it != unfinalized.end()) {
      finalized_symbol = it->symbol;
      has_finalized_symbol = 1;
    }
    unfinalized.erase(std::remove_if(unfinalized.begin(), unfinalized.end(),
                                     [&](const Version& v) { return v.tag <= t; }),
                      unfinalized.end());
  }
};

inline coding::CodeParams code_params(int num_servers, int max_failures, uint32_t value_count) {
  coding::CodeParams p;
  p.n = num_servers;
  p.k = num_servers - max_failures;
  p.m = value_count <= 16 ? 4 : 8;
  if (value_count > 256) throw InvalidParams("value domain exceeds GF(256)");
  p.validate();
  return p;
}

// Values are fixed-width field-element vectors; at this scale one element,
// padded to k elements inside encode().
inline std::vector<uint8_t> value_elements(uint32_t value) {
  return {static_cast<uint8_t>(value)};
}

inline Bytes symbol_for(const coding::CodeParams& p, uint32_t value, int server) {
  coding::Codeword cw = coding::encode(value_elements(value), p);
  const coding::Symbol& s = cw.symbols.at(server);
  return Bytes(s.begin(), s.end());
}

inline Bytes query_body() {
  ByteWriter w;
  w.u8(kQuery);
  return w.take();
}

inline Bytes store_body(const Tag& t, const Bytes& symbol) {
  ByteWriter w;
  w.u8(kStore);
  put_tag(w, t);
  w.bytes(symbol);
  return w.take();
}

inline Bytes label_body(uint8_t kind, const Tag& t) {
  ByteWriter w;
  w.u8(kind);
  put_tag(w, t);
  return w.take();
}

struct ReaderCache {
  Tag tag;
  uint32_t value = 0;

  Bytes encode() const {
    ByteWriter w;
    put_tag(w, tag);
    w.u32(value);
    return w.take();
  }

  static ReaderCache decode(const Bytes& b) {
    if (b.empty()) return {};
    ByteReader r(b);
    ReaderCache c;
    c.tag = get_tag(r);
    c.value = r.u32();
    return c;
  }
};

}  // namespace coded_detail

inline AlgorithmSpec coded_spec(int num_servers, int max_failures, int max_active_writes,
                                uint32_t value_count, bool gossip = false, int num_writers = 2,
                                int num_readers = 1) {
  using namespace coded_detail;
  if (max_failures < 1 || max_failures >= num_servers)
    throw InvalidParams("need 1 <= f < N");
  if (max_active_writes < 1) throw InvalidParams("need nu >= 1");
  coding::CodeParams params = code_params(num_servers, max_failures, value_count);
  int quorum = num_servers - max_failures;
  int k = params.k;
  int retain = max_active_writes;

  AlgorithmSpec spec;
  spec.name = gossip ? "coded-gossip" : "coded";
  spec.num_servers = num_servers;
  spec.max_failures = max_failures;
  spec.value_count = value_count;
  spec.num_writers = std::max(num_writers, max_active_writes);
  spec.num_readers = num_readers;
  spec.gossips = gossip;

  spec.server_init = [params](int server) {
    ServerState s;
    s.finalized_symbol = symbol_for(params, 0, server);
    return s.encode();
  };

  spec.server_on_receive = [retain, gossip, num_servers](int server, const Bytes& state,
                                                         const Message& msg)
      -> std::pair<Bytes, std::vector<Outgoing>> {
    ServerState s = ServerState::decode(state);
    Envelope e = unpack_envelope(msg.payload);
    ByteReader br(e.body);
    uint8_t kind = br.u8();
    std::vector<Outgoing> out;
    switch (kind) {
      case kQuery: {
        ByteWriter resp;
        put_tag(resp, s.max_tag);
        out.push_back(Outgoing{msg.src, pack_envelope(e.op_id, e.phase, resp.take()),
                               MsgTag::ValueIndependent});
        break;
      }
      case kStore: {
        Tag t = get_tag(br);
        s.store_symbol(t, br.bytes(), retain);
        out.push_back(Outgoing{msg.src, pack_envelope(e.op_id, e.phase, Bytes{}),
                               MsgTag::ValueIndependent});
        break;
      }
      case kFinalize: {
        Tag t = get_tag(br);
        s.finalize(t);
        if (gossip) {
          for (int peer = 1; peer <= num_servers; ++peer) {
            if (peer == server) continue;
            ByteWriter g;
            g.u8(kGossip);
            put_tag(g, t);
            out.push_back(Outgoing{sim::server(peer), pack_envelope(0, 0, g.take()),
                                   MsgTag::ValueIndependent});
          }
        }
        out.push_back(Outgoing{msg.src, pack_envelope(e.op_id, e.phase, Bytes{}),
                               MsgTag::ValueIndependent});
        break;
      }
      case kGossip: {
        Tag t = get_tag(br);
        s.finalize(t);
        break;
      }
      case kRead: {
        out.push_back(Outgoing{msg.src, pack_envelope(e.op_id, e.phase, s.encode()),
                               MsgTag::ValueDependent});
        break;
      }
      default:
        throw Error("unknown coded message kind");
    }
    return {s.encode(), std::move(out)};
  };

  PhaseDef query;
  query.label = "query";
  query.value_dependent = false;
  query.quorum = quorum;
  query.build = [](const WriterView&, int) { return query_body(); };
  query.on_complete = [](WriterCore& core, const WriterView& view) {
    Tag best;
    for (const Response& r : core.responses) {
      ByteReader br(r.body);
      Tag t = get_tag(br);
      if (t > best) best = t;
    }
    core.tag = Tag{best.counter + 1, static_cast<uint32_t>(view.client_index)};
  };

  PhaseDef store;
  store.label = "store";
  store.value_dependent = true;
  store.quorum = quorum;
  store.build = [params](const WriterView& view, int server) {
    return store_body(view.core->tag, symbol_for(params, view.core->value, server));
  };

  PhaseDef finalize;
  finalize.label = "finalize";
  finalize.value_dependent = false;
  finalize.quorum = quorum;
  finalize.build = [](const WriterView& view, int) {
    return label_body(kFinalize, view.core->tag);
  };

  spec.writer_plan.phases = {query, store, finalize};

  spec.reader_plan.query_build = [](const ReaderView&, int) {
    ByteWriter w;
    w.u8(kRead);
    return w.take();
  };
  spec.reader_plan.decide = [quorum, k, params](const ReaderView& view)
      -> std::optional<ReaderDecision> {
    if (static_cast<int>(view.core->responses.size()) < quorum) return std::nullopt;
    ReaderCache cache = ReaderCache::decode(view.core->cache);
    Tag best = cache.tag;
    for (const Response& r : view.core->responses) {
      ServerState s = ServerState::decode(r.body);
      if (s.finalized_tag > best) best = s.finalized_tag;
    }
    ReaderDecision d;
    d.write_back = true;
    d.wb_tag = MsgTag::ValueIndependent;
    d.wb_quorum = quorum;
    if (best == cache.tag && !(cache.tag == Tag{})) {
      d.value = cache.value;
      d.new_cache = cache.encode();
      d.wb_body = label_body(kFinalize, best);
      return d;
    }
    if (best == Tag{}) {
      // Nothing written yet: the initial value is finalized everywhere.
      d.value = 0;
      d.new_cache = ReaderCache{Tag{}, 0}.encode();
      d.wb_body = label_body(kFinalize, best);
      return d;
    }
    std::vector<std::pair<int, coding::Symbol>> symbols;
    for (const Response& r : view.core->responses) {
      ServerState s = ServerState::decode(r.body);
      Bytes sym;
      if (s.finalized_tag == best && s.has_finalized_symbol) {
        sym = s.finalized_symbol;
      } else {
        for (const Version& v : s.unfinalized)
          if (v.tag == best) sym = v.symbol;
      }
      if (!sym.empty()) symbols.push_back({r.server, coding::Symbol(sym.begin(), sym.end())});
    }
    if (static_cast<int>(symbols.size()) < k) return std::nullopt;  // wait for more responses
    std::vector<uint8_t> value = coding::decode(
        std::vector<std::pair<int, coding::Symbol>>(symbols.begin(), symbols.begin() + k), params,
        1);
    d.value = value[0];
    d.new_cache = ReaderCache{best, d.value}.encode();
    d.wb_body = label_body(kFinalize, best);
    return d;
  };

  return spec;
}

}  // namespace regmem::algo
