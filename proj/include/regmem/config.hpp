#pragma once

#include <deque>
#include <map>
#include <set>

#include "regmem/actor.hpp"
#include "regmem/bytes.hpp"
#include "regmem/message.hpp"

namespace regmem::sim {

// Full global snapshot: node states, channel queues, failure and freeze sets.
// Configurations are plain values; the engine derives each one from its
// predecessor by exactly one actor's action.
struct Configuration {
  std::map<NodeId, Bytes> server_states;
  std::map<NodeId, Bytes> client_states;
  std::map<ChannelId, std::deque<Message>> channels;
  std::set<NodeId> failed;
  std::set<ActorId> frozen;
  uint64_t step_count = 0;

  bool operator==(const Configuration& o) const {
    return server_states == o.server_states && client_states == o.client_states &&
           channels == o.channels && failed == o.failed;
  }

  const Bytes& node_state(const NodeId& n) const {
    return n.is_server() ? server_states.at(n) : client_states.at(n);
  }

  Bytes& node_state(const NodeId& n) {
    return n.is_server() ? server_states.at(n) : client_states.at(n);
  }

  bool has_node(const NodeId& n) const {
    return n.is_server() ? server_states.count(n) > 0 : client_states.count(n) > 0;
  }

  bool is_failed(const NodeId& n) const { return failed.count(n) > 0; }
  bool is_frozen(const ActorId& a) const { return frozen.count(a) > 0; }
};

// Servers whose state differs between two configurations.
inline std::set<NodeId> changed_servers(const Configuration& a, const Configuration& b) {
  std::set<NodeId> out;
  for (const auto& [n, st] : a.server_states) {
    auto it = b.server_states.find(n);
    if (it == b.server_states.end() || it->second != st) out.insert(n);
  }
  for (const auto& [n, st] : b.server_states)
    if (!a.server_states.count(n)) out.insert(n);
  return out;
}

// Inter-server channels whose queue differs between two configurations.
inline std::set<ChannelId> changed_inter_server_channels(const Configuration& a,
                                                         const Configuration& b) {
  std::set<ChannelId> out;
  for (const auto& [c, q] : a.channels) {
    if (!c.inter_server()) continue;
    auto it = b.channels.find(c);
    if (it == b.channels.end() || it->second != q) out.insert(c);
  }
  for (const auto& [c, q] : b.channels) {
    if (!c.inter_server()) continue;
    if (!a.channels.count(c) && !q.empty()) out.insert(c);
  }
  return out;
}

}  // namespace regmem::sim
