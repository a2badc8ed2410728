#pragma once

#include <compare>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>

namespace regmem::sim {

enum class NodeKind : uint8_t { Server = 0, Writer = 1, Reader = 2 };

// A protocol participant. Servers are 1..N; writers and readers are indexed
// from 0 within their kind.
struct NodeId {
  NodeKind kind = NodeKind::Server;
  int index = 0;

  auto operator<=>(const NodeId&) const = default;

  bool is_server() const { return kind == NodeKind::Server; }
  bool is_client() const { return kind != NodeKind::Server; }
};

inline NodeId server(int i) { return {NodeKind::Server, i}; }
inline NodeId writer(int i) { return {NodeKind::Writer, i}; }
inline NodeId reader(int i) { return {NodeKind::Reader, i}; }

inline std::string to_string(const NodeId& n) {
  std::ostringstream os;
  switch (n.kind) {
    case NodeKind::Server:
      os << "s" << n.index;
      break;
    case NodeKind::Writer:
      os << "w" << n.index;
      break;
    case NodeKind::Reader:
      os << "r" << n.index;
      break;
  }
  return os.str();
}

// Point-to-point channel, identified by its ordered endpoint pair.
struct ChannelId {
  NodeId src;
  NodeId dst;

  auto operator<=>(const ChannelId&) const = default;

  bool inter_server() const { return src.is_server() && dst.is_server(); }
  bool from_client() const { return src.is_client(); }
};

inline std::string to_string(const ChannelId& c) {
  return to_string(c.src) + ">" + to_string(c.dst);
}

// Scheduler-facing actor: a node or a channel.
struct ActorId {
  std::variant<NodeId, ChannelId> v;

  ActorId(NodeId n) : v(n) {}
  ActorId(ChannelId c) : v(c) {}

  bool is_node() const { return std::holds_alternative<NodeId>(v); }
  bool is_channel() const { return std::holds_alternative<ChannelId>(v); }
  const NodeId& node() const { return std::get<NodeId>(v); }
  const ChannelId& channel() const { return std::get<ChannelId>(v); }

  auto operator<=>(const ActorId&) const = default;
};

inline std::string to_string(const ActorId& a) {
  return a.is_node() ? to_string(a.node()) : to_string(a.channel());
}

}  // namespace regmem::sim
