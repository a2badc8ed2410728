#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "regmem/engine.hpp"
#include "regmem/errors.hpp"

namespace regmem::consistency {

using sim::NodeId;

struct Operation {
  uint32_t op_id = 0;
  NodeId client;
  bool is_write = true;
  std::optional<uint32_t> value;  // written value, or returned value for reads
  size_t invoke_point = 0;
  std::optional<size_t> respond_point;

  bool complete() const { return respond_point.has_value(); }

  // Real-time precedence.
  bool precedes(const Operation& o) const {
    return complete() && *respond_point < o.invoke_point;
  }

  bool overlaps(const Operation& o) const { return !precedes(o) && !o.precedes(*this); }
};

struct History {
  std::vector<Operation> ops;
  uint32_t initial_value = 0;

  std::vector<const Operation*> writes() const {
    std::vector<const Operation*> out;
    for (const auto& op : ops)
      if (op.is_write) out.push_back(&op);
    return out;
  }

  std::vector<const Operation*> reads() const {
    std::vector<const Operation*> out;
    for (const auto& op : ops)
      if (!op.is_write) out.push_back(&op);
    return out;
  }
};

// Pull the operation record out of an execution's step events.
inline History extract_history(const sim::Execution& exec, uint32_t initial_value = 0) {
  History h;
  h.initial_value = initial_value;
  std::map<uint32_t, size_t> open;  // op_id -> index in h.ops
  for (size_t i = 0; i < exec.steps.size(); ++i) {
    const auto& ev = exec.steps[i].event;
    if (!ev) continue;
    if (ev->is_invoke) {
      if (open.count(ev->op_id)) throw MalformedHistory("duplicate invocation");
      Operation op;
      op.op_id = ev->op_id;
      op.client = ev->client;
      op.is_write = ev->is_write;
      if (ev->is_write && ev->has_value) op.value = ev->value;
      op.invoke_point = i;
      open[ev->op_id] = h.ops.size();
      h.ops.push_back(op);
    } else {
      auto it = open.find(ev->op_id);
      if (it == open.end()) throw MalformedHistory("response without invocation");
      Operation& op = h.ops[it->second];
      if (op.respond_point) throw MalformedHistory("duplicate response");
      op.respond_point = i;
      if (ev->has_value) op.value = ev->value;
    }
  }
  return h;
}

inline std::string history_jsonl(const History& h) {
  std::ostringstream os;
  for (const Operation& op : h.ops) {
    os << "{\"op\":" << op.op_id << ",\"client\":\"" << sim::to_string(op.client) << "\",\"kind\":\""
       << (op.is_write ? "write" : "read") << "\",\"invoke\":" << op.invoke_point;
    if (op.respond_point) os << ",\"respond\":" << *op.respond_point;
    if (op.value) os << ",\"value\":" << *op.value;
    os << "}\n";
  }
  return os.str();
}

}  // namespace regmem::consistency
