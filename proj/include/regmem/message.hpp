#pragma once

#include <compare>

#include "regmem/actor.hpp"
#include "regmem/bytes.hpp"

namespace regmem::sim {

enum class MsgTag : uint8_t { ValueIndependent = 0, ValueDependent = 1 };

// Payloads are canonically encoded by the sending algorithm; the tag is
// assigned by the sender's classifier and never mutated in transit.
struct Message {
  NodeId src;
  NodeId dst;
  Bytes payload;
  MsgTag tag = MsgTag::ValueIndependent;

  auto operator<=>(const Message&) const = default;

  bool value_dependent() const { return tag == MsgTag::ValueDependent; }
};

// A message produced by a transition, before the engine routes it.
struct Outgoing {
  NodeId dst;
  Bytes payload;
  MsgTag tag = MsgTag::ValueIndependent;
};

}  // namespace regmem::sim
