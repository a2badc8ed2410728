#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "regmem/errors.hpp"
#include "regmem/history.hpp"

namespace regmem::consistency {

struct Violation {
  uint32_t read_op = 0;
  std::vector<uint32_t> candidate_values;
  std::string detail;
};

struct Verdict {
  bool ok = false;
  std::vector<uint32_t> serialization;  // witness order of op ids when ok
  std::optional<Violation> violation;

  static Verdict pass(std::vector<uint32_t> order) { return {true, std::move(order), {}}; }
  static Verdict fail(Violation v) { return {false, {}, std::move(v)}; }
};

namespace detail {

inline void require_single_reader(const History& h) {
  std::set<NodeId> readers;
  for (const auto& op : h.ops)
    if (!op.is_write) readers.insert(op.client);
  if (readers.size() > 1) throw MalformedHistory("more than one read client");
}

inline void require_single_writer(const History& h) {
  std::set<NodeId> writers;
  for (const auto& op : h.ops)
    if (op.is_write) writers.insert(op.client);
  if (writers.size() > 1) throw MalformedHistory("more than one write client");
}

// Exhaustive precedence-respecting linearization search over the register
// type. Complete ops must all be placed; incomplete ops are optional. Desk
// scale keeps this exact: the memo caps the state space at 2^ops * values.
class LinSearch {
 public:
  LinSearch(const History& h, std::vector<const Operation*> ops, size_t max_ops)
      : initial_(h.initial_value), ops_(std::move(ops)) {
    if (ops_.size() > max_ops)
      throw SearchBudgetExceeded("history too large for exhaustive linearization");
  }

  std::optional<std::vector<uint32_t>> run() {
    order_.clear();
    seen_.clear();
    if (search(0, initial_)) return order_;
    return std::nullopt;
  }

 private:
  bool search(uint32_t placed_mask, uint32_t reg) {
    if (!seen_.insert((static_cast<uint64_t>(placed_mask) << 32) | reg).second) return false;
    bool all_complete_placed = true;
    for (size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i]->complete() && !(placed_mask & (1u << i))) all_complete_placed = false;
    if (all_complete_placed) return true;

    for (size_t i = 0; i < ops_.size(); ++i) {
      if (placed_mask & (1u << i)) continue;
      // Real-time order: an op may come next only if every op that precedes
      // it is already placed.
      bool ready = true;
      for (size_t j = 0; j < ops_.size(); ++j) {
        if (i == j || (placed_mask & (1u << j))) continue;
        if (ops_[j]->precedes(*ops_[i])) {
          ready = false;
          break;
        }
      }
      if (!ready) continue;
      const Operation* op = ops_[i];
      if (op->is_write) {
        order_.push_back(op->op_id);
        if (search(placed_mask | (1u << i), op->value.value_or(reg))) return true;
        order_.pop_back();
      } else {
        if (op->value && *op->value != reg) continue;  // read must see the register
        order_.push_back(op->op_id);
        if (search(placed_mask | (1u << i), reg)) return true;
        order_.pop_back();
      }
      // Incomplete ops may also be dropped entirely, which the placed_mask
      // encoding covers by simply never placing them.
    }
    return false;
  }

  uint32_t initial_;
  std::vector<const Operation*> ops_;
  std::vector<uint32_t> order_;
  std::set<uint64_t> seen_;
};

}  // namespace detail

// SWSR regularity: every completed read returns the latest write completed
// before its invocation (the initial value if none) or the value of an
// overlapping write.
inline Verdict check_regular(const History& h) {
  detail::require_single_reader(h);
  detail::require_single_writer(h);
  for (const auto* r : h.reads())
    if (!r->complete()) throw MalformedHistory("regularity check needs completed reads");

  for (const auto* r : h.reads()) {
    std::vector<uint32_t> legal;
    const Operation* latest = nullptr;
    for (const auto* w : h.writes()) {
      if (w->complete() && *w->respond_point < r->invoke_point) {
        if (!latest || *w->respond_point > *latest->respond_point) latest = w;
      }
    }
    legal.push_back(latest ? *latest->value : h.initial_value);
    for (const auto* w : h.writes()) {
      bool completed_before = w->complete() && *w->respond_point < r->invoke_point;
      bool invoked_before_read_end = w->invoke_point < *r->respond_point;
      if (!completed_before && invoked_before_read_end) legal.push_back(*w->value);
    }
    if (std::find(legal.begin(), legal.end(), *r->value) == legal.end()) {
      Violation v;
      v.read_op = r->op_id;
      v.candidate_values = legal;
      std::ostringstream os;
      os << "read " << r->op_id << " returned " << *r->value
         << " which no preceding or overlapping write allows";
      v.detail = os.str();
      return Verdict::fail(v);
    }
  }
  std::vector<uint32_t> order;
  for (const auto& op : h.ops) order.push_back(op.op_id);
  return Verdict::pass(order);
}

// Atomicity (linearizability) for single-reader histories via exhaustive
// search over precedence-respecting serializations.
inline Verdict check_atomic(const History& h, size_t max_ops = 12) {
  detail::require_single_reader(h);
  std::vector<const Operation*> ops;
  for (const auto& op : h.ops) {
    if (!op.is_write && !op.complete()) continue;  // incomplete reads constrain nothing
    if (!op.is_write && !op.value) throw MalformedHistory("completed read without a value");
    ops.push_back(&op);
  }
  detail::LinSearch search(h, ops, max_ops);
  if (auto order = search.run()) return Verdict::pass(*order);

  Violation v;
  for (const auto* r : h.reads())
    if (r->complete()) v.read_op = r->op_id;
  for (const auto* w : h.writes())
    if (w->value) v.candidate_values.push_back(*w->value);
  v.detail = "no precedence-respecting serialization of the register history exists";
  return Verdict::fail(v);
}

// Weak regularity: per terminating read, some subset of the non-terminating
// writes joins the completed writes to form a serial execution containing
// that read.
inline Verdict check_weakly_regular(const History& h, size_t max_ops = 12) {
  detail::require_single_reader(h);
  std::vector<uint32_t> order;
  for (const auto* r : h.reads()) {
    if (!r->complete()) continue;
    std::vector<const Operation*> ops;
    ops.push_back(r);
    for (const auto* w : h.writes()) ops.push_back(w);  // incomplete writes are optional
    detail::LinSearch search(h, ops, max_ops);
    auto sub = search.run();
    if (!sub) {
      Violation v;
      v.read_op = r->op_id;
      for (const auto* w : h.writes())
        if (w->value) v.candidate_values.push_back(*w->value);
      v.detail = "no subset of incomplete writes serializes with this read";
      return Verdict::fail(v);
    }
    for (uint32_t id : *sub) order.push_back(id);
  }
  return Verdict::pass(order);
}

}  // namespace regmem::consistency
