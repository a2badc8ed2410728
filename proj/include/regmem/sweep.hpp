#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "regmem/algorithm.hpp"
#include "regmem/consistency.hpp"
#include "regmem/engine.hpp"
#include "regmem/history.hpp"

namespace regmem::sweep {

using namespace regmem::sim;

// One randomly scheduled run: a seeded interleaving of up to max_ops
// invocations over the spec's clients, with up to f start-of-run failures on
// some seeds, checked for atomicity afterwards.
struct SweepCase {
  uint64_t seed = 0;
  consistency::History history;
  consistency::Verdict verdict;
  std::set<int> failed;
};

struct SweepOptions {
  int max_ops = 5;
  bool inject_failures = true;
};

inline bool all_idle(const Engine& eng) {
  const AlgorithmSpec& spec = eng.spec();
  for (int w = 0; w < spec.num_writers; ++w)
    if (eng.writer_core(w).active) return false;
  for (int r = 0; r < spec.num_readers; ++r)
    if (eng.reader_core(r).active) return false;
  return true;
}

inline SweepCase run_schedule(const AlgorithmSpec& spec, uint64_t seed,
                              const SweepOptions& opt = {}) {
  if (spec.value_count < 2 && opt.max_ops > 0)
    throw InvalidParams("schedules need at least two values to write");
  std::mt19937_64 rng(seed);
  SweepCase out;
  out.seed = seed;

  Engine eng(spec, initial_configuration(spec));
  eng.set_record_points(false);

  if (opt.inject_failures && spec.max_failures > 0 && rng() % 3 == 0) {
    int count = 1 + static_cast<int>(rng() % spec.max_failures);
    while (static_cast<int>(out.failed.size()) < count)
      out.failed.insert(1 + static_cast<int>(rng() % spec.num_servers));
    eng.fail_servers(out.failed);
  }

  int total_ops = opt.max_ops < 1 ? 0 : 1 + static_cast<int>(rng() % opt.max_ops);
  uint32_t next_op = 1;
  uint32_t write_counter = 0;
  int launched = 0;

  while (launched < total_ops || !all_idle(eng)) {
    bool want_invoke = launched < total_ops && (all_idle(eng) || rng() % 4 == 0);
    if (want_invoke) {
      bool is_write = launched == 0 || rng() % 2 == 0;
      if (is_write) {
        std::vector<int> idle;
        for (int w = 0; w < spec.num_writers; ++w)
          if (!eng.writer_core(w).active) idle.push_back(w);
        if (!idle.empty()) {
          int w = idle[rng() % idle.size()];
          uint32_t v = 1 + (write_counter++ % (spec.value_count - 1));
          eng.invoke_write(w, next_op++, v);
          ++launched;
          continue;
        }
      }
      if (!eng.reader_core(0).active) {
        eng.invoke_read(0, next_op++);
        ++launched;
        continue;
      }
    }
    // A bounded burst of random steps between invocation decisions.
    size_t burst = 1 + rng() % 8;
    auto stop = [target = eng.execution().steps.size() + burst](const Engine& e) {
      return e.execution().steps.size() >= target;
    };
    if (eng.run_random(stop, rng, /*quiesce_ok=*/true) == Engine::RunOutcome::Quiesced &&
        launched >= total_ops)
      break;
  }

  out.history = consistency::extract_history(eng.execution());
  out.verdict = consistency::check_atomic(out.history);
  return out;
}

struct SweepSummary {
  int runs = 0;
  int ok = 0;
  std::vector<SweepCase> failures;
};

inline SweepSummary run_sweep(const AlgorithmSpec& spec, uint64_t first_seed, int count,
                              const SweepOptions& opt = {}) {
  SweepSummary s;
  for (int i = 0; i < count; ++i) {
    SweepCase c = run_schedule(spec, first_seed + static_cast<uint64_t>(i), opt);
    s.runs++;
    if (c.verdict.ok)
      s.ok++;
    else
      s.failures.push_back(std::move(c));
  }
  return s;
}

}  // namespace regmem::sweep
