#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "regmem/algorithm.hpp"
#include "regmem/engine.hpp"
#include "regmem/errors.hpp"

namespace regmem::adversary {

using namespace regmem::sim;

struct AssumptionReport {
  bool writer_state_shape = false;   // (v, m, h) with black-box transitions
  bool phase_decomposition = false;  // well-formed phases
  bool single_value_phase = false;   // at most one value-dependent phase, none after it
  std::vector<std::string> failures;

  bool ok() const { return writer_state_shape && phase_decomposition && single_value_phase; }

  void raise_if_failed() const {
    if (ok()) return;
    std::ostringstream os;
    os << "protocol assumptions violated:";
    for (const auto& f : failures) os << " " << f << ";";
    throw AssumptionViolation(os.str());
  }
};

namespace validate_detail {

// Metadata trajectory of one isolated write from the initial configuration.
inline std::vector<Bytes> metadata_trajectory(const AlgorithmSpec& spec, uint32_t value) {
  Configuration cfg = initial_configuration(spec);
  Constraints cons;
  for (int i = 0; i < spec.num_readers; ++i) cons.freeze_node_and_channels(cfg, reader(i));
  for (int i = 1; i < spec.num_writers; ++i) cons.freeze_node_and_channels(cfg, writer(i));
  Engine eng(spec, std::move(cfg), cons);
  eng.invoke_write(0, 1, value);
  eng.run_fair([](const Engine& e) { return e.execution().op_responded(1); });
  std::vector<Bytes> out;
  for (const Configuration& p : eng.execution().points) {
    WriterCore core = WriterCore::decode(p.client_states.at(writer(0)));
    out.push_back(core.metadata());
  }
  return out;
}

}  // namespace validate_detail

// Check the protocol against the restricted-class requirements: a writer state
// that splits into (value, metadata, h) with black-box transitions, a phase
// decomposition, and no value-dependent sends after the value-dependent phase.
// The black-box check runs the same schedule for two values and compares the
// metadata trajectories byte for byte.
inline AssumptionReport validate_assumptions(const AlgorithmSpec& spec) {
  AssumptionReport rep;

  if (spec.value_count >= 2) {
    auto t1 = validate_detail::metadata_trajectory(spec, 0);
    auto t2 = validate_detail::metadata_trajectory(spec, spec.value_count - 1);
    rep.writer_state_shape = t1 == t2;
    if (!rep.writer_state_shape)
      rep.failures.push_back(
          "metadata trajectories diverge between values, so some writer action is not black-box");
  } else {
    rep.writer_state_shape = true;
  }

  rep.phase_decomposition = !spec.writer_plan.phases.empty();
  if (!rep.phase_decomposition) rep.failures.push_back("writer plan has no phases");
  for (size_t i = 0; i < spec.writer_plan.phases.size(); ++i) {
    const PhaseDef& p = spec.writer_plan.phases[i];
    if (!p.build) {
      rep.phase_decomposition = false;
      rep.failures.push_back("phase '" + p.label + "' has no message builder");
    }
    if (p.quorum < 1 || p.quorum > spec.num_servers) {
      rep.phase_decomposition = false;
      rep.failures.push_back("phase '" + p.label + "' has an unsatisfiable quorum");
    }
  }

  rep.single_value_phase = true;
  bool seen_vd = false;
  for (const PhaseDef& p : spec.writer_plan.phases) {
    if (p.value_dependent) {
      if (seen_vd) {
        rep.single_value_phase = false;
        rep.failures.push_back("phase '" + p.label +
                               "' sends value-dependent messages after an earlier "
                               "value-dependent phase");
      }
      seen_vd = true;
    }
  }

  return rep;
}

}  // namespace regmem::adversary
