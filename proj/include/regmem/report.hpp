#pragma once

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "regmem/adversary.hpp"

namespace regmem::adversary {

inline nlohmann::ordered_json witness_report_json(const WitnessReport& rep) {
  nlohmann::ordered_json j;
  j["theorem"] = rep.theorem;
  j["algorithm"] = rep.algorithm;
  j["parameters"] = {{"N", rep.num_servers},
                     {"f", rep.max_failures},
                     {"nu", rep.max_active_writes},
                     {"value_count", rep.value_count}};
  j["subset"] = rep.subset;
  j["family_size"] = rep.family_size;
  j["distinct_fingerprints"] = rep.distinct_fingerprints;
  j["injective"] = rep.injective;
  j["endpoint_valencies_ok"] = rep.endpoint_valencies_ok;
  j["probe_values_ok"] = rep.probe_values_ok;
  j["locality_ok"] = rep.locality_ok;
  if (rep.hypothesis_note_outside)
    j["hypothesis_note"] = "f < 2: outside the stated hypothesis of the no-gossip bound";
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [s, c] : rep.per_server_states) counts["server_" + std::to_string(s)] = c;
  j["per_server_state_counts"] = counts;
  j["product_check"] = {{"lhs", rep.product_lhs.str()},
                        {"rhs", rep.product_rhs.str()},
                        {"holds", rep.product_holds}};
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const auto& c : rep.collisions) {
    nlohmann::ordered_json jc;
    jc["tuple_a"] = c.tuple_a;
    jc["tuple_b"] = c.tuple_b;
    jc["replayed"] = c.replayed;
    if (c.replayed) {
      jc["replay_violates"] = c.replay_violates;
      jc["replay_detail"] = c.replay_detail;
    }
    cols.push_back(jc);
  }
  j["collisions"] = cols;
  nlohmann::ordered_json viols = nlohmann::ordered_json::array();
  for (const auto& v : rep.violations) {
    viols.push_back({{"tuple", v.tuple}, {"detail", v.detail}});
  }
  j["violations"] = viols;
  j["ok"] = rep.ok();
  j["probe_approximation"] = rep.approximation_note;
  return j;
}

}  // namespace regmem::adversary
