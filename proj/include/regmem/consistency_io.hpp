#pragma once

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "regmem/consistency.hpp"
#include "regmem/history.hpp"

namespace regmem::consistency {

inline History history_from_jsonl(const std::string& text, uint32_t initial_value = 0) {
  History h;
  h.initial_value = initial_value;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Operation op;
    op.op_id = j.at("op").get<uint32_t>();
    std::string client = j.at("client").get<std::string>();
    if (client.empty() || (client[0] != 'w' && client[0] != 'r'))
      throw MalformedHistory("client must look like w<i> or r<i>");
    int index = std::stoi(client.substr(1));
    op.client = client[0] == 'w' ? sim::writer(index) : sim::reader(index);
    op.is_write = j.at("kind").get<std::string>() == "write";
    op.invoke_point = j.at("invoke").get<size_t>();
    if (j.contains("respond")) op.respond_point = j.at("respond").get<size_t>();
    if (j.contains("value")) op.value = j.at("value").get<uint32_t>();
    h.ops.push_back(op);
  }
  return h;
}

inline nlohmann::ordered_json verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["ok"] = v.ok;
  if (v.ok) {
    j["serialization"] = v.serialization;
  } else if (v.violation) {
    j["violation"] = {{"read_op", v.violation->read_op},
                      {"candidate_values", v.violation->candidate_values},
                      {"detail", v.violation->detail}};
  }
  return j;
}

}  // namespace regmem::consistency
