// Batch front-end: exact bound tables, adversarial witness runs, seeded
// consistency sweeps, and the joint-encoding subtraction demo.
//
// Exit codes: 0 = all checks pass, 1 = a violation was found and serialized,
// 2 = configuration or environment error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "regmem/algorithms/abd.hpp"
#include "regmem/algorithms/coded.hpp"
#include "regmem/algorithms/xor_demo.hpp"
#include "regmem/bounds.hpp"
#include "regmem/report.hpp"
#include "regmem/staged.hpp"
#include "regmem/sweep.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::string algorithm = "abd";
  int num_servers = 4;
  int max_failures = 2;
  int nu = 2;
  uint32_t values = 4;
  std::string subset;  // comma-separated server indices
  std::string out;
};

// Flags win over the config file; the file fills in anything not given.
void apply_config(const CLI::App& app, CommonArgs& a) {
  if (a.config_path.empty()) return;
  std::ifstream in(a.config_path);
  if (!in) throw regmem::InvalidParams("cannot open config file " + a.config_path);
  json cfg = json::parse(in);
  auto fill = [&](const char* flag, const char* key, auto& slot) {
    using T = std::decay_t<decltype(slot)>;
    if (app.count(flag) == 0 && cfg.contains(key)) slot = cfg.at(key).get<T>();
  };
  fill("--algorithm", "algorithm", a.algorithm);
  fill("--N", "N", a.num_servers);
  fill("--f", "f", a.max_failures);
  fill("--nu", "nu", a.nu);
  fill("--values", "values", a.values);
  fill("--subset", "subset", a.subset);
  fill("--out", "out", a.out);
}

std::vector<int> parse_subset(const std::string& s, int num_servers, int max_failures) {
  std::vector<int> out;
  if (s.empty()) {
    for (int i = 1; i <= num_servers - max_failures; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

regmem::sim::AlgorithmSpec make_spec(const CommonArgs& a) {
  using namespace regmem::algo;
  if (a.algorithm == "abd") return abd_spec(a.num_servers, a.max_failures, a.values, std::max(2, a.nu));
  if (a.algorithm == "abd-stale-store")
    return abd_spec(a.num_servers, a.max_failures, a.values, std::max(2, a.nu), 1, true);
  if (a.algorithm == "coded")
    return coded_spec(a.num_servers, a.max_failures, a.nu, a.values, false, std::max(2, a.nu));
  if (a.algorithm == "coded-gossip")
    return coded_spec(a.num_servers, a.max_failures, a.nu, a.values, true, std::max(2, a.nu));
  if (a.algorithm == "xor-demo") return xor_demo_spec();
  throw regmem::InvalidParams("unknown algorithm: " + a.algorithm);
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw regmem::InvalidParams("cannot write " + path);
  out << content;
}

int cmd_bounds(int num_servers, int max_failures, int nu_max, const std::string& out) {
  auto table = regmem::bounds::figure1_table(num_servers, max_failures, nu_max);
  write_or_print(out, regmem::bounds::figure1_csv(table));
  if (table.crossover_nu > 0)
    std::cerr << "erasure upper bound first exceeds replication at nu=" << table.crossover_nu
              << "\n";
  else
    std::cerr << "no replication/erasure crossover within nu range\n";
  return 0;
}

int cmd_witness(const CommonArgs& a, int theorem) {
  using namespace regmem::adversary;
  regmem::sim::AlgorithmSpec spec = make_spec(a);
  std::vector<int> live = parse_subset(a.subset, a.num_servers, a.max_failures);
  WitnessReport rep;
  switch (theorem) {
    case 1:
      rep = witness_thm1(spec, live);
      break;
    case 2:
      rep = witness_thm2(spec, live);
      break;
    case 3:
      rep = witness_thm3(spec, live);
      break;
    case 4:
      rep = witness_thm4(spec, a.nu);
      break;
    default:
      throw regmem::InvalidParams("theorem must be 1..4");
  }
  write_or_print(a.out, witness_report_json(rep).dump(2) + "\n");
  std::cerr << "theorem " << theorem << " witness on " << spec.name << ": "
            << (rep.ok() ? "all checks hold" : "violation or collision found") << "\n";
  return rep.ok() ? 0 : 1;
}

int cmd_simulate(const CommonArgs& a, uint64_t first_seed, int seeds, int ops,
                 bool expect_violation, const std::string& trace_out,
                 const std::string& drop_log_out) {
  regmem::sim::AlgorithmSpec spec = make_spec(a);
  regmem::sweep::SweepOptions opt;
  opt.max_ops = ops;
  opt.inject_failures = spec.name != "xor-demo";
  auto summary = regmem::sweep::run_sweep(spec, first_seed, seeds, opt);

  json j;
  j["algorithm"] = spec.name;
  j["runs"] = summary.runs;
  j["atomic"] = summary.ok;
  j["violations"] = json::array();
  for (const auto& f : summary.failures) {
    json v;
    v["seed"] = f.seed;
    v["detail"] = f.verdict.violation ? f.verdict.violation->detail : "";
    v["history"] = regmem::consistency::history_jsonl(f.history);
    j["violations"].push_back(v);
  }
  write_or_print(a.out, j.dump(2) + "\n");

  if (!trace_out.empty() || !drop_log_out.empty()) {
    regmem::sim::Engine eng(spec, regmem::sim::initial_configuration(spec));
    eng.invoke_write(0, 1, 1 % spec.value_count);
    eng.run_fair([](const regmem::sim::Engine& e) { return e.execution().op_responded(1); },
                 first_seed);
    if (!trace_out.empty())
      write_or_print(trace_out, regmem::sim::execution_trace_jsonl(eng.execution()));
    if (!drop_log_out.empty())
      write_or_print(drop_log_out, regmem::sim::drop_log_csv(eng.execution()));
  }

  bool violated = !summary.failures.empty();
  std::cerr << spec.name << ": " << summary.ok << "/" << summary.runs
            << " seeded schedules atomic\n";
  if (expect_violation) return violated ? 0 : 1;
  return violated ? 1 : 0;
}

int cmd_appendix_a() {
  using namespace regmem;
  auto spec = algo::xor_demo_spec();
  const gf::Field& f = gf::field16();

  Bytes st = spec.server_init(1);
  st = algo::xor_demo::add(spec, st, 5);
  st = algo::xor_demo::add(spec, st, 9);
  st = algo::xor_demo::add(spec, st, 14);
  uint8_t total = algo::xor_demo::stored_sum(st);
  Bytes st2 = algo::xor_demo::remove(spec, st, 9);
  uint8_t remaining = algo::xor_demo::stored_sum(st2);
  std::cout << "server stores v1+v2+v3 = " << int(total) << " (1 field element)\n";
  std::cout << "after removing v2's contribution it stores v1+v3 = " << int(remaining)
            << " (still 1 field element)\n";
  std::cout << "subtracting the two contents recovers v2 = " << int(f.sub(total, remaining))
            << "\n";

  uint64_t checked = 0, recovered = 0;
  for (uint32_t v1 = 0; v1 < f.size(); ++v1) {
    for (uint32_t v2 = 0; v2 < f.size(); ++v2) {
      for (uint32_t v3 = 0; v3 < f.size(); ++v3) {
        Bytes s = spec.server_init(1);
        s = algo::xor_demo::add(spec, s, static_cast<uint8_t>(v1));
        s = algo::xor_demo::add(spec, s, static_cast<uint8_t>(v2));
        s = algo::xor_demo::add(spec, s, static_cast<uint8_t>(v3));
        uint8_t all = algo::xor_demo::stored_sum(s);
        Bytes s2 = algo::xor_demo::remove(spec, s, static_cast<uint8_t>(v2));
        bool size_constant = s.size() == s2.size();
        ++checked;
        if (f.sub(all, algo::xor_demo::stored_sum(s2)) == v2 && size_constant) ++recovered;
      }
    }
  }
  std::cout << "GF(16) sweep: " << recovered << "/" << checked
            << " triples recover v2 by subtraction with constant stored size\n";
  return recovered == checked ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storage-bound witness harness for replicated register emulations"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* bounds_cmd = app.add_subcommand("bounds", "emit the normalized storage-cost table");
  int nu_max = 15;
  bounds_cmd->add_option("--N", args.num_servers, "number of servers");
  bounds_cmd->add_option("--f", args.max_failures, "failure tolerance");
  bounds_cmd->add_option("--nu-max", nu_max, "largest active-write bound in the table");
  bounds_cmd->add_option("--out", args.out, "CSV output path (stdout if omitted)");
  bounds_cmd->add_option("--config", args.config_path, "JSON config file; flags win");

  auto* witness_cmd = app.add_subcommand("witness", "run an adversarial witness construction");
  int theorem = 1;
  witness_cmd->add_option("--theorem", theorem, "which bound's witness to run (1..4)")
      ->required();
  witness_cmd->add_option("--algorithm", args.algorithm, "abd | coded | coded-gossip | abd-stale-store");
  witness_cmd->add_option("--N", args.num_servers, "number of servers");
  witness_cmd->add_option("--f", args.max_failures, "failure tolerance");
  witness_cmd->add_option("--nu", args.nu, "active-write bound");
  witness_cmd->add_option("--values", args.values, "size of the value domain");
  witness_cmd->add_option("--subset", args.subset, "live servers, comma separated");
  witness_cmd->add_option("--out", args.out, "JSON report path (stdout if omitted)");
  witness_cmd->add_option("--config", args.config_path, "JSON config file; flags win");

  auto* sim_cmd = app.add_subcommand("simulate", "consistency sweep over seeded schedules");
  uint64_t first_seed = 1;
  int seeds = 1000;
  int ops = 5;
  bool expect_violation = false;
  std::string trace_out, drop_log_out;
  sim_cmd->add_option("--algorithm", args.algorithm, "abd | coded | xor-demo | abd-stale-store");
  sim_cmd->add_option("--N", args.num_servers, "number of servers");
  sim_cmd->add_option("--f", args.max_failures, "failure tolerance");
  sim_cmd->add_option("--nu", args.nu, "active-write bound (coded retention)");
  sim_cmd->add_option("--values", args.values, "size of the value domain");
  sim_cmd->add_option("--first-seed", first_seed, "first schedule seed");
  sim_cmd->add_option("--seeds", seeds, "number of seeded schedules");
  sim_cmd->add_option("--ops", ops, "operations per schedule (at most)");
  sim_cmd->add_flag("--expect-violation", expect_violation,
                    "succeed only if some schedule violates atomicity");
  sim_cmd->add_option("--out", args.out, "JSON summary path (stdout if omitted)");
  sim_cmd->add_option("--trace-out", trace_out, "JSONL trace of one isolated write");
  sim_cmd->add_option("--drop-log-out", drop_log_out, "CSV drop log of the same run");
  sim_cmd->add_option("--config", args.config_path, "JSON config file; flags win");

  auto* appendix_cmd =
      app.add_subcommand("appendix-a", "joint-encoding subtraction demo over GF(16)");
  (void)appendix_cmd;

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds_cmd->parsed()) {
      apply_config(*bounds_cmd, args);
      return cmd_bounds(args.num_servers, args.max_failures, nu_max, args.out);
    }
    if (witness_cmd->parsed()) {
      apply_config(*witness_cmd, args);
      return cmd_witness(args, theorem);
    }
    if (sim_cmd->parsed()) {
      apply_config(*sim_cmd, args);
      return cmd_simulate(args, first_seed, seeds, ops, expect_violation, trace_out,
                          drop_log_out);
    }
    if (appendix_cmd->parsed()) return cmd_appendix_a();
  } catch (const regmem::InvalidParams& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const regmem::HypothesisViolation& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return 2;
  } catch (const regmem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
