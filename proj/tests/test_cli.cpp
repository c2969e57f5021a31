#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isim/cli.hpp"
#include "isim/exchange.hpp"
#include "isim/protocols.hpp"
#include "isim/serial.hpp"
#include "isim/verdict.hpp"

using namespace isim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "isim");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliResult res;
  try {
    res.code = cli_main(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  res.out = out.str();
  res.err = err.str();
  return res;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "isim_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::path p = dir / name;
  std::ofstream os(p);
  os << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

size_t line_count(const std::string& text) {
  size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// Two-lane merge, empty exchange, full NF enumeration (43 adversaries at
// horizon 3), traffic-light protocol.
json merge_base() {
  return json::parse(R"({
    "intersection": { "lanes_in": [0, 1], "lanes_out": [2] },
    "exchange": "empty",
    "pool": [1, 2],
    "horizon": 3,
    "adversaries": { "model": "NF" },
    "protocol": "traffic_light",
    "checks": ["validity", "safety"]
  })");
}

fs::path write_scenario(const fs::path& dir, const std::string& name, const json& j) {
  return write_file(dir, name, j.dump(2) + "\n");
}

}  // namespace

TEST_CASE("usage errors exit two") {
  fs::path dir = scratch("usage");
  fs::path sc = write_scenario(dir, "s.json", merge_base());

  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate", sc.string()}).code == 2);
  CHECK(run_cli({"verify"}).code == 2);
  CHECK(run_cli({"verify", (dir / "missing.json").string()}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("simulate writes a replayable trace and report") {
  fs::path dir = scratch("simulate");
  fs::path sc = write_scenario(dir, "s.json", merge_base());
  fs::path out = dir / "out";

  CliResult res = run_cli({"simulate", sc.string(), "--out", out.string()});
  CHECK(res.code == 0);
  CHECK(res.out == read_file(out / "report.json"));

  json report = json::parse(res.out);
  CHECK(report["command"] == "simulate");
  CHECK(report["protocol"] == "traffic_light");
  CHECK(report["runs"] == 43);
  CHECK(report["context"]["adversaries"] == 43);
  CHECK(report["context"]["model"] == "NF");
  CHECK(report["context"]["truncated"] == false);
  CHECK(report["status"] == "pass");
  CHECK(report["go_actions"].get<long>() > 0);
  CHECK(report["crossings"].get<long>() > 0);

  std::string trace = read_file(out / "trace.jsonl");
  CHECK(line_count(trace) == 1 + 43 * 4);
  std::istringstream lines(trace);
  std::string line;
  std::getline(lines, line);
  json header = json::parse(line);
  CHECK(header["protocol"] == "traffic_light");
  CHECK(header["context"]["horizon"] == 3);
  std::getline(lines, line);
  json t0 = json::parse(line);
  CHECK(t0["t"] == 0);
  CHECK(t0.contains("queues"));
  CHECK(!t0.contains("actions"));
  std::getline(lines, line);
  json t1 = json::parse(line);
  CHECK(t1["t"] == 1);
  CHECK(t1.contains("actions"));
  CHECK(t1.contains("msgs_out"));
  CHECK(t1.contains("msgs_in"));
}

TEST_CASE("horizon and caps overrides flow into the context") {
  fs::path dir = scratch("overrides");
  fs::path sc = write_scenario(dir, "s.json", merge_base());
  fs::path out = dir / "out";

  CliResult shallow = run_cli({"simulate", sc.string(), "--horizon", "1", "--out", out.string()});
  CHECK(shallow.code == 0);
  CHECK(json::parse(shallow.out)["context"]["horizon"] == 1);

  CliResult capped = run_cli({"simulate", sc.string(), "--caps", "5", "--out", out.string()});
  CHECK(capped.code == 1);
  json report = json::parse(capped.out);
  CHECK(report["status"] == "inconclusive");
  CHECK(report["context"]["truncated"] == true);
  CHECK(report["context"]["adversaries"].get<long>() <= 5);

  CliResult tolerated = run_cli(
      {"simulate", sc.string(), "--caps", "5", "--allow-inconclusive", "--out", out.string()});
  CHECK(tolerated.code == 0);
}

TEST_CASE("verify selects checks and maps status to exit codes") {
  fs::path dir = scratch("verify");
  fs::path sc = write_scenario(dir, "s.json", merge_base());
  fs::path out = dir / "out";

  CliResult res = run_cli({"verify", sc.string(), "--out", out.string()});
  CHECK(res.code == 0);
  json report = json::parse(res.out);
  CHECK(report["command"] == "verify");
  CHECK(report["checks"].size() == 2);
  CHECK(report["checks"]["validity"]["status"] == "pass");
  CHECK(report["checks"]["validity"]["exact"] == true);
  CHECK(report["checks"]["safety"]["status"] == "pass");
  CHECK(report["status"] == "pass");

  CliResult late = run_cli({"verify", sc.string(), "--check", "liveness", "--liveness-bound",
                            "0", "--out", out.string()});
  CHECK(late.code == 1);
  json late_report = json::parse(late.out);
  CHECK(late_report["checks"].size() == 1);
  CHECK(late_report["checks"]["liveness"]["status"] == "fail");
  CHECK(late_report["checks"]["liveness"]["witness_count"].get<long>() > 0);

  // Bound 3 windows run past horizon 3 for late arrivals, so the check stays
  // open rather than failing.
  CliResult open = run_cli({"verify", sc.string(), "--check", "liveness", "--liveness-bound",
                            "3", "--out", out.string()});
  CHECK(open.code == 1);
  CHECK(json::parse(open.out)["checks"]["liveness"]["status"] == "inconclusive");
  CliResult tolerated =
      run_cli({"verify", sc.string(), "--check", "liveness", "--liveness-bound", "3",
               "--allow-inconclusive", "--out", out.string()});
  CHECK(tolerated.code == 0);

  CliResult unbounded =
      run_cli({"verify", sc.string(), "--check", "liveness", "--out", out.string()});
  CHECK(unbounded.code == 2);
  CHECK(unbounded.err.rfind("error:", 0) == 0);

  CliResult unknown =
      run_cli({"verify", sc.string(), "--check", "nonsense", "--out", out.string()});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("unknown check") != std::string::npos);
}

TEST_CASE("policy level checks run from the scenario list") {
  fs::path dir = scratch("policy_checks");
  json j = merge_base();
  j["policy"] = json::parse(R"({"kind": "cyclic", "cells": [[[0, 2]], [[1, 2]]]})");
  j["checks"] = {"conflict_free", "fairness", "pair_fairness", "efficient"};
  fs::path sc = write_scenario(dir, "s.json", j);
  fs::path out = dir / "out";

  CliResult res = run_cli({"verify", sc.string(), "--out", out.string()});
  CHECK(res.code == 0);
  json report = json::parse(res.out);
  CHECK(report["checks"].size() == 4);
  for (const char* name : {"conflict_free", "fairness", "pair_fairness", "efficient"})
    CHECK(report["checks"][name]["status"] == "pass");
}

TEST_CASE("compare reports equality and incomparability") {
  fs::path dir = scratch("compare");
  fs::path out = dir / "out";

  json equal = merge_base();
  equal["protocol_b"] = "p_empty";
  fs::path sc_equal = write_scenario(dir, "equal.json", equal);
  // Agents arriving in the last round never get a chance to cross, so the
  // domination verdict stays inconclusive even though the outcome is "equal".
  CliResult res = run_cli({"compare", sc_equal.string(), "--out", out.string()});
  CHECK(res.code == 1);
  json report = json::parse(res.out);
  CHECK(report["domination"]["verdict"]["status"] == "inconclusive");
  CHECK(report["first"] == "traffic_light");
  CHECK(report["second"] == "p_empty");
  CHECK(report["domination"]["outcome"] == "equal");
  CHECK(report["domination"]["strict"] == false);
  CHECK(report["lexicographic"]["first_dominates"] == true);
  CHECK(report["lexicographic"]["second_dominates"] == true);
  CHECK(!report.contains("win_waiting_cross_check"));

  CliResult lenient = run_cli(
      {"compare", sc_equal.string(), "--out", out.string(), "--allow-inconclusive"});
  CHECK(lenient.code == 0);

  // A solo agent crosses earlier under the rotation that favors its lane, so
  // the phase protocol and the shifted policy gate split the two runs.
  json split = merge_base();
  split["pool"] = {1};
  split["adversaries"] = json::parse(R"({"model": "NF", "list": [
    {"id": 0, "arrivals": [{"agent": 1, "time": 1, "lane": 0, "intent": 2}]},
    {"id": 1, "arrivals": [{"agent": 1, "time": 1, "lane": 1, "intent": 2}]}]})");
  split["protocol_b"] = "p_sigma";
  split["policy"] = json::parse(R"({"kind": "cyclic", "cells": [[[1, 2]], [[0, 2]]]})");
  fs::path sc_split = write_scenario(dir, "split.json", split);
  CliResult hung = run_cli({"compare", sc_split.string(), "--out", out.string()});
  CHECK(hung.code == 0);
  json split_report = json::parse(hung.out);
  CHECK(split_report["domination"]["verdict"]["status"] == "pass");
  CHECK(split_report["domination"]["outcome"] == "incomparable");
  CHECK(split_report["domination"]["first_faster"].get<long>() >= 1);
  CHECK(split_report["domination"]["second_faster"].get<long>() >= 1);
  CHECK(split_report.contains("win_waiting_cross_check"));

  json missing = merge_base();
  fs::path sc_missing = write_scenario(dir, "missing.json", missing);
  CliResult bad = run_cli({"compare", sc_missing.string(), "--out", out.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("protocol_b") != std::string::npos);
}

TEST_CASE("synthesize writes a table that reloads and implements") {
  fs::path dir = scratch("synthesize");
  json j = merge_base();
  j.erase("protocol");
  j.erase("checks");
  fs::path sc = write_scenario(dir, "s.json", j);
  fs::path out = dir / "out";

  CliResult res = run_cli({"synthesize", sc.string(), "--out", out.string()});
  CHECK(res.code == 0);
  json report = json::parse(res.out);
  CHECK(report["command"] == "synthesize");
  CHECK(report["policy"] == "empty");
  CHECK(report["next"] == "round_robin");
  CHECK(report["entries"].get<long>() > 0);
  CHECK(report["implements"]["status"] == "pass");

  fs::path table_path = out / "protocol.json";
  TableProtocol reloaded = load_table_protocol(table_path.string());
  CHECK(reloaded.exchange_name == "empty");
  CHECK(reloaded.entries.size() == report["entries"].get<size_t>());

  json again = merge_base();
  again["protocol"] = {{"table_file", table_path.string()}};
  again["program"] = {{"kind", "override"}};
  again["checks"] = {"implements"};
  fs::path sc_again = write_scenario(dir, "reload.json", again);
  CliResult implements = run_cli({"verify", sc_again.string(), "--out", out.string()});
  CHECK(implements.code == 0);
  CHECK(json::parse(implements.out)["checks"]["implements"]["status"] == "pass");

  json live = merge_base();
  live["protocol"] = "synthesized";
  fs::path sc_live = write_scenario(dir, "live.json", live);
  CHECK(run_cli({"simulate", sc_live.string(), "--out", out.string()}).code == 0);
}

TEST_CASE("extract refuses unsafe protocols and tabulates safe ones") {
  fs::path dir = scratch("extract");
  fs::path out = dir / "out";

  fs::path sc = write_scenario(dir, "safe.json", merge_base());
  CliResult res = run_cli({"extract", sc.string(), "--out", out.string()});
  CHECK(res.code == 0);
  json report = json::parse(res.out);
  CHECK(report["command"] == "extract");
  CHECK(report["validity"]["status"] == "pass");
  CHECK(report["safety"]["status"] == "pass");
  CHECK(report["conflict_free"]["status"] == "pass");
  CHECK(report["roundtrip_implements"]["status"] == "pass");
  CHECK(report["entries"].get<long>() > 0);
  auto table = load_policy_table((out / "policy.json").string());
  CHECK(table.size() == report["entries"].get<size_t>());

  // A handmade table that sends both merge fronts through at once.
  TableProtocol reckless;
  reckless.exchange_name = "empty";
  reckless.source = "handmade";
  for (LaneId lane : {0, 1}) {
    LocalState s;
    s.memory.kind = Memory::Kind::Unit;
    s.sensors = SensorReading{true, lane, 2, 1};
    reckless.entries[s.canonical_key()] = {s, Action::Go};
  }
  fs::path table_path = dir / "reckless.json";
  save_table_protocol(table_path.string(), reckless);

  json unsafe = merge_base();
  unsafe["horizon"] = 2;
  unsafe["adversaries"] = json::parse(R"({"model": "NF", "list": [
    {"id": 0, "arrivals": [{"agent": 1, "time": 1, "lane": 0, "intent": 2},
                           {"agent": 2, "time": 1, "lane": 1, "intent": 2}]}]})");
  unsafe["protocol"] = {{"table_file", table_path.string()}};
  fs::path sc_unsafe = write_scenario(dir, "unsafe.json", unsafe);
  fs::path out_unsafe = dir / "out_unsafe";
  CliResult refused = run_cli({"extract", sc_unsafe.string(), "--out", out_unsafe.string()});
  CHECK(refused.code == 1);
  json refused_report = json::parse(refused.out);
  CHECK(refused_report["safety"]["status"] == "fail");
  CHECK(refused_report["notes"][0].get<std::string>().find("extraction refused") !=
        std::string::npos);
  CHECK(!fs::exists(out_unsafe / "policy.json"));
}

TEST_CASE("identical invocations produce identical bytes") {
  fs::path dir = scratch("determinism");
  fs::path sc = write_scenario(dir, "s.json", merge_base());
  fs::path out = dir / "out";

  CliResult v1 = run_cli({"verify", sc.string(), "--out", out.string()});
  std::string report1 = read_file(out / "report.json");
  CliResult v2 = run_cli({"verify", sc.string(), "--out", out.string()});
  CHECK(v1.code == v2.code);
  CHECK(v1.out == v2.out);
  CHECK(report1 == read_file(out / "report.json"));

  CliResult s1 = run_cli({"simulate", sc.string(), "--out", out.string()});
  std::string trace1 = read_file(out / "trace.jsonl");
  CliResult s2 = run_cli({"simulate", sc.string(), "--out", out.string()});
  CHECK(s1.out == s2.out);
  CHECK(trace1 == read_file(out / "trace.jsonl"));
}

TEST_CASE("adversary space alias and scenario errors") {
  fs::path dir = scratch("scenario_errors");
  fs::path out = dir / "out";

  json alias = merge_base();
  alias["adversary_space"] = alias["adversaries"];
  alias.erase("adversaries");
  fs::path sc_alias = write_scenario(dir, "alias.json", alias);
  CliResult res = run_cli({"simulate", sc_alias.string(), "--out", out.string()});
  CHECK(res.code == 0);
  CHECK(json::parse(res.out)["context"]["adversaries"] == 43);

  fs::path sc_garbled = write_file(dir, "garbled.json", "{ nonsense\n");
  CliResult garbled = run_cli({"verify", sc_garbled.string(), "--out", out.string()});
  CHECK(garbled.code == 2);
  CHECK(garbled.err.find("not valid JSON") != std::string::npos);

  json flat = merge_base();
  flat["horizon"] = 0;
  fs::path sc_flat = write_scenario(dir, "flat.json", flat);
  CHECK(run_cli({"verify", sc_flat.string(), "--out", out.string()}).code == 2);

  json odd = merge_base();
  odd["protocol"] = "quantum";
  fs::path sc_odd = write_scenario(dir, "odd.json", odd);
  CliResult unknown = run_cli({"verify", sc_odd.string(), "--out", out.string()});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("unknown protocol") != std::string::npos);

  json twice = merge_base();
  twice["pool"] = {1, 1};
  fs::path sc_twice = write_scenario(dir, "twice.json", twice);
  CHECK(run_cli({"verify", sc_twice.string(), "--out", out.string()}).code == 2);
}

TEST_CASE("local states survive json round trips") {
  LocalState moves;
  moves.memory.kind = Memory::Kind::Moves;
  moves.memory.moves = {{0, 2}, {1, 2}};
  moves.sensors = SensorReading{true, 0, 2, 3};
  LocalState moves_back = local_state_from_json(json::parse(local_state_to_json(moves).dump()));
  CHECK(moves_back.canonical_key() == moves.canonical_key());

  LocalState hist;
  hist.memory.kind = Memory::Kind::History;
  hist.memory.self = 7;
  hist.memory.rounds = {{Action::Noop, {"a", "b"}}, {Action::Go, {}}};
  hist.sensors = SensorReading{false, kCrossedLane, 2, 2};
  LocalState hist_back = local_state_from_json(json::parse(local_state_to_json(hist).dump()));
  CHECK(hist_back.canonical_key() == hist.canonical_key());
  CHECK(hist_back.memory.rounds[1].action == Action::Go);

  CHECK_THROWS_AS(move_from_json(json::parse("[1]")), SpecError);
  CHECK_THROWS_AS(memory_from_json(json::parse(R"({"kind": "psychic"})")), SpecError);
}

TEST_CASE("verdict json caps witnesses") {
  Verdict v;
  v.status = Verdict::Status::Fail;
  v.exact = true;
  for (int i = 0; i < 60; ++i) v.witnesses.push_back({i, 1, {1}, "w" + std::to_string(i)});

  json capped = json::parse(verdict_to_json(v).dump());
  CHECK(capped["witness_count"] == 60);
  CHECK(capped["witnesses"].size() == 50);
  CHECK(capped["witnesses"][0]["adversary"] == 0);
  CHECK(capped["witnesses"][0]["detail"] == "w0");
  CHECK(capped["notes"].size() == 1);
  CHECK(capped["notes"][0].get<std::string>().find("first 50") != std::string::npos);

  json uncapped = json::parse(verdict_to_json(v, 100).dump());
  CHECK(uncapped["witnesses"].size() == 60);
  CHECK(uncapped["notes"].empty());
}

TEST_CASE("protocol tables reject contradictions and policy tables sort moves") {
  fs::path dir = scratch("serial");

  TableProtocol table;
  table.exchange_name = "intent";
  table.source = "handmade";
  LocalState s;
  s.memory.kind = Memory::Kind::Moves;
  s.memory.moves = {{1, 2}};
  s.sensors = SensorReading{true, 0, 2, 1};
  table.entries[s.canonical_key()] = {s, Action::Go};
  fs::path table_path = dir / "table.json";
  save_table_protocol(table_path.string(), table);
  TableProtocol back = load_table_protocol(table_path.string());
  CHECK(back.exchange_name == "intent");
  CHECK(back.source == "handmade");
  CHECK(back.entries.size() == 1);
  CHECK(back.entries.begin()->first == s.canonical_key());
  CHECK(back.entries.begin()->second.second == Action::Go);

  json conflicted;
  conflicted["exchange"] = "intent";
  conflicted["entries"] = json::array();
  json state = json::parse(local_state_to_json(s).dump());
  conflicted["entries"].push_back({{"state", state}, {"action", "go"}});
  conflicted["entries"].push_back({{"state", state}, {"action", "noop"}});
  fs::path conflicted_path = write_file(dir, "conflicted.json", conflicted.dump(2));
  try {
    load_table_protocol(conflicted_path.string());
    CHECK(false);
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("two actions") != std::string::npos);
  }

  std::map<std::string, std::vector<Move>> entries;
  entries["k"] = {{1, 2}, {0, 2}};
  fs::path policy_path = dir / "policy.json";
  save_policy_table(policy_path.string(), entries);
  auto loaded = load_policy_table(policy_path.string());
  CHECK(loaded.size() == 1);
  CHECK(loaded["k"] == std::vector<Move>{{0, 2}, {1, 2}});

  CHECK_THROWS_AS(load_table_protocol((dir / "absent.json").string()), SpecError);
  CHECK_THROWS_AS(load_policy_table((dir / "absent.json").string()), SpecError);
}
