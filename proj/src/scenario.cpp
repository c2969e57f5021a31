#include "isim/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "isim/serial.hpp"

namespace isim {

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SpecError(std::string("scenario field '") + where + "': missing '" + key + "'");
  return *it;
}

int need_int(const json& j, const char* key, const char* where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer())
    throw SpecError(std::string("scenario field '") + where + "." + key +
                    "': expected an integer");
  return v.get<int>();
}

std::vector<LaneId> lane_list(const json& j, const char* key, const char* where) {
  const json& v = need(j, key, where);
  if (!v.is_array())
    throw SpecError(std::string("scenario field '") + where + "." + key +
                    "': expected an array of lanes");
  std::vector<LaneId> out;
  for (const auto& x : v) {
    if (!x.is_number_integer())
      throw SpecError(std::string("scenario field '") + where + "." + key +
                      "': lanes are integers");
    out.push_back(x.get<LaneId>());
  }
  return out;
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return p;
  return (std::filesystem::path(base_dir) / fp).string();
}

IntersectionSpec parse_intersection(const json& j) {
  const json& sec = need(j, "intersection", "scenario");
  std::vector<LaneId> lanes_in = lane_list(sec, "lanes_in", "intersection");
  std::vector<LaneId> lanes_out = lane_list(sec, "lanes_out", "intersection");
  std::vector<std::pair<Move, Move>> compat;
  if (sec.contains("compat")) {
    for (const auto& pair : sec["compat"]) {
      if (!pair.is_array() || pair.size() != 2)
        throw SpecError("scenario field 'intersection.compat': entries are pairs of moves");
      compat.push_back({move_from_json(pair[0]), move_from_json(pair[1])});
    }
  }
  return IntersectionSpec::validate(lanes_in, lanes_out, compat);
}

TransmissionEnv parse_reach(const json& j, const IntersectionSpec& spec) {
  const json& sec = need(j, "intersection", "scenario");
  int max_depth = sec.value("max_depth", 0);
  std::vector<std::pair<LanePos, LanePos>> extra;
  if (sec.contains("reach_extra")) {
    for (const auto& pair : sec["reach_extra"]) {
      if (!pair.is_array() || pair.size() != 2 || pair[0].size() != 2 || pair[1].size() != 2)
        throw SpecError(
            "scenario field 'intersection.reach_extra': entries are pairs of [lane, pos]");
      extra.push_back({LanePos{pair[0][0].get<LaneId>(), pair[0][1].get<int>()},
                       LanePos{pair[1][0].get<LaneId>(), pair[1][1].get<int>()}});
    }
  }
  std::vector<std::pair<LanePos, LanePos>> excluded;
  if (sec.contains("reach_exclude")) {
    for (const auto& pair : sec["reach_exclude"]) {
      if (!pair.is_array() || pair.size() != 2 || pair[0].size() != 2 || pair[1].size() != 2)
        throw SpecError(
            "scenario field 'intersection.reach_exclude': entries are pairs of [lane, pos]");
      excluded.push_back({LanePos{pair[0][0].get<LaneId>(), pair[0][1].get<int>()},
                          LanePos{pair[1][0].get<LaneId>(), pair[1][1].get<int>()}});
    }
  }
  return TransmissionEnv::validate(spec, extra, max_depth, excluded);
}

std::vector<Adversary> parse_adversary_list(const json& list, FailureModel model, int horizon,
                                            const IntersectionSpec& spec) {
  std::vector<Adversary> out;
  for (const auto& a : list) {
    Adversary adv;
    adv.id = need_int(a, "id", "adversaries.list[]");
    std::map<Agent, Arrival> arrivals;
    if (a.contains("arrivals")) {
      for (const auto& arr : a["arrivals"]) {
        Agent agent = need_int(arr, "agent", "adversaries.list[].arrivals[]");
        Arrival v;
        v.time = need_int(arr, "time", "adversaries.list[].arrivals[]");
        v.lane = need_int(arr, "lane", "adversaries.list[].arrivals[]");
        v.intent = need_int(arr, "intent", "adversaries.list[].arrivals[]");
        if (!arrivals.emplace(agent, v).second)
          throw SpecError("scenario field 'adversaries.list[].arrivals': agent " +
                          std::to_string(agent) + " arrives twice");
      }
    }
    adv.schedule = ArrivalSchedule::validate(std::move(arrivals), spec);
    if (a.contains("transmit_failed"))
      for (const auto& tf : a["transmit_failed"])
        adv.failures.transmit_failed.insert(
            {need_int(tf, "time", "adversaries.list[].transmit_failed[]"),
             need_int(tf, "agent", "adversaries.list[].transmit_failed[]")});
    if (a.contains("receive_failed"))
      for (const auto& rf : a["receive_failed"])
        adv.failures.receive_failed.insert(
            {need_int(rf, "time", "adversaries.list[].receive_failed[]"),
             need_int(rf, "agent", "adversaries.list[].receive_failed[]")});
    validate_adversary(adv, model, horizon, spec);
    out.push_back(std::move(adv));
  }
  return out;
}

Policy parse_policy(const json& j, const IntersectionSpec& spec,
                    const std::string& base_dir) {
  if (!j.contains("policy")) return Policy::empty();
  const json& sec = j["policy"];
  std::string kind = need(sec, "kind", "policy").get<std::string>();
  if (kind == "empty") return Policy::empty();
  if (kind == "cyclic" || kind == "priority") {
    std::vector<std::vector<Move>> cells;
    for (const auto& cell : need(sec, "cells", "policy")) {
      std::vector<Move> moves;
      for (const auto& mv : cell) moves.push_back(move_from_json(mv));
      cells.push_back(std::move(moves));
    }
    Policy base = Policy::cyclic(std::move(cells), spec);
    if (kind == "cyclic") return base;
    std::set<Agent> vips;
    for (const auto& a : need(sec, "vips", "policy")) vips.insert(a.get<Agent>());
    return Policy::priority(std::move(vips), std::move(base), spec);
  }
  if (kind == "table") {
    if (sec.contains("file"))
      return Policy::table(
          load_policy_table(resolve_path(base_dir, sec["file"].get<std::string>())));
    std::map<std::string, std::vector<Move>> entries;
    for (const auto& e : need(sec, "entries", "policy")) {
      std::vector<Move> moves;
      for (const auto& mv : need(e, "moves", "policy.entries[]"))
        moves.push_back(move_from_json(mv));
      std::sort(moves.begin(), moves.end());
      entries[need(e, "history_key", "policy.entries[]").get<std::string>()] =
          std::move(moves);
    }
    return Policy::table(std::move(entries));
  }
  throw SpecError("scenario field 'policy.kind': unknown kind '" + kind + "'");
}

NextFn parse_next(const json& j) {
  if (!j.contains("next")) return NextFn::round_robin();
  const json& sec = j["next"];
  std::string kind = need(sec, "kind", "next").get<std::string>();
  if (kind == "round_robin") return NextFn::round_robin();
  if (kind == "cycle_held") return NextFn::cycle_held(need_int(sec, "hold", "next"));
  if (kind == "constant") return NextFn::constant(need_int(sec, "lane", "next"));
  if (kind == "table") {
    std::map<std::string, LaneId> entries;
    for (const auto& e : need(sec, "entries", "next"))
      entries[need(e, "history_key", "next.entries[]").get<std::string>()] =
          need_int(e, "lane", "next.entries[]");
    return NextFn::table(std::move(entries));
  }
  throw SpecError("scenario field 'next.kind': unknown kind '" + kind + "'");
}

void parse_protocol_slot(const json& j, const char* key, std::string& name,
                         std::string& file, const std::string& base_dir) {
  if (!j.contains(key)) return;
  const json& sec = j[key];
  if (sec.is_string()) {
    name = sec.get<std::string>();
    return;
  }
  if (sec.is_object() && sec.contains("table_file")) {
    name = "table";
    file = resolve_path(base_dir, sec["table_file"].get<std::string>());
    return;
  }
  throw SpecError(std::string("scenario field '") + key +
                  "': expected a protocol name or {\"table_file\": path}");
}

}  // namespace

KbProgram Scenario::program() const {
  KbProgram p;
  p.kind = program_kind;
  p.sigma = policy;
  p.next = next;
  p.strict_override = strict_override;
  return p;
}

Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot read scenario '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw SpecError("scenario '" + path + "' is not valid JSON: " + e.what());
  }
  std::string base_dir = std::filesystem::path(path).parent_path().string();
  if (base_dir.empty()) base_dir = ".";

  Scenario s;
  IntersectionSpec spec = parse_intersection(j);
  TransmissionEnv env = parse_reach(j, spec);

  std::string exchange = j.value("exchange", std::string("empty"));

  std::vector<Agent> pool;
  for (const auto& a : need(j, "pool", "scenario")) pool.push_back(a.get<Agent>());
  std::sort(pool.begin(), pool.end());
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end())
    throw SpecError("scenario field 'pool': duplicate agent");
  if (pool.empty()) throw SpecError("scenario field 'pool': at least one agent");

  int horizon = overrides.horizon ? *overrides.horizon : need_int(j, "horizon", "scenario");
  if (horizon < 1) throw SpecError("scenario field 'horizon': must be at least 1");

  if (!j.contains("adversaries") && !j.contains("adversary_space"))
    throw SpecError("scenario field 'adversaries': missing (or use 'adversary_space')");
  const json& advsec = j.contains("adversaries") ? j["adversaries"] : j["adversary_space"];
  FailureModel model =
      failure_model_from_string(need(advsec, "model", "adversaries").get<std::string>());

  EnumerationCaps caps;
  if (overrides.caps)
    caps.max_adversaries = *overrides.caps;
  else if (advsec.contains("caps"))
    caps.max_adversaries = advsec["caps"].get<long>();
  else if (j.contains("caps"))
    caps.max_adversaries = j["caps"].get<long>();

  std::vector<Adversary> adversaries;
  bool truncated = false;
  if (advsec.contains("list")) {
    adversaries = parse_adversary_list(advsec["list"], model, horizon, spec);
  } else {
    AdversarySet set = enumerate_adversaries(model, pool, horizon, spec, caps);
    adversaries = std::move(set.adversaries);
    truncated = set.truncated;
  }

  s.ctx = std::make_shared<Context>(Context{std::move(spec), std::move(env), std::move(pool),
                                            exchange_by_name(exchange), model, horizon,
                                            std::move(adversaries), truncated});

  s.policy = parse_policy(j, s.ctx->spec, base_dir);
  s.next = parse_next(j);
  parse_protocol_slot(j, "protocol", s.protocol, s.protocol_file, base_dir);
  parse_protocol_slot(j, "protocol_b", s.protocol_b, s.protocol_b_file, base_dir);

  if (j.contains("program")) {
    std::string kind = need(j["program"], "kind", "program").get<std::string>();
    if (kind == "gate")
      s.program_kind = KbProgram::Kind::PolicyGate;
    else if (kind == "override")
      s.program_kind = KbProgram::Kind::PolicyWithOverride;
    else
      throw SpecError("scenario field 'program.kind': unknown kind '" + kind + "'");
    s.strict_override = j["program"].value("strict", false);
  }
  if (overrides.strict_override) s.strict_override = true;

  if (overrides.liveness_bound)
    s.liveness_bound = *overrides.liveness_bound;
  else if (j.contains("liveness_bound"))
    s.liveness_bound = j["liveness_bound"].get<int>();

  if (j.contains("checks"))
    for (const auto& c : j["checks"]) s.checks.push_back(c.get<std::string>());

  if (!overrides.out_dir.empty())
    s.out_dir = overrides.out_dir;
  else if (j.contains("out_dir"))
    s.out_dir = resolve_path(base_dir, j["out_dir"].get<std::string>());

  return s;
}

ActionProtocol resolve_protocol(const Scenario& s, const std::string& name,
                                const std::string& table_file) {
  const IntersectionSpec& spec = s.ctx->spec;
  if (name == "traffic_light") return traffic_light_protocol(spec);
  if (name == "p_empty") return p_empty_protocol(spec, s.next);
  if (name == "p_intent") return p_intent_protocol(spec, s.next);
  if (name == "p_sigma") return p_sigma_protocol(spec, s.policy);
  if (name == "synthesized") {
    TableProtocol t = synthesize_implementation(s.ctx, s.policy, s.next, s.strict_override);
    return t.to_protocol();
  }
  if (name == "table") {
    TableProtocol t = load_table_protocol(table_file);
    return t.to_protocol("table:" + std::filesystem::path(table_file).filename().string());
  }
  if (name.empty())
    throw SpecError("scenario field 'protocol': no protocol selected");
  throw SpecError("scenario field 'protocol': unknown protocol '" + name + "'");
}

}  // namespace isim
