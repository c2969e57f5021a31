#include "isim/serial.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

namespace isim {

namespace {

std::string field(const char* name) { return std::string("'") + name + "'"; }

const nlohmann::json& need(const nlohmann::json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SpecError(std::string(where) + " is missing " + field(key));
  return *it;
}

}  // namespace

ojson move_to_json(const Move& m) { return ojson::array({m.source, m.target}); }

Move move_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw SpecError("a move must be a two-integer array");
  return {j[0].get<LaneId>(), j[1].get<LaneId>()};
}

ojson message_to_json(const Message& m) {
  ojson j;
  if (m.kind == Message::Kind::MoveAnnouncement) {
    j["kind"] = "announce";
    j["move"] = move_to_json(m.move);
  } else {
    j["kind"] = "snapshot";
    j["data"] = m.snapshot;
  }
  return j;
}

ojson reading_to_json(const SensorReading& s) {
  ojson j;
  j["front"] = s.front;
  j["lane"] = s.lane;
  j["intent"] = s.intent;
  j["time"] = s.time;
  return j;
}

SensorReading reading_from_json(const nlohmann::json& j) {
  SensorReading s;
  s.front = need(j, "front", "a sensor reading").get<bool>();
  s.lane = need(j, "lane", "a sensor reading").get<LaneId>();
  s.intent = need(j, "intent", "a sensor reading").get<LaneId>();
  s.time = need(j, "time", "a sensor reading").get<int>();
  return s;
}

ojson memory_to_json(const Memory& m) {
  ojson j;
  switch (m.kind) {
    case Memory::Kind::Unit:
      j["kind"] = "unit";
      break;
    case Memory::Kind::Moves: {
      j["kind"] = "moves";
      ojson arr = ojson::array();
      for (const Move& mv : m.moves) arr.push_back(move_to_json(mv));
      j["moves"] = std::move(arr);
      break;
    }
    case Memory::Kind::History: {
      j["kind"] = "history";
      j["self"] = m.self;
      ojson rounds = ojson::array();
      for (const FullRound& fr : m.rounds) {
        ojson r;
        r["action"] = to_string(fr.action);
        r["received"] = fr.received;
        rounds.push_back(std::move(r));
      }
      j["rounds"] = std::move(rounds);
      break;
    }
  }
  return j;
}

Memory memory_from_json(const nlohmann::json& j) {
  Memory m;
  std::string kind = need(j, "kind", "a memory").get<std::string>();
  if (kind == "unit") {
    m.kind = Memory::Kind::Unit;
  } else if (kind == "moves") {
    m.kind = Memory::Kind::Moves;
    for (const auto& mv : need(j, "moves", "a move-set memory"))
      m.moves.push_back(move_from_json(mv));
  } else if (kind == "history") {
    m.kind = Memory::Kind::History;
    m.self = need(j, "self", "a history memory").get<Agent>();
    for (const auto& r : need(j, "rounds", "a history memory")) {
      FullRound fr;
      fr.action = need(r, "action", "a history round").get<std::string>() == "go"
                      ? Action::Go
                      : Action::Noop;
      fr.received = need(r, "received", "a history round").get<std::vector<std::string>>();
      m.rounds.push_back(std::move(fr));
    }
  } else {
    throw SpecError("unknown memory kind '" + kind + "'");
  }
  return m;
}

ojson local_state_to_json(const LocalState& s) {
  ojson j;
  j["memory"] = memory_to_json(s.memory);
  j["sensors"] = reading_to_json(s.sensors);
  return j;
}

LocalState local_state_from_json(const nlohmann::json& j) {
  LocalState s;
  s.memory = memory_from_json(need(j, "memory", "a local state"));
  s.sensors = reading_from_json(need(j, "sensors", "a local state"));
  return s;
}

ojson verdict_to_json(const Verdict& v, size_t witness_cap) {
  ojson j;
  j["status"] = to_string(v.status);
  j["exact"] = v.exact;
  j["witness_count"] = v.witnesses.size();
  ojson ws = ojson::array();
  for (size_t i = 0; i < v.witnesses.size() && i < witness_cap; ++i) {
    const Witness& w = v.witnesses[i];
    ojson wj;
    wj["adversary"] = w.adversary_id;
    wj["time"] = w.time;
    wj["agents"] = w.agents;
    wj["detail"] = w.detail;
    ws.push_back(std::move(wj));
  }
  j["witnesses"] = std::move(ws);
  ojson notes = v.notes;
  if (v.witnesses.size() > witness_cap)
    notes.push_back("witness list truncated to the first " + std::to_string(witness_cap));
  j["notes"] = std::move(notes);
  return j;
}

ojson context_to_json(const Context& ctx) {
  ojson j;
  j["lanes_in"] = ctx.spec.lanes_in();
  j["lanes_out"] = ctx.spec.lanes_out();
  j["exchange"] = ctx.exchange.name;
  j["model"] = to_string(ctx.model);
  j["horizon"] = ctx.horizon;
  j["pool"] = ctx.pool;
  j["adversaries"] = ctx.adversaries.size();
  j["truncated"] = ctx.truncated;
  return j;
}

void write_trace(std::ostream& os, const System& sys) {
  const Context& ctx = *sys.ctx;
  ojson header;
  header["protocol"] = sys.protocol_name;
  header["context"] = context_to_json(ctx);
  os << header.dump() << "\n";
  const int n = static_cast<int>(ctx.pool.size());
  for (size_t r = 0; r < sys.runs.size(); ++r) {
    const Run& run = sys.runs[r];
    for (int t = 0; t <= ctx.horizon; ++t) {
      const GlobalState& g = run.states[static_cast<size_t>(t)];
      ojson rec;
      rec["run"] = run.adversary->id;
      rec["t"] = t;
      rec["queues"] = g.env.queues;
      rec["done"] = g.env.done;
      if (t > 0) {
        const RoundRecord& rr = run.rounds[static_cast<size_t>(t - 1)];
        ojson actions, out, in;
        for (int i = 0; i < n; ++i) {
          std::string a = std::to_string(ctx.pool[static_cast<size_t>(i)]);
          actions[a] = to_string(rr.actions[static_cast<size_t>(i)]);
          if (rr.broadcasts[static_cast<size_t>(i)])
            out[a] = message_to_json(*rr.broadcasts[static_cast<size_t>(i)]);
          ojson inbox = ojson::array();
          for (const Message& m : rr.received[static_cast<size_t>(i)])
            inbox.push_back(message_to_json(m));
          if (!inbox.empty()) in[a] = std::move(inbox);
        }
        rec["actions"] = std::move(actions);
        rec["msgs_out"] = out.is_null() ? ojson::object() : std::move(out);
        rec["msgs_in"] = in.is_null() ? ojson::object() : std::move(in);
      }
      os << rec.dump() << "\n";
    }
  }
}

void save_table_protocol(const std::string& path, const TableProtocol& table) {
  ojson j;
  j["exchange"] = table.exchange_name;
  j["source"] = table.source;
  ojson entries = ojson::array();
  for (const auto& [key, entry] : table.entries) {
    ojson e;
    e["state"] = local_state_to_json(entry.first);
    e["action"] = to_string(entry.second);
    entries.push_back(std::move(e));
    (void)key;
  }
  j["entries"] = std::move(entries);
  std::ofstream os(path);
  if (!os) throw SpecError("cannot write protocol table to '" + path + "'");
  os << j.dump(2) << "\n";
}

TableProtocol load_table_protocol(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot read protocol table from '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(is);
  TableProtocol table;
  table.exchange_name = need(j, "exchange", "a protocol table").get<std::string>();
  table.source = j.value("source", std::string("file:") + path);
  for (const auto& e : need(j, "entries", "a protocol table")) {
    LocalState s = local_state_from_json(need(e, "state", "a table entry"));
    Action a = need(e, "action", "a table entry").get<std::string>() == "go" ? Action::Go
                                                                             : Action::Noop;
    std::string key = s.canonical_key();
    auto [it, fresh] = table.entries.insert({std::move(key), {std::move(s), a}});
    if (!fresh && it->second.second != a)
      throw SpecError("protocol table '" + path + "' maps one state to two actions");
  }
  return table;
}

void save_policy_table(const std::string& path,
                       const std::map<std::string, std::vector<Move>>& entries) {
  ojson j;
  j["kind"] = "table";
  ojson arr = ojson::array();
  for (const auto& [key, moves] : entries) {
    ojson e;
    e["history_key"] = key;
    ojson ms = ojson::array();
    for (const Move& mv : moves) ms.push_back(move_to_json(mv));
    e["moves"] = std::move(ms);
    arr.push_back(std::move(e));
  }
  j["entries"] = std::move(arr);
  std::ofstream os(path);
  if (!os) throw SpecError("cannot write policy table to '" + path + "'");
  os << j.dump(2) << "\n";
}

std::map<std::string, std::vector<Move>> load_policy_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot read policy table from '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(is);
  std::map<std::string, std::vector<Move>> entries;
  for (const auto& e : need(j, "entries", "a policy table")) {
    std::string key = need(e, "history_key", "a policy entry").get<std::string>();
    std::vector<Move> moves;
    for (const auto& mv : need(e, "moves", "a policy entry"))
      moves.push_back(move_from_json(mv));
    std::sort(moves.begin(), moves.end());
    entries[std::move(key)] = std::move(moves);
  }
  return entries;
}

}  // namespace isim
