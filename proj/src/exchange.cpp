#include "isim/exchange.hpp"

#include <algorithm>

#include "isim/kernel.hpp"

namespace isim {

std::string to_string(Action a) { return a == Action::Go ? "go" : "noop"; }

namespace {

void append_int(std::string& out, long v) {
  out += std::to_string(v);
  out += ';';
}

void append_str(std::string& out, const std::string& s) {
  append_int(out, static_cast<long>(s.size()));
  out += s;
}

void append_reading(std::string& out, const SensorReading& r) {
  out += 's';
  append_int(out, r.front ? 1 : 0);
  append_int(out, r.lane);
  append_int(out, r.intent);
  append_int(out, r.time);
}

void append_memory(std::string& out, const Memory& m) {
  switch (m.kind) {
    case Memory::Kind::Unit:
      out += 'u';
      break;
    case Memory::Kind::Moves:
      out += 'v';
      append_int(out, static_cast<long>(m.moves.size()));
      for (const Move& mv : m.moves) {
        append_int(out, mv.source);
        append_int(out, mv.target);
      }
      break;
    case Memory::Kind::History:
      out += 'h';
      append_int(out, m.self);
      append_int(out, static_cast<long>(m.rounds.size()));
      for (const FullRound& r : m.rounds) {
        append_int(out, r.action == Action::Go ? 1 : 0);
        append_int(out, static_cast<long>(r.received.size()));
        for (const std::string& s : r.received) append_str(out, s);
      }
      break;
  }
}

}  // namespace

std::string LocalState::canonical_key() const {
  std::string key;
  append_memory(key, memory);
  append_reading(key, sensors);
  return key;
}

SensorReading sensor_read(const EnvState& env, Agent agent, const IntersectionSpec& spec) {
  SensorReading r;
  r.time = env.time;
  if (auto arr = env.adversary->schedule.arrival_of(agent))
    r.intent = arr->intent;
  if (env.is_done(agent)) {
    r.lane = kCrossedLane;
    return r;
  }
  if (auto slot = env.slot_of(agent)) {
    r.lane = spec.in_lane_at(slot->first);
    r.front = slot->second == 0;
  }
  return r;
}

ExchangeProtocol build_exchange_empty() {
  ExchangeProtocol x;
  x.name = "empty";
  x.initial_memory = [](Agent) { return Memory{}; };
  x.message_fn = [](const LocalState&, Action, const SensorReading&) {
    return std::optional<Message>{};
  };
  x.update_fn = [](const LocalState&, Action, const std::vector<Message>&) {
    return Memory{};
  };
  return x;
}

ExchangeProtocol build_exchange_intent() {
  ExchangeProtocol x;
  x.name = "intent";
  x.initial_memory = [](Agent) {
    Memory m;
    m.kind = Memory::Kind::Moves;
    return m;
  };
  x.message_fn = [](const LocalState&, Action, const SensorReading& after) {
    std::optional<Message> msg;
    if (after.front) {
      Message m;
      m.kind = Message::Kind::MoveAnnouncement;
      m.move = {after.lane, after.intent};
      msg = m;
    }
    return msg;
  };
  // Memory is replaced wholesale by this round's received announcements.
  x.update_fn = [](const LocalState&, Action, const std::vector<Message>& received) {
    Memory m;
    m.kind = Memory::Kind::Moves;
    for (const Message& msg : received) m.moves.push_back(msg.move);
    std::sort(m.moves.begin(), m.moves.end());
    m.moves.erase(std::unique(m.moves.begin(), m.moves.end()), m.moves.end());
    return m;
  };
  return x;
}

ExchangeProtocol build_exchange_full() {
  ExchangeProtocol x;
  x.name = "full";
  x.initial_memory = [](Agent a) {
    Memory m;
    m.kind = Memory::Kind::History;
    m.self = a;
    return m;
  };
  x.message_fn = [](const LocalState& before, Action action, const SensorReading& after) {
    Message m;
    m.kind = Message::Kind::Snapshot;
    m.snapshot = before.canonical_key();
    m.snapshot += action == Action::Go ? "|go|" : "|noop|";
    std::string tail;
    tail += std::to_string(after.front ? 1 : 0) + "," + std::to_string(after.lane) + "," +
            std::to_string(after.intent) + "," + std::to_string(after.time);
    m.snapshot += tail;
    return std::optional<Message>{m};
  };
  x.update_fn = [](const LocalState& before, Action action,
                   const std::vector<Message>& received) {
    Memory m = before.memory;
    FullRound r;
    r.action = action;
    for (const Message& msg : received) r.received.push_back(msg.snapshot);
    std::sort(r.received.begin(), r.received.end());
    r.received.erase(std::unique(r.received.begin(), r.received.end()), r.received.end());
    m.rounds.push_back(std::move(r));
    return m;
  };
  return x;
}

const ExchangeProtocol& exchange_by_name(const std::string& name) {
  static const ExchangeProtocol empty = build_exchange_empty();
  static const ExchangeProtocol intent = build_exchange_intent();
  static const ExchangeProtocol full = build_exchange_full();
  if (name == "empty") return empty;
  if (name == "intent") return intent;
  if (name == "full") return full;
  throw SpecError("unknown exchange '" + name + "' (expected empty, intent or full)");
}

}  // namespace isim
