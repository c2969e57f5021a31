#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isim/topology.hpp"

namespace isim {

struct EnvState;

enum class Action : uint8_t { Noop, Go };

std::string to_string(Action a);

// What an agent's sensors deliver each round. `lane` is the agent's in-lane
// while queued, kCrossedLane after crossing, kNoLane before arrival.
// `intent` is the scheduled out-lane (kNoIntent if never scheduled) and is
// visible from the start. The round counter makes the exchanges synchronous.
struct SensorReading {
  bool front = false;
  LaneId lane = kNoLane;
  LaneId intent = kNoIntent;
  int time = 0;
  bool operator==(const SensorReading&) const = default;
};

// One round of a full-information memory: the action taken and the canonical
// encodings of the snapshots received that round (sorted, deduplicated).
struct FullRound {
  Action action = Action::Noop;
  std::vector<std::string> received;
  bool operator==(const FullRound&) const = default;
};

// Tagged union over the three shipped memory shapes: unit memory, a set of
// announced moves, or an append-only history of (action, received) entries
// rooted at the agent's identity.
struct Memory {
  enum class Kind : uint8_t { Unit, Moves, History };
  Kind kind = Kind::Unit;
  std::vector<Move> moves;         // Kind::Moves, sorted + deduplicated
  Agent self = -1;                 // Kind::History
  std::vector<FullRound> rounds;   // Kind::History
  bool operator==(const Memory&) const = default;
};

struct LocalState {
  Memory memory;
  SensorReading sensors;
  bool operator==(const LocalState&) const = default;
  // Injective, deterministic encoding; equal keys iff equal states.
  std::string canonical_key() const;
};

struct Message {
  enum class Kind : uint8_t { MoveAnnouncement, Snapshot };
  Kind kind = Kind::MoveAnnouncement;
  Move move;             // MoveAnnouncement
  std::string snapshot;  // Snapshot: canonical encoding of what the sender sees
  auto operator<=>(const Message&) const = default;
};

SensorReading sensor_read(const EnvState& env, Agent agent, const IntersectionSpec& spec);

// A communication discipline: what agents start out remembering, what they
// broadcast after acting (given the post-round reading), and how they fold
// the received batch into memory. The kernel applies these in lockstep.
struct ExchangeProtocol {
  std::string name;
  std::function<Memory(Agent)> initial_memory;
  std::function<std::optional<Message>(const LocalState& before, Action action,
                                       const SensorReading& after)>
      message_fn;
  std::function<Memory(const LocalState& before, Action action,
                       const std::vector<Message>& received)>
      update_fn;
};

// Unit memory, no messages: the local state is just the sensor reading.
ExchangeProtocol build_exchange_empty();
// Front agents announce their move; memory is exactly the set of moves
// received this round (own announcement included when delivered).
ExchangeProtocol build_exchange_intent();
// Everyone broadcasts a snapshot of everything they see every round and
// appends (action, received snapshots) to an identity-rooted history.
ExchangeProtocol build_exchange_full();

const ExchangeProtocol& exchange_by_name(const std::string& name);

}  // namespace isim
