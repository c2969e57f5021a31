#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isim/adversary.hpp"
#include "isim/exchange.hpp"
#include "isim/topology.hpp"

namespace isim {

// Environment half of a global state: round counter, FIFO queues indexed by
// in-lane position in the declared order, and the set of agents that have
// crossed. The adversary pointer identifies the run's schedule and bits.
struct EnvState {
  const Adversary* adversary = nullptr;
  int time = 0;
  std::vector<std::vector<Agent>> queues;
  std::vector<Agent> done;  // sorted

  bool is_done(Agent a) const;
  // (in-lane index, queue position) while queued.
  std::optional<std::pair<int, int>> slot_of(Agent a) const;
};

struct GlobalState {
  EnvState env;
  std::vector<LocalState> locals;  // by pool index
};

// Per-round bookkeeping, all vectors by pool index. `invalid_go` lists
// agents whose go was issued away from a queue front and demoted to noop.
struct RoundRecord {
  std::vector<Action> actions;
  std::vector<std::optional<Message>> broadcasts;
  std::vector<std::vector<Message>> received;
  std::vector<Agent> invalid_go;
};

struct ActionProtocol;

// Everything fixed across one generated system: topology, reachability,
// pool, exchange, failure model, horizon, and the adversary set.
struct Context {
  IntersectionSpec spec;
  TransmissionEnv env;
  std::vector<Agent> pool;  // sorted
  ExchangeProtocol exchange;
  FailureModel model = FailureModel::NF;
  int horizon = 0;
  std::vector<Adversary> adversaries;
  bool truncated = false;

  int pool_index(Agent a) const;
};

struct Run {
  const Adversary* adversary = nullptr;
  std::vector<GlobalState> states;  // horizon + 1 entries
  std::vector<RoundRecord> rounds;  // horizon entries
};

struct System {
  std::shared_ptr<const Context> ctx;
  std::string protocol_name;
  std::vector<Run> runs;  // indexed by adversary id
};

GlobalState initial_state(const Context& ctx, const Adversary& adv);

// One synchronous round: act on current local states; release going fronts
// and then enqueue the new arrivals; advance time; refresh sensor readings;
// broadcast; deliver along the transmission relation subject to this round's
// bits; fold received batches into memory.
GlobalState step(const Context& ctx, const GlobalState& g, const ActionProtocol& protocol,
                 RoundRecord& record);

Run generate_run(const Context& ctx, const ActionProtocol& protocol, const Adversary& adv);

System generate_system(std::shared_ptr<const Context> ctx, const ActionProtocol& protocol);

}  // namespace isim
