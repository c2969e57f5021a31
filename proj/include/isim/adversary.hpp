#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "isim/topology.hpp"

namespace isim {

struct Arrival {
  int time = 0;  // rounds are 1-based; nobody is queued at time 0
  LaneId lane = kNoLane;
  LaneId intent = kNoIntent;
  auto operator<=>(const Arrival&) const = default;
};

// Conflict-free arrival schedule: at most one agent per (time, lane) slot.
class ArrivalSchedule {
 public:
  static ArrivalSchedule validate(std::map<Agent, Arrival> arrivals,
                                  const IntersectionSpec& spec);

  const std::map<Agent, Arrival>& arrivals() const { return arrivals_; }
  std::optional<Arrival> arrival_of(Agent a) const;
  // Agents arriving at exactly `time`, sorted by agent id.
  std::vector<std::tuple<Agent, LaneId, LaneId>> arrivals_at(int time) const;

  bool operator==(const ArrivalSchedule& o) const { return arrivals_ == o.arrivals_; }

 private:
  std::map<Agent, Arrival> arrivals_;
};

// Per-round broadcast/reception bits. Only failures (zero bits) are stored;
// unlisted (time, agent) cells default to 1.
struct FailurePattern {
  std::set<std::pair<int, Agent>> transmit_failed;
  std::set<std::pair<int, Agent>> receive_failed;

  bool transmit_ok(int time, Agent a) const { return !transmit_failed.count({time, a}); }
  bool receive_ok(int time, Agent a) const { return !receive_failed.count({time, a}); }

  bool operator==(const FailurePattern&) const = default;
};

enum class FailureModel { NF, CR, SO };

std::string to_string(FailureModel m);
FailureModel failure_model_from_string(const std::string& s);

struct Adversary {
  int id = -1;
  ArrivalSchedule schedule;
  FailurePattern failures;
};

// Checks the failure pattern against the model over rounds [0, horizon):
// NF allows no failed bits, CR allows only transmit failures that stay
// failed once failed (crash), SO allows arbitrary transmit failures.
// Reception failures are disallowed in all three models. Throws SpecError.
void validate_adversary(const Adversary& adv, FailureModel model, int horizon,
                        const IntersectionSpec& spec);

struct HistoryRound {
  std::vector<std::tuple<Agent, LaneId, LaneId>> arrivals;  // sorted by agent
  std::vector<Agent> transmit_failed;                       // sorted
  std::vector<Agent> receive_failed;                        // sorted
  auto operator<=>(const HistoryRound&) const = default;
};

// What the environment alone determines through time m: round j of the
// history holds the arrivals that materialize at time j+1 together with the
// failure bits consumed by the step from time j to j+1. The transmission
// relation is scenario-wide and carried by reference only.
struct AdversaryHistory {
  std::vector<HistoryRound> rounds;
  const TransmissionEnv* env = nullptr;

  size_t size() const { return rounds.size(); }
  bool operator==(const AdversaryHistory& o) const { return rounds == o.rounds; }
  std::string canonical_key() const;
};

AdversaryHistory history(const Adversary& adv, int m, const std::vector<Agent>& pool,
                         const TransmissionEnv* env);

struct EnumerationCaps {
  long max_adversaries = 2'000'000;
};

struct AdversarySet {
  std::vector<Adversary> adversaries;
  bool truncated = false;
};

// Every conflict-free schedule over the pool (arrival time in [1, horizon],
// any in-lane, any out-lane intent, or no arrival at all) crossed with every
// failure pattern the model admits over rounds [0, horizon). Deterministic
// order; ids are positions in that order.
AdversarySet enumerate_adversaries(FailureModel model, const std::vector<Agent>& pool,
                                   int horizon, const IntersectionSpec& spec,
                                   const EnumerationCaps& caps = {});

}  // namespace isim
