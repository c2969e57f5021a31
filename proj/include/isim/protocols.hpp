#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "isim/exchange.hpp"
#include "isim/kernel.hpp"
#include "isim/policy.hpp"
#include "isim/topology.hpp"

namespace isim {

class Oracle;

// A deterministic rule from local states to actions. `required_exchange`
// is empty for rules usable under any synchronous exchange.
struct ActionProtocol {
  std::string name;
  std::string required_exchange;
  std::function<Action(Agent, const LocalState&)> act;
};

// Result of the possible-goers scan: the accumulated move set plus the
// per-lane stages in interval order.
struct PosSet {
  std::vector<Move> moves;  // sorted
  std::vector<std::pair<LaneId, std::vector<Move>>> stages;
};

// Rotation protocol: go iff front and own lane holds the current phase.
ActionProtocol traffic_light_protocol(const IntersectionSpec& spec);

// Walk the cyclic lane interval [next, reading.lane); with no messages to
// go on, every move from each interval lane that is compatible with the
// accumulated set is treated as possibly going.
PosSet pos_set_empty(const SensorReading& reading, LaneId next_lane,
                     const IntersectionSpec& spec);

// Same walk, informed by announcements: a lane we heard from contributes
// exactly its announced move (if compatible with the set so far), a silent
// lane contributes every compatible move.
PosSet pos_set_intent(const LocalState& state, LaneId next_lane,
                      const IntersectionSpec& spec);

// Go iff front and own move is compatible with every possibly-going move.
ActionProtocol p_empty_protocol(const IntersectionSpec& spec, const NextFn& next);
ActionProtocol p_intent_protocol(const IntersectionSpec& spec, const NextFn& next);

// Direct implementation of the policy-gated program for time-determined
// policies: go iff front and own move is in the current cell.
ActionProtocol p_sigma_protocol(const IntersectionSpec& spec, const Policy& sigma);

// The two knowledge-based programs: go iff the agent knows it is front and
// its move is permitted (PolicyGate), or permitted-or-safely-overridable
// (PolicyWithOverride). `strict_override` additionally requires override
// moves to be compatible with every permitted move, going or not.
struct KbProgram {
  enum class Kind { PolicyGate, PolicyWithOverride };
  Kind kind = Kind::PolicyGate;
  Policy sigma = Policy::empty();
  NextFn next = NextFn::round_robin();
  bool strict_override = false;
};

// Knowledge-test evaluation of a program at a point of a generated system.
// Throws SpecError at m = horizon (the override clause looks one step ahead).
Action eval_kbp(const Oracle& oracle, int run, int m, Agent agent, const KbProgram& program);

class PolicyView;

// Single-point program condition, no knowledge quantification: front and
// permitted, or front and overridable against the going set. eval_kbp
// quantifies this over an indistinguishability class.
bool kbp_condition(const Oracle& oracle, const PolicyView& view, const KbProgram& program,
                   int run, int m, Agent agent);

// Cache-reusing variant for sweeps over a whole system.
Action eval_kbp(const Oracle& oracle, const PolicyView& view, int run, int m, Agent agent,
                const KbProgram& program);

// Tabulated protocol: canonical local-state key -> (state, action).
// Lookup misses (unreachable states) act as noop.
struct TableProtocol {
  std::string exchange_name;
  std::string source;  // how the table came to be, for reports
  std::map<std::string, std::pair<LocalState, Action>> entries;

  ActionProtocol to_protocol(const std::string& name = "synthesized") const;
};

// Level-by-level construction of the unique implementation of
// PolicyWithOverride(sigma, next) over the context's reachable states:
// round 0 all noop; per level, non-fronts noop, then fronts that know their
// move is permitted go, then a sweep in cyclic lane order from `next`
// grants go to fronts that know the override condition, with earlier sweep
// assignments fixed. Refuses (SpecError) when a knowledge class disagrees
// on permitted-move membership or on the rotation anchor, which is exactly
// a broken awareness precondition.
TableProtocol synthesize_implementation(std::shared_ptr<const Context> ctx,
                                        const Policy& sigma, const NextFn& next,
                                        bool strict_override = false);

}  // namespace isim
