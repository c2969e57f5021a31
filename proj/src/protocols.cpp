#include "isim/protocols.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_map>

#include "isim/verify.hpp"

namespace isim {

namespace {

// Half-open cyclic walk over in-lane indices: [start, end) is empty when
// start == end, else steps start, start+1, ... mod n until reaching end.
std::vector<int> cyclic_interval(int start, int end, int n) {
  std::vector<int> out;
  if (start == end) return out;
  for (int i = start; i != end; i = (i + 1) % n) out.push_back(i);
  return out;
}

bool in_cyclic_interval(int start, int end, int q, int n) {
  if (start == end) return false;
  int dq = (q - start + n) % n;
  int dend = (end - start + n) % n;
  return dq < dend;
}

void insert_sorted(std::vector<Move>& moves, const Move& mv) {
  auto it = std::lower_bound(moves.begin(), moves.end(), mv);
  if (it == moves.end() || *it != mv) moves.insert(it, mv);
}

}  // namespace

ActionProtocol traffic_light_protocol(const IntersectionSpec& spec) {
  ActionProtocol p;
  p.name = "traffic_light";
  const int n = spec.in_lane_count();
  std::vector<LaneId> lanes = spec.lanes_in();
  p.act = [lanes, n](Agent, const LocalState& s) {
    if (!s.sensors.front) return Action::Noop;
    return s.sensors.lane == lanes[static_cast<size_t>(s.sensors.time % n)] ? Action::Go
                                                                            : Action::Noop;
  };
  return p;
}

PosSet pos_set_empty(const SensorReading& reading, LaneId next_lane,
                     const IntersectionSpec& spec) {
  if (!reading.front) throw SpecError("possible-goers scan is defined for front agents only");
  PosSet pos;
  const int n = spec.in_lane_count();
  for (int li : cyclic_interval(spec.in_lane_index(next_lane),
                                spec.in_lane_index(reading.lane), n)) {
    LaneId l = spec.in_lane_at(li);
    // All of this lane's candidates are screened against the accumulated
    // set first, then added together.
    std::vector<Move> additions;
    for (const Move& mv : spec.moves_from(l))
      if (spec.compatible_with_set(mv, pos.moves)) additions.push_back(mv);
    for (const Move& mv : additions) insert_sorted(pos.moves, mv);
    pos.stages.push_back({l, pos.moves});
  }
  return pos;
}

PosSet pos_set_intent(const LocalState& state, LaneId next_lane,
                      const IntersectionSpec& spec) {
  if (!state.sensors.front)
    throw SpecError("possible-goers scan is defined for front agents only");
  if (state.memory.kind != Memory::Kind::Moves)
    throw SpecError("announcement-informed scan needs the intent exchange");
  PosSet pos;
  const int n = spec.in_lane_count();
  for (int li : cyclic_interval(spec.in_lane_index(next_lane),
                                spec.in_lane_index(state.sensors.lane), n)) {
    LaneId l = spec.in_lane_at(li);
    std::vector<Move> heard;
    for (const Move& mv : state.memory.moves)
      if (mv.source == l) heard.push_back(mv);
    if (!heard.empty()) {
      // A lane we heard from contributes its announcement and nothing else;
      // an incompatible announcement contributes nothing.
      for (const Move& mv : heard)
        if (spec.compatible_with_set(mv, pos.moves)) insert_sorted(pos.moves, mv);
    } else {
      std::vector<Move> additions;
      for (const Move& mv : spec.moves_from(l))
        if (spec.compatible_with_set(mv, pos.moves)) additions.push_back(mv);
      for (const Move& mv : additions) insert_sorted(pos.moves, mv);
    }
    pos.stages.push_back({l, pos.moves});
  }
  return pos;
}

namespace {

ActionProtocol pos_protocol(const IntersectionSpec& spec, const NextFn& next,
                            const std::string& name, const std::string& exchange,
                            bool informed) {
  if (!next.time_determined())
    throw SpecError("protocol '" + name + "' needs a rotation computable from the round");
  ActionProtocol p;
  p.name = name;
  p.required_exchange = exchange;
  IntersectionSpec sp = spec;
  NextFn nx = next;
  p.act = [sp, nx, informed](Agent, const LocalState& s) {
    if (!s.sensors.front) return Action::Noop;
    LaneId next_lane = nx.eval_at_time(s.sensors.time, sp);
    PosSet pos = informed ? pos_set_intent(s, next_lane, sp)
                          : pos_set_empty(s.sensors, next_lane, sp);
    Move own{s.sensors.lane, s.sensors.intent};
    return sp.compatible_with_set(own, pos.moves) ? Action::Go : Action::Noop;
  };
  return p;
}

}  // namespace

ActionProtocol p_empty_protocol(const IntersectionSpec& spec, const NextFn& next) {
  return pos_protocol(spec, next, "p_empty", "empty", false);
}

ActionProtocol p_intent_protocol(const IntersectionSpec& spec, const NextFn& next) {
  return pos_protocol(spec, next, "p_intent", "intent", true);
}

ActionProtocol p_sigma_protocol(const IntersectionSpec& spec, const Policy& sigma) {
  if (!sigma.time_determined())
    throw SpecError("direct policy-gated protocol needs a time-determined policy");
  ActionProtocol p;
  p.name = "p_sigma";
  IntersectionSpec sp = spec;
  Policy pol = sigma;
  p.act = [sp, pol](Agent, const LocalState& s) {
    if (!s.sensors.front) return Action::Noop;
    std::vector<Move> cell = pol.eval_at_time(s.sensors.time);
    Move own{s.sensors.lane, s.sensors.intent};
    return std::binary_search(cell.begin(), cell.end(), own) ? Action::Go : Action::Noop;
  };
  return p;
}

bool kbp_condition(const Oracle& oracle, const PolicyView& view, const KbProgram& program,
                   int run, int m, Agent agent) {
  if (!oracle.front(run, m, agent)) return false;
  const IntersectionSpec& spec = oracle.ctx().spec;
  Move mv = oracle.move_of(run, m, agent);
  const std::vector<Move>& sigma = view.sigma_at(run, m);
  bool in_sigma = std::binary_search(sigma.begin(), sigma.end(), mv);
  if (program.kind == KbProgram::Kind::PolicyGate || in_sigma) return in_sigma;

  if (program.strict_override)
    for (const Move& s : sigma)
      if (!spec.compatible(mv, s)) return false;

  const int n = spec.in_lane_count();
  const int ni = spec.in_lane_index(view.next_at(run, m));
  const int li = spec.in_lane_index(mv.source);
  const std::vector<Agent>& goers = oracle.go_set(run, m);
  const std::vector<Move>& gmoves = oracle.go_moves(run, m);
  for (size_t k = 0; k < goers.size(); ++k) {
    if (goers[k] == agent) continue;
    const Move& gm = gmoves[k];
    if (std::binary_search(sigma.begin(), sigma.end(), gm)) {
      if (!spec.compatible(mv, gm)) return false;
    } else if (in_cyclic_interval(ni, li, spec.in_lane_index(gm.source), n)) {
      if (!spec.compatible(mv, gm)) return false;
    }
  }
  return true;
}

Action eval_kbp(const Oracle& oracle, const PolicyView& view, int run, int m, Agent agent,
                const KbProgram& program) {
  if (m >= oracle.horizon())
    throw SpecError("knowledge-test evaluation needs a round below the horizon");
  if (!oracle.front(run, m, agent)) return Action::Noop;
  for (const Point& p : oracle.indistinguishable(agent, run, m))
    if (!kbp_condition(oracle, view, program, p.run, p.m, agent)) return Action::Noop;
  return Action::Go;
}

Action eval_kbp(const Oracle& oracle, int run, int m, Agent agent, const KbProgram& program) {
  PolicyView view(oracle, program.sigma, program.next);
  return eval_kbp(oracle, view, run, m, agent, program);
}

ActionProtocol TableProtocol::to_protocol(const std::string& name) const {
  ActionProtocol p;
  p.name = name;
  p.required_exchange = exchange_name;
  auto table = std::make_shared<std::map<std::string, std::pair<LocalState, Action>>>(entries);
  p.act = [table](Agent, const LocalState& s) {
    auto it = table->find(s.canonical_key());
    return it == table->end() ? Action::Noop : it->second.second;
  };
  return p;
}

TableProtocol synthesize_implementation(std::shared_ptr<const Context> ctx,
                                        const Policy& sigma, const NextFn& next,
                                        bool strict_override) {
  if (!next.time_determined())
    throw SpecError("synthesis needs a rotation computable from the round "
                    "(the per-level sweep order must be uniform)");
  const IntersectionSpec& spec = ctx->spec;
  const int n_lanes = spec.in_lane_count();
  const int n = static_cast<int>(ctx->pool.size());
  const int horizon = ctx->horizon;
  const size_t n_runs = ctx->adversaries.size();

  TableProtocol table;
  table.exchange_name = ctx->exchange.name;
  table.source = "synthesized(" + sigma.describe() + ", " + next.describe() + ")";

  auto insert_entry = [&table](const LocalState& s, Action a) {
    std::string key = s.canonical_key();
    auto [it, fresh] = table.entries.insert({std::move(key), {s, a}});
    if (!fresh && it->second.second != a)
      throw SpecError("synthesis produced conflicting actions for one local state; "
                      "the context breaks the awareness preconditions");
  };

  ActionProtocol lookup = table.to_protocol("synthesizing");
  // to_protocol snapshots the entries; rebind to the live table instead.
  lookup.act = [&table](Agent, const LocalState& s) {
    auto it = table.entries.find(s.canonical_key());
    return it == table.entries.end() ? Action::Noop : it->second.second;
  };

  std::vector<Run> runs;
  runs.reserve(n_runs);
  for (const Adversary& adv : ctx->adversaries) {
    Run r;
    r.adversary = &adv;
    r.states.push_back(initial_state(*ctx, adv));
    r.rounds.resize(static_cast<size_t>(horizon));
    runs.push_back(std::move(r));
  }

  for (int m = 0; m < horizon; ++m) {
    std::vector<std::vector<Move>> cells(n_runs);
    for (size_t r = 0; r < n_runs; ++r) {
      AdversaryHistory h = history(*runs[r].adversary, m, ctx->pool, &ctx->env);
      cells[r] = sigma.eval(h);
      std::sort(cells[r].begin(), cells[r].end());
    }
    const int ni = spec.in_lane_index(next.eval_at_time(m, spec));

    std::vector<std::vector<Action>> acts(n_runs,
                                          std::vector<Action>(static_cast<size_t>(n),
                                                              Action::Noop));

    // Class map per agent over this level's local states.
    std::vector<std::unordered_map<std::string, std::vector<size_t>>> classes(
        static_cast<size_t>(n));
    for (size_t r = 0; r < n_runs; ++r)
      for (int i = 0; i < n; ++i)
        classes[static_cast<size_t>(i)]
            [runs[r].states.back().locals[static_cast<size_t>(i)].canonical_key()]
                .push_back(r);

    // Permitted-move phase: go where the agent knows its move is permitted.
    // Class-uniform permitted-membership of own-lane moves is exactly the
    // awareness precondition; refuse when it breaks.
    for (int i = 0; i < n; ++i) {
      for (const auto& [key, members] : classes[static_cast<size_t>(i)]) {
        (void)key;
        const LocalState& rep =
            runs[members.front()].states.back().locals[static_cast<size_t>(i)];
        if (!rep.sensors.front) continue;
        for (LaneId out : spec.lanes_out()) {
          Move probe{rep.sensors.lane, out};
          bool first = std::binary_search(cells[members.front()].begin(),
                                          cells[members.front()].end(), probe);
          for (size_t r : members) {
            bool here = std::binary_search(cells[r].begin(), cells[r].end(), probe);
            if (here != first)
              throw SpecError(
                  "synthesis aborted: permitted-move membership of " + to_string(probe) +
                  " differs across states indistinguishable to agent " +
                  std::to_string(ctx->pool[static_cast<size_t>(i)]) + " at round " +
                  std::to_string(m) + "; the policy is not awareness-compatible");
          }
        }
        Move own{rep.sensors.lane, rep.sensors.intent};
        bool member = std::binary_search(cells[members.front()].begin(),
                                         cells[members.front()].end(), own);
        if (member)
          for (size_t r : members) acts[r][static_cast<size_t>(i)] = Action::Go;
      }
    }

    // Override sweep in cyclic lane order from the rotation anchor; earlier
    // lanes' grants are fixed before later lanes are considered.
    for (int d = 0; d < n_lanes; ++d) {
      LaneId lane = spec.in_lane_at((ni + d) % n_lanes);
      const int li = spec.in_lane_index(lane);
      for (int i = 0; i < n; ++i) {
        for (const auto& [key, members] : classes[static_cast<size_t>(i)]) {
          (void)key;
          const LocalState& rep =
              runs[members.front()].states.back().locals[static_cast<size_t>(i)];
          if (!rep.sensors.front || rep.sensors.lane != lane) continue;
          if (acts[members.front()][static_cast<size_t>(i)] == Action::Go) continue;
          Move own{rep.sensors.lane, rep.sensors.intent};
          bool granted = true;
          for (size_t r : members) {
            if (strict_override) {
              for (const Move& s : cells[r])
                if (!spec.compatible(own, s)) { granted = false; break; }
              if (!granted) break;
            }
            for (int j = 0; j < n && granted; ++j) {
              if (j == i || acts[r][static_cast<size_t>(j)] != Action::Go) continue;
              const SensorReading& jr =
                  runs[r].states.back().locals[static_cast<size_t>(j)].sensors;
              Move gm{jr.lane, jr.intent};
              if (std::binary_search(cells[r].begin(), cells[r].end(), gm)) {
                if (!spec.compatible(own, gm)) granted = false;
              } else if (in_cyclic_interval(ni, li, spec.in_lane_index(gm.source), n_lanes)) {
                if (!spec.compatible(own, gm)) granted = false;
              }
            }
            if (!granted) break;
          }
          if (granted)
            for (size_t r : members) acts[r][static_cast<size_t>(i)] = Action::Go;
        }
      }
    }

    for (size_t r = 0; r < n_runs; ++r)
      for (int i = 0; i < n; ++i)
        insert_entry(runs[r].states.back().locals[static_cast<size_t>(i)],
                     acts[r][static_cast<size_t>(i)]);

    for (size_t r = 0; r < n_runs; ++r)
      runs[r].states.push_back(step(*ctx, runs[r].states.back(), lookup,
                                    runs[r].rounds[static_cast<size_t>(m)]));
  }
  return table;
}

}  // namespace isim
