#include "isim/adversary.hpp"

#include <algorithm>

namespace isim {

ArrivalSchedule ArrivalSchedule::validate(std::map<Agent, Arrival> arrivals,
                                          const IntersectionSpec& spec) {
  std::set<std::pair<int, LaneId>> slots;
  for (const auto& [agent, arr] : arrivals) {
    if (arr.time < 1)
      throw SpecError("arrival time for agent " + std::to_string(agent) +
                      " must be at least 1");
    if (!spec.is_in_lane(arr.lane))
      throw SpecError("arrival lane " + std::to_string(arr.lane) + " is not an in-lane");
    if (!spec.is_out_lane(arr.intent))
      throw SpecError("arrival intent " + std::to_string(arr.intent) + " is not an out-lane");
    if (!slots.insert({arr.time, arr.lane}).second)
      throw SpecError("two agents arrive at time " + std::to_string(arr.time) +
                      " in lane " + std::to_string(arr.lane));
  }
  ArrivalSchedule s;
  s.arrivals_ = std::move(arrivals);
  return s;
}

std::optional<Arrival> ArrivalSchedule::arrival_of(Agent a) const {
  auto it = arrivals_.find(a);
  if (it == arrivals_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::tuple<Agent, LaneId, LaneId>> ArrivalSchedule::arrivals_at(int time) const {
  std::vector<std::tuple<Agent, LaneId, LaneId>> out;
  for (const auto& [agent, arr] : arrivals_)
    if (arr.time == time) out.push_back({agent, arr.lane, arr.intent});
  return out;
}

std::string to_string(FailureModel m) {
  switch (m) {
    case FailureModel::NF: return "NF";
    case FailureModel::CR: return "CR";
    case FailureModel::SO: return "SO";
  }
  return "?";
}

FailureModel failure_model_from_string(const std::string& s) {
  if (s == "NF") return FailureModel::NF;
  if (s == "CR") return FailureModel::CR;
  if (s == "SO") return FailureModel::SO;
  throw SpecError("unknown failure model '" + s + "' (expected NF, CR or SO)");
}

void validate_adversary(const Adversary& adv, FailureModel model, int horizon,
                        const IntersectionSpec& spec) {
  ArrivalSchedule::validate(adv.schedule.arrivals(), spec);

  for (const auto& [time, agent] : adv.failures.receive_failed) {
    (void)agent;
    if (time >= 0 && time < horizon)
      throw SpecError("reception failures are not allowed under " + to_string(model));
  }
  switch (model) {
    case FailureModel::NF:
      for (const auto& [time, agent] : adv.failures.transmit_failed) {
        (void)agent;
        if (time >= 0 && time < horizon)
          throw SpecError("transmit failure at round " + std::to_string(time) +
                          " not allowed under NF");
      }
      break;
    case FailureModel::CR:
      // Once an agent's transmit bit drops it must stay down.
      for (const auto& [time, agent] : adv.failures.transmit_failed) {
        for (int later = time + 1; later < horizon; ++later) {
          if (adv.failures.transmit_ok(later, agent))
            throw SpecError("agent " + std::to_string(agent) +
                            " transmits again at round " + std::to_string(later) +
                            " after failing at round " + std::to_string(time));
        }
      }
      break;
    case FailureModel::SO:
      break;
  }
}

namespace {

void append_int(std::string& out, long v) {
  out += std::to_string(v);
  out += ';';
}

}  // namespace

std::string AdversaryHistory::canonical_key() const {
  std::string key;
  append_int(key, static_cast<long>(rounds.size()));
  for (const HistoryRound& r : rounds) {
    key += 'a';
    append_int(key, static_cast<long>(r.arrivals.size()));
    for (const auto& [agent, lane, intent] : r.arrivals) {
      append_int(key, agent);
      append_int(key, lane);
      append_int(key, intent);
    }
    key += 't';
    for (Agent a : r.transmit_failed) append_int(key, a);
    key += 'r';
    for (Agent a : r.receive_failed) append_int(key, a);
  }
  return key;
}

AdversaryHistory history(const Adversary& adv, int m, const std::vector<Agent>& pool,
                         const TransmissionEnv* env) {
  AdversaryHistory h;
  h.env = env;
  h.rounds.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    HistoryRound r;
    r.arrivals = adv.schedule.arrivals_at(j + 1);
    for (Agent a : pool) {
      if (!adv.failures.transmit_ok(j, a)) r.transmit_failed.push_back(a);
      if (!adv.failures.receive_ok(j, a)) r.receive_failed.push_back(a);
    }
    h.rounds.push_back(std::move(r));
  }
  return h;
}

namespace {

// All per-agent arrival choices in a fixed order: no arrival first, then by
// time, lane position, intent position.
std::vector<std::optional<Arrival>> arrival_options(int horizon, const IntersectionSpec& spec) {
  std::vector<std::optional<Arrival>> opts;
  opts.push_back(std::nullopt);
  for (int t = 1; t <= horizon; ++t)
    for (LaneId lane : spec.lanes_in())
      for (LaneId intent : spec.lanes_out())
        opts.push_back(Arrival{t, lane, intent});
  return opts;
}

}  // namespace

AdversarySet enumerate_adversaries(FailureModel model, const std::vector<Agent>& pool,
                                   int horizon, const IntersectionSpec& spec,
                                   const EnumerationCaps& caps) {
  if (horizon < 0) throw SpecError("horizon must be non-negative");
  if (caps.max_adversaries < 1) throw SpecError("adversary cap must be positive");
  {
    std::set<Agent> dedup(pool.begin(), pool.end());
    if (dedup.size() != pool.size()) throw SpecError("agent pool contains duplicates");
    if (!std::is_sorted(pool.begin(), pool.end()))
      throw SpecError("agent pool must be sorted");
  }

  const auto opts = arrival_options(horizon, spec);
  const int n = static_cast<int>(pool.size());

  // Conflict-free schedules, agent-major lexicographic over the option list.
  std::vector<std::map<Agent, Arrival>> schedules;
  std::set<std::pair<int, LaneId>> used;
  std::map<Agent, Arrival> current;

  auto rec = [&](auto&& self, int idx) -> void {
    if (idx == n) {
      schedules.push_back(current);
      return;
    }
    for (const auto& opt : opts) {
      if (!opt) {
        self(self, idx + 1);
        continue;
      }
      std::pair<int, LaneId> slot{opt->time, opt->lane};
      if (used.count(slot)) continue;
      used.insert(slot);
      current[pool[static_cast<size_t>(idx)]] = *opt;
      self(self, idx + 1);
      current.erase(pool[static_cast<size_t>(idx)]);
      used.erase(slot);
    }
  };
  rec(rec, 0);

  // Failure patterns in a fixed order per model.
  std::vector<FailurePattern> patterns;
  switch (model) {
    case FailureModel::NF:
      patterns.push_back({});
      break;
    case FailureModel::CR: {
      // Per agent: no crash, or crash at round c (transmit fails from c on).
      std::vector<int> crash(static_cast<size_t>(n), -1);
      auto crec = [&](auto&& self, int idx) -> void {
        if (idx == n) {
          FailurePattern p;
          for (int k = 0; k < n; ++k) {
            if (crash[static_cast<size_t>(k)] < 0) continue;
            for (int t = crash[static_cast<size_t>(k)]; t < horizon; ++t)
              p.transmit_failed.insert({t, pool[static_cast<size_t>(k)]});
          }
          patterns.push_back(std::move(p));
          return;
        }
        crash[static_cast<size_t>(idx)] = -1;
        self(self, idx + 1);
        for (int c = 0; c < horizon; ++c) {
          crash[static_cast<size_t>(idx)] = c;
          self(self, idx + 1);
        }
        crash[static_cast<size_t>(idx)] = -1;
      };
      crec(crec, 0);
      break;
    }
    case FailureModel::SO: {
      const int cells = n * horizon;
      if (cells > 30) throw SpecError("send-omission enumeration too large (pool x horizon > 30)");
      for (long mask = 0; mask < (1L << cells); ++mask) {
        FailurePattern p;
        for (int c = 0; c < cells; ++c) {
          if (mask & (1L << c)) {
            int agent_idx = c / horizon;
            int t = c % horizon;
            p.transmit_failed.insert({t, pool[static_cast<size_t>(agent_idx)]});
          }
        }
        patterns.push_back(std::move(p));
      }
      break;
    }
  }

  AdversarySet out;
  out.adversaries.reserve(std::min<size_t>(schedules.size() * patterns.size(),
                                           static_cast<size_t>(caps.max_adversaries)));
  int id = 0;
  for (const auto& sched : schedules) {
    for (const auto& pat : patterns) {
      if (id >= caps.max_adversaries) {
        out.truncated = true;
        return out;
      }
      Adversary adv;
      adv.id = id++;
      adv.schedule = ArrivalSchedule::validate(sched, spec);
      adv.failures = pat;
      out.adversaries.push_back(std::move(adv));
    }
  }
  return out;
}

}  // namespace isim
