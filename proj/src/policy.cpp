#include "isim/policy.hpp"

#include <algorithm>
#include <numeric>

namespace isim {

namespace {

std::vector<Move> sorted_unique(std::vector<Move> moves) {
  std::sort(moves.begin(), moves.end());
  moves.erase(std::unique(moves.begin(), moves.end()), moves.end());
  return moves;
}

bool pairwise_compatible(const std::vector<Move>& cell, const IntersectionSpec& spec,
                         std::pair<Move, Move>* bad = nullptr) {
  for (size_t i = 0; i < cell.size(); ++i)
    for (size_t j = i + 1; j < cell.size(); ++j)
      if (!spec.compatible(cell[i], cell[j])) {
        if (bad) *bad = {cell[i], cell[j]};
        return false;
      }
  return true;
}

}  // namespace

Policy Policy::empty() { return Policy{}; }

Policy Policy::cyclic(std::vector<std::vector<Move>> cells, const IntersectionSpec& spec) {
  if (cells.empty()) throw SpecError("cyclic policy needs at least one cell");
  Policy p;
  p.kind_ = Kind::Cyclic;
  for (auto& cell : cells) {
    for (const Move& mv : cell)
      if (!spec.is_move(mv))
        throw SpecError("policy cell references non-move " + to_string(mv));
    cell = sorted_unique(std::move(cell));
    std::pair<Move, Move> bad;
    if (!pairwise_compatible(cell, spec, &bad))
      throw SpecError("policy cell permits conflicting moves " + to_string(bad.first) +
                      " and " + to_string(bad.second));
    p.cells_.push_back(std::move(cell));
  }
  return p;
}

Policy Policy::priority(std::set<Agent> vips, Policy base, const IntersectionSpec& spec) {
  if (base.kind_ != Kind::Cyclic)
    throw SpecError("priority policy needs a cyclic base");
  Policy p;
  p.kind_ = Kind::Priority;
  p.cells_ = base.cells_;
  p.vips_ = std::move(vips);
  p.spec_ = std::make_shared<IntersectionSpec>(spec);
  return p;
}

Policy Policy::table(std::map<std::string, std::vector<Move>> entries) {
  Policy p;
  p.kind_ = Kind::Table;
  for (auto& [k, v] : entries) p.table_[k] = sorted_unique(std::move(v));
  return p;
}

std::vector<Move> Policy::eval_at_time(int t) const {
  switch (kind_) {
    case Kind::Empty:
      return {};
    case Kind::Cyclic:
      return cells_[static_cast<size_t>(t) % cells_.size()];
    default:
      throw SpecError("policy is not time-determined");
  }
}

std::vector<Move> Policy::eval(const AdversaryHistory& h) const {
  switch (kind_) {
    case Kind::Empty:
      return {};
    case Kind::Cyclic:
      return eval_at_time(static_cast<int>(h.size()));
    case Kind::Table: {
      auto it = table_.find(h.canonical_key());
      if (it == table_.end())
        throw SpecError("history of length " + std::to_string(h.size()) +
                        " is outside the policy table");
      return it->second;
    }
    case Kind::Priority:
      break;
  }

  // Replay the history, tracking which agents are still queued under the
  // assumption that every permitted front move is taken. Round j departures
  // use this policy's own cell at length j.
  const IntersectionSpec& spec = *spec_;
  std::vector<std::vector<std::pair<Agent, LaneId>>> queues(
      static_cast<size_t>(spec.in_lane_count()));
  auto cell_at = [&](size_t len,
                     const std::vector<std::vector<std::pair<Agent, LaneId>>>& qs) {
    std::vector<Move> base = cells_[len % cells_.size()];
    std::vector<LaneId> vip_lanes;
    for (size_t li = 0; li < qs.size(); ++li)
      for (const auto& [agent, intent] : qs[li]) {
        (void)intent;
        if (vips_.count(agent)) {
          vip_lanes.push_back(spec.lanes_in()[li]);
          break;
        }
      }
    if (vip_lanes.empty()) return base;
    std::vector<Move> restricted;
    for (const Move& mv : base)
      if (std::find(vip_lanes.begin(), vip_lanes.end(), mv.source) != vip_lanes.end())
        restricted.push_back(mv);
    return restricted;
  };

  for (size_t j = 0; j < h.rounds.size(); ++j) {
    std::vector<Move> cell = cell_at(j, queues);
    for (size_t li = 0; li < queues.size(); ++li) {
      auto& q = queues[li];
      if (q.empty()) continue;
      Move front_move{spec.lanes_in()[li], q.front().second};
      if (std::find(cell.begin(), cell.end(), front_move) != cell.end())
        q.erase(q.begin());
    }
    for (const auto& [agent, lane, intent] : h.rounds[j].arrivals)
      queues[static_cast<size_t>(spec.in_lane_index(lane))].push_back({agent, intent});
  }
  return cell_at(h.rounds.size(), queues);
}

int Policy::cycle_length() const {
  switch (kind_) {
    case Kind::Empty:
      return 1;
    case Kind::Cyclic:
    case Kind::Priority:
      return static_cast<int>(cells_.size());
    case Kind::Table:
      throw SpecError("table policy has no cycle length");
  }
  return 1;
}

std::string Policy::describe() const {
  switch (kind_) {
    case Kind::Empty:
      return "empty";
    case Kind::Cyclic:
      return "cyclic(" + std::to_string(cells_.size()) + ")";
    case Kind::Priority:
      return "priority(" + std::to_string(vips_.size()) + " agents, cyclic(" +
             std::to_string(cells_.size()) + "))";
    case Kind::Table:
      return "table(" + std::to_string(table_.size()) + " histories)";
  }
  return "?";
}

NextFn NextFn::round_robin() { return NextFn{}; }

NextFn NextFn::cycle_held(int hold) {
  if (hold < 1) throw SpecError("cycle-held rotation needs hold >= 1");
  NextFn f;
  f.kind_ = Kind::CycleHeld;
  f.hold_ = hold;
  return f;
}

NextFn NextFn::constant(LaneId lane) {
  NextFn f;
  f.kind_ = Kind::Constant;
  f.lane_ = lane;
  return f;
}

NextFn NextFn::table(std::map<std::string, LaneId> entries) {
  NextFn f;
  f.kind_ = Kind::Table;
  f.table_ = std::move(entries);
  return f;
}

LaneId NextFn::eval_at_time(int t, const IntersectionSpec& spec) const {
  const int n = spec.in_lane_count();
  switch (kind_) {
    case Kind::RoundRobin:
      return spec.in_lane_at(t % n);
    case Kind::CycleHeld:
      return spec.in_lane_at((t / hold_) % n);
    case Kind::Constant:
      if (!spec.is_in_lane(lane_))
        throw SpecError("constant rotation lane " + std::to_string(lane_) +
                        " is not an in-lane");
      return lane_;
    case Kind::Table:
      throw SpecError("table rotation is not time-determined");
  }
  return kNoLane;
}

LaneId NextFn::eval(const AdversaryHistory& h, const IntersectionSpec& spec) const {
  if (kind_ == Kind::Table) {
    auto it = table_.find(h.canonical_key());
    if (it == table_.end())
      throw SpecError("history of length " + std::to_string(h.size()) +
                      " is outside the rotation table");
    return it->second;
  }
  return eval_at_time(static_cast<int>(h.size()), spec);
}

int NextFn::period(const IntersectionSpec& spec) const {
  switch (kind_) {
    case Kind::RoundRobin:
      return spec.in_lane_count();
    case Kind::CycleHeld:
      return hold_ * spec.in_lane_count();
    case Kind::Constant:
      return 1;
    case Kind::Table:
      throw SpecError("table rotation has no period");
  }
  return 1;
}

std::string NextFn::describe() const {
  switch (kind_) {
    case Kind::RoundRobin:
      return "round_robin";
    case Kind::CycleHeld:
      return "cycle_held(" + std::to_string(hold_) + ")";
    case Kind::Constant:
      return "constant(" + std::to_string(lane_) + ")";
    case Kind::Table:
      return "table(" + std::to_string(table_.size()) + " histories)";
  }
  return "?";
}

LaneId next_round_robin(const AdversaryHistory& h, const IntersectionSpec& spec) {
  return NextFn::round_robin().eval(h, spec);
}

Verdict check_conflict_free(const Policy& policy, const IntersectionSpec& spec,
                            const std::vector<AdversaryHistory>& histories) {
  Verdict v;
  auto check_cell = [&](const std::vector<Move>& cell, const std::string& where) {
    std::pair<Move, Move> bad;
    if (!pairwise_compatible(cell, spec, &bad)) {
      Witness w;
      w.detail = where + " permits conflicting moves " + to_string(bad.first) + " and " +
                 to_string(bad.second);
      v.witnesses.push_back(std::move(w));
    }
  };

  if (policy.time_determined()) {
    for (int t = 0; t < policy.cycle_length(); ++t)
      check_cell(policy.eval_at_time(t), "phase " + std::to_string(t));
    v.exact = true;
  } else if (policy.kind() == Policy::Kind::Table) {
    int idx = 0;
    for (const auto& [key, cell] : policy.table_entries()) {
      (void)key;
      check_cell(cell, "table entry " + std::to_string(idx++));
    }
    v.exact = true;
    v.notes.push_back("table policies are empty outside their domain");
  } else {
    for (size_t i = 0; i < histories.size(); ++i)
      check_cell(policy.eval(histories[i]), "history " + std::to_string(i));
    v.notes.push_back("scanned " + std::to_string(histories.size()) + " histories");
  }
  v.status = v.witnesses.empty() ? Verdict::Status::Pass : Verdict::Status::Fail;
  return v;
}

Verdict check_fairness(const Policy& policy, const IntersectionSpec& spec) {
  Verdict v;
  if (!policy.time_determined()) {
    v.status = Verdict::Status::Inconclusive;
    v.notes.push_back("fairness over " + policy.describe() +
                      " is not decidable from the descriptor; no exact cycle to sweep");
    return v;
  }
  std::vector<Move> covered;
  for (int t = 0; t < policy.cycle_length(); ++t)
    for (const Move& mv : policy.eval_at_time(t)) covered.push_back(mv);
  covered = sorted_unique(std::move(covered));
  for (const Move& mv : spec.all_moves()) {
    if (!std::binary_search(covered.begin(), covered.end(), mv)) {
      Witness w;
      w.detail = "move " + to_string(mv) + " is never permitted";
      v.witnesses.push_back(std::move(w));
    }
  }
  v.exact = true;
  v.status = v.witnesses.empty() ? Verdict::Status::Pass : Verdict::Status::Fail;
  return v;
}

Verdict check_pair_fairness(const Policy& policy, const NextFn& next,
                            const IntersectionSpec& spec) {
  Verdict v;
  if (!policy.time_determined() || !next.time_determined()) {
    v.status = Verdict::Status::Inconclusive;
    v.notes.push_back("pair fairness is exact only for time-determined policy and rotation");
    return v;
  }
  const int period = std::lcm(policy.cycle_length(), next.period(spec));
  for (const Move& mv : spec.all_moves()) {
    bool covered = false;
    for (int t = 0; t < period && !covered; ++t) {
      std::vector<Move> cell = policy.eval_at_time(t);
      if (std::find(cell.begin(), cell.end(), mv) != cell.end())
        covered = true;
      else if (next.eval_at_time(t, spec) == mv.source && spec.compatible_with_set(mv, cell))
        covered = true;
    }
    if (!covered) {
      Witness w;
      w.detail = "move " + to_string(mv) +
                 " is never permitted nor rotation-covered within period " +
                 std::to_string(period);
      v.witnesses.push_back(std::move(w));
    }
  }
  v.exact = true;
  v.status = v.witnesses.empty() ? Verdict::Status::Pass : Verdict::Status::Fail;
  return v;
}

Verdict check_efficient(const Policy& policy, const IntersectionSpec& spec,
                        const std::vector<AdversaryHistory>& histories) {
  Verdict v;
  auto check_cell = [&](const std::vector<Move>& cell, const std::string& where) {
    for (const Move& mv : spec.all_moves()) {
      if (std::find(cell.begin(), cell.end(), mv) != cell.end()) continue;
      if (spec.compatible_with_set(mv, cell)) {
        Witness w;
        w.detail = where + " could also permit " + to_string(mv);
        v.witnesses.push_back(std::move(w));
        return;
      }
    }
  };
  if (policy.time_determined()) {
    for (int t = 0; t < policy.cycle_length(); ++t)
      check_cell(policy.eval_at_time(t), "phase " + std::to_string(t));
    v.exact = true;
  } else if (policy.kind() == Policy::Kind::Table) {
    int idx = 0;
    for (const auto& [key, cell] : policy.table_entries()) {
      (void)key;
      check_cell(cell, "table entry " + std::to_string(idx++));
    }
  } else {
    for (size_t i = 0; i < histories.size(); ++i)
      check_cell(policy.eval(histories[i]), "history " + std::to_string(i));
    v.notes.push_back("scanned " + std::to_string(histories.size()) + " histories");
  }
  v.status = v.witnesses.empty() ? Verdict::Status::Pass : Verdict::Status::Fail;
  return v;
}

std::string to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::Pass: return "pass";
    case Verdict::Status::Fail: return "fail";
    case Verdict::Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

}  // namespace isim
