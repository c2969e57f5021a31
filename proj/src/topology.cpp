#include "isim/topology.hpp"

#include <algorithm>

namespace isim {

std::string to_string(const Move& m) {
  return "(" + std::to_string(m.source) + "," + std::to_string(m.target) + ")";
}

IntersectionSpec IntersectionSpec::validate(std::vector<LaneId> lanes_in,
                                            std::vector<LaneId> lanes_out,
                                            std::vector<std::pair<Move, Move>> compat_pairs) {
  IntersectionSpec s;
  s.lanes_in_ = std::move(lanes_in);
  s.lanes_out_ = std::move(lanes_out);

  if (s.lanes_in_.size() < 2)
    throw SpecError("intersection needs at least two in-lanes");
  if (s.lanes_out_.empty())
    throw SpecError("intersection needs at least one out-lane");

  std::set<LaneId> seen;
  for (LaneId l : s.lanes_in_)
    if (!seen.insert(l).second)
      throw SpecError("duplicate in-lane " + std::to_string(l));
  for (LaneId l : s.lanes_out_)
    if (!seen.insert(l).second)
      throw SpecError("lane " + std::to_string(l) + " declared twice (in/out overlap or duplicate)");
  for (LaneId l : seen)
    if (l < 0) throw SpecError("lane labels must be non-negative");

  for (const auto& [a, b] : compat_pairs) {
    if (!s.is_move(a))
      throw SpecError("compatibility pair references non-move " + to_string(a));
    if (!s.is_move(b))
      throw SpecError("compatibility pair references non-move " + to_string(b));
    s.compat_.insert({a, b});
    s.compat_.insert({b, a});
  }
  return s;
}

bool IntersectionSpec::is_in_lane(LaneId l) const {
  return std::find(lanes_in_.begin(), lanes_in_.end(), l) != lanes_in_.end();
}

bool IntersectionSpec::is_out_lane(LaneId l) const {
  return std::find(lanes_out_.begin(), lanes_out_.end(), l) != lanes_out_.end();
}

int IntersectionSpec::in_lane_index(LaneId l) const {
  auto it = std::find(lanes_in_.begin(), lanes_in_.end(), l);
  if (it == lanes_in_.end())
    throw SpecError("lane " + std::to_string(l) + " is not an in-lane");
  return static_cast<int>(it - lanes_in_.begin());
}

LaneId IntersectionSpec::in_lane_at(int index) const {
  return lanes_in_.at(static_cast<size_t>(index));
}

bool IntersectionSpec::is_move(const Move& m) const {
  return is_in_lane(m.source) && is_out_lane(m.target);
}

std::vector<Move> IntersectionSpec::all_moves() const {
  std::vector<Move> out;
  out.reserve(lanes_in_.size() * lanes_out_.size());
  for (LaneId s : lanes_in_)
    for (LaneId t : lanes_out_) out.push_back({s, t});
  return out;
}

std::vector<Move> IntersectionSpec::moves_from(LaneId in_lane) const {
  std::vector<Move> out;
  out.reserve(lanes_out_.size());
  for (LaneId t : lanes_out_) out.push_back({in_lane, t});
  return out;
}

bool IntersectionSpec::compatible(const Move& a, const Move& b) const {
  return compat_.count({a, b}) != 0;
}

bool IntersectionSpec::compatible_with_set(const Move& a, const std::vector<Move>& set) const {
  for (const Move& b : set)
    if (!compatible(a, b)) return false;
  return true;
}

TransmissionEnv TransmissionEnv::validate(const IntersectionSpec& spec,
                                          std::vector<std::pair<LanePos, LanePos>> extra_pairs,
                                          int max_depth,
                                          const std::vector<std::pair<LanePos, LanePos>>& excluded) {
  if (max_depth < 0) throw SpecError("max_depth must be non-negative");
  TransmissionEnv env;
  env.max_depth_ = max_depth;

  // Fronts always hear fronts, own lane included.
  for (LaneId a : spec.lanes_in())
    for (LaneId b : spec.lanes_in())
      env.pairs_.insert({{a, 0}, {b, 0}});

  auto check_endpoint = [&](const LanePos& p) {
    if (!spec.is_in_lane(p.lane))
      throw SpecError("transmission pair references lane " + std::to_string(p.lane) +
                      " which is not an in-lane");
    if (p.pos < 0 || p.pos > max_depth)
      throw SpecError("transmission pair position " + std::to_string(p.pos) +
                      " outside [0, max_depth]");
  };
  for (const auto& [from, to] : extra_pairs) {
    check_endpoint(from);
    check_endpoint(to);
    env.pairs_.insert({from, to});
  }
  for (const auto& pair : excluded) {
    if (pair.first.pos == 0 && pair.second.pos == 0 &&
        spec.is_in_lane(pair.first.lane) && spec.is_in_lane(pair.second.lane))
      throw SpecError("front-to-front transmission pairs are mandatory and cannot be excluded");
    env.pairs_.erase(pair);
  }
  return env;
}

bool TransmissionEnv::reaches(const LanePos& from, const LanePos& to) const {
  return pairs_.count({from, to}) != 0;
}

}  // namespace isim
