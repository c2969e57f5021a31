#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace isim {

using LaneId = int;
using Agent = int;

// Sensor-field sentinels. A queued agent reports its in-lane; an agent that
// has not arrived yet reports kNoLane; an agent that has crossed reports
// kCrossedLane. kNoIntent marks agents the arrival schedule never mentions.
inline constexpr LaneId kNoLane = -1;
inline constexpr LaneId kCrossedLane = -2;
inline constexpr LaneId kNoIntent = -1;

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Move {
  LaneId source = kNoLane;
  LaneId target = kNoLane;
  auto operator<=>(const Move&) const = default;
};

std::string to_string(const Move& m);

// Static intersection description: disjoint in/out lane sets (at least two
// in-lanes, at least one out-lane) plus a symmetric compatibility relation
// over moves. The declared in-lane order doubles as the cyclic priority
// order used by rotation policies. Immutable once validated.
class IntersectionSpec {
 public:
  static IntersectionSpec validate(std::vector<LaneId> lanes_in,
                                   std::vector<LaneId> lanes_out,
                                   std::vector<std::pair<Move, Move>> compat_pairs);

  const std::vector<LaneId>& lanes_in() const { return lanes_in_; }
  const std::vector<LaneId>& lanes_out() const { return lanes_out_; }
  int in_lane_count() const { return static_cast<int>(lanes_in_.size()); }

  bool is_in_lane(LaneId l) const;
  bool is_out_lane(LaneId l) const;
  // Position of an in-lane in the declared order; throws on non-in-lanes.
  int in_lane_index(LaneId l) const;
  LaneId in_lane_at(int index) const;

  bool is_move(const Move& m) const;
  // All moves, source-major in declared lane order.
  std::vector<Move> all_moves() const;
  std::vector<Move> moves_from(LaneId in_lane) const;

  bool compatible(const Move& a, const Move& b) const;
  // True iff `a` is compatible with every member of `set` (trivially true
  // when the set is empty). Membership of `a` itself is not special-cased;
  // self-compatibility counts only if declared.
  bool compatible_with_set(const Move& a, const std::vector<Move>& set) const;

  const std::set<std::pair<Move, Move>>& compat_pairs() const { return compat_; }

 private:
  IntersectionSpec() = default;
  std::vector<LaneId> lanes_in_;
  std::vector<LaneId> lanes_out_;
  std::set<std::pair<Move, Move>> compat_;  // closed under swap
};

struct LanePos {
  LaneId lane = kNoLane;
  int pos = 0;
  auto operator<=>(const LanePos&) const = default;
};

// Which queue slots can hear which: membership of ((l,p),(l',p')) means a
// broadcast from slot (l,p) is deliverable to slot (l',p'), subject to the
// per-round failure bits. Front slots always hear each other; extra pairs
// extend reach down the queues up to max_depth.
class TransmissionEnv {
 public:
  static TransmissionEnv validate(const IntersectionSpec& spec,
                                  std::vector<std::pair<LanePos, LanePos>> extra_pairs,
                                  int max_depth,
                                  const std::vector<std::pair<LanePos, LanePos>>& excluded = {});

  bool reaches(const LanePos& from, const LanePos& to) const;
  int max_depth() const { return max_depth_; }
  const std::set<std::pair<LanePos, LanePos>>& pairs() const { return pairs_; }

 private:
  TransmissionEnv() = default;
  std::set<std::pair<LanePos, LanePos>> pairs_;
  int max_depth_ = 0;
};

}  // namespace isim
