#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "isim/adversary.hpp"
#include "isim/topology.hpp"
#include "isim/verdict.hpp"

namespace isim {

// An intersection policy maps adversary histories to sets of permitted
// moves. Shipped kinds: the empty policy, cyclic rotations, a priority
// overlay that restricts a cyclic base while designated agents are present,
// and extensional tables (the output of policy extraction).
class Policy {
 public:
  enum class Kind { Empty, Cyclic, Priority, Table };

  static Policy empty();
  // Validates that each cell is pairwise compatible over distinct moves.
  static Policy cyclic(std::vector<std::vector<Move>> cells, const IntersectionSpec& spec);
  static Policy priority(std::set<Agent> vips, Policy base, const IntersectionSpec& spec);
  static Policy table(std::map<std::string, std::vector<Move>> entries);

  Kind kind() const { return kind_; }
  const std::vector<std::vector<Move>>& cells() const { return cells_; }
  const std::set<Agent>& vips() const { return vips_; }
  const std::map<std::string, std::vector<Move>>& table_entries() const { return table_; }

  std::vector<Move> eval(const AdversaryHistory& h) const;
  // Only meaningful for time-determined kinds (Empty, Cyclic).
  std::vector<Move> eval_at_time(int t) const;
  bool time_determined() const { return kind_ == Kind::Empty || kind_ == Kind::Cyclic; }
  int cycle_length() const;

  std::string describe() const;

 private:
  Policy() = default;
  Kind kind_ = Kind::Empty;
  std::vector<std::vector<Move>> cells_;           // Cyclic, and Priority base
  std::set<Agent> vips_;                           // Priority
  std::map<std::string, std::vector<Move>> table_; // Table, by history key
  std::shared_ptr<const IntersectionSpec> spec_;   // Priority reconstruction
};

// Which lane's turn anchors the rotation at a given history. Table entries
// exist for extracted or hand-written descriptors.
class NextFn {
 public:
  enum class Kind { RoundRobin, CycleHeld, Constant, Table };

  static NextFn round_robin();
  static NextFn cycle_held(int hold);
  static NextFn constant(LaneId lane);
  static NextFn table(std::map<std::string, LaneId> entries);

  Kind kind() const { return kind_; }
  int hold() const { return hold_; }

  LaneId eval(const AdversaryHistory& h, const IntersectionSpec& spec) const;
  LaneId eval_at_time(int t, const IntersectionSpec& spec) const;
  bool time_determined() const { return kind_ != Kind::Table; }
  // Phase period of the rotation, for exact fairness arguments.
  int period(const IntersectionSpec& spec) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::RoundRobin;
  int hold_ = 1;
  LaneId lane_ = kNoLane;
  std::map<std::string, LaneId> table_;
};

LaneId next_round_robin(const AdversaryHistory& h, const IntersectionSpec& spec);

// Conflict-freedom of the policy's outputs over the given histories; exact
// for time-determined policies (phase space is finite and fully swept).
Verdict check_conflict_free(const Policy& policy, const IntersectionSpec& spec,
                            const std::vector<AdversaryHistory>& histories = {});

// Every move is permitted infinitely often. Exact for Empty/Cyclic;
// bounded-scan inconclusive otherwise.
Verdict check_fairness(const Policy& policy, const IntersectionSpec& spec);

// Every move is infinitely often either permitted or compatible with the
// whole permitted cell while its source lane holds the rotation token.
// Exact for Empty/Cyclic policy with a time-determined rotation.
Verdict check_pair_fairness(const Policy& policy, const NextFn& next,
                            const IntersectionSpec& spec);

// No permitted cell can accept another move without breaking pairwise
// compatibility. Exact for time-determined policies.
Verdict check_efficient(const Policy& policy, const IntersectionSpec& spec,
                        const std::vector<AdversaryHistory>& histories = {});

}  // namespace isim
