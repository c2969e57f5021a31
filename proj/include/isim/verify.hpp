#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "isim/kernel.hpp"
#include "isim/policy.hpp"
#include "isim/protocols.hpp"
#include "isim/verdict.hpp"

namespace isim {

struct Point {
  int run = -1;
  int m = -1;
  auto operator<=>(const Point&) const = default;
};

class Oracle;

// Point predicates may re-enter the oracle, so nested knowledge works.
using PointPredicate = std::function<bool(const Oracle&, int run, int m)>;

// Exhaustive-indistinguishability knowledge oracle over one generated
// system, plus the going/gotime bookkeeping every checker needs. Classes
// bucket all points by (agent, canonical local state); synchrony keeps each
// class at a single time.
class Oracle {
 public:
  explicit Oracle(const System& sys);
  explicit Oracle(System&&) = delete;  // the system must outlive the oracle

  const System& system() const { return *sys_; }
  const Context& ctx() const { return *sys_->ctx; }
  int horizon() const { return sys_->ctx->horizon; }
  int run_count() const { return static_cast<int>(sys_->runs.size()); }

  const GlobalState& state(int run, int m) const;
  const LocalState& local(int run, int m, Agent a) const;
  bool front(int run, int m, Agent a) const;
  Move move_of(int run, int m, Agent a) const;  // (lane, intent) off the reading

  // Valid goers this round: agents front at m whose action was go. Sorted.
  const std::vector<Agent>& go_set(int run, int m) const;
  const std::vector<Move>& go_moves(int run, int m) const;
  std::optional<int> gotime(int run, Agent a) const;

  const std::vector<Point>& indistinguishable(Agent a, int run, int m) const;
  const std::unordered_map<std::string, std::vector<Point>>& classes(Agent a) const;

  bool knows(int run, int m, Agent a, const PointPredicate& phi) const;

 private:
  const System* sys_;
  std::vector<std::unordered_map<std::string, std::vector<Point>>> classes_;
  std::vector<std::vector<std::vector<Agent>>> go_;
  std::vector<std::vector<std::vector<Move>>> go_moves_;
  std::vector<std::map<Agent, int>> gotime_;
};

// Shared σ/next evaluation cache over a system: one history evaluation per
// (run, round), reused across every point and knowledge class.
class PolicyView {
 public:
  PolicyView(const Oracle& oracle, Policy sigma, NextFn next);

  const std::vector<Move>& sigma_at(int run, int m) const;
  LaneId next_at(int run, int m) const;
  const Policy& sigma() const { return sigma_; }
  const NextFn& next() const { return next_; }

 private:
  const Oracle* oracle_;
  Policy sigma_;
  NextFn next_;
  mutable std::vector<std::vector<std::optional<std::vector<Move>>>> sigma_cache_;
  mutable std::vector<std::vector<std::optional<LaneId>>> next_cache_;
};

Verdict check_validity(const System& sys);
Verdict check_safety(const System& sys);
// Every agent observed at a queue front must go within `bound` rounds of
// first becoming front; windows running past the horizon stay inconclusive.
Verdict check_liveness_bounded(const System& sys, int bound);

// Front, and compatible as a set: every distinct pair among the goers plus
// this agent is compatible.
bool safe_to_go(const Oracle& oracle, int run, int m, Agent a);

// Fail lists every point where an agent was safe to go and did not.
Verdict find_unnecessary_waiting(const Oracle& oracle);

struct DominationReport {
  enum class Outcome { Equal, FirstDominates, SecondDominates, Incomparable };
  Outcome outcome = Outcome::Equal;
  bool strict = false;
  std::vector<Witness> first_faster;   // first strictly earlier somewhere
  std::vector<Witness> second_faster;
  std::vector<Witness> inconclusive;  // either side still queued at horizon
  Verdict verdict;                    // reporting envelope
};

// Crossing-time comparison over corresponding runs (same adversary ids).
DominationReport compare_domination(const Oracle& first, const Oracle& second);

struct LexReport {
  bool first_dominates = false;   // ties or wins every pair
  bool second_dominates = false;
  int first_wins = 0;
  int second_wins = 0;
  std::vector<Witness> blocking;  // first divergence with no set inclusion
  Verdict verdict;
};

// First-divergence comparison: a side wins a run pair when its go set
// strictly contains the other's at the first round they differ.
LexReport compare_lex_domination(const Oracle& first, const Oracle& second);

// Generate the candidate's system and require its action to equal the
// knowledge-test evaluation at every point below the horizon.
Verdict check_implements(const ActionProtocol& candidate, const KbProgram& program,
                         std::shared_ptr<const Context> ctx);
Verdict check_implements_system(const Oracle& oracle, const KbProgram& program);

struct ExtractResult {
  Policy policy = Policy::empty();  // table keyed by history
  Verdict verdict;                  // conflict-freedom over the extracted domain
  std::map<std::string, std::vector<Move>> entries;
};

// Realized-history table: every (run, m < horizon) maps its history to the
// moves of that round's goers.
ExtractResult extract_policy(const Oracle& oracle);

// At every point where a queued agent's lane has a permitted move, the
// agent must know that move is permitted.
Verdict check_awareness_sigma(const Oracle& oracle, const Policy& sigma);
// Every agent must know the rotation anchor at every point.
Verdict check_awareness_next(const Oracle& oracle, const NextFn& next);

// Every front agent either knows some lane is fronted or knows it is empty,
// for every in-lane. Precondition: intent or full exchange, NF model.
Verdict check_sufficiently_rich_knowledge(const Oracle& oracle);

// Intent-exchange memory agreement: all fronts at a point share one memory.
Verdict check_front_memory_agreement(const System& sys);

// Possible-goers soundness/completeness: interval-move membership in the
// announcement-informed scan coincides with not knowing the move's absence
// among goers.
Verdict check_pos_knowledge(const Oracle& oracle, const NextFn& next);

// After a strict lexicographic win, the losing side must show unnecessary
// waiting at each first-divergence point. Returns a failing verdict when
// that cross-implication breaks (it never should on safe systems).
Verdict cross_check_lex_waiting(const Oracle& winner, const Oracle& loser);

}  // namespace isim
