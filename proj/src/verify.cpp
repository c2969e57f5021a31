#include "isim/verify.hpp"

#include <algorithm>
#include <cassert>

namespace isim {

namespace {

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

bool witness_less(const Witness& a, const Witness& b) {
  if (a.adversary_id != b.adversary_id) return a.adversary_id < b.adversary_id;
  if (a.time != b.time) return a.time < b.time;
  if (a.agents != b.agents) return a.agents < b.agents;
  return a.detail < b.detail;
}

void finish(Verdict& v, bool truncated, const std::string& claim) {
  std::sort(v.witnesses.begin(), v.witnesses.end(), witness_less);
  if (!v.witnesses.empty()) {
    v.status = Verdict::Status::Fail;
    v.exact = true;  // a counterexample is a counterexample
    return;
  }
  if (truncated) {
    v.status = Verdict::Status::Inconclusive;
    v.exact = false;
    v.notes.push_back(claim + " holds on the enumerated prefix, but the adversary set was "
                      "cap-truncated");
    return;
  }
  v.status = Verdict::Status::Pass;
  v.exact = true;
}

}  // namespace

Oracle::Oracle(const System& sys) : sys_(&sys) {
  const Context& ctx = *sys.ctx;
  const int n = static_cast<int>(ctx.pool.size());
  const int h = ctx.horizon;
  const int nr = static_cast<int>(sys.runs.size());
  classes_.resize(static_cast<size_t>(n));
  go_.assign(static_cast<size_t>(nr), {});
  go_moves_.assign(static_cast<size_t>(nr), {});
  gotime_.assign(static_cast<size_t>(nr), {});
  for (int r = 0; r < nr; ++r) {
    const Run& run = sys.runs[static_cast<size_t>(r)];
    go_[static_cast<size_t>(r)].resize(static_cast<size_t>(h));
    go_moves_[static_cast<size_t>(r)].resize(static_cast<size_t>(h));
    for (int m = 0; m <= h; ++m) {
      const GlobalState& g = run.states[static_cast<size_t>(m)];
      for (int i = 0; i < n; ++i)
        classes_[static_cast<size_t>(i)]
            [g.locals[static_cast<size_t>(i)].canonical_key()]
                .push_back({r, m});
    }
    for (int m = 0; m < h; ++m) {
      const GlobalState& g = run.states[static_cast<size_t>(m)];
      const RoundRecord& rec = run.rounds[static_cast<size_t>(m)];
      for (int i = 0; i < n; ++i) {
        const SensorReading& sr = g.locals[static_cast<size_t>(i)].sensors;
        if (rec.actions[static_cast<size_t>(i)] == Action::Go && sr.front) {
          Agent a = ctx.pool[static_cast<size_t>(i)];
          go_[static_cast<size_t>(r)][static_cast<size_t>(m)].push_back(a);
          go_moves_[static_cast<size_t>(r)][static_cast<size_t>(m)].push_back(
              {sr.lane, sr.intent});
          gotime_[static_cast<size_t>(r)].emplace(a, m);
        }
      }
    }
  }
}

const GlobalState& Oracle::state(int run, int m) const {
  return sys_->runs[static_cast<size_t>(run)].states[static_cast<size_t>(m)];
}

const LocalState& Oracle::local(int run, int m, Agent a) const {
  return state(run, m).locals[static_cast<size_t>(ctx().pool_index(a))];
}

bool Oracle::front(int run, int m, Agent a) const { return local(run, m, a).sensors.front; }

Move Oracle::move_of(int run, int m, Agent a) const {
  const SensorReading& sr = local(run, m, a).sensors;
  return {sr.lane, sr.intent};
}

const std::vector<Agent>& Oracle::go_set(int run, int m) const {
  return go_[static_cast<size_t>(run)][static_cast<size_t>(m)];
}

const std::vector<Move>& Oracle::go_moves(int run, int m) const {
  return go_moves_[static_cast<size_t>(run)][static_cast<size_t>(m)];
}

std::optional<int> Oracle::gotime(int run, Agent a) const {
  const auto& times = gotime_[static_cast<size_t>(run)];
  auto it = times.find(a);
  if (it == times.end()) return std::nullopt;
  return it->second;
}

const std::vector<Point>& Oracle::indistinguishable(Agent a, int run, int m) const {
  const auto& buckets = classes_[static_cast<size_t>(ctx().pool_index(a))];
  auto it = buckets.find(local(run, m, a).canonical_key());
  assert(it != buckets.end());
  return it->second;
}

const std::unordered_map<std::string, std::vector<Point>>& Oracle::classes(Agent a) const {
  return classes_[static_cast<size_t>(ctx().pool_index(a))];
}

bool Oracle::knows(int run, int m, Agent a, const PointPredicate& phi) const {
  for (const Point& p : indistinguishable(a, run, m))
    if (!phi(*this, p.run, p.m)) return false;
  return true;
}

PolicyView::PolicyView(const Oracle& oracle, Policy sigma, NextFn next)
    : oracle_(&oracle), sigma_(std::move(sigma)), next_(std::move(next)) {
  sigma_cache_.assign(static_cast<size_t>(oracle.run_count()),
                      std::vector<std::optional<std::vector<Move>>>(
                          static_cast<size_t>(oracle.horizon()) + 1));
  next_cache_.assign(static_cast<size_t>(oracle.run_count()),
                     std::vector<std::optional<LaneId>>(
                         static_cast<size_t>(oracle.horizon()) + 1));
}

const std::vector<Move>& PolicyView::sigma_at(int run, int m) const {
  auto& slot = sigma_cache_[static_cast<size_t>(run)][static_cast<size_t>(m)];
  if (!slot) {
    std::vector<Move> cell;
    if (sigma_.time_determined()) {
      cell = sigma_.eval_at_time(m);
    } else {
      const Run& r = oracle_->system().runs[static_cast<size_t>(run)];
      cell = sigma_.eval(history(*r.adversary, m, oracle_->ctx().pool, &oracle_->ctx().env));
    }
    std::sort(cell.begin(), cell.end());
    slot = std::move(cell);
  }
  return *slot;
}

LaneId PolicyView::next_at(int run, int m) const {
  auto& slot = next_cache_[static_cast<size_t>(run)][static_cast<size_t>(m)];
  if (!slot) {
    if (next_.time_determined()) {
      slot = next_.eval_at_time(m, oracle_->ctx().spec);
    } else {
      const Run& r = oracle_->system().runs[static_cast<size_t>(run)];
      slot = next_.eval(history(*r.adversary, m, oracle_->ctx().pool, &oracle_->ctx().env),
                        oracle_->ctx().spec);
    }
  }
  return *slot;
}

Verdict check_validity(const System& sys) {
  Verdict v;
  for (const Run& run : sys.runs)
    for (int m = 0; m < sys.ctx->horizon; ++m)
      for (Agent a : run.rounds[static_cast<size_t>(m)].invalid_go) {
        Witness w;
        w.adversary_id = run.adversary->id;
        w.time = m;
        w.agents = {a};
        w.detail = "go issued away from a queue front";
        v.witnesses.push_back(std::move(w));
      }
  finish(v, sys.ctx->truncated, "validity");
  return v;
}

Verdict check_safety(const System& sys) {
  Verdict v;
  const Context& ctx = *sys.ctx;
  const int n = static_cast<int>(ctx.pool.size());
  for (const Run& run : sys.runs)
    for (int m = 0; m < ctx.horizon; ++m) {
      const GlobalState& g = run.states[static_cast<size_t>(m)];
      const RoundRecord& rec = run.rounds[static_cast<size_t>(m)];
      std::vector<std::pair<Agent, Move>> goers;
      for (int i = 0; i < n; ++i) {
        const SensorReading& sr = g.locals[static_cast<size_t>(i)].sensors;
        if (rec.actions[static_cast<size_t>(i)] == Action::Go && sr.front)
          goers.push_back({ctx.pool[static_cast<size_t>(i)], Move{sr.lane, sr.intent}});
      }
      for (size_t i = 0; i < goers.size(); ++i)
        for (size_t j = i + 1; j < goers.size(); ++j)
          if (!ctx.spec.compatible(goers[i].second, goers[j].second)) {
            Witness w;
            w.adversary_id = run.adversary->id;
            w.time = m;
            w.agents = {goers[i].first, goers[j].first};
            w.detail = "conflicting moves " + to_string(goers[i].second) + " and " +
                       to_string(goers[j].second) + " cross together";
            v.witnesses.push_back(std::move(w));
          }
    }
  finish(v, ctx.truncated, "safety");
  return v;
}

Verdict check_liveness_bounded(const System& sys, int bound) {
  if (bound < 0) throw SpecError("liveness bound must be non-negative");
  Verdict v;
  const Context& ctx = *sys.ctx;
  const int n = static_cast<int>(ctx.pool.size());
  const int h = ctx.horizon;
  int frontier = 0;
  for (const Run& run : sys.runs)
    for (int i = 0; i < n; ++i) {
      Agent a = ctx.pool[static_cast<size_t>(i)];
      int first_front = -1;
      for (int m = 0; m <= h; ++m)
        if (run.states[static_cast<size_t>(m)].locals[static_cast<size_t>(i)].sensors.front) {
          first_front = m;
          break;
        }
      if (first_front < 0) continue;
      std::optional<int> went;
      for (int m = first_front; m < h; ++m) {
        const RoundRecord& rec = run.rounds[static_cast<size_t>(m)];
        if (rec.actions[static_cast<size_t>(i)] == Action::Go &&
            run.states[static_cast<size_t>(m)].locals[static_cast<size_t>(i)].sensors.front) {
          went = m;
          break;
        }
      }
      if (went) {
        if (*went - first_front > bound) {
          Witness w;
          w.adversary_id = run.adversary->id;
          w.time = *went;
          w.agents = {a};
          w.detail = "first at front at round " + std::to_string(first_front) +
                     ", crossed only at round " + std::to_string(*went);
          v.witnesses.push_back(std::move(w));
        }
      } else if (first_front + bound <= h - 1) {
        Witness w;
        w.adversary_id = run.adversary->id;
        w.time = first_front + bound;
        w.agents = {a};
        w.detail = "first at front at round " + std::to_string(first_front) +
                   ", still waiting past its deadline";
        v.witnesses.push_back(std::move(w));
      } else {
        ++frontier;
      }
    }
  std::sort(v.witnesses.begin(), v.witnesses.end(), witness_less);
  if (!v.witnesses.empty()) {
    v.status = Verdict::Status::Fail;
    v.exact = true;
  } else if (frontier > 0 || ctx.truncated) {
    v.status = Verdict::Status::Inconclusive;
    v.exact = false;
    if (frontier > 0)
      v.notes.push_back(std::to_string(frontier) +
                        " agent windows run past the horizon and stay unresolved");
    if (ctx.truncated) v.notes.push_back("adversary set was cap-truncated");
  } else {
    v.status = Verdict::Status::Pass;
    v.exact = true;
  }
  return v;
}

bool safe_to_go(const Oracle& oracle, int run, int m, Agent a) {
  if (m >= oracle.horizon())
    throw SpecError("safe-to-go is defined below the horizon");
  const LocalState& s = oracle.local(run, m, a);
  if (!s.sensors.front) return false;
  const IntersectionSpec& spec = oracle.ctx().spec;
  std::vector<std::pair<Agent, Move>> party;
  const std::vector<Agent>& goers = oracle.go_set(run, m);
  const std::vector<Move>& moves = oracle.go_moves(run, m);
  for (size_t k = 0; k < goers.size(); ++k) party.push_back({goers[k], moves[k]});
  if (!std::binary_search(goers.begin(), goers.end(), a))
    party.push_back({a, Move{s.sensors.lane, s.sensors.intent}});
  for (size_t i = 0; i < party.size(); ++i)
    for (size_t j = i + 1; j < party.size(); ++j)
      if (!spec.compatible(party[i].second, party[j].second)) return false;
  return true;
}

Verdict find_unnecessary_waiting(const Oracle& oracle) {
  Verdict v;
  const Context& ctx = oracle.ctx();
  const int n = static_cast<int>(ctx.pool.size());
  for (int r = 0; r < oracle.run_count(); ++r)
    for (int m = 0; m < oracle.horizon(); ++m) {
      const std::vector<Agent>& goers = oracle.go_set(r, m);
      for (int i = 0; i < n; ++i) {
        Agent a = ctx.pool[static_cast<size_t>(i)];
        if (!oracle.front(r, m, a)) continue;
        if (std::binary_search(goers.begin(), goers.end(), a)) continue;
        if (safe_to_go(oracle, r, m, a)) {
          Witness w;
          w.adversary_id = oracle.system().runs[static_cast<size_t>(r)].adversary->id;
          w.time = m;
          w.agents = {a};
          w.detail = "move " + to_string(oracle.move_of(r, m, a)) +
                     " is jointly compatible with the going set, yet the agent waited";
          v.witnesses.push_back(std::move(w));
        }
      }
    }
  std::sort(v.witnesses.begin(), v.witnesses.end(), witness_less);
  v.status = v.witnesses.empty() ? Verdict::Status::Pass : Verdict::Status::Fail;
  v.exact = !ctx.truncated;
  if (ctx.truncated) {
    v.notes.push_back("adversary set was cap-truncated");
    if (v.witnesses.empty()) v.status = Verdict::Status::Inconclusive;
  }
  return v;
}

namespace {

void require_comparable(const Oracle& first, const Oracle& second) {
  const System& a = first.system();
  const System& b = second.system();
  if (a.ctx->horizon != b.ctx->horizon)
    throw SpecError("systems compare only over one horizon");
  if (a.ctx->pool != b.ctx->pool)
    throw SpecError("systems compare only over one agent pool");
  if (a.runs.size() != b.runs.size())
    throw SpecError("systems compare only over identical adversary sets");
  for (size_t r = 0; r < a.runs.size(); ++r) {
    const Adversary* x = a.runs[r].adversary;
    const Adversary* y = b.runs[r].adversary;
    if (x->id != y->id || !(x->schedule == y->schedule) || !(x->failures == y->failures))
      throw SpecError("systems compare only over identical adversary sets");
  }
}

}  // namespace

DominationReport compare_domination(const Oracle& first, const Oracle& second) {
  require_comparable(first, second);
  DominationReport rep;
  const Context& ctx = first.ctx();
  const int h = ctx.horizon;
  for (int r = 0; r < first.run_count(); ++r) {
    const Adversary* adv = first.system().runs[static_cast<size_t>(r)].adversary;
    for (Agent a : ctx.pool) {
      std::optional<Arrival> arr = adv->schedule.arrival_of(a);
      if (!arr || arr->time > h) continue;
      std::optional<int> ga = first.gotime(r, a);
      std::optional<int> gb = second.gotime(r, a);
      if (!ga && !gb) {
        Witness w;
        w.adversary_id = adv->id;
        w.agents = {a};
        w.detail = "neither side crosses within the horizon";
        rep.inconclusive.push_back(std::move(w));
        continue;
      }
      auto note = [&](std::vector<Witness>& into, int t, const std::string& d) {
        Witness w;
        w.adversary_id = adv->id;
        w.time = t;
        w.agents = {a};
        w.detail = d;
        into.push_back(std::move(w));
      };
      if (ga && gb) {
        if (*ga < *gb)
          note(rep.first_faster, *ga,
               "crosses at round " + std::to_string(*ga) + " vs " + std::to_string(*gb));
        else if (*gb < *ga)
          note(rep.second_faster, *gb,
               "crosses at round " + std::to_string(*gb) + " vs " + std::to_string(*ga));
      } else if (ga) {
        note(rep.first_faster, *ga,
             "crosses at round " + std::to_string(*ga) + "; the other side never does");
      } else {
        note(rep.second_faster, *gb,
             "crosses at round " + std::to_string(*gb) + "; the other side never does");
      }
    }
  }
  bool first_le = rep.second_faster.empty();
  bool second_le = rep.first_faster.empty();
  if (first_le && second_le) {
    rep.outcome = DominationReport::Outcome::Equal;
  } else if (first_le) {
    rep.outcome = DominationReport::Outcome::FirstDominates;
    rep.strict = true;
  } else if (second_le) {
    rep.outcome = DominationReport::Outcome::SecondDominates;
    rep.strict = true;
  } else {
    rep.outcome = DominationReport::Outcome::Incomparable;
  }
  switch (rep.outcome) {
    case DominationReport::Outcome::Equal:
      rep.verdict.notes.push_back("equal crossing times on every compared pair");
      break;
    case DominationReport::Outcome::FirstDominates:
      rep.verdict.notes.push_back("first dominates (" +
                                  std::to_string(rep.first_faster.size()) +
                                  " strictly faster crossings)");
      break;
    case DominationReport::Outcome::SecondDominates:
      rep.verdict.notes.push_back("second dominates (" +
                                  std::to_string(rep.second_faster.size()) +
                                  " strictly faster crossings)");
      break;
    case DominationReport::Outcome::Incomparable:
      rep.verdict.notes.push_back("incomparable: each side is strictly faster somewhere");
      break;
  }
  bool unresolved = !rep.inconclusive.empty() || ctx.truncated;
  if (!rep.inconclusive.empty())
    rep.verdict.notes.push_back(std::to_string(rep.inconclusive.size()) +
                                " agent crossings stay unresolved at the horizon");
  if (ctx.truncated) rep.verdict.notes.push_back("adversary set was cap-truncated");
  if (rep.outcome == DominationReport::Outcome::Incomparable) {
    rep.verdict.status = Verdict::Status::Pass;
    rep.verdict.exact = true;
  } else {
    rep.verdict.status =
        unresolved ? Verdict::Status::Inconclusive : Verdict::Status::Pass;
    rep.verdict.exact = !unresolved;
  }
  return rep;
}

LexReport compare_lex_domination(const Oracle& first, const Oracle& second) {
  require_comparable(first, second);
  LexReport rep;
  const Context& ctx = first.ctx();
  for (int r = 0; r < first.run_count(); ++r) {
    const Adversary* adv = first.system().runs[static_cast<size_t>(r)].adversary;
    int div = -1;
    for (int m = 0; m < ctx.horizon; ++m)
      if (first.go_set(r, m) != second.go_set(r, m)) {
        div = m;
        break;
      }
    if (div < 0) continue;
    const std::vector<Agent>& a = first.go_set(r, div);
    const std::vector<Agent>& b = second.go_set(r, div);
    bool a_sup = a.size() > b.size() && std::includes(a.begin(), a.end(), b.begin(), b.end());
    bool b_sup = b.size() > a.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
    if (a_sup) {
      ++rep.first_wins;
    } else if (b_sup) {
      ++rep.second_wins;
    } else {
      Witness w;
      w.adversary_id = adv->id;
      w.time = div;
      std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                    std::back_inserter(w.agents));
      w.detail = "neither going set contains the other at the first divergence";
      rep.blocking.push_back(std::move(w));
    }
  }
  rep.first_dominates = rep.blocking.empty() && rep.second_wins == 0;
  rep.second_dominates = rep.blocking.empty() && rep.first_wins == 0;
  rep.verdict.notes.push_back(
      "first wins " + std::to_string(rep.first_wins) + " run(s), second wins " +
      std::to_string(rep.second_wins) + " run(s), " +
      std::to_string(rep.blocking.size()) + " incomparable divergence(s)");
  if (rep.first_dominates && rep.second_dominates)
    rep.verdict.notes.push_back("identical going sets on every run");
  else if (rep.first_dominates)
    rep.verdict.notes.push_back("first dominates lexicographically");
  else if (rep.second_dominates)
    rep.verdict.notes.push_back("second dominates lexicographically");
  else
    rep.verdict.notes.push_back("no lexicographic dominance either way");
  rep.verdict.status = ctx.truncated ? Verdict::Status::Inconclusive : Verdict::Status::Pass;
  rep.verdict.exact = !ctx.truncated;
  if (ctx.truncated) rep.verdict.notes.push_back("adversary set was cap-truncated");
  return rep;
}

Verdict check_implements_system(const Oracle& oracle, const KbProgram& program) {
  Verdict v;
  const Context& ctx = oracle.ctx();
  const System& sys = oracle.system();
  PolicyView view(oracle, program.sigma, program.next);
  for (size_t i = 0; i < ctx.pool.size(); ++i) {
    Agent a = ctx.pool[i];
    for (const auto& [key, points] : oracle.classes(a)) {
      (void)key;
      int m = points.front().m;
      if (m >= ctx.horizon) continue;
      Action want = Action::Noop;
      if (oracle.local(points.front().run, m, a).sensors.front) {
        bool all = true;
        for (const Point& p : points)
          if (!kbp_condition(oracle, view, program, p.run, p.m, a)) {
            all = false;
            break;
          }
        want = all ? Action::Go : Action::Noop;
      }
      for (const Point& p : points) {
        Action got = sys.runs[static_cast<size_t>(p.run)]
                         .rounds[static_cast<size_t>(p.m)]
                         .actions[i];
        if (got != want) {
          Witness w;
          w.adversary_id = sys.runs[static_cast<size_t>(p.run)].adversary->id;
          w.time = p.m;
          w.agents = {a};
          w.detail = "protocol chose " + to_string(got) + ", the program requires " +
                     to_string(want);
          v.witnesses.push_back(std::move(w));
        }
      }
    }
  }
  finish(v, ctx.truncated, "implementation");
  return v;
}

Verdict check_implements(const ActionProtocol& candidate, const KbProgram& program,
                         std::shared_ptr<const Context> ctx) {
  System sys = generate_system(std::move(ctx), candidate);
  Oracle oracle(sys);
  return check_implements_system(oracle, program);
}

ExtractResult extract_policy(const Oracle& oracle) {
  ExtractResult res;
  const Context& ctx = oracle.ctx();
  const System& sys = oracle.system();
  std::map<std::string, std::pair<int, int>> origin;
  for (int r = 0; r < oracle.run_count(); ++r) {
    const Adversary& adv = *sys.runs[static_cast<size_t>(r)].adversary;
    for (int m = 0; m < ctx.horizon; ++m) {
      std::string key = history(adv, m, ctx.pool, &ctx.env).canonical_key();
      std::vector<Move> moves = oracle.go_moves(r, m);
      std::sort(moves.begin(), moves.end());
      auto it = res.entries.find(key);
      if (it == res.entries.end()) {
        origin.emplace(key, std::pair<int, int>{adv.id, m});
        res.entries.emplace(std::move(key), std::move(moves));
      } else if (it->second != moves) {
        throw SpecError("extraction found two different going sets for one history; "
                        "the protocol is not a function of the environment history");
      }
    }
  }
  res.policy = Policy::table(res.entries);
  for (const auto& [key, cell] : res.entries) {
    for (size_t i = 0; i < cell.size(); ++i)
      for (size_t j = i + 1; j < cell.size(); ++j)
        if (!ctx.spec.compatible(cell[i], cell[j])) {
          Witness w;
          auto it = origin.find(key);
          if (it != origin.end()) {
            w.adversary_id = it->second.first;
            w.time = it->second.second;
          }
          w.detail = "extracted cell permits conflicting moves " + to_string(cell[i]) +
                     " and " + to_string(cell[j]);
          res.verdict.witnesses.push_back(std::move(w));
        }
  }
  res.verdict.notes.push_back(std::to_string(res.entries.size()) +
                              " realized histories tabulated");
  finish(res.verdict, ctx.truncated, "conflict-freedom of the extracted policy");
  return res;
}

Verdict check_awareness_sigma(const Oracle& oracle, const Policy& sigma) {
  Verdict v;
  const Context& ctx = oracle.ctx();
  PolicyView view(oracle, sigma, NextFn::round_robin());
  for (size_t i = 0; i < ctx.pool.size(); ++i) {
    Agent a = ctx.pool[i];
    for (const auto& [key, points] : oracle.classes(a)) {
      (void)key;
      const LocalState& rep = oracle.local(points.front().run, points.front().m, a);
      if (rep.sensors.lane < 0) continue;  // not queued: nothing is asked of it
      for (LaneId out : ctx.spec.lanes_out()) {
        Move probe{rep.sensors.lane, out};
        bool any_in = false, any_out = false;
        for (const Point& p : points) {
          const std::vector<Move>& cell = view.sigma_at(p.run, p.m);
          (std::binary_search(cell.begin(), cell.end(), probe) ? any_in : any_out) = true;
          if (any_in && any_out) break;
        }
        if (any_in && any_out) {
          for (const Point& p : points) {
            const std::vector<Move>& cell = view.sigma_at(p.run, p.m);
            if (std::binary_search(cell.begin(), cell.end(), probe)) {
              Witness w;
              w.adversary_id =
                  oracle.system().runs[static_cast<size_t>(p.run)].adversary->id;
              w.time = p.m;
              w.agents = {a};
              w.detail = "move " + to_string(probe) +
                         " is permitted here but the agent cannot tell";
              v.witnesses.push_back(std::move(w));
            }
          }
        }
      }
    }
  }
  finish(v, ctx.truncated, "policy awareness");
  return v;
}

Verdict check_awareness_next(const Oracle& oracle, const NextFn& next) {
  Verdict v;
  const Context& ctx = oracle.ctx();
  PolicyView view(oracle, Policy::empty(), next);
  for (size_t i = 0; i < ctx.pool.size(); ++i) {
    Agent a = ctx.pool[i];
    for (const auto& [key, points] : oracle.classes(a)) {
      (void)key;
      LaneId first = view.next_at(points.front().run, points.front().m);
      for (const Point& p : points)
        if (view.next_at(p.run, p.m) != first) {
          Witness w;
          w.adversary_id = oracle.system().runs[static_cast<size_t>(p.run)].adversary->id;
          w.time = p.m;
          w.agents = {a};
          w.detail = "rotation anchor differs across indistinguishable states";
          v.witnesses.push_back(std::move(w));
        }
    }
  }
  finish(v, ctx.truncated, "rotation awareness");
  return v;
}

Verdict check_sufficiently_rich_knowledge(const Oracle& oracle) {
  const Context& ctx = oracle.ctx();
  if (ctx.exchange.name != "intent" && ctx.exchange.name != "full")
    throw SpecError("lane-occupancy knowledge is claimed only for the intent and full "
                    "exchanges");
  if (ctx.model != FailureModel::NF)
    throw SpecError("lane-occupancy knowledge is claimed only without failures");
  Verdict v;
  const int n_lanes = ctx.spec.in_lane_count();
  for (size_t i = 0; i < ctx.pool.size(); ++i) {
    Agent a = ctx.pool[i];
    for (const auto& [key, points] : oracle.classes(a)) {
      (void)key;
      if (!oracle.local(points.front().run, points.front().m, a).sensors.front) continue;
      for (int li = 0; li < n_lanes; ++li) {
        bool all_occupied = true, all_empty = true;
        for (const Point& p : points) {
          bool occ = !oracle.state(p.run, p.m).env.queues[static_cast<size_t>(li)].empty();
          (occ ? all_empty : all_occupied) = false;
          if (!all_occupied && !all_empty) break;
        }
        if (!all_occupied && !all_empty) {
          const Point& p = points.front();
          Witness w;
          w.adversary_id = oracle.system().runs[static_cast<size_t>(p.run)].adversary->id;
          w.time = p.m;
          w.agents = {a};
          w.detail = "front agent neither knows lane " +
                     std::to_string(ctx.spec.in_lane_at(li)) +
                     " is occupied nor knows it is empty";
          v.witnesses.push_back(std::move(w));
        }
      }
    }
  }
  finish(v, ctx.truncated, "lane-occupancy knowledge");
  return v;
}

Verdict check_front_memory_agreement(const System& sys) {
  Verdict v;
  const Context& ctx = *sys.ctx;
  const int n = static_cast<int>(ctx.pool.size());
  for (const Run& run : sys.runs)
    for (int m = 0; m <= ctx.horizon; ++m) {
      const GlobalState& g = run.states[static_cast<size_t>(m)];
      std::vector<int> fronts;
      for (int i = 0; i < n; ++i)
        if (g.locals[static_cast<size_t>(i)].sensors.front) fronts.push_back(i);
      for (size_t x = 0; x < fronts.size(); ++x)
        for (size_t y = x + 1; y < fronts.size(); ++y)
          if (!(g.locals[static_cast<size_t>(fronts[x])].memory ==
                g.locals[static_cast<size_t>(fronts[y])].memory)) {
            Witness w;
            w.adversary_id = run.adversary->id;
            w.time = m;
            w.agents = {ctx.pool[static_cast<size_t>(fronts[x])],
                        ctx.pool[static_cast<size_t>(fronts[y])]};
            w.detail = "front agents hold different memories";
            v.witnesses.push_back(std::move(w));
          }
    }
  finish(v, ctx.truncated, "front memory agreement");
  return v;
}

Verdict check_pos_knowledge(const Oracle& oracle, const NextFn& next) {
  const Context& ctx = oracle.ctx();
  if (ctx.exchange.name != "intent")
    throw SpecError("possible-goers knowledge is claimed only for the intent exchange");
  Verdict v;
  const IntersectionSpec& spec = ctx.spec;
  const int n_lanes = spec.in_lane_count();
  PolicyView view(oracle, Policy::empty(), next);
  for (size_t i = 0; i < ctx.pool.size(); ++i) {
    Agent a = ctx.pool[i];
    for (const auto& [key, points] : oracle.classes(a)) {
      (void)key;
      const Point& p0 = points.front();
      if (p0.m >= ctx.horizon) continue;
      const LocalState& rep = oracle.local(p0.run, p0.m, a);
      if (!rep.sensors.front) continue;
      std::vector<Move> possible;
      for (const Point& p : points)
        for (const Move& mv : oracle.go_moves(p.run, p.m)) insert_sorted(possible, mv);
      std::map<LaneId, PosSet> memo;
      for (const Point& p : points) {
        LaneId nl = view.next_at(p.run, p.m);
        auto it = memo.find(nl);
        if (it == memo.end()) it = memo.emplace(nl, pos_set_intent(rep, nl, spec)).first;
        const PosSet& pos = it->second;
        int ni = spec.in_lane_index(nl);
        int li = spec.in_lane_index(rep.sensors.lane);
        for (int d = 0; d < n_lanes; ++d) {
          if (!in_cyclic_interval(ni, li, (ni + d) % n_lanes, n_lanes)) continue;
          LaneId l = spec.in_lane_at((ni + d) % n_lanes);
          for (LaneId out : spec.lanes_out()) {
            Move mv{l, out};
            bool member = std::binary_search(pos.moves.begin(), pos.moves.end(), mv);
            bool conceivable = std::binary_search(possible.begin(), possible.end(), mv);
            if (member != conceivable) {
              Witness w;
              w.adversary_id =
                  oracle.system().runs[static_cast<size_t>(p.run)].adversary->id;
              w.time = p.m;
              w.agents = {a};
              w.detail = member ? "scan keeps " + to_string(mv) +
                                      " though no indistinguishable state sends it"
                                : "scan drops " + to_string(mv) +
                                      " though an indistinguishable state sends it";
              v.witnesses.push_back(std::move(w));
            }
          }
        }
      }
    }
  }
  finish(v, ctx.truncated, "possible-goers knowledge");
  return v;
}

Verdict cross_check_lex_waiting(const Oracle& winner, const Oracle& loser) {
  require_comparable(winner, loser);
  Verdict v;
  const Context& ctx = winner.ctx();
  int strict_wins = 0;
  for (int r = 0; r < winner.run_count(); ++r) {
    int div = -1;
    for (int m = 0; m < ctx.horizon; ++m)
      if (winner.go_set(r, m) != loser.go_set(r, m)) {
        div = m;
        break;
      }
    if (div < 0) continue;
    const std::vector<Agent>& w_set = winner.go_set(r, div);
    const std::vector<Agent>& l_set = loser.go_set(r, div);
    if (!(w_set.size() > l_set.size() &&
          std::includes(w_set.begin(), w_set.end(), l_set.begin(), l_set.end())))
      continue;
    ++strict_wins;
    std::vector<Agent> extra;
    std::set_difference(w_set.begin(), w_set.end(), l_set.begin(), l_set.end(),
                        std::back_inserter(extra));
    bool found = false;
    for (Agent a : extra)
      if (safe_to_go(loser, r, div, a)) {
        found = true;
        break;
      }
    if (!found) {
      Witness w;
      w.adversary_id = winner.system().runs[static_cast<size_t>(r)].adversary->id;
      w.time = div;
      w.agents = extra;
      w.detail = "strict win without unnecessary waiting on the losing side";
      v.witnesses.push_back(std::move(w));
    }
  }
  v.notes.push_back(std::to_string(strict_wins) + " strict win(s) cross-checked");
  finish(v, ctx.truncated, "win/waiting cross-implication");
  return v;
}

}  // namespace isim
