#include "isim/kernel.hpp"

#include <algorithm>
#include <set>

#include "isim/protocols.hpp"

namespace isim {

bool EnvState::is_done(Agent a) const {
  return std::binary_search(done.begin(), done.end(), a);
}

std::optional<std::pair<int, int>> EnvState::slot_of(Agent a) const {
  for (size_t li = 0; li < queues.size(); ++li) {
    const auto& q = queues[li];
    for (size_t p = 0; p < q.size(); ++p)
      if (q[p] == a) return std::make_pair(static_cast<int>(li), static_cast<int>(p));
  }
  return std::nullopt;
}

int Context::pool_index(Agent a) const {
  auto it = std::lower_bound(pool.begin(), pool.end(), a);
  if (it == pool.end() || *it != a)
    throw SpecError("agent " + std::to_string(a) + " is not in the pool");
  return static_cast<int>(it - pool.begin());
}

GlobalState initial_state(const Context& ctx, const Adversary& adv) {
  GlobalState g;
  g.env.adversary = &adv;
  g.env.time = 0;
  g.env.queues.assign(static_cast<size_t>(ctx.spec.in_lane_count()), {});
  g.locals.reserve(ctx.pool.size());
  for (Agent a : ctx.pool) {
    LocalState s;
    s.memory = ctx.exchange.initial_memory(a);
    s.sensors = sensor_read(g.env, a, ctx.spec);
    g.locals.push_back(std::move(s));
  }
  return g;
}

GlobalState step(const Context& ctx, const GlobalState& g, const ActionProtocol& protocol,
                 RoundRecord& record) {
  const int n = static_cast<int>(ctx.pool.size());
  const Adversary& adv = *g.env.adversary;
  const int round_bits = g.env.time;  // failure bits consumed by this round

  record.actions.resize(static_cast<size_t>(n));
  record.broadcasts.assign(static_cast<size_t>(n), std::nullopt);
  record.received.assign(static_cast<size_t>(n), {});
  record.invalid_go.clear();

  for (int i = 0; i < n; ++i)
    record.actions[static_cast<size_t>(i)] = protocol.act(ctx.pool[static_cast<size_t>(i)],
                                                          g.locals[static_cast<size_t>(i)]);

  GlobalState next;
  next.env.adversary = &adv;
  next.env.time = g.env.time + 1;
  next.env.done = g.env.done;
  next.env.queues = g.env.queues;

  // Release going fronts before the new arrivals join their queues.
  std::set<Agent> fronts;
  for (auto& q : next.env.queues) {
    if (q.empty()) continue;
    Agent f = q.front();
    fronts.insert(f);
    if (record.actions[static_cast<size_t>(ctx.pool_index(f))] == Action::Go) {
      q.erase(q.begin());
      next.env.done.insert(
          std::upper_bound(next.env.done.begin(), next.env.done.end(), f), f);
    }
  }
  for (int i = 0; i < n; ++i) {
    Agent a = ctx.pool[static_cast<size_t>(i)];
    if (record.actions[static_cast<size_t>(i)] == Action::Go && !fronts.count(a))
      record.invalid_go.push_back(a);
  }
  for (const auto& [agent, lane, intent] : adv.schedule.arrivals_at(next.env.time)) {
    (void)intent;
    next.env.queues[static_cast<size_t>(ctx.spec.in_lane_index(lane))].push_back(agent);
  }

  std::vector<SensorReading> readings(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    readings[static_cast<size_t>(i)] =
        sensor_read(next.env, ctx.pool[static_cast<size_t>(i)], ctx.spec);

  for (int i = 0; i < n; ++i)
    record.broadcasts[static_cast<size_t>(i)] = ctx.exchange.message_fn(
        g.locals[static_cast<size_t>(i)], record.actions[static_cast<size_t>(i)],
        readings[static_cast<size_t>(i)]);

  // Delivery runs over post-update queue slots: leavers' parting broadcasts
  // and messages to leavers fall on the floor.
  for (int i = 0; i < n; ++i) {
    Agent receiver = ctx.pool[static_cast<size_t>(i)];
    auto slot = next.env.slot_of(receiver);
    if (!slot || !adv.failures.receive_ok(round_bits, receiver)) continue;
    LanePos to{ctx.spec.in_lane_at(slot->first), slot->second};
    auto& inbox = record.received[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) {
      Agent sender = ctx.pool[static_cast<size_t>(j)];
      const auto& msg = record.broadcasts[static_cast<size_t>(j)];
      if (!msg || !adv.failures.transmit_ok(round_bits, sender)) continue;
      auto sslot = next.env.slot_of(sender);
      if (!sslot) continue;
      LanePos from{ctx.spec.in_lane_at(sslot->first), sslot->second};
      if (ctx.env.reaches(from, to)) inbox.push_back(*msg);
    }
    std::sort(inbox.begin(), inbox.end());
    inbox.erase(std::unique(inbox.begin(), inbox.end()), inbox.end());
  }

  next.locals.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    LocalState s;
    s.memory = ctx.exchange.update_fn(g.locals[static_cast<size_t>(i)],
                                      record.actions[static_cast<size_t>(i)],
                                      record.received[static_cast<size_t>(i)]);
    s.sensors = readings[static_cast<size_t>(i)];
    next.locals.push_back(std::move(s));
  }
  return next;
}

Run generate_run(const Context& ctx, const ActionProtocol& protocol, const Adversary& adv) {
  if (!protocol.required_exchange.empty() && protocol.required_exchange != ctx.exchange.name)
    throw SpecError("protocol '" + protocol.name + "' requires the " +
                    protocol.required_exchange + " exchange, scenario uses " +
                    ctx.exchange.name);
  Run run;
  run.adversary = &adv;
  run.states.reserve(static_cast<size_t>(ctx.horizon) + 1);
  run.rounds.resize(static_cast<size_t>(ctx.horizon));
  run.states.push_back(initial_state(ctx, adv));
  for (int m = 0; m < ctx.horizon; ++m)
    run.states.push_back(step(ctx, run.states.back(), protocol,
                              run.rounds[static_cast<size_t>(m)]));
  return run;
}

System generate_system(std::shared_ptr<const Context> ctx, const ActionProtocol& protocol) {
  {
    std::set<int> ids;
    for (const Adversary& adv : ctx->adversaries)
      if (!ids.insert(adv.id).second)
        throw SpecError("duplicate adversary id " + std::to_string(adv.id));
  }
  System sys;
  sys.protocol_name = protocol.name;
  sys.runs.reserve(ctx->adversaries.size());
  for (const Adversary& adv : ctx->adversaries)
    sys.runs.push_back(generate_run(*ctx, protocol, adv));
  sys.ctx = std::move(ctx);
  return sys;
}

}  // namespace isim
