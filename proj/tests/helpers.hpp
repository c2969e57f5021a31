#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "isim/kernel.hpp"
#include "isim/protocols.hpp"

namespace isim::testing {

inline IntersectionSpec merge_spec() { return IntersectionSpec::validate({0, 1}, {2}, {}); }

// Two in-lanes, two out-lanes, straight-ahead moves compatible.
inline IntersectionSpec crossing_spec() {
  return IntersectionSpec::validate({0, 1}, {2, 3}, {{{0, 2}, {1, 3}}});
}

inline IntersectionSpec three_lane_spec() {
  return IntersectionSpec::validate({0, 1, 2}, {3}, {});
}

inline std::shared_ptr<const Context> make_context(IntersectionSpec spec,
                                                   const std::string& exchange,
                                                   FailureModel model,
                                                   std::vector<Agent> pool, int horizon,
                                                   std::vector<Adversary> adversaries,
                                                   bool truncated = false) {
  TransmissionEnv env = TransmissionEnv::validate(spec, {}, 0);
  return std::make_shared<Context>(Context{std::move(spec), std::move(env), std::move(pool),
                                           exchange_by_name(exchange), model, horizon,
                                           std::move(adversaries), truncated});
}

inline std::shared_ptr<const Context> enumerated_context(IntersectionSpec spec,
                                                         const std::string& exchange,
                                                         FailureModel model,
                                                         std::vector<Agent> pool,
                                                         int horizon) {
  AdversarySet set = enumerate_adversaries(model, pool, horizon, spec);
  return make_context(std::move(spec), exchange, model, std::move(pool), horizon,
                      std::move(set.adversaries));
}

inline Adversary make_adversary(const IntersectionSpec& spec, int id,
                                std::map<Agent, Arrival> arrivals,
                                std::set<std::pair<int, Agent>> transmit_failed = {}) {
  Adversary adv;
  adv.id = id;
  adv.schedule = ArrivalSchedule::validate(std::move(arrivals), spec);
  adv.failures.transmit_failed = std::move(transmit_failed);
  return adv;
}

inline ActionProtocol noop_protocol() {
  ActionProtocol p;
  p.name = "noop";
  p.act = [](Agent, const LocalState&) { return Action::Noop; };
  return p;
}

inline ActionProtocol eager_protocol() {
  ActionProtocol p;
  p.name = "eager";
  p.act = [](Agent, const LocalState& s) {
    return s.sensors.front ? Action::Go : Action::Noop;
  };
  return p;
}

}  // namespace isim::testing
