#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isim/kernel.hpp"
#include "isim/policy.hpp"
#include "isim/protocols.hpp"

namespace isim {

// Command-line overrides applied on top of the scenario file.
struct ScenarioOverrides {
  std::optional<int> horizon;
  std::optional<long> caps;
  std::optional<int> liveness_bound;
  bool strict_override = false;
  std::string out_dir;
};

// A fully resolved scenario: the protocol-independent context, the policy
// and rotation the programs refer to, and the command inputs.
struct Scenario {
  std::shared_ptr<const Context> ctx;
  Policy policy = Policy::empty();
  NextFn next = NextFn::round_robin();
  std::string protocol;         // name, or "table" with protocol_file set
  std::string protocol_file;
  std::string protocol_b;       // second slot for compare
  std::string protocol_b_file;
  KbProgram::Kind program_kind = KbProgram::Kind::PolicyWithOverride;
  bool strict_override = false;
  std::optional<int> liveness_bound;
  std::vector<std::string> checks;
  std::string out_dir = "out";

  KbProgram program() const;
};

// Loads, validates, and resolves a scenario file. Throws SpecError naming
// the offending field.
Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

// Builds the named protocol ("traffic_light", "p_empty", "p_intent",
// "p_sigma", "synthesized", or "table" + file). Synthesis runs here when
// asked for.
ActionProtocol resolve_protocol(const Scenario& s, const std::string& name,
                                const std::string& table_file);

}  // namespace isim
