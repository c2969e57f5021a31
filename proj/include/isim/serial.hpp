#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "isim/exchange.hpp"
#include "isim/kernel.hpp"
#include "isim/protocols.hpp"
#include "isim/topology.hpp"
#include "isim/verdict.hpp"

namespace isim {

// Insertion-ordered JSON keeps every emitted document byte-stable.
using ojson = nlohmann::ordered_json;

ojson move_to_json(const Move& m);
Move move_from_json(const nlohmann::json& j);

ojson message_to_json(const Message& m);
ojson reading_to_json(const SensorReading& s);
ojson memory_to_json(const Memory& m);
ojson local_state_to_json(const LocalState& s);
SensorReading reading_from_json(const nlohmann::json& j);
Memory memory_from_json(const nlohmann::json& j);
LocalState local_state_from_json(const nlohmann::json& j);

// Witness lists in emitted reports are capped; the full count stays in the
// document.
ojson verdict_to_json(const Verdict& v, size_t witness_cap = 50);

ojson context_to_json(const Context& ctx);

// Line-delimited trace: one header object, then per run a state-only record
// for t = 0 followed by one record per round with the actions taken and the
// messages moved. Key order is fixed; nothing in the file depends on the
// wall clock.
void write_trace(std::ostream& os, const System& sys);

void save_table_protocol(const std::string& path, const TableProtocol& table);
TableProtocol load_table_protocol(const std::string& path);

void save_policy_table(const std::string& path,
                       const std::map<std::string, std::vector<Move>>& entries);
std::map<std::string, std::vector<Move>> load_policy_table(const std::string& path);

}  // namespace isim
