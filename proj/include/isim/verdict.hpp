#pragma once

#include <string>
#include <vector>

#include "isim/topology.hpp"

namespace isim {

struct Witness {
  int adversary_id = -1;
  int time = -1;
  std::vector<Agent> agents;
  std::string detail;
};

// Shared result shape for every checker. `exact` marks verdicts that cover
// the whole (finite or analytically closed) space; bounded scans that found
// nothing stay inconclusive rather than claiming a pass.
struct Verdict {
  enum class Status { Pass, Fail, Inconclusive };
  Status status = Status::Pass;
  std::vector<Witness> witnesses;
  std::vector<std::string> notes;
  bool exact = false;

  bool passed() const { return status == Status::Pass; }
};

std::string to_string(Verdict::Status s);

}  // namespace isim
