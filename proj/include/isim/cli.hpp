#pragma once

namespace isim {

// Full command-line surface: simulate | verify | compare | synthesize |
// extract, each over a scenario file. Returns the process exit code:
// 0 all checks passed, 1 a check failed (or stayed inconclusive without
// --allow-inconclusive), 2 configuration or usage errors.
int cli_main(int argc, char** argv);

}  // namespace isim
