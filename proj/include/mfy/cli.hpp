#pragma once
// Pipeline subcommands. Each takes the merged configuration (file + flag
// overrides) and returns a process exit code. Commands are deterministic and
// idempotent under a fixed config + seed; expected, documented discrepancies
// in the reproduction report exit zero, real failures do not.

#include <string>

#include "mfy/config.hpp"

namespace mfy::cli {

int cmd_cluster(const Config& cfg);   // raster -> labels + centers + energy log
int cmd_frames(const Config& cfg);    // labels -> cluster size table
int cmd_assign(const Config& cfg);    // points + labels -> population file
int cmd_estimate(const Config& cfg);  // population -> combination report + weights
int cmd_oracle(const Config& cfg);    // desk instances + synthetic Monte Carlo
int cmd_simulate(const Config& cfg);  // synthetic population/raster/points files
int cmd_reproduce(const Config& cfg); // bundled survey summary reproduction

int run(int argc, char** argv);

} // namespace mfy::cli
