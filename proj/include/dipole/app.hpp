#pragma once

// Subcommand driver: each subcommand computes, writes its artifacts into the
// output directory and returns its verification report.

#include <ostream>
#include <string>
#include <vector>

#include "dipole/config.hpp"
#include "dipole/report.hpp"

namespace dipole {

const std::vector<std::string>& subcommands();

// Loads the kernel for cfg from the cache directory (checksum verified) or
// builds and stores it. `loaded` reports which happened.
KernelTable obtain_kernel(const RunConfig& cfg, const LatticeSpec& spec, bool* loaded = nullptr,
                          std::ostream* log = nullptr);

// Runs one subcommand. Writes <out>/<name>.report.json plus its CSV or JSON
// artifacts. `report` aggregates the other reports found in <out> and
// throws ErrorCode::not_found when there is nothing to aggregate.
Report run_subcommand(const std::string& name, const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace dipole
