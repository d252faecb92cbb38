#pragma once

#include <iosfwd>
#include <string>

#include "sdr/config.hpp"

namespace sdr {

struct DispatchOptions {
    NuclearBit readout_bit = NuclearBit::Up;
    bool dump_members = false;
};

// Runs one experiment and writes its artifacts plus manifest.json (inputs
// hash, seed, version, per-file hashes; timestamps live in run_info.json).
// Returns 0 on success, 2 on configuration errors, 3 on numerical failures;
// partial outputs are removed on failure. Identical config and seed yield
// byte-identical data files.
int dispatch(const std::string& subcommand, const Config& cfg, const DispatchOptions& opts,
             std::ostream& log);

}  // namespace sdr
