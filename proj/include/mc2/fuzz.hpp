#pragma once

// Random circuit generation and an explicit-state safety oracle, shared
// by the differential test harnesses and the command line tool. The
// generator is deterministic in its seed; resets never read inputs and
// always stratify. The oracle enumerates reachable states exactly,
// including every time-0 input valuation and every hint combination for
// uninitialized latches, so it is the ground truth the model checker is
// measured against.

#include <cstdint>

#include "mc2/netlist.hpp"

namespace mc2 {

struct FuzzConfig {
  unsigned max_inputs = 4;
  unsigned max_latches = 8;
  unsigned max_gates = 16;
  // add a free-running toggle pair and, on most seeds, a clock-gated
  // property that is safe for phase reasons only
  bool clocked = true;
};

Circuit fuzz_circuit(uint64_t seed, const FuzzConfig &cfg = {});

// throws Error beyond 16 state bits (inputs + uninitialized hints, or
// latches)
bool oracle_safe(const Circuit &c);

}  // namespace mc2
