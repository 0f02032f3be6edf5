#pragma once

// Circuit transformations of the preprocessing pipeline:
//   forward:  push the reset d steps ahead (startup elimination)
//   unfold:   one macro step = n micro steps, latches copied per phase
//   factor:   specialize latch copies by their periodic signal
//   rewrite:  constant propagation through constant latches
//   reduce:   restrict to the cone of influence of the property

#include "mc2/netlist.hpp"
#include "mc2/periodic.hpp"

namespace mc2 {

// Where each copy of an original input/latch lives in the unfolded
// circuit. copy 0 .. n-1; values are input/latch indices there.
struct CopyMap {
  unsigned n = 1;
  std::vector<std::vector<unsigned>> input_copy;  // [copy][orig input]
  std::vector<std::vector<unsigned>> latch_copy;  // [copy][orig latch]
};

// Replace the reset by the states reachable in exactly d steps: reset
// expressions are rebuilt from d rounds of next-state functions over
// fresh reset-only inputs (fwd_<step>_<input>), with uninitialized
// latches seeded by fresh fwd_init_<latch> inputs. Latches, next
// functions and the property are untouched; d = 0 is the identity.
Circuit forward(const Circuit &c, unsigned d);

struct Unfolded {
  Circuit circuit;
  CopyMap map;
};

// n-fold unfolding: inputs and latches are copied per phase
// (<name>__p<i>); copy i resets to the i-th state of the original
// reset trace, steps to the i-th successor of the previous macro
// state's last copy, and the property is the disjunction over phases.
// n = 1 is the identity (up to gate renumbering).
Unfolded unfold(const Circuit &c, unsigned n);

// Rewire latch copies according to the extracted periodic signals:
// a constant phase makes reset and next that constant; an equivalent /
// antivalent phase copies (negates) the representative's reset and
// next. Free phases are untouched. signals may be empty (identity).
Circuit factor(const Circuit &unfolded, const CopyMap &map,
               std::span<const PeriodicSignal> signals);

// Constant propagation: a latch whose reset and next are the same
// constant is replaced by it everywhere, to fixpoint. Idempotent.
Circuit rewrite(const Circuit &c);

// Drop inputs and latches outside the property's cone of influence;
// names are preserved for witness lifting.
Circuit reduce(const Circuit &c);

struct Stages {
  unsigned d = 0;
  unsigned n = 1;
  Circuit forwarded;
  Unfolded unfolded;
  Circuit factored;
  Circuit rewritten;
  Circuit reduced;
};

Stages run_pipeline(const Circuit &c, unsigned d, unsigned n,
                    std::span<const PeriodicSignal> signals);

}  // namespace mc2
