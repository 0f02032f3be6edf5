#pragma once

// Backend model checking: BMC for counterexamples, k-induction, and a
// small IC3 that produces inductive invariants; results are packaged so
// a terminal witness circuit can be built from any certified SAFE run.

#include "mc2/netlist.hpp"
#include "mc2/tersim.hpp"

namespace mc2 {

enum class Status { Safe, Unsafe, Unknown };

struct TraceStep {
  std::vector<uint8_t> inputs;   // per input
  std::vector<uint8_t> latches;  // per latch; step 0 is a reset state
};

// disjunction of latch literals
using Clause = std::vector<Lit>;

struct Verdict {
  Status status = Status::Unknown;
  std::vector<TraceStep> trace;  // iff Unsafe; replayable through eval
  // iff Safe and has_invariant: Inv as a clause conjunction over
  // latches; together with the property it passes the inductiveness
  // checks (reset => Inv & P, Inv & P & step => Inv' & P')
  std::vector<Clause> invariant;
  bool has_invariant = false;
  unsigned depth = 0;  // cex length / converged frame / induction k
};

struct EngineOptions {
  unsigned max_bound = 30;       // bmc unrolling depth
  unsigned max_k = 10;           // k-induction window
  unsigned max_frames = 100;     // ic3 frame cap
  int64_t conflict_budget = -1;  // per SAT call; < 0 unlimited
};

Verdict bmc(const Circuit &c, unsigned max_bound,
            int64_t conflict_budget = -1);
Verdict kinduction(const Circuit &c, const EngineOptions &opt = {});
Verdict ic3(const Circuit &c, const EngineOptions &opt = {});

// Dispatches on an engine name: "ic3", "kind", "bmc" or "portfolio"
// (sequential bmc, then k-induction, then ic3, with ic3 re-run when a
// SAFE result lacks an invariant).
Verdict run_engine(const Circuit &c, const std::string &engine,
                   const EngineOptions &opt = {});

// The trace starts in a reset state (under its own step-0 inputs),
// follows eval exactly, and ends in a state whose inputs set bad.
bool replay_trace(const Circuit &c, std::span<const TraceStep> trace);

// The checked circuit with bad replaced by the negation of
// Q = Inv & P; the symbol table is shared, so every latch and input is
// common with the checked circuit. The target property is recorded in
// a PROPERTY comment.
Circuit terminal_witness(const Circuit &c, const Verdict &v);

}  // namespace mc2
