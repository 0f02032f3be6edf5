#pragma once

// Periodic-signal extraction from cube lassos: per phase, a latch is
// constant, equivalent/antivalent to a representative latch, or free.
// Candidates pair a startup duration d with a phase count n; they are
// scored by the latch count left after the preprocessing pipeline.

#include "mc2/tersim.hpp"

namespace mc2 {

enum class PhaseKind : uint8_t { Const0, Const1, LatchRef, SelfRef };

struct PhaseEntry {
  PhaseKind kind = PhaseKind::SelfRef;
  // iff LatchRef: representative latch INDEX in the source circuit,
  // packed as a literal whose sign marks antivalence
  Lit ref = lit_invalid;
  bool operator==(const PhaseEntry &) const = default;
};

inline PhaseEntry phase_const(bool v) {
  return {v ? PhaseKind::Const1 : PhaseKind::Const0, lit_invalid};
}
inline PhaseEntry phase_self() { return {}; }
inline PhaseEntry phase_ref(Lit latch_lit) {
  return {PhaseKind::LatchRef, latch_lit};
}

struct PeriodicSignal {
  unsigned d = 0;
  std::vector<PhaseEntry> phases;  // size n
  bool operator==(const PeriodicSignal &) const = default;
};

struct Candidate {
  unsigned lasso = 0;  // index into the lasso list it came from
  unsigned d = 0;
  unsigned n = 1;
  std::vector<PeriodicSignal> signals;  // one per latch
  long score = -1;                      // final latch count; -1 = unscored
  bool usable = true;
};

// All (d, n) with n dividing the loop cube count, (delta - d) divisible
// by n, d <= delta, both capped; (0, 1) is always among them.
std::vector<std::pair<unsigned, unsigned>> enumerate_candidates(
    const CubeLasso &lasso, unsigned max_d = 8, unsigned max_n = 8);

// Per phase i the constrained cubes are those at indices d+i+j*n. A
// latch constant across all of them gets that constant; one absent from
// any of them is free; the rest are pooled by their polarity bit-string
// and mapped to the lowest-index representative (possibly negated),
// which itself stays free.
std::vector<PeriodicSignal> extract_signals(const Circuit &c,
                                            const CubeLasso &lasso, unsigned d,
                                            unsigned n);

// Runs the full preprocessing pipeline and records the final latch
// count in the candidate; failures mark it unusable.
long score_candidate(const Circuit &c, Candidate &cand);

// Minimal score; ties broken by smaller n, then smaller d, then order.
const Candidate &select_best(std::span<const Candidate> cands);

// enumerate + extract + score over every lasso
std::vector<Candidate> make_candidates(const Circuit &c,
                                       std::span<const CubeLasso> lassos,
                                       unsigned max_d = 8, unsigned max_n = 8);

}  // namespace mc2
