#pragma once

// Certificate constructions for the phase-abstraction pipeline: the
// loop invariant tying lasso cubes to latch copies, the composite
// witness that re-targets a factor-circuit certificate at the unfolded
// circuit, and the fold that turns an unfolded-circuit certificate into
// one for the original circuit. Witnesses are plain circuits whose bad
// literal is the negated inductive invariant Q and whose target
// property is recorded in a PROPERTY comment; variables are matched
// across circuits by effective name.

#include <functional>

#include "mc2/aiger_io.hpp"
#include "mc2/periodic.hpp"
#include "mc2/transform.hpp"

namespace mc2 {

// φ = ∨_{i∈[0,m)} ∧_{j∈[0,n)} c_{i·n+j+d}: disjunct i places cube
// c_{i·n+j+d} on latch copy j of the unfolding.
struct LoopInvariant {
  unsigned d = 0;
  unsigned n = 1;
  unsigned m = 0;
  // m rows of n cubes; row i column j is the cube for latch copy j.
  // Cube literals range over the source circuit's latch variables.
  std::vector<std::vector<Cube>> disjuncts;
};

// Requires (delta + omega - d + 1) divisible by n (candidate-valid
// pairs always are); throws Error otherwise.
LoopInvariant build_loop_invariant(const CubeLasso &lasso, unsigned d,
                                   unsigned n);

// Instantiates φ as a literal in the builder. latch_at(copy, index)
// supplies the destination literal for latch `index` of copy `copy`;
// src decodes the cube literals (it is the circuit the lasso was found
// on).
Lit emit_loop_invariant(const LoopInvariant &phi, const Circuit &src,
                        CircuitBuilder &b,
                        const std::function<Lit(unsigned, unsigned)> &latch_at);

// SAT-checks that φ is an inductive invariant of the unfolded circuit
// strong enough for factoring: (i) every unfolded reset state satisfies
// φ; (ii) φ is preserved by the unfolded transition; (iii) φ implies
// every non-self periodic-signal equality. Any solver failure counts as
// a fail.
bool verify_loop_invariant(const Circuit &src, const Unfolded &u,
                           const LoopInvariant &phi,
                           std::span<const PeriodicSignal> signals);

// Constant-propagation and cone-of-influence reduction only remove
// variables, so a certificate survives them unchanged; the common
// variables are recomputed by name when it is checked.
inline Circuit lift_witness(Circuit w) { return w; }

// Witness for the unfolded circuit: the unfolded circuit itself plus
// any carried witness-only latches, with Q = φ ∧ Q_factor where
// Q_factor is the factor-side certificate's invariant instantiated by
// name. The declared property is the unfolded circuit's own property.
Circuit composite_witness(const Circuit &src, const Unfolded &u,
                          const Circuit &w_factor, const LoopInvariant &phi);

// Witness for circuit c given a witness of its n-phase unfolding: shift
// registers record the last 2n-2 steps of history, initialization bits
// track how much of the history is real, and phase-alignment bits pick
// which window of n consecutive states forms an unfolded state; Q
// asserts the original property on the live state plus consistency of
// the recorded history with the unfolded certificate. n = 1 returns the
// witness unchanged.
Circuit fold_witness(const Circuit &c, const Unfolded &u,
                     const Circuit &w_unfolded, unsigned n);

}  // namespace mc2
