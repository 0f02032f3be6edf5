#pragma once

// Three-valued simulation with all inputs unknown. The reachable cube
// sequence of a stratified circuit eventually loops; the resulting cube
// lasso (stem + loop) is what periodic-signal extraction feeds on.
// Every lasso is checked against the circuit with a SAT solver before
// anything downstream trusts it.

#include "mc2/netlist.hpp"

namespace mc2 {

enum class Ternary : uint8_t { F = 0, T = 1, X = 2 };

inline Ternary ternary_of(uint8_t b) { return b ? Ternary::T : Ternary::F; }
inline Ternary ternary_not(Ternary a) {
  if (a == Ternary::X) return Ternary::X;
  return a == Ternary::T ? Ternary::F : Ternary::T;
}
inline Ternary ternary_and(Ternary a, Ternary b) {
  if (a == Ternary::F || b == Ternary::F) return Ternary::F;
  if (a == Ternary::T && b == Ternary::T) return Ternary::T;
  return Ternary::X;
}

// A conjunction of latch literals, sorted by literal value. States in
// the cube make every literal true; latches absent from the cube are
// unconstrained.
struct Cube {
  std::vector<Lit> lits;

  void sort_lits();
  bool contains(Lit l) const;
  // this cube's literal set is included in the other's (so the other
  // denotes a subset of this cube's states)
  bool subsumes(const Cube &other) const;
  bool operator==(const Cube &) const = default;
};

using TernaryVec = std::vector<Ternary>;  // one entry per latch

// The latch cube a ternary state denotes: defined latches contribute a
// literal, unknown latches are dropped.
Cube cube_of(const Circuit &c, const TernaryVec &state);

struct TernaryEval {
  std::vector<Ternary> value;  // per var, [0] unused
  Ternary bad = Ternary::X;
  TernaryVec next;
  Ternary lit(Lit l) const {
    if (is_constant(l)) return ternary_of(uint8_t(l));
    Ternary v = value[var_of(l)];
    return sign_of(l) ? ternary_not(v) : v;
  }
};

// state[i] is the value of var i+1 (inputs then latches); entries may
// be concrete, so the same evaluator serves cube lifting later on.
TernaryEval ternary_eval(const Circuit &c, std::span<const Ternary> state);

// Reset in stratified order with every input unknown; uninitialized
// latches start unknown.
TernaryVec ternary_reset(const Circuit &c);
// One transition with every input unknown.
TernaryVec ternary_step(const Circuit &c, const TernaryVec &latches);

// cubes.size() == delta + omega + 1: stem cubes 0..delta-1, loop cubes
// delta..delta+omega. The successor cube of the last loop cube is
// subsumed by the first loop cube.
struct CubeLasso {
  std::vector<Cube> cubes;
  unsigned delta = 0;
  unsigned omega = 0;
};

// Simulates from the ternary reset until the cube sequence closes, then
// emits the lasso plus its loop rotations (at most omega + 1 lassos, one
// per rotation). Empty when no closure within max_steps.
std::vector<CubeLasso> find_lassos(const Circuit &c, unsigned max_steps = 1000);

struct LassoCheck {
  bool ok = true;
  // -1: some reset state escapes cube 0; i >= 0: a transition from
  // cube i escapes its successor (the loop head when i is the last)
  int failed = -2;
};

LassoCheck verify_lasso(const Circuit &c, const CubeLasso &lasso);

}  // namespace mc2
