#pragma once

// Core circuit representation. Variables are numbered contiguously:
// inputs 1..I, latches I+1..I+L, and gates after that. A literal is
// 2*var (+1 when negated); 0 is false, 1 is true, as in AIGER.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mc2 {

using Lit = unsigned;

constexpr Lit lit_false = 0;
constexpr Lit lit_true = 1;
constexpr Lit lit_invalid = ~0u;

inline Lit negate(Lit l) { return l ^ 1u; }
inline unsigned var_of(Lit l) { return l >> 1; }
inline bool sign_of(Lit l) { return l & 1u; }
inline Lit make_lit(unsigned var, bool neg = false) {
  return (var << 1) | unsigned(neg);
}
inline bool is_constant(Lit l) { return l < 2; }
inline Lit apply_sign(Lit l, bool neg) { return l ^ unsigned(neg); }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed circuit structure (bad indices, cycles, duplicate defs).
struct StructuralError : Error {
  using Error::Error;
};

struct Latch {
  unsigned var = 0;
  Lit next = lit_false;
  Lit reset = lit_false;
};

struct AndGate {
  unsigned var = 0;
  Lit rhs0 = lit_false;
  Lit rhs1 = lit_false;
};

class Circuit {
 public:
  unsigned num_inputs = 0;
  std::vector<Latch> latches;
  std::vector<AndGate> ands;
  Lit bad = lit_false;
  std::vector<std::string> input_names;  // "" when unnamed
  std::vector<std::string> latch_names;
  std::string output_name;
  std::vector<std::string> comments;

  unsigned num_latches() const { return (unsigned)latches.size(); }
  unsigned num_ands() const { return (unsigned)ands.size(); }
  unsigned num_vars() const { return num_inputs + num_latches() + num_ands(); }
  unsigned num_state_vars() const { return num_inputs + num_latches(); }

  bool is_input_var(unsigned v) const { return v >= 1 && v <= num_inputs; }
  bool is_latch_var(unsigned v) const {
    return v > num_inputs && v <= num_inputs + num_latches();
  }
  bool is_and_var(unsigned v) const {
    return v > num_inputs + num_latches() && v <= num_vars();
  }
  unsigned input_index(unsigned v) const { return v - 1; }
  unsigned latch_index(unsigned v) const { return v - num_inputs - 1; }
  unsigned and_index(unsigned v) const {
    return v - num_inputs - num_latches() - 1;
  }
  unsigned input_var(unsigned i) const { return i + 1; }
  unsigned latch_var(unsigned i) const { return num_inputs + i + 1; }
  Lit input_lit(unsigned i) const { return make_lit(input_var(i)); }
  Lit latch_lit(unsigned i) const { return make_lit(latch_var(i)); }
  const AndGate &and_of(unsigned v) const { return ands[and_index(v)]; }

  // Name used for cross-file variable identification: the symbol if
  // present, otherwise a positional key ("i3", "l7").
  std::string effective_input_name(unsigned i) const;
  std::string effective_latch_name(unsigned i) const;
  std::optional<unsigned> find_input(const std::string &name) const;
  std::optional<unsigned> find_latch(const std::string &name) const;

  bool latch_uninitialized(unsigned i) const {
    return latches[i].reset == make_lit(latches[i].var);
  }

  void validate() const;  // throws StructuralError
};

// Incremental construction with eager constant folding. Inputs and
// latches must be declared before gates that use them; gate operands
// must already exist.
class CircuitBuilder {
 public:
  Lit add_input(std::string name = {});
  Lit add_latch(std::string name = {});
  void set_next(Lit latch, Lit next);
  void set_reset(Lit latch, Lit reset);
  void set_bad(Lit b) { circuit_.bad = check_lit(b); }

  Lit make_and(Lit a, Lit b);
  Lit make_or(Lit a, Lit b) { return negate(make_and(negate(a), negate(b))); }
  Lit make_implies(Lit a, Lit b) { return make_or(negate(a), b); }
  Lit make_equiv(Lit a, Lit b) {
    return make_and(make_implies(a, b), make_implies(b, a));
  }
  Lit make_xor(Lit a, Lit b) { return negate(make_equiv(a, b)); }
  Lit make_ite(Lit c, Lit t, Lit e) {
    return make_and(make_implies(c, t), make_implies(negate(c), e));
  }
  Lit make_conj(std::span<const Lit> lits);
  Lit make_disj(std::span<const Lit> lits);

  unsigned num_inputs() const { return circuit_.num_inputs; }
  unsigned num_latches() const { return circuit_.num_latches(); }
  const Circuit &peek() const { return circuit_; }

  Circuit finish();

 private:
  Lit check_lit(Lit l) const;
  Circuit circuit_;
  std::unordered_map<uint64_t, Lit> strash_;  // (a,b) -> existing gate
  bool gates_started_ = false;
};

// Copies gate cones from one circuit into a builder under a leaf
// substitution. Every input/latch var reachable from a walked literal
// must be bound first; gate copies are memoized.
class Instantiator {
 public:
  Instantiator(const Circuit &src, CircuitBuilder &dst)
      : src_(src), dst_(dst), map_(src.num_vars() + 1, lit_invalid) {}
  void bind(unsigned src_var, Lit dst_lit);
  Lit walk(Lit src_lit);

 private:
  const Circuit &src_;
  CircuitBuilder &dst_;
  std::vector<Lit> map_;
};

struct StratResult {
  std::vector<unsigned> order;  // latch indices, reset-dependency order
  std::vector<unsigned> cycle;  // nonempty iff not stratified
  bool ok() const { return cycle.empty(); }
};

StratResult check_stratified(const Circuit &c);

// Latch indices in the structural support of a literal. A latch's pure
// self-reset does not count as a dependency on itself.
std::vector<unsigned> latch_support(const Circuit &c, Lit l);
std::vector<unsigned> input_support(const Circuit &c, Lit l);

struct EvalResult {
  std::vector<uint8_t> value;  // indexed by var, [0] unused
  uint8_t bad = 0;
  std::vector<uint8_t> next;  // per latch
  uint8_t lit(Lit l) const { return is_constant(l) ? uint8_t(l) : value[var_of(l)] ^ sign_of(l); }
};

// state[i] is the value of var i+1, covering inputs then latches.
EvalResult eval(const Circuit &c, std::span<const uint8_t> state);

// Reset-state computation in stratified order; returns one value per
// latch. self_hint (optional, per latch) supplies values for
// uninitialized latches, defaulting to 0.
std::vector<uint8_t> reset_state(const Circuit &c,
                                 std::span<const uint8_t> inputs,
                                 std::span<const uint8_t> self_hint = {});

// Replace every use of a mapped variable by the image literal. Mapped
// variables keep their definitions; unreachable gates are dropped.
Circuit substitute(const Circuit &c, std::span<const std::pair<unsigned, Lit>> map);

struct CoiSet {
  std::vector<char> input_in;  // per input index
  std::vector<char> latch_in;  // per latch index
  unsigned num_inputs() const;
  unsigned num_latches() const;
};

CoiSet coi(const Circuit &c);

// The circuit with latches turned into inputs, exposing literals for
// the transition/reset/property functions. Shared by SAT encodings.
struct CombView {
  Circuit comb;
  std::vector<Lit> inputs;  // per original input
  std::vector<Lit> states;  // per original latch
  std::vector<Lit> next;    // per latch
  std::vector<Lit> reset;   // per latch
  Lit bad = lit_false;
  Lit reset_pred = lit_true;  // conjunction of state ≃ reset
};

CombView comb_view(const Circuit &c);

// Combinational unrolling over k+1 timed copies.
struct Unrolling {
  Circuit comb;
  std::vector<std::vector<Lit>> inputs;  // [frame][input]
  std::vector<std::vector<Lit>> states;  // [frame][latch]
  std::vector<Lit> bads;                 // per frame
  Lit reset_pred = lit_true;             // R(L_0)
  Lit trans = lit_true;                  // all equality constraints
};

Unrolling unroll(const Circuit &c, unsigned k);

}  // namespace mc2
