#include "mc2/fuzz.hpp"

#include <random>
#include <set>
#include <vector>

namespace mc2 {
namespace {

Circuit random_core(std::mt19937_64 &rng, unsigned inputs, unsigned latches,
                    unsigned gates) {
  CircuitBuilder b;
  std::vector<Lit> ins, lats;
  for (unsigned i = 0; i < inputs; ++i) ins.push_back(b.add_input());
  for (unsigned i = 0; i < latches; ++i) lats.push_back(b.add_latch());
  for (unsigned i = 0; i < latches; ++i) {
    switch (rng() % 4) {
      case 0: b.set_reset(lats[i], lit_false); break;
      case 1: b.set_reset(lats[i], lit_true); break;
      case 2: b.set_reset(lats[i], lats[i]); break;  // uninitialized
      default:
        // earlier latches only, so resets always stratify
        if (i > 0) {
          Lit r = lats[rng() % i];
          b.set_reset(lats[i], (rng() & 1) ? negate(r) : r);
        } else {
          b.set_reset(lats[i], lit_true);
        }
    }
  }
  std::vector<Lit> pool = ins;
  pool.insert(pool.end(), lats.begin(), lats.end());
  pool.push_back(lit_true);
  auto pick = [&] {
    Lit l = pool[rng() % pool.size()];
    return (rng() & 1) ? negate(l) : l;
  };
  for (unsigned g = 0; g < gates; ++g)
    pool.push_back(b.make_and(pick(), pick()));
  for (unsigned i = 0; i < latches; ++i) b.set_next(lats[i], pick());
  b.set_bad(pick());
  return b.finish();
}

Circuit add_clock_backbone(const Circuit &c, std::mt19937_64 &rng,
                           bool gated_property) {
  CircuitBuilder b;
  std::vector<Lit> ins, lats;
  for (unsigned i = 0; i < c.num_inputs; ++i) ins.push_back(b.add_input());
  Lit clk = b.add_latch("clk");
  b.set_reset(clk, lit_false);
  b.set_next(clk, negate(clk));
  Lit anti = b.add_latch("anti");
  b.set_reset(anti, lit_true);
  b.set_next(anti, negate(anti));
  Lit g = lit_invalid;
  if (gated_property) {
    g = b.add_latch("gated");
    b.set_reset(g, lit_false);
  }
  for (unsigned i = 0; i < c.num_latches(); ++i) lats.push_back(b.add_latch());
  Instantiator inst(c, b);
  for (unsigned i = 0; i < c.num_inputs; ++i) inst.bind(c.input_var(i), ins[i]);
  for (unsigned i = 0; i < c.num_latches(); ++i)
    inst.bind(c.latch_var(i), lats[i]);
  for (unsigned i = 0; i < c.num_latches(); ++i) {
    Lit nxt = inst.walk(c.latches[i].next);
    if (rng() & 1) nxt = b.make_and(nxt, (rng() & 1) ? clk : negate(clk));
    b.set_next(lats[i], nxt);
    b.set_reset(lats[i], c.latch_uninitialized(i)
                             ? lats[i]
                             : inst.walk(c.latches[i].reset));
  }
  if (gated_property) {
    // a clk-gated latch is low whenever clk is high, so this property
    // is safe, but seeing that requires the phase structure
    b.set_next(g, b.make_and(inst.walk(c.bad), clk));
    b.set_bad(b.make_and(g, clk));
  } else {
    b.set_bad(inst.walk(c.bad));
  }
  return b.finish();
}

std::vector<unsigned> uninit_indices(const Circuit &c) {
  std::vector<unsigned> u;
  for (unsigned i = 0; i < c.num_latches(); ++i)
    if (c.latch_uninitialized(i)) u.push_back(i);
  return u;
}

using State = std::vector<uint8_t>;

// seeds `frontier` with every time-1 state; false when some time-0
// valuation already violates the property
bool expand_time0(const Circuit &c, std::set<State> &frontier) {
  std::vector<unsigned> u = uninit_indices(c);
  unsigned I = c.num_inputs;
  if (I + u.size() > 16) throw Error("oracle: too many time-0 choices");
  for (unsigned im = 0; im < (1u << I); ++im) {
    std::vector<uint8_t> inputs(I);
    for (unsigned j = 0; j < I; ++j) inputs[j] = (im >> j) & 1;
    for (unsigned hm = 0; hm < (1u << u.size()); ++hm) {
      std::vector<uint8_t> hint(c.num_latches(), 0);
      for (unsigned j = 0; j < u.size(); ++j) hint[u[j]] = (hm >> j) & 1;
      State s0 = reset_state(c, inputs, hint);
      std::vector<uint8_t> state = inputs;
      state.insert(state.end(), s0.begin(), s0.end());
      EvalResult r = eval(c, state);
      if (r.bad) return false;
      frontier.insert(r.next);
    }
  }
  return true;
}

}  // namespace

Circuit fuzz_circuit(uint64_t seed, const FuzzConfig &cfg) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
  unsigned extra = cfg.clocked ? 2 + (seed % 3 != 2) : 0;
  unsigned latch_room = cfg.max_latches > extra ? cfg.max_latches - extra : 1;
  unsigned inputs = 1 + rng() % cfg.max_inputs;
  unsigned latches = 1 + rng() % latch_room;
  unsigned gates = 2 + rng() % cfg.max_gates;
  Circuit c = random_core(rng, inputs, latches, gates);
  if (cfg.clocked) c = add_clock_backbone(c, rng, seed % 3 != 2);
  return c;
}

bool oracle_safe(const Circuit &c) {
  unsigned I = c.num_inputs;
  if (I > 12 || c.num_latches() > 16)
    throw Error("oracle: circuit too large for explicit enumeration");
  std::set<State> seen;
  if (!expand_time0(c, seen)) return false;
  std::vector<State> queue(seen.begin(), seen.end());
  while (!queue.empty()) {
    State s = queue.back();
    queue.pop_back();
    for (unsigned im = 0; im < (1u << I); ++im) {
      std::vector<uint8_t> state;
      for (unsigned j = 0; j < I; ++j) state.push_back((im >> j) & 1);
      state.insert(state.end(), s.begin(), s.end());
      EvalResult r = eval(c, state);
      if (r.bad) return false;
      if (seen.insert(r.next).second) queue.push_back(r.next);
    }
  }
  return true;
}

}  // namespace mc2
