#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "mc2/aiger_io.hpp"
#include "mc2/periodic.hpp"
#include "mc2/transform.hpp"

using namespace mc2;

namespace {

using State = std::vector<uint8_t>;

Circuit toggle_circuit() {
  CircuitBuilder b;
  Lit t = b.add_latch("t");
  Lit c = b.add_latch("c");
  b.set_next(t, c);
  b.set_next(c, negate(c));
  b.set_reset(t, lit_false);
  b.set_reset(c, lit_false);
  b.set_bad(b.make_and(t, c));
  return b.finish();
}

Circuit clock_circuit() {
  CircuitBuilder b;
  Lit c = b.add_latch("c");
  b.set_next(c, negate(c));
  b.set_reset(c, lit_false);
  b.set_bad(c);
  return b.finish();
}

// resets limited to constants, self, or earlier latches (no inputs), so
// reset states are independent of the input stream
Circuit random_circuit_nf(std::mt19937 &rng, unsigned inputs, unsigned latches,
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
  auto lit = [&] {
    Lit l = pool[rng() % pool.size()];
    return (rng() & 1) ? negate(l) : l;
  };
  for (unsigned g = 0; g < gates; ++g) pool.push_back(b.make_and(lit(), lit()));
  for (unsigned i = 0; i < latches; ++i) b.set_next(lats[i], lit());
  b.set_bad(lit());
  return b.finish();
}

// variant whose resets may also reference inputs (for forward tests)
Circuit random_circuit_ir(std::mt19937 &rng, unsigned inputs, unsigned latches,
                          unsigned gates) {
  CircuitBuilder b;
  std::vector<Lit> ins, lats;
  for (unsigned i = 0; i < inputs; ++i) ins.push_back(b.add_input());
  for (unsigned i = 0; i < latches; ++i) lats.push_back(b.add_latch());
  for (unsigned i = 0; i < latches; ++i) {
    switch (rng() % 5) {
      case 0: b.set_reset(lats[i], lit_false); break;
      case 1: b.set_reset(lats[i], lit_true); break;
      case 2: b.set_reset(lats[i], lats[i]); break;
      case 3:
        if (i > 0) {
          Lit r = lats[rng() % i];
          b.set_reset(lats[i], (rng() & 1) ? negate(r) : r);
          break;
        }
        [[fallthrough]];
      default:
        if (!ins.empty()) {
          Lit r = ins[rng() % ins.size()];
          b.set_reset(lats[i], (rng() & 1) ? negate(r) : r);
        } else {
          b.set_reset(lats[i], lit_true);
        }
    }
  }
  std::vector<Lit> pool = ins;
  pool.insert(pool.end(), lats.begin(), lats.end());
  pool.push_back(lit_true);
  auto lit = [&] {
    Lit l = pool[rng() % pool.size()];
    return (rng() & 1) ? negate(l) : l;
  };
  for (unsigned g = 0; g < gates; ++g) pool.push_back(b.make_and(lit(), lit()));
  for (unsigned i = 0; i < latches; ++i) b.set_next(lats[i], lit());
  b.set_bad(lit());
  return b.finish();
}

std::vector<unsigned> uninit_indices(const Circuit &c) {
  std::vector<unsigned> u;
  for (unsigned i = 0; i < c.num_latches(); ++i)
    if (c.latch_uninitialized(i)) u.push_back(i);
  return u;
}

// Time-0 expansion: the same input valuation feeds the reset
// expressions, the property, and the first transition. Returns false
// through `unsafe` when bad holds at time 0; otherwise collects the
// time-1 states.
bool expand_time0(const Circuit &c, std::set<State> &time1) {
  std::vector<unsigned> u = uninit_indices(c);
  unsigned I = c.num_inputs;
  REQUIRE(I + u.size() <= 16);
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
      time1.insert(r.next);
    }
  }
  return true;
}

// explicit-state reachability: bad anywhere reachable, any inputs
bool oracle_safe(const Circuit &c) {
  unsigned I = c.num_inputs;
  REQUIRE(I <= 10);
  REQUIRE(c.num_latches() <= 16);
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

// is bad reachable within the first d steps (times 0..d-1)?
bool prefix_safe(const Circuit &c, unsigned d) {
  if (d == 0) return true;
  unsigned I = c.num_inputs;
  std::set<State> layer;
  if (!expand_time0(c, layer)) return false;
  for (unsigned t = 1; t < d; ++t) {
    std::set<State> next;
    for (const State &s : layer)
      for (unsigned im = 0; im < (1u << I); ++im) {
        std::vector<uint8_t> state;
        for (unsigned j = 0; j < I; ++j) state.push_back((im >> j) & 1);
        state.insert(state.end(), s.begin(), s.end());
        EvalResult r = eval(c, state);
        if (r.bad) return false;
        next.insert(r.next);
      }
    layer = std::move(next);
  }
  return true;
}

std::string dump(const Circuit &c) { return write_aiger(c); }

}  // namespace

TEST_CASE("forward at d = 0 is the identity") {
  std::mt19937 rng(11);
  for (int i = 0; i < 10; ++i) {
    Circuit c = random_circuit_ir(rng, 2, 3, 5);
    CHECK(dump(forward(c, 0)) == dump(c));
  }
}

TEST_CASE("forwarding the clock flips its reset") {
  Circuit c = clock_circuit();
  Circuit f1 = forward(c, 1);
  REQUIRE(f1.num_latches() == 1);
  CHECK(f1.num_inputs == 0);
  CHECK(f1.latches[0].reset == lit_true);
  CHECK(f1.latches[0].next == negate(make_lit(f1.latch_var(0))));
  CHECK(f1.latch_names[0] == "c");
  Circuit f2 = forward(c, 2);
  CHECK(f2.latches[0].reset == lit_false);
}

TEST_CASE("forward reset states are the exactly-d-reachable states") {
  std::mt19937 rng(22);
  for (int iter = 0; iter < 60; ++iter) {
    unsigned I = rng() % 3, L = 1 + rng() % 3, G = 1 + rng() % 6;
    unsigned d = 1 + rng() % 2;
    Circuit c = random_circuit_ir(rng, I, L, G);
    std::vector<unsigned> u = uninit_indices(c);

    // original side: run every input sequence of length d from every
    // reset state; the time-0 inputs also feed the reset expressions
    std::set<State> expect;
    unsigned seq_bits = I * d;
    REQUIRE(seq_bits + u.size() <= 12);
    for (unsigned sm = 0; sm < (1u << seq_bits); ++sm) {
      for (unsigned hm = 0; hm < (1u << u.size()); ++hm) {
        std::vector<uint8_t> hint(L, 0);
        for (unsigned j = 0; j < u.size(); ++j) hint[u[j]] = (hm >> j) & 1;
        std::vector<uint8_t> in0(I);
        for (unsigned j = 0; j < I; ++j) in0[j] = (sm >> j) & 1;
        State s = reset_state(c, in0, hint);
        for (unsigned t = 0; t < d; ++t) {
          std::vector<uint8_t> state;
          for (unsigned j = 0; j < I; ++j)
            state.push_back((sm >> (t * I + j)) & 1);
          state.insert(state.end(), s.begin(), s.end());
          s = eval(c, state).next;
        }
        expect.insert(s);
      }
    }

    Circuit fc = forward(c, d);
    REQUIRE(fc.num_latches() == L);
    REQUIRE(fc.num_inputs == I + u.size() + d * I);
    CHECK(uninit_indices(fc).empty());
    std::set<State> got;
    REQUIRE(fc.num_inputs <= 12);
    for (unsigned im = 0; im < (1u << fc.num_inputs); ++im) {
      std::vector<uint8_t> inputs(fc.num_inputs);
      for (unsigned j = 0; j < fc.num_inputs; ++j) inputs[j] = (im >> j) & 1;
      got.insert(reset_state(fc, inputs));
    }
    CHECK(expect == got);

    // next functions and property are untouched
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<uint8_t> ostate(c.num_state_vars());
      for (auto &v : ostate) v = rng() & 1;
      std::vector<uint8_t> fstate(fc.num_state_vars(), 0);
      for (unsigned j = 0; j < I; ++j) fstate[j] = ostate[j];
      for (unsigned j = 0; j < L; ++j)
        fstate[fc.latch_var(j) - 1] = ostate[c.latch_var(j) - 1];
      EvalResult ro = eval(c, ostate), rf = eval(fc, fstate);
      CHECK(ro.bad == rf.bad);
      for (unsigned j = 0; j < L; ++j) CHECK(ro.next[j] == rf.next[j]);
    }
  }
}

TEST_CASE("unfold at n = 1 is the identity") {
  std::mt19937 rng(33);
  Circuit c = random_circuit_ir(rng, 2, 3, 5);
  Unfolded u = unfold(c, 1);
  CHECK(dump(u.circuit) == dump(c));
  REQUIRE(u.map.n == 1);
  CHECK(u.map.input_copy[0] == std::vector<unsigned>{0, 1});
  CHECK(u.map.latch_copy[0] == std::vector<unsigned>{0, 1, 2});
}

TEST_CASE("unfolding the clock reaches its fixpoint") {
  Circuit c = clock_circuit();
  Unfolded u = unfold(c, 2);
  REQUIRE(u.circuit.num_latches() == 2);
  CHECK(u.circuit.latch_names[0] == "c__p0");
  CHECK(u.circuit.latch_names[1] == "c__p1");
  State m = reset_state(u.circuit, {});
  CHECK(m == State{0, 1});
  EvalResult r = eval(u.circuit, m);
  CHECK(r.next == State{0, 1});  // one macro step is two clock flips
}

TEST_CASE("k macro steps visit exactly n*k micro steps in blocks") {
  std::mt19937 rng(44);
  for (int iter = 0; iter < 80; ++iter) {
    unsigned I = rng() % 2, L = 1 + rng() % 3, G = 1 + rng() % 6;
    unsigned n = 2 + rng() % 2, k = 3;
    Circuit c = random_circuit_nf(rng, I, L, G);
    Unfolded u = unfold(c, n);
    REQUIRE(u.circuit.num_latches() == n * L);
    std::vector<unsigned> un = uninit_indices(c);

    // micro inputs for steps 0 .. n-1 + k*n - 1, random hints
    unsigned steps = n - 1 + k * n;
    std::vector<std::vector<uint8_t>> micro_in(steps, std::vector<uint8_t>(I));
    for (auto &v : micro_in)
      for (auto &x : v) x = rng() & 1;
    std::vector<uint8_t> hint(L, 0);
    for (unsigned j : un) hint[j] = rng() & 1;

    std::vector<State> s = {reset_state(c, std::vector<uint8_t>(I, 0), hint)};
    for (unsigned t = 0; t + 1 <= steps; ++t) {
      std::vector<uint8_t> state = micro_in[t];
      state.insert(state.end(), s.back().begin(), s.back().end());
      s.push_back(eval(c, state).next);
    }

    // macro reset: copy i>0 consumes micro inputs i-1
    std::vector<uint8_t> macro_in(n * I, 0);
    for (unsigned i = 1; i < n; ++i)
      for (unsigned j = 0; j < I; ++j) macro_in[i * I + j] = micro_in[i - 1][j];
    std::vector<uint8_t> macro_hint(n * L, 0);
    for (unsigned j : un) macro_hint[u.map.latch_copy[0][j]] = hint[j];
    State m = reset_state(u.circuit, macro_in, macro_hint);
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < L; ++j)
        CHECK(m[u.map.latch_copy[i][j]] == s[i][j]);

    for (unsigned T = 1; T <= k; ++T) {
      std::vector<uint8_t> state(n * I);
      for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < I; ++j)
          state[i * I + j] = micro_in[n - 1 + (T - 1) * n + i][j];
      state.insert(state.end(), m.begin(), m.end());
      m = eval(u.circuit, state).next;
      for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < L; ++j)
          CHECK(m[u.map.latch_copy[i][j]] == s[T * n + i][j]);
    }
  }
}

TEST_CASE("unfolded property is the disjunction over phases") {
  std::mt19937 rng(55);
  for (int iter = 0; iter < 100; ++iter) {
    unsigned I = rng() % 3, L = 1 + rng() % 3, G = 1 + rng() % 6;
    unsigned n = 2 + rng() % 3;
    Circuit c = random_circuit_ir(rng, I, L, G);
    Unfolded u = unfold(c, n);
    std::vector<uint8_t> state(u.circuit.num_state_vars());
    for (auto &v : state) v = rng() & 1;
    uint8_t got = eval(u.circuit, state).bad;
    uint8_t expect = 0;
    for (unsigned i = 0; i < n; ++i) {
      std::vector<uint8_t> phase(c.num_state_vars());
      for (unsigned j = 0; j < I; ++j)
        phase[j] = state[u.map.input_copy[i][j]];
      for (unsigned j = 0; j < L; ++j)
        phase[c.latch_var(j) - 1] =
            state[n * I + u.map.latch_copy[i][j]];
      expect |= eval(c, phase).bad;
    }
    CHECK(got == expect);
  }
}

TEST_CASE("factoring with all-free signals is the identity") {
  std::mt19937 rng(66);
  Circuit c = random_circuit_nf(rng, 1, 3, 5);
  Unfolded u = unfold(c, 2);
  std::vector<PeriodicSignal> sigs(3);
  for (auto &s : sigs) s.phases.assign(2, phase_self());
  CHECK(dump(factor(u.circuit, u.map, sigs)) == dump(u.circuit));
}

TEST_CASE("factoring the toggle pair pins its periodic latches") {
  Circuit c = toggle_circuit();
  Unfolded u = unfold(c, 2);
  std::vector<PeriodicSignal> sigs(2);
  sigs[0].phases = {phase_self(), phase_const(false)};   // t
  sigs[1].phases = {phase_const(false), phase_const(true)};  // c
  Circuit f = factor(u.circuit, u.map, sigs);
  const Latch &t1 = f.latches[u.map.latch_copy[1][0]];
  CHECK(t1.reset == lit_false);
  CHECK(t1.next == lit_false);
  const Latch &c0 = f.latches[u.map.latch_copy[0][1]];
  CHECK(c0.reset == lit_false);
  CHECK(c0.next == lit_false);
  const Latch &c1 = f.latches[u.map.latch_copy[1][1]];
  CHECK(c1.reset == lit_true);
  CHECK(c1.next == lit_true);
  // t^0 untouched
  CHECK(f.latches[u.map.latch_copy[0][0]].next ==
        u.circuit.latches[u.map.latch_copy[0][0]].next);

  // constants propagate away the whole property
  Circuit rw = rewrite(f);
  CHECK(rw.bad == lit_false);
  Circuit rd = reduce(rw);
  CHECK(rd.num_latches() == 0);
  CHECK(rd.num_inputs == 0);
  CHECK(rd.bad == lit_false);

  // the factored and unfolded circuits agree on safety here
  CHECK(oracle_safe(u.circuit));
  CHECK(oracle_safe(f));
}

TEST_CASE("antivalent factoring negates the representative's functions") {
  CircuitBuilder b;
  Lit i0 = b.add_input();
  Lit x = b.add_latch("x");
  Lit y = b.add_latch("y");
  b.set_reset(x, lit_false);
  b.set_next(x, i0);
  b.set_reset(y, lit_true);
  b.set_next(y, negate(i0));
  b.set_bad(b.make_and(x, y));
  Circuit c = b.finish();
  Unfolded u = unfold(c, 1);
  std::vector<PeriodicSignal> sigs(2);
  sigs[0].phases = {phase_self()};
  sigs[1].phases = {phase_ref(make_lit(0, true))};  // y == not x
  Circuit f = factor(u.circuit, u.map, sigs);
  CHECK(f.latches[1].reset == negate(f.latches[0].reset));
  CHECK(f.latches[1].next == negate(f.latches[0].next));
  CHECK(f.latches[1].next == negate(c.latches[0].next));
}

TEST_CASE("factoring rejects unknown latch references") {
  Circuit c = toggle_circuit();
  Unfolded u = unfold(c, 2);
  std::vector<PeriodicSignal> sigs(2);
  sigs[0].phases = {phase_self(), phase_self()};
  sigs[1].phases = {phase_ref(make_lit(7)), phase_self()};
  CHECK_THROWS_AS(factor(u.circuit, u.map, sigs), Error);
}

TEST_CASE("rewrite propagates constant latches to fixpoint") {
  CircuitBuilder b;
  Lit i0 = b.add_input();
  Lit a = b.add_latch("a");
  Lit ch = b.add_latch("chain");
  Lit keep = b.add_latch("keep");
  b.set_reset(a, lit_false);
  b.set_next(a, lit_false);  // constant latch
  b.set_reset(ch, lit_false);
  b.set_next(ch, a);  // becomes constant only after a is propagated
  b.set_reset(keep, lit_false);
  b.set_next(keep, i0);
  b.set_bad(b.make_or(ch, b.make_and(keep, a)));
  Circuit c = b.finish();
  Circuit r = rewrite(c);
  REQUIRE(r.num_latches() == 3);  // definitions are kept; reduce drops them
  CHECK(r.bad == lit_false);      // needs two propagation rounds
  CHECK(r.latches[1].next == lit_false);
  Circuit rd = reduce(r);
  CHECK(rd.num_latches() == 0);
  CHECK(rd.num_inputs == 0);
}

TEST_CASE("rewrite is idempotent and preserves safety") {
  std::mt19937 rng(77);
  for (int iter = 0; iter < 100; ++iter) {
    Circuit c = random_circuit_nf(rng, rng() % 3, 1 + rng() % 4, 1 + rng() % 8);
    Circuit r = rewrite(c);
    CHECK(dump(rewrite(r)) == dump(r));
    CHECK(oracle_safe(c) == oracle_safe(r));
  }
}

TEST_CASE("reduce keeps exactly the cone of influence") {
  CircuitBuilder b;
  Lit i0 = b.add_input();
  Lit i1 = b.add_input();
  Lit a = b.add_latch();
  Lit junk = b.add_latch();
  b.set_reset(a, lit_false);
  b.set_next(a, i1);
  b.set_reset(junk, i0);
  b.set_next(junk, b.make_and(junk, i0));
  b.set_bad(a);
  Circuit c = b.finish();
  Circuit r = reduce(c);
  REQUIRE(r.num_inputs == 1);
  REQUIRE(r.num_latches() == 1);
  // positional identities are frozen into names
  CHECK(r.input_names[0] == "i1");
  CHECK(r.latch_names[0] == "l0");
  CHECK(dump(reduce(r)) == dump(r));
}

TEST_CASE("reduce drops everything when the property is trivial") {
  CircuitBuilder b;
  Lit x = b.add_latch();
  b.set_reset(x, lit_false);
  b.set_next(x, x);
  b.set_bad(lit_false);
  Circuit r = reduce(b.finish());
  CHECK(r.num_latches() == 0);
  CHECK(r.num_inputs == 0);
}

TEST_CASE("reduce preserves the property under arbitrary junk values") {
  std::mt19937 rng(88);
  for (int iter = 0; iter < 100; ++iter) {
    Circuit c = random_circuit_nf(rng, rng() % 3, 1 + rng() % 4, 1 + rng() % 8);
    Circuit r = reduce(c);
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<uint8_t> full(c.num_state_vars());
      for (auto &v : full) v = rng() & 1;
      std::vector<uint8_t> red(r.num_state_vars());
      for (unsigned j = 0; j < r.num_inputs; ++j) {
        auto oi = c.find_input(r.effective_input_name(j));
        REQUIRE(oi);
        red[j] = full[*oi];
      }
      for (unsigned j = 0; j < r.num_latches(); ++j) {
        auto ol = c.find_latch(r.effective_latch_name(j));
        REQUIRE(ol);
        red[r.latch_var(j) - 1] = full[c.latch_var(*ol) - 1];
      }
      CHECK(eval(r, red).bad == eval(c, full).bad);
    }
    CHECK(oracle_safe(c) == oracle_safe(r));
  }
}

TEST_CASE("pipeline preserves safety for every verified candidate") {
  std::mt19937 rng(99);
  int checked = 0, nontrivial = 0;
  for (int iter = 0; iter < 60; ++iter) {
    unsigned I = rng() % 2, L = 1 + rng() % 3, G = 1 + rng() % 7;
    Circuit c = random_circuit_nf(rng, I, L, G);
    std::vector<CubeLasso> lassos = find_lassos(c, 200);
    REQUIRE(!lassos.empty());
    for (const CubeLasso &l : lassos) REQUIRE(verify_lasso(c, l).ok);
    std::vector<Candidate> cands = make_candidates(c, lassos, 4, 4);
    bool orig_safe = oracle_safe(c);
    for (const Candidate &cand : cands) {
      if (!cand.usable) continue;
      Stages st = run_pipeline(c, cand.d, cand.n, cand.signals);
      if (st.reduced.num_state_vars() > 14) continue;
      // forwarding discards the first d steps; they are accounted for
      // separately, exactly as the model checker does
      bool pre_safe = prefix_safe(c, cand.d) && oracle_safe(st.reduced);
      CHECK(pre_safe == orig_safe);
      ++checked;
      if (cand.n > 1 || cand.d > 0) ++nontrivial;
    }
  }
  CHECK(checked > 50);
  CHECK(nontrivial > 0);  // the corpus exercises real candidates
}
