#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <random>
#include <set>

#include "mc2/engine.hpp"
#include "mc2/satkit.hpp"
#include "mc2/witness.hpp"

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

std::vector<unsigned> uninit_indices(const Circuit &c) {
  std::vector<unsigned> u;
  for (unsigned i = 0; i < c.num_latches(); ++i)
    if (c.latch_uninitialized(i)) u.push_back(i);
  return u;
}

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

// --- single-step SAT checks over a witness circuit -----------------

struct Frame {
  std::vector<Lit> inputs;
  std::vector<Lit> latches;
};

Frame free_frame(const Circuit &c, CircuitBuilder &b, const char *tag) {
  Frame f;
  for (unsigned i = 0; i < c.num_inputs; ++i)
    f.inputs.push_back(b.add_input(c.effective_input_name(i) + tag));
  for (unsigned i = 0; i < c.num_latches(); ++i)
    f.latches.push_back(b.add_input(c.effective_latch_name(i) + tag));
  return f;
}

Instantiator bind_frame(const Circuit &c, CircuitBuilder &b, const Frame &f) {
  Instantiator inst(c, b);
  for (unsigned i = 0; i < c.num_inputs; ++i)
    inst.bind(c.input_var(i), f.inputs[i]);
  for (unsigned i = 0; i < c.num_latches(); ++i)
    inst.bind(c.latch_var(i), f.latches[i]);
  return inst;
}

bool refuted(CircuitBuilder &b, Lit query) {
  b.set_bad(query);
  Circuit q = b.finish();
  TseitinResult ts = tseitin(q, std::array<Lit, 1>{q.bad});
  return solve_auto(ts.cnf).unsat();
}

// every reset state satisfies Q (= the negated bad literal)
bool base_ok(const Circuit &w) {
  CircuitBuilder b;
  Frame f = free_frame(w, b, "");
  Instantiator inst = bind_frame(w, b, f);
  Lit rp = lit_true;
  for (unsigned i = 0; i < w.num_latches(); ++i)
    if (!w.latch_uninitialized(i))
      rp = b.make_and(rp,
                      b.make_equiv(f.latches[i], inst.walk(w.latches[i].reset)));
  Lit q = b.make_and(rp, inst.walk(w.bad));
  return refuted(b, q);
}

// Q is preserved by one transition, for every next-step input valuation
bool step_ok(const Circuit &w) {
  CircuitBuilder b;
  Frame f0 = free_frame(w, b, "@0");
  std::vector<Lit> in1;
  for (unsigned i = 0; i < w.num_inputs; ++i)
    in1.push_back(b.add_input(w.effective_input_name(i) + "@1"));
  Instantiator i0 = bind_frame(w, b, f0);
  Instantiator i1(w, b);
  for (unsigned i = 0; i < w.num_inputs; ++i) i1.bind(w.input_var(i), in1[i]);
  for (unsigned i = 0; i < w.num_latches(); ++i)
    i1.bind(w.latch_var(i), i0.walk(w.latches[i].next));
  Lit q = b.make_and(negate(i0.walk(w.bad)), i1.walk(w.bad));
  return refuted(b, q);
}

// Q implies the declared target property
bool prop_ok(const Circuit &w) {
  std::optional<Lit> p = declared_property(w);
  REQUIRE(p.has_value());
  CircuitBuilder b;
  Frame f = free_frame(w, b, "");
  Instantiator inst = bind_frame(w, b, f);
  Lit q = b.make_and(negate(inst.walk(w.bad)), negate(inst.walk(*p)));
  return refuted(b, q);
}

// Common latches (matched by effective name) must have identical reset
// and transition behavior, and the declared property must equal the
// model's property; checked by random joint evaluation. Every model
// input and latch must be present in the witness.
void check_common(const Circuit &model, const Circuit &w, std::mt19937 &rng) {
  std::vector<unsigned> in_map(model.num_inputs), lat_map(model.num_latches());
  for (unsigned i = 0; i < model.num_inputs; ++i) {
    auto idx = w.find_input(model.effective_input_name(i));
    REQUIRE(idx.has_value());
    in_map[i] = *idx;
  }
  for (unsigned i = 0; i < model.num_latches(); ++i) {
    auto idx = w.find_latch(model.effective_latch_name(i));
    REQUIRE(idx.has_value());
    lat_map[i] = *idx;
  }
  std::optional<Lit> p = declared_property(w);
  REQUIRE(p.has_value());
  for (int round = 0; round < 64; ++round) {
    State ws(w.num_state_vars());
    for (auto &v : ws) v = rng() & 1;
    State ms(model.num_state_vars());
    for (unsigned i = 0; i < model.num_inputs; ++i) ms[i] = ws[in_map[i]];
    for (unsigned i = 0; i < model.num_latches(); ++i)
      ms[model.num_inputs + i] = ws[w.num_inputs + lat_map[i]];
    EvalResult wr = eval(w, ws);
    EvalResult mr = eval(model, ms);
    for (unsigned i = 0; i < model.num_latches(); ++i) {
      CHECK(wr.next[lat_map[i]] == mr.next[i]);
      CHECK(wr.lit(w.latches[lat_map[i]].reset) ==
            mr.lit(model.latches[i].reset));
    }
    CHECK(wr.lit(*p) == (mr.bad ? 0 : 1));
  }
}

// Q must hold on every reachable state of the witness (it is an
// inductive invariant); spot-checked by random walks from random
// uninitialized-latch seeds.
void check_invariant_runs(const Circuit &w, std::mt19937 &rng) {
  for (int run = 0; run < 40; ++run) {
    std::vector<uint8_t> inputs(w.num_inputs);
    for (auto &v : inputs) v = rng() & 1;
    State hint(w.num_latches());
    for (auto &v : hint) v = rng() & 1;
    State lat = reset_state(w, inputs, hint);
    for (int t = 0; t < 24; ++t) {
      State s = inputs;
      s.insert(s.end(), lat.begin(), lat.end());
      EvalResult r = eval(w, s);
      CHECK(r.bad == 0);
      lat = r.next;
      for (auto &v : inputs) v = rng() & 1;
    }
  }
}

// the rotated toggle lasso compatible with (d = 0, n = 2)
CubeLasso toggle_lasso(const Circuit &toggle) {
  for (const CubeLasso &l : find_lassos(toggle))
    if (l.delta == 2 && l.omega == 1) return l;
  REQUIRE(false);
  return {};
}

}  // namespace

TEST_CASE("loop invariant structure on the toggle lasso") {
  Circuit c = toggle_circuit();
  CubeLasso l = toggle_lasso(c);
  LoopInvariant phi = build_loop_invariant(l, 0, 2);
  CHECK(phi.m == 2);
  CHECK(phi.disjuncts.size() == 2);
  for (auto &row : phi.disjuncts) CHECK(row.size() == 2);
  CHECK(phi.disjuncts[0][0] == l.cubes[0]);
  CHECK(phi.disjuncts[0][1] == l.cubes[1]);
  CHECK(phi.disjuncts[1][0] == l.cubes[2]);
  CHECK(phi.disjuncts[1][1] == l.cubes[3]);

  // (d, n) pairs that do not tile the lasso are rejected
  CHECK_THROWS_AS(build_loop_invariant(l, 1, 2), Error);
  CHECK_THROWS_AS(build_loop_invariant(l, 3, 1), Error);
  CHECK_THROWS_AS(build_loop_invariant(l, 0, 3), Error);
}

TEST_CASE("loop invariant verification on the toggle unfolding") {
  Circuit c = toggle_circuit();
  CubeLasso l = toggle_lasso(c);
  Unfolded u = unfold(c, 2);
  std::vector<PeriodicSignal> sig = extract_signals(c, l, 0, 2);
  LoopInvariant phi = build_loop_invariant(l, 0, 2);
  CHECK(verify_loop_invariant(c, u, phi, sig));

  // a tampered cube literal breaks inductiveness
  LoopInvariant bad = phi;
  REQUIRE(!bad.disjuncts[0][1].lits.empty());
  bad.disjuncts[0][1].lits[0] = negate(bad.disjuncts[0][1].lits[0]);
  CHECK(!verify_loop_invariant(c, u, bad, sig));

  // phi = true cannot justify any non-self phase claim
  LoopInvariant top{0, 2, 1, {{Cube{}, Cube{}}}};
  CHECK(!verify_loop_invariant(c, u, top, sig));

  // phi = false fails the reset check
  Cube contradiction{{c.latch_lit(0), negate(c.latch_lit(0))}};
  LoopInvariant bot{0, 2, 1, {{contradiction, Cube{}}}};
  CHECK(!verify_loop_invariant(c, u, bot, {}));
}

TEST_CASE("composite witness certifies the unfolded toggle") {
  std::mt19937 rng(7);
  Circuit c = toggle_circuit();
  CubeLasso l = toggle_lasso(c);
  std::vector<PeriodicSignal> sig = extract_signals(c, l, 0, 2);
  Stages st = run_pipeline(c, 0, 2, sig);
  CHECK(st.reduced.num_latches() == 0);
  Verdict v = ic3(st.reduced);
  REQUIRE(v.status == Status::Safe);
  REQUIRE(v.has_invariant);
  Circuit w_red = lift_witness(terminal_witness(st.reduced, v));
  LoopInvariant phi = build_loop_invariant(l, 0, 2);
  Circuit w = composite_witness(c, st.unfolded, w_red, phi);

  CHECK(base_ok(w));
  CHECK(step_ok(w));
  CHECK(prop_ok(w));
  check_common(st.unfolded.circuit, w, rng);
  check_invariant_runs(w, rng);
}

TEST_CASE("folding the toggle witness") {
  std::mt19937 rng(11);
  Circuit c = toggle_circuit();
  CubeLasso l = toggle_lasso(c);
  std::vector<PeriodicSignal> sig = extract_signals(c, l, 0, 2);
  Stages st = run_pipeline(c, 0, 2, sig);
  Verdict v = ic3(st.reduced);
  REQUIRE(v.status == Status::Safe);
  Circuit w_red = terminal_witness(st.reduced, v);
  LoopInvariant phi = build_loop_invariant(l, 0, 2);
  Circuit w = composite_witness(c, st.unfolded, w_red, phi);
  Circuit wf = fold_witness(c, st.unfolded, w, 2);

  // no inputs; 3 state copies of 2 latches, 3 init bits, 1 phase bit
  CHECK(wf.num_inputs == 0);
  CHECK(wf.num_latches() == 10);
  CHECK(wf.find_latch("t").has_value());
  CHECK(wf.find_latch("c").has_value());
  CHECK(wf.find_latch("fold_b0").has_value());
  CHECK(wf.find_latch("fold_b2").has_value());
  CHECK(wf.find_latch("fold_e0").has_value());
  CHECK(!wf.find_latch("fold_e1").has_value());

  CHECK(base_ok(wf));
  CHECK(step_ok(wf));
  CHECK(prop_ok(wf));
  check_common(c, wf, rng);
  check_invariant_runs(wf, rng);

  // n = 1 folding is the identity
  Circuit same = fold_witness(c, st.unfolded, w, 1);
  CHECK(write_aiger(same) == write_aiger(w));
}

TEST_CASE("k-induction withholds the invariant when the property reads inputs") {
  CircuitBuilder b;
  Lit i = b.add_input("i");
  Lit l = b.add_latch("l");
  b.set_reset(l, lit_false);
  b.set_next(l, lit_false);
  b.set_bad(b.make_and(i, l));
  Circuit c = b.finish();

  Verdict v = kinduction(c);
  CHECK(v.status == Status::Safe);
  CHECK(!v.has_invariant);
  // the portfolio falls through to ic3 for a certified invariant
  Verdict p = run_engine(c, "portfolio");
  CHECK(p.status == Status::Safe);
  CHECK(p.has_invariant);
  Circuit w = terminal_witness(c, p);
  CHECK(base_ok(w));
  CHECK(step_ok(w));
  CHECK(prop_ok(w));
}

TEST_CASE("random pipeline certificates check out end to end") {
  std::mt19937 rng(2024);
  unsigned certified = 0, nontrivial = 0;
  for (unsigned seed = 0; seed < 120; ++seed) {
    // a free-running toggle gives most circuits a periodic backbone
    Circuit c = random_circuit_nf(rng, 1 + seed % 2, 3 + seed % 2, 8);
    {
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
      if (seed % 3 != 2) {
        g = b.add_latch("gated");
        b.set_reset(g, lit_false);
      }
      for (unsigned i = 0; i < c.num_latches(); ++i)
        lats.push_back(b.add_latch());
      Instantiator inst(c, b);
      for (unsigned i = 0; i < c.num_inputs; ++i)
        inst.bind(c.input_var(i), ins[i]);
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
      if (seed % 3 != 2) {
        // a clk-gated latch is low whenever clk is high, so this
        // property is safe but only phase abstraction makes it trivial
        b.set_next(g, b.make_and(inst.walk(c.bad), clk));
        b.set_bad(b.make_and(g, clk));
      } else {
        b.set_bad(inst.walk(c.bad));
      }
      c = b.finish();
    }
    if (!oracle_safe(c)) continue;
    std::vector<CubeLasso> lassos = find_lassos(c);
    if (lassos.empty()) continue;
    std::vector<Candidate> cands = make_candidates(c, lassos, 4, 4);
    const Candidate *best = nullptr;
    for (const Candidate &cand : cands) {
      if (!cand.usable || cand.d != 0) continue;
      if (!best || std::tuple(cand.score, cand.n) <
                       std::tuple(best->score, best->n))
        best = &cand;
    }
    if (!best) continue;

    Stages st = run_pipeline(c, 0, best->n, best->signals);
    Verdict v = run_engine(st.reduced, "portfolio");
    if (v.status != Status::Safe || !v.has_invariant) continue;

    LoopInvariant phi = build_loop_invariant(lassos[best->lasso], 0, best->n);
    REQUIRE(verify_loop_invariant(c, st.unfolded, phi, best->signals));
    Circuit w_red = lift_witness(terminal_witness(st.reduced, v));
    Circuit comp = composite_witness(c, st.unfolded, w_red, phi);
    CHECK(base_ok(comp));
    CHECK(step_ok(comp));
    CHECK(prop_ok(comp));
    Circuit wf = fold_witness(c, st.unfolded, comp, best->n);
    CHECK(base_ok(wf));
    CHECK(step_ok(wf));
    CHECK(prop_ok(wf));
    check_common(c, wf, rng);
    check_invariant_runs(wf, rng);
    ++certified;
    if (best->n > 1) ++nontrivial;
  }
  CHECK(certified > 20);
  CHECK(nontrivial > 3);
}
