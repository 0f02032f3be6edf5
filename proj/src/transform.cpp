#include "mc2/transform.hpp"

#include <algorithm>

namespace mc2 {

namespace {

std::string phase_name(const std::string &base, unsigned copy) {
  return base + "__p" + std::to_string(copy);
}

}  // namespace

Circuit forward(const Circuit &c, unsigned d) {
  if (d == 0) return c;
  c.validate();
  StratResult strat = check_stratified(c);
  if (!strat.ok()) throw StructuralError("forward: circuit not stratified");
  unsigned I = c.num_inputs, L = c.num_latches();

  CircuitBuilder b;
  std::vector<Lit> ins(I);
  for (unsigned i = 0; i < I; ++i) ins[i] = b.add_input(c.input_names[i]);
  // reset-only inputs: seeds for uninitialized latches, then one input
  // copy per startup step
  std::vector<Lit> init_in(L, lit_invalid);
  for (unsigned i = 0; i < L; ++i)
    if (c.latch_uninitialized(i))
      init_in[i] = b.add_input("fwd_init_" + c.effective_latch_name(i));
  std::vector<std::vector<Lit>> step_in(d, std::vector<Lit>(I));
  for (unsigned k = 0; k < d; ++k)
    for (unsigned i = 0; i < I; ++i)
      step_in[k][i] = b.add_input("fwd_" + std::to_string(k) + "_" +
                                  c.effective_input_name(i));
  std::vector<Lit> lats(L);
  for (unsigned i = 0; i < L; ++i) lats[i] = b.add_latch(c.latch_names[i]);

  // states reachable in exactly d steps: the original reset trace over
  // the fresh inputs. Step 0 shares the step-0 inputs with the reset
  // expressions themselves.
  std::vector<Lit> rho(L, lit_invalid);
  {
    Instantiator inst(c, b);
    for (unsigned i = 0; i < I; ++i) inst.bind(c.input_var(i), step_in[0][i]);
    for (unsigned i : strat.order) {
      rho[i] = c.latch_uninitialized(i) ? init_in[i]
                                        : inst.walk(c.latches[i].reset);
      inst.bind(c.latch_var(i), rho[i]);
    }
    std::vector<Lit> next(L);
    for (unsigned i = 0; i < L; ++i) next[i] = inst.walk(c.latches[i].next);
    rho = std::move(next);
  }
  for (unsigned k = 1; k < d; ++k) {
    Instantiator inst(c, b);
    for (unsigned i = 0; i < I; ++i) inst.bind(c.input_var(i), step_in[k][i]);
    for (unsigned i = 0; i < L; ++i) inst.bind(c.latch_var(i), rho[i]);
    std::vector<Lit> next(L);
    for (unsigned i = 0; i < L; ++i) next[i] = inst.walk(c.latches[i].next);
    rho = std::move(next);
  }

  // latches, next functions and the property are untouched
  Instantiator id(c, b);
  for (unsigned i = 0; i < I; ++i) id.bind(c.input_var(i), ins[i]);
  for (unsigned i = 0; i < L; ++i) id.bind(c.latch_var(i), lats[i]);
  for (unsigned i = 0; i < L; ++i) {
    b.set_next(lats[i], id.walk(c.latches[i].next));
    b.set_reset(lats[i], rho[i]);
  }
  b.set_bad(id.walk(c.bad));
  return b.finish();
}

Unfolded unfold(const Circuit &c, unsigned n) {
  if (n == 0) throw Error("unfold: n must be positive");
  c.validate();
  unsigned I = c.num_inputs, L = c.num_latches();
  CopyMap map;
  map.n = n;
  map.input_copy.assign(n, std::vector<unsigned>(I));
  map.latch_copy.assign(n, std::vector<unsigned>(L));
  if (n == 1) {
    for (unsigned j = 0; j < I; ++j) map.input_copy[0][j] = j;
    for (unsigned j = 0; j < L; ++j) map.latch_copy[0][j] = j;
    return {c, std::move(map)};
  }

  CircuitBuilder b;
  std::vector<std::vector<Lit>> in_lit(n, std::vector<Lit>(I));
  std::vector<std::vector<Lit>> lat_lit(n, std::vector<Lit>(L));
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < I; ++j) {
      in_lit[i][j] = b.add_input(phase_name(c.effective_input_name(j), i));
      map.input_copy[i][j] = i * I + j;
    }
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < L; ++j) {
      lat_lit[i][j] = b.add_latch(phase_name(c.effective_latch_name(j), i));
      map.latch_copy[i][j] = i * L + j;
    }

  // resets: copy 0 carries the original reset (uninitialized latches
  // stay uninitialized); copy i is one step past copy i-1
  {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), in_lit[0][j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), lat_lit[0][j]);
    for (unsigned j = 0; j < L; ++j)
      b.set_reset(lat_lit[0][j], c.latch_uninitialized(j)
                                     ? lat_lit[0][j]
                                     : inst.walk(c.latches[j].reset));
  }
  for (unsigned i = 1; i < n; ++i) {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), in_lit[i][j]);
    for (unsigned j = 0; j < L; ++j)
      inst.bind(c.latch_var(j), lat_lit[i - 1][j]);
    for (unsigned j = 0; j < L; ++j)
      b.set_reset(lat_lit[i][j], inst.walk(c.latches[j].next));
  }

  // next functions: composed transition nets chained from the last copy
  std::vector<Lit> prev = lat_lit[n - 1];
  for (unsigned i = 0; i < n; ++i) {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), in_lit[i][j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), prev[j]);
    std::vector<Lit> cur(L);
    for (unsigned j = 0; j < L; ++j) cur[j] = inst.walk(c.latches[j].next);
    for (unsigned j = 0; j < L; ++j) b.set_next(lat_lit[i][j], cur[j]);
    prev = std::move(cur);
  }

  // the property holds in every phase
  std::vector<Lit> bads;
  for (unsigned i = 0; i < n; ++i) {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), in_lit[i][j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), lat_lit[i][j]);
    bads.push_back(inst.walk(c.bad));
  }
  b.set_bad(b.make_disj(bads));
  return {b.finish(), std::move(map)};
}

Circuit factor(const Circuit &unfolded, const CopyMap &map,
               std::span<const PeriodicSignal> signals) {
  Circuit out = unfolded;
  if (signals.empty()) return out;
  unsigned n = map.n;
  unsigned L = map.latch_copy.empty() ? 0 : (unsigned)map.latch_copy[0].size();
  if (signals.size() != L)
    throw Error("factor: expected one signal per original latch");
  for (unsigned j = 0; j < L; ++j) {
    if (signals[j].phases.size() != n)
      throw Error("factor: signal phase count differs from unfolding");
    for (unsigned i = 0; i < n; ++i) {
      Latch &l = out.latches[map.latch_copy[i][j]];
      const PhaseEntry &e = signals[j].phases[i];
      switch (e.kind) {
        case PhaseKind::SelfRef:
          break;
        case PhaseKind::Const0:
          l.reset = lit_false;
          l.next = lit_false;
          break;
        case PhaseKind::Const1:
          l.reset = lit_true;
          l.next = lit_true;
          break;
        case PhaseKind::LatchRef: {
          unsigned rep = var_of(e.ref);
          if (rep >= L) throw Error("factor: signal references unknown latch");
          bool neg = sign_of(e.ref);
          const Latch &r = unfolded.latches[map.latch_copy[i][rep]];
          l.reset = apply_sign(r.reset, neg);
          l.next = apply_sign(r.next, neg);
          break;
        }
      }
    }
  }
  out.validate();
  return out;
}

Circuit rewrite(const Circuit &c) {
  Circuit cur = substitute(c, {});
  std::vector<char> done(cur.num_latches(), 0);
  for (;;) {
    std::vector<std::pair<unsigned, Lit>> map;
    for (unsigned i = 0; i < cur.num_latches(); ++i) {
      const Latch &l = cur.latches[i];
      if (!done[i] && is_constant(l.reset) && l.next == l.reset) {
        map.push_back({l.var, l.reset});
        done[i] = 1;
      }
    }
    if (map.empty()) break;
    cur = substitute(cur, map);
  }
  // normalize gate numbering to the plain traversal order so the
  // result is a fixpoint of rewrite itself
  return substitute(cur, {});
}

Circuit reduce(const Circuit &c) {
  c.validate();
  CoiSet keep = coi(c);
  CircuitBuilder b;
  Instantiator inst(c, b);
  // names are frozen to their effective form so identities survive the
  // index shifts
  for (unsigned i = 0; i < c.num_inputs; ++i)
    if (keep.input_in[i])
      inst.bind(c.input_var(i), b.add_input(c.effective_input_name(i)));
  std::vector<unsigned> kept;
  std::vector<Lit> lat;
  for (unsigned i = 0; i < c.num_latches(); ++i)
    if (keep.latch_in[i]) {
      kept.push_back(i);
      lat.push_back(b.add_latch(c.effective_latch_name(i)));
      inst.bind(c.latch_var(i), lat.back());
    }
  for (size_t k = 0; k < kept.size(); ++k) {
    unsigned i = kept[k];
    b.set_next(lat[k], inst.walk(c.latches[i].next));
    b.set_reset(lat[k], c.latch_uninitialized(i)
                            ? lat[k]
                            : inst.walk(c.latches[i].reset));
  }
  b.set_bad(inst.walk(c.bad));
  return b.finish();
}

Stages run_pipeline(const Circuit &c, unsigned d, unsigned n,
                    std::span<const PeriodicSignal> signals) {
  Stages st;
  st.d = d;
  st.n = n;
  st.forwarded = forward(c, d);
  st.unfolded = unfold(st.forwarded, n);
  st.factored = factor(st.unfolded.circuit, st.unfolded.map, signals);
  st.rewritten = rewrite(st.factored);
  st.reduced = reduce(st.rewritten);
  return st;
}

}  // namespace mc2
