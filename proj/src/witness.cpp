#include "mc2/witness.hpp"

#include <array>

#include "mc2/satkit.hpp"

namespace mc2 {

namespace {

// one fresh input per source input and one per source latch, the usual
// combinational view for single-step SAT queries over a builder
struct FreeVars {
  std::vector<Lit> inputs;
  std::vector<Lit> latches;
};

FreeVars declare_free(const Circuit &c, CircuitBuilder &b) {
  FreeVars f;
  for (unsigned i = 0; i < c.num_inputs; ++i)
    f.inputs.push_back(b.add_input(c.effective_input_name(i)));
  for (unsigned i = 0; i < c.num_latches(); ++i)
    f.latches.push_back(b.add_input(c.effective_latch_name(i)));
  return f;
}

Instantiator bound_to(const Circuit &c, CircuitBuilder &b, const FreeVars &f) {
  Instantiator inst(c, b);
  for (unsigned i = 0; i < c.num_inputs; ++i)
    inst.bind(c.input_var(i), f.inputs[i]);
  for (unsigned i = 0; i < c.num_latches(); ++i)
    inst.bind(c.latch_var(i), f.latches[i]);
  return inst;
}

bool refuted(CircuitBuilder &&b, Lit query) {
  b.set_bad(query);
  Circuit q = b.finish();
  TseitinResult ts = tseitin(q, std::array<Lit, 1>{q.bad});
  return solve_auto(ts.cnf).unsat();
}

}  // namespace

LoopInvariant build_loop_invariant(const CubeLasso &lasso, unsigned d,
                                   unsigned n) {
  if (n == 0) throw Error("loop invariant: n must be positive");
  unsigned total = lasso.delta + lasso.omega + 1;
  if (lasso.cubes.size() != total)
    throw Error("loop invariant: malformed lasso");
  if (d > lasso.delta || (total - d) % n != 0)
    throw Error("loop invariant: (d, n) is not candidate-valid");
  LoopInvariant phi;
  phi.d = d;
  phi.n = n;
  phi.m = (total - d) / n;
  phi.disjuncts.resize(phi.m);
  for (unsigned i = 0; i < phi.m; ++i)
    for (unsigned j = 0; j < n; ++j)
      phi.disjuncts[i].push_back(lasso.cubes[i * n + j + d]);
  return phi;
}

Lit emit_loop_invariant(const LoopInvariant &phi, const Circuit &src,
                        CircuitBuilder &b,
                        const std::function<Lit(unsigned, unsigned)> &latch_at) {
  std::vector<Lit> rows;
  for (const std::vector<Cube> &row : phi.disjuncts) {
    Lit conj = lit_true;
    for (unsigned j = 0; j < phi.n; ++j)
      for (Lit l : row[j].lits) {
        unsigned idx = src.latch_index(var_of(l));
        conj = b.make_and(conj, apply_sign(latch_at(j, idx), sign_of(l)));
      }
    rows.push_back(conj);
  }
  return b.make_disj(rows);
}

bool verify_loop_invariant(const Circuit &src, const Unfolded &u,
                           const LoopInvariant &phi,
                           std::span<const PeriodicSignal> signals) {
  const Circuit &uc = u.circuit;
  auto copy_lit = [&](const FreeVars &f) {
    return [&](unsigned copy, unsigned idx) {
      return f.latches[u.map.latch_copy[copy][idx]];
    };
  };

  // (i) reset => phi
  {
    CircuitBuilder b;
    FreeVars f = declare_free(uc, b);
    Instantiator inst = bound_to(uc, b, f);
    Lit rp = lit_true;
    for (unsigned i = 0; i < uc.num_latches(); ++i)
      if (!uc.latch_uninitialized(i))
        rp = b.make_and(
            rp, b.make_equiv(f.latches[i], inst.walk(uc.latches[i].reset)));
    Lit p = emit_loop_invariant(phi, src, b, copy_lit(f));
    if (!refuted(std::move(b), b.make_and(rp, negate(p)))) return false;
  }

  // (ii) phi & transition => phi'
  {
    CircuitBuilder b;
    FreeVars f = declare_free(uc, b);
    Instantiator inst = bound_to(uc, b, f);
    FreeVars nxt;
    for (unsigned i = 0; i < uc.num_latches(); ++i)
      nxt.latches.push_back(inst.walk(uc.latches[i].next));
    Lit p0 = emit_loop_invariant(phi, src, b, copy_lit(f));
    Lit p1 = emit_loop_invariant(phi, src, b, copy_lit(nxt));
    if (!refuted(std::move(b), b.make_and(p0, negate(p1)))) return false;
  }

  // (iii) phi => every non-self signal equality
  if (!signals.empty()) {
    if (signals.size() != src.num_latches())
      throw Error("loop invariant: one signal per source latch expected");
    CircuitBuilder b;
    FreeVars f = declare_free(uc, b);
    auto at = copy_lit(f);
    Lit all = lit_true;
    for (unsigned j = 0; j < signals.size(); ++j) {
      if (signals[j].phases.size() != phi.n)
        throw Error("loop invariant: signal phase count mismatch");
      for (unsigned i = 0; i < phi.n; ++i) {
        const PhaseEntry &e = signals[j].phases[i];
        Lit t = at(i, j);
        switch (e.kind) {
          case PhaseKind::SelfRef:
            break;
          case PhaseKind::Const0:
            all = b.make_and(all, negate(t));
            break;
          case PhaseKind::Const1:
            all = b.make_and(all, t);
            break;
          case PhaseKind::LatchRef:
            all = b.make_and(
                all, b.make_equiv(
                         t, apply_sign(at(i, var_of(e.ref)), sign_of(e.ref))));
            break;
        }
      }
    }
    Lit p = emit_loop_invariant(phi, src, b, at);
    if (!refuted(std::move(b), b.make_and(p, negate(all)))) return false;
  }
  return true;
}

Circuit composite_witness(const Circuit &src, const Unfolded &u,
                          const Circuit &w_factor, const LoopInvariant &phi) {
  const Circuit &uc = u.circuit;
  uc.validate();
  w_factor.validate();

  CircuitBuilder b;
  std::vector<Lit> ins(uc.num_inputs), lats(uc.num_latches());
  for (unsigned i = 0; i < uc.num_inputs; ++i)
    ins[i] = b.add_input(uc.effective_input_name(i));
  for (unsigned i = 0; i < uc.num_latches(); ++i)
    lats[i] = b.add_latch(uc.effective_latch_name(i));

  // witness-only variables are carried over; shared ones are identified
  // by name
  std::vector<Lit> w_in(w_factor.num_inputs), w_lat(w_factor.num_latches());
  for (unsigned i = 0; i < w_factor.num_inputs; ++i) {
    std::string name = w_factor.effective_input_name(i);
    if (auto idx = uc.find_input(name))
      w_in[i] = ins[*idx];
    else
      w_in[i] = b.add_input(name);
  }
  std::vector<unsigned> carried;
  for (unsigned i = 0; i < w_factor.num_latches(); ++i) {
    std::string name = w_factor.effective_latch_name(i);
    if (auto idx = uc.find_latch(name)) {
      w_lat[i] = lats[*idx];
    } else {
      if (uc.find_input(name)) name = "w_" + name;
      w_lat[i] = b.add_latch(name);
      carried.push_back(i);
    }
  }

  Instantiator id(uc, b);
  for (unsigned i = 0; i < uc.num_inputs; ++i) id.bind(uc.input_var(i), ins[i]);
  for (unsigned i = 0; i < uc.num_latches(); ++i)
    id.bind(uc.latch_var(i), lats[i]);
  for (unsigned i = 0; i < uc.num_latches(); ++i) {
    b.set_next(lats[i], id.walk(uc.latches[i].next));
    b.set_reset(lats[i], uc.latch_uninitialized(i)
                             ? lats[i]
                             : id.walk(uc.latches[i].reset));
  }
  Lit p_unfolded = negate(id.walk(uc.bad));

  Instantiator wi(w_factor, b);
  for (unsigned i = 0; i < w_factor.num_inputs; ++i)
    wi.bind(w_factor.input_var(i), w_in[i]);
  for (unsigned i = 0; i < w_factor.num_latches(); ++i)
    wi.bind(w_factor.latch_var(i), w_lat[i]);
  for (unsigned i : carried) {
    b.set_next(w_lat[i], wi.walk(w_factor.latches[i].next));
    b.set_reset(w_lat[i], w_factor.latch_uninitialized(i)
                              ? w_lat[i]
                              : wi.walk(w_factor.latches[i].reset));
  }
  Lit q_factor = negate(wi.walk(w_factor.bad));

  Lit phi_lit = emit_loop_invariant(phi, src, b, [&](unsigned c, unsigned j) {
    return lats[u.map.latch_copy[c][j]];
  });
  b.set_bad(negate(b.make_and(phi_lit, q_factor)));
  Circuit out = b.finish();
  set_declared_property(out, p_unfolded);
  return out;
}

Circuit fold_witness(const Circuit &c, const Unfolded &u,
                     const Circuit &w_unfolded, unsigned n) {
  if (n <= 1) return w_unfolded;
  c.validate();
  w_unfolded.validate();
  const Circuit &uc = u.circuit;
  const Circuit &w = w_unfolded;
  const unsigned I = c.num_inputs;
  const unsigned L = c.num_latches();
  const unsigned m = 2 * n - 2;

  // classify witness latches: a copy of an original latch, or carried
  std::vector<int> w_copy(w.num_latches(), -1), w_idx(w.num_latches(), -1);
  std::vector<unsigned> nlats;
  for (unsigned k = 0; k < w.num_latches(); ++k) {
    if (auto idx = uc.find_latch(w.effective_latch_name(k))) {
      w_copy[k] = int(*idx / L);
      w_idx[k] = int(*idx % L);
    } else {
      nlats.push_back(k);
    }
  }

  CircuitBuilder b;
  // inputs: the live step's inputs (common with c) plus one free copy
  // of the witness inputs for re-checking its invariant
  std::vector<Lit> i0(I);
  for (unsigned j = 0; j < I; ++j)
    i0[j] = b.add_input(c.effective_input_name(j));
  std::vector<Lit> j0(w.num_inputs);
  for (unsigned k = 0; k < w.num_inputs; ++k)
    j0[k] = b.add_input("fold_j0_" + w.effective_input_name(k));

  // latches: input/state history, carried witness latches, an input
  // snapshot, initialization bits and phase-alignment bits
  std::vector<std::vector<Lit>> icp(m + 1), lcp(m + 1);
  icp[0] = i0;
  for (unsigned i = 1; i <= m; ++i)
    for (unsigned j = 0; j < I; ++j)
      icp[i].push_back(b.add_latch("fold_i" + std::to_string(i) + "_" +
                                   c.effective_input_name(j)));
  for (unsigned j = 0; j < L; ++j)
    lcp[0].push_back(b.add_latch(c.effective_latch_name(j)));
  for (unsigned i = 1; i <= m; ++i)
    for (unsigned j = 0; j < L; ++j)
      lcp[i].push_back(b.add_latch("fold_l" + std::to_string(i) + "_" +
                                   c.effective_latch_name(j)));
  std::vector<Lit> nl(w.num_latches(), lit_invalid);
  for (unsigned k : nlats)
    nl[k] = b.add_latch("fold_n_" + w.effective_latch_name(k));
  std::vector<Lit> j1(w.num_inputs);
  for (unsigned k = 0; k < w.num_inputs; ++k)
    j1[k] = b.add_latch("fold_j1_" + w.effective_input_name(k));
  std::vector<Lit> bb(m + 1), ee(n - 1);
  for (unsigned i = 0; i <= m; ++i)
    bb[i] = b.add_latch("fold_b" + std::to_string(i));
  for (unsigned i = 0; i + 1 < n; ++i)
    ee[i] = b.add_latch("fold_e" + std::to_string(i));

  // the live state behaves exactly as in c
  {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), i0[j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), lcp[0][j]);
    for (unsigned j = 0; j < L; ++j) {
      b.set_next(lcp[0][j], inst.walk(c.latches[j].next));
      b.set_reset(lcp[0][j], c.latch_uninitialized(j)
                                 ? lcp[0][j]
                                 : inst.walk(c.latches[j].reset));
    }
  }
  // history shifts one step back each transition and starts arbitrary
  for (unsigned i = 1; i <= m; ++i) {
    for (unsigned j = 0; j < I; ++j) {
      b.set_reset(icp[i][j], icp[i][j]);
      b.set_next(icp[i][j], icp[i - 1][j]);
    }
    for (unsigned j = 0; j < L; ++j) {
      b.set_reset(lcp[i][j], lcp[i][j]);
      b.set_next(lcp[i][j], lcp[i - 1][j]);
    }
  }
  for (unsigned k = 0; k < w.num_inputs; ++k) {
    b.set_reset(j1[k], j1[k]);
    b.set_next(j1[k], j0[k]);
  }
  b.set_reset(bb[0], lit_true);
  b.set_next(bb[0], lit_true);
  for (unsigned i = 1; i <= m; ++i) {
    b.set_reset(bb[i], lit_false);
    b.set_next(bb[i], bb[i - 1]);
  }
  // unary modulo-n frame counter, running once the window is real
  b.set_reset(ee[0], lit_false);
  b.set_next(ee[0], b.make_and(bb[n - 1], negate(ee[n - 2])));
  for (unsigned i = 1; i + 1 < n; ++i) {
    b.set_reset(ee[i], lit_false);
    b.set_next(ee[i], b.make_and(ee[i - 1], negate(ee[n - 2])));
  }

  // carried witness latches: reset as in the witness; step through the
  // witness transition only when the frame counter wraps
  Lit carried_resets = lit_true;
  if (!nlats.empty()) {
    Instantiator wr(w, b);
    for (unsigned k = 0; k < w.num_inputs; ++k) wr.bind(w.input_var(k), j0[k]);
    for (unsigned k = 0; k < w.num_latches(); ++k)
      wr.bind(w.latch_var(k),
              w_copy[k] >= 0 ? lcp[n - 1 - w_copy[k]][w_idx[k]] : nl[k]);
    for (unsigned k : nlats) {
      if (w.latch_uninitialized(k)) {
        b.set_reset(nl[k], nl[k]);
      } else {
        Lit r = wr.walk(w.latches[k].reset);
        b.set_reset(nl[k], r);
        carried_resets = b.make_and(carried_resets, b.make_equiv(nl[k], r));
      }
    }
    Instantiator wg(w, b);
    for (unsigned k = 0; k < w.num_inputs; ++k) wg.bind(w.input_var(k), j1[k]);
    for (unsigned k = 0; k < w.num_latches(); ++k)
      wg.bind(w.latch_var(k),
              w_copy[k] >= 0 ? lcp[m - w_copy[k]][w_idx[k]] : nl[k]);
    for (unsigned k : nlats)
      b.set_next(nl[k],
                 b.make_ite(ee[n - 2], wg.walk(w.latches[k].next), nl[k]));
  }

  std::vector<Lit> qs;
  // the property holds on the live state
  Lit q0;
  {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), i0[j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), lcp[0][j]);
    q0 = negate(inst.walk(c.bad));
    qs.push_back(q0);
  }
  // initialization bits form a monotone prefix starting set
  qs.push_back(bb[0]);
  for (unsigned i = 1; i <= m; ++i)
    qs.push_back(b.make_implies(bb[i], bb[i - 1]));
  // real history entries are consecutive under the transition function
  for (unsigned i = 1; i <= m; ++i) {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), icp[i][j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), lcp[i][j]);
    Lit eq = lit_true;
    for (unsigned j = 0; j < L; ++j)
      eq = b.make_and(
          eq, b.make_equiv(lcp[i - 1][j], inst.walk(c.latches[j].next)));
    qs.push_back(b.make_implies(bb[i], eq));
  }
  // the oldest real history entry is a reset state
  for (unsigned i = 1; i <= m; ++i) {
    Instantiator inst(c, b);
    for (unsigned j = 0; j < I; ++j) inst.bind(c.input_var(j), icp[i - 1][j]);
    for (unsigned j = 0; j < L; ++j) inst.bind(c.latch_var(j), lcp[i - 1][j]);
    Lit rp = lit_true;
    for (unsigned j = 0; j < L; ++j)
      if (!c.latch_uninitialized(j))
        rp = b.make_and(
            rp, b.make_equiv(lcp[i - 1][j], inst.walk(c.latches[j].reset)));
    qs.push_back(b.make_implies(b.make_and(negate(bb[i]), bb[i - 1]),
                                b.make_and(rp, carried_resets)));
  }
  // once the history is fully real, the window of n consecutive states
  // selected by the frame counter satisfies the unfolded certificate
  {
    std::vector<Lit> windows;
    for (unsigned i = 0; i < n; ++i) {
      Lit sel = lit_true;
      for (unsigned j = i; j + 1 < n; ++j)
        sel = b.make_and(sel, negate(ee[j]));
      for (unsigned j = 0; j < i; ++j) sel = b.make_and(sel, ee[j]);
      Instantiator wi(w, b);
      for (unsigned k = 0; k < w.num_inputs; ++k)
        wi.bind(w.input_var(k), j0[k]);
      for (unsigned k = 0; k < w.num_latches(); ++k)
        wi.bind(w.latch_var(k), w_copy[k] >= 0
                                    ? lcp[i + (n - 1 - w_copy[k])][w_idx[k]]
                                    : nl[k]);
      windows.push_back(b.make_and(sel, negate(wi.walk(w.bad))));
    }
    qs.push_back(b.make_implies(bb[m], b.make_disj(windows)));
  }
  // frame-counter consistency with the initialization bits
  for (unsigned i = 1; i + 1 < n; ++i)
    qs.push_back(b.make_implies(ee[i], ee[i - 1]));
  for (unsigned i = 0; i + 1 < n; ++i)
    qs.push_back(b.make_implies(ee[i], bb[n + i]));
  for (unsigned i = 0; i + 2 < n; ++i)
    qs.push_back(
        b.make_implies(b.make_and(negate(bb[m]), bb[n + i]), ee[i]));

  b.set_bad(negate(b.make_conj(qs)));
  Circuit out = b.finish();
  set_declared_property(out, q0);
  return out;
}

}  // namespace mc2
