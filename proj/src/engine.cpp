#include "mc2/engine.hpp"

#include <algorithm>
#include <cstdlib>

#include "mc2/aiger_io.hpp"
#include "mc2/satkit.hpp"

namespace mc2 {

namespace {

uint8_t model_lit(const SatResult &r, const TseitinResult &ts, Lit l) {
  int dl = ts.lit(l);
  return uint8_t(r.model[std::abs(dl)] ^ uint8_t(dl < 0));
}

std::vector<TraceStep> extract_trace(const Circuit &c, const Unrolling &u,
                                     const TseitinResult &ts,
                                     const SatResult &r, unsigned k) {
  std::vector<TraceStep> trace;
  for (unsigned t = 0; t <= k; ++t) {
    TraceStep step;
    for (unsigned i = 0; i < c.num_inputs; ++i)
      step.inputs.push_back(model_lit(r, ts, u.inputs[t][i]));
    for (unsigned i = 0; i < c.num_latches(); ++i)
      step.latches.push_back(model_lit(r, ts, u.states[t][i]));
    trace.push_back(std::move(step));
  }
  return trace;
}

}  // namespace

Verdict bmc(const Circuit &c, unsigned max_bound, int64_t conflict_budget) {
  c.validate();
  for (unsigned k = 0; k <= max_bound; ++k) {
    Unrolling u = unroll(c, k);
    TseitinResult ts = tseitin(u.comb, {});
    Solver s(ts.cnf);
    s.set_conflict_budget(conflict_budget);
    SatResult r =
        s.solve({ts.lit(u.reset_pred), ts.lit(u.trans), ts.lit(u.bads[k])});
    if (r.status == SatStatus::Unknown) return {};
    if (r.sat()) {
      Verdict v;
      v.status = Status::Unsafe;
      v.depth = k;
      v.trace = extract_trace(c, u, ts, r, k);
      return v;
    }
  }
  return {};
}

Verdict kinduction(const Circuit &c, const EngineOptions &opt) {
  c.validate();
  for (unsigned k = 1; k <= opt.max_k; ++k) {
    {  // base case: bad at time k-1
      Unrolling u = unroll(c, k - 1);
      TseitinResult ts = tseitin(u.comb, {});
      Solver s(ts.cnf);
      s.set_conflict_budget(opt.conflict_budget);
      SatResult r = s.solve(
          {ts.lit(u.reset_pred), ts.lit(u.trans), ts.lit(u.bads[k - 1])});
      if (r.status == SatStatus::Unknown) return {};
      if (r.sat()) {
        Verdict v;
        v.status = Status::Unsafe;
        v.depth = k - 1;
        v.trace = extract_trace(c, u, ts, r, k - 1);
        return v;
      }
    }
    {  // step: k good states never step into a bad one (no reset)
      Unrolling u = unroll(c, k);
      TseitinResult ts = tseitin(u.comb, {});
      Solver s(ts.cnf);
      s.set_conflict_budget(opt.conflict_budget);
      std::vector<int> asms = {ts.lit(u.trans), ts.lit(u.bads[k])};
      for (unsigned t = 0; t < k; ++t) asms.push_back(-ts.lit(u.bads[t]));
      SatResult r = s.solve(asms);
      if (r.status == SatStatus::Unknown) return {};
      if (r.unsat()) {
        Verdict v;
        v.status = Status::Safe;
        v.depth = k;
        // only the 1-inductive case yields a direct invariant (Inv = T,
        // the property alone); larger k fall back to ic3 for
        // certificates. A property that reads inputs does not qualify:
        // downstream witness folding re-evaluates Q on an unchanged
        // state under fresh inputs, which Inv = P alone cannot cover.
        v.has_invariant = k == 1 && input_support(c, c.bad).empty();
        return v;
      }
    }
  }
  return {};
}

namespace {

enum class BlockResult { Blocked, Cex, Unknown };

class Ic3Run {
 public:
  Ic3Run(const Circuit &c, const EngineOptions &opt)
      : c_(c), opt_(opt), v_(comb_view(c)), ts_(tseitin(v_.comb, {})) {}

  Verdict run();

 private:
  int sdim(Lit cube_lit) const {
    unsigned i = c_.latch_index(var_of(cube_lit));
    return ts_.lit(apply_sign(v_.states[i], sign_of(cube_lit)));
  }
  int ndim(Lit cube_lit) const {
    unsigned i = c_.latch_index(var_of(cube_lit));
    return ts_.lit(apply_sign(v_.next[i], sign_of(cube_lit)));
  }

  Solver &new_solver() {
    solvers_.emplace_back(ts_.cnf);
    solvers_.back().set_conflict_budget(opt_.conflict_budget);
    aux_.push_back(ts_.cnf.num_vars);
    return solvers_.back();
  }

  bool intersects_reset(const Cube &q) {
    std::vector<int> asms;
    for (Lit l : q.lits) asms.push_back(sdim(l));
    SatResult r = solvers_[0].solve(asms);
    if (r.status == SatStatus::Unknown) unknown_ = true;
    return r.sat();
  }

  // F_f [& not q] & T & q'  (the blocking clause is activated only for
  // this query; it stays inert afterwards)
  SatResult relative_query(unsigned f, const Cube &q, bool block_q) {
    Solver &s = solvers_[f];
    std::vector<int> asms;
    if (block_q) {
      int act = ++aux_[f];
      s.ensure_var(act);
      std::vector<int> clause = {-act};
      for (Lit l : q.lits) clause.push_back(-sdim(l));
      s.add_clause(clause);
      asms.push_back(act);
    }
    for (Lit l : q.lits) asms.push_back(ndim(l));
    SatResult r = s.solve(asms);
    if (r.status == SatStatus::Unknown) unknown_ = true;
    return r;
  }

  void add_blocked(const Cube &q, unsigned level) {
    cubes_[level].push_back(q);
    std::vector<int> clause;
    for (Lit l : q.lits) clause.push_back(-sdim(l));
    for (unsigned f = 1; f <= level; ++f) solvers_[f].add_clause(clause);
  }

  // drop literals while the cube stays disjoint from the reset states
  // (SAT call against R, required with function resets) and still
  // relatively inductive
  Cube generalize(Cube q, unsigned i) {
    for (size_t idx = 0; idx < q.lits.size() && q.lits.size() > 1;) {
      Cube cand = q;
      cand.lits.erase(cand.lits.begin() + idx);
      if (!intersects_reset(cand) && !unknown_ &&
          relative_query(i - 1, cand, true).unsat()) {
        q = std::move(cand);
      } else {
        ++idx;
      }
      if (unknown_) break;
    }
    return q;
  }

  TernaryVec model_latches(const SatResult &r) const {
    TernaryVec lat(c_.num_latches());
    for (unsigned i = 0; i < c_.num_latches(); ++i)
      lat[i] = ternary_of(model_lit(r, ts_, v_.states[i]));
    return lat;
  }

  std::vector<Ternary> assemble(const SatResult &r,
                                const TernaryVec &lat) const {
    std::vector<Ternary> state(c_.num_state_vars());
    for (unsigned i = 0; i < c_.num_inputs; ++i)
      state[i] = ternary_of(model_lit(r, ts_, v_.inputs[i]));
    for (unsigned i = 0; i < c_.num_latches(); ++i)
      state[c_.num_inputs + i] = lat[i];
    return state;
  }

  // shrink a bad-enabling state via ternary simulation: inputs stay
  // concrete, latches are freed while bad remains definite
  Cube lift_bad(const SatResult &r) const {
    TernaryVec lat = model_latches(r);
    for (unsigned i = 0; i < lat.size(); ++i) {
      Ternary save = lat[i];
      lat[i] = Ternary::X;
      if (ternary_eval(c_, assemble(r, lat)).bad != Ternary::T) lat[i] = save;
    }
    Cube q = cube_of(c_, lat);
    if (q.lits.empty()) q = cube_of(c_, model_latches(r));
    return q;
  }

  // shrink a predecessor while it still steps into the successor cube
  Cube lift_pred(const SatResult &r, const Cube &succ) const {
    TernaryVec lat = model_latches(r);
    auto still_steps = [&] {
      TernaryEval te = ternary_eval(c_, assemble(r, lat));
      for (Lit l : succ.lits) {
        Ternary want = sign_of(l) ? Ternary::F : Ternary::T;
        if (te.next[c_.latch_index(var_of(l))] != want) return false;
      }
      return true;
    };
    for (unsigned i = 0; i < lat.size(); ++i) {
      Ternary save = lat[i];
      lat[i] = Ternary::X;
      if (!still_steps()) lat[i] = save;
    }
    Cube q = cube_of(c_, lat);
    if (q.lits.empty()) q = cube_of(c_, model_latches(r));
    return q;
  }

  BlockResult rec_block(Cube s, unsigned top) {
    std::vector<std::pair<Cube, unsigned>> obs;
    obs.emplace_back(std::move(s), top);
    size_t steps = 0;
    while (!obs.empty()) {
      if (++steps > 200000) {
        unknown_ = true;
        return BlockResult::Unknown;
      }
      auto [q, i] = obs.back();
      if (i == 0 || intersects_reset(q)) return BlockResult::Cex;
      if (unknown_) return BlockResult::Unknown;
      SatResult r = relative_query(i - 1, q, /*block_q=*/true);
      if (unknown_) return BlockResult::Unknown;
      if (r.unsat()) {
        obs.pop_back();
        Cube g = generalize(q, i);
        if (unknown_) return BlockResult::Unknown;
        add_blocked(g, i);
        if (i < top) obs.emplace_back(std::move(q), i + 1);
      } else {
        if (i - 1 == 0) return BlockResult::Cex;
        Cube p = lift_pred(r, q);
        obs.emplace_back(std::move(p), i - 1);
      }
    }
    return BlockResult::Blocked;
  }

  const Circuit &c_;
  EngineOptions opt_;
  CombView v_;
  TseitinResult ts_;
  std::vector<Solver> solvers_;
  std::vector<int> aux_;
  std::vector<std::vector<Cube>> cubes_;
  bool unknown_ = false;
};

Verdict Ic3Run::run() {
  c_.validate();
  if (c_.bad == lit_false) {
    Verdict v;
    v.status = Status::Safe;
    v.has_invariant = true;
    return v;
  }
  new_solver().add_clause({ts_.lit(v_.reset_pred)});  // frame 0 = R
  cubes_.resize(1);
  int bad = ts_.lit(v_.bad);
  {
    SatResult r = solvers_[0].solve({bad});
    if (r.status == SatStatus::Unknown) return {};
    if (r.sat()) return bmc(c_, 2, opt_.conflict_budget);
  }
  for (unsigned top = 1; top <= opt_.max_frames; ++top) {
    new_solver();
    cubes_.resize(top + 1);
    for (;;) {
      SatResult r = solvers_[top].solve({bad});
      if (r.status == SatStatus::Unknown) return {};
      if (r.unsat()) break;
      Cube s = lift_bad(r);
      BlockResult br = rec_block(std::move(s), top);
      if (br == BlockResult::Unknown) return {};
      if (br == BlockResult::Cex) {
        // re-derive a concrete, replayable trace at the discovered depth
        Verdict cex = bmc(c_, top + 2, opt_.conflict_budget);
        return cex.status == Status::Unsafe ? cex : Verdict{};
      }
    }
    // push clauses forward; an emptied level means two equal frames
    for (unsigned i = 1; i < top; ++i) {
      std::vector<Cube> stay;
      for (Cube &q : cubes_[i]) {
        std::vector<int> asms;
        for (Lit l : q.lits) asms.push_back(ndim(l));
        SatResult pr = solvers_[i].solve(asms);
        if (pr.status == SatStatus::Unknown) return {};
        if (pr.unsat()) {
          std::vector<int> clause;
          for (Lit l : q.lits) clause.push_back(-sdim(l));
          solvers_[i + 1].add_clause(clause);
          cubes_[i + 1].push_back(std::move(q));
        } else {
          stay.push_back(std::move(q));
        }
      }
      cubes_[i] = std::move(stay);
      if (cubes_[i].empty()) {
        Verdict v;
        v.status = Status::Safe;
        v.has_invariant = true;
        v.depth = i;
        for (unsigned j = i + 1; j <= top; ++j)
          for (const Cube &q : cubes_[j]) {
            Clause cl;
            for (Lit l : q.lits) cl.push_back(negate(l));
            v.invariant.push_back(std::move(cl));
          }
        return v;
      }
    }
  }
  return {};
}

}  // namespace

Verdict ic3(const Circuit &c, const EngineOptions &opt) {
  return Ic3Run(c, opt).run();
}

Verdict run_engine(const Circuit &c, const std::string &engine,
                   const EngineOptions &opt) {
  if (engine == "bmc") return bmc(c, opt.max_bound, opt.conflict_budget);
  if (engine == "kind") return kinduction(c, opt);
  if (engine == "ic3") return ic3(c, opt);
  if (engine == "portfolio") {
    Verdict v = bmc(c, opt.max_bound, opt.conflict_budget);
    if (v.status == Status::Unsafe) return v;
    v = kinduction(c, opt);
    if (v.status == Status::Unsafe) return v;
    if (v.status == Status::Safe) {
      if (v.has_invariant) return v;
      Verdict w = ic3(c, opt);
      return w.status == Status::Safe ? w : v;
    }
    return ic3(c, opt);
  }
  throw Error("unknown engine: " + engine);
}

bool replay_trace(const Circuit &c, std::span<const TraceStep> trace) {
  if (trace.empty()) return false;
  for (const TraceStep &s : trace)
    if (s.inputs.size() != c.num_inputs || s.latches.size() != c.num_latches())
      return false;
  // step 0 must be a reset state under its own inputs; uninitialized
  // latches take the trace values
  if (reset_state(c, trace[0].inputs, trace[0].latches) != trace[0].latches)
    return false;
  for (size_t t = 0; t < trace.size(); ++t) {
    std::vector<uint8_t> state = trace[t].inputs;
    state.insert(state.end(), trace[t].latches.begin(),
                 trace[t].latches.end());
    EvalResult r = eval(c, state);
    if (t + 1 < trace.size()) {
      if (r.next != trace[t + 1].latches) return false;
    } else {
      return r.bad == 1;
    }
  }
  return false;
}

Circuit terminal_witness(const Circuit &c, const Verdict &v) {
  if (v.status != Status::Safe || !v.has_invariant)
    throw Error("terminal_witness: needs a SAFE verdict with an invariant");
  CircuitBuilder b;
  Instantiator inst(c, b);
  for (unsigned i = 0; i < c.num_inputs; ++i)
    inst.bind(c.input_var(i), b.add_input(c.input_names[i]));
  std::vector<Lit> lats;
  for (unsigned i = 0; i < c.num_latches(); ++i) {
    lats.push_back(b.add_latch(c.latch_names[i]));
    inst.bind(c.latch_var(i), lats.back());
  }
  for (unsigned i = 0; i < c.num_latches(); ++i) {
    b.set_next(lats[i], inst.walk(c.latches[i].next));
    b.set_reset(lats[i], c.latch_uninitialized(i)
                             ? lats[i]
                             : inst.walk(c.latches[i].reset));
  }
  Lit p = negate(inst.walk(c.bad));
  Lit inv = lit_true;
  for (const Clause &cl : v.invariant) {
    Lit d = lit_false;
    for (Lit l : cl) {
      if (!c.is_latch_var(var_of(l)))
        throw Error("terminal_witness: invariant literal is not a latch");
      d = b.make_or(d, apply_sign(lats[c.latch_index(var_of(l))], sign_of(l)));
    }
    inv = b.make_and(inv, d);
  }
  b.set_bad(negate(b.make_and(inv, p)));
  Circuit w = b.finish();
  set_declared_property(w, p);
  return w;
}

}  // namespace mc2
