#include "mc2/tersim.hpp"

#include <algorithm>

#include "mc2/aiger_io.hpp"
#include "mc2/satkit.hpp"

namespace mc2 {

void Cube::sort_lits() { std::sort(lits.begin(), lits.end()); }

bool Cube::contains(Lit l) const {
  return std::binary_search(lits.begin(), lits.end(), l);
}

bool Cube::subsumes(const Cube &other) const {
  return std::includes(other.lits.begin(), other.lits.end(), lits.begin(),
                       lits.end());
}

Cube cube_of(const Circuit &c, const TernaryVec &state) {
  Cube cube;
  for (unsigned i = 0; i < state.size(); ++i)
    if (state[i] != Ternary::X)
      cube.lits.push_back(make_lit(c.latch_var(i), state[i] == Ternary::F));
  return cube;  // built in var order, already sorted
}

TernaryEval ternary_eval(const Circuit &c, std::span<const Ternary> state) {
  if (state.size() != c.num_state_vars())
    throw Error("ternary_eval: assignment covers " +
                std::to_string(state.size()) + " vars, need " +
                std::to_string(c.num_state_vars()));
  TernaryEval r;
  r.value.assign(c.num_vars() + 1, Ternary::X);
  for (unsigned v = 1; v <= c.num_state_vars(); ++v) r.value[v] = state[v - 1];
  for (const AndGate &g : c.ands)
    r.value[g.var] = ternary_and(r.lit(g.rhs0), r.lit(g.rhs1));
  r.bad = r.lit(c.bad);
  r.next.resize(c.num_latches());
  for (unsigned i = 0; i < c.num_latches(); ++i)
    r.next[i] = r.lit(c.latches[i].next);
  return r;
}

TernaryVec ternary_reset(const Circuit &c) {
  StratResult strat = check_stratified(c);
  if (!strat.ok())
    throw StructuralError("ternary_reset: circuit not stratified");
  TernaryVec latch(c.num_latches(), Ternary::X);
  for (unsigned i : strat.order) {
    if (c.latch_uninitialized(i)) continue;  // stays unknown
    std::vector<Ternary> state(c.num_state_vars(), Ternary::X);
    for (unsigned j = 0; j < c.num_latches(); ++j)
      state[c.latch_var(j) - 1] = latch[j];
    latch[i] = ternary_eval(c, state).lit(c.latches[i].reset);
  }
  return latch;
}

TernaryVec ternary_step(const Circuit &c, const TernaryVec &latches) {
  std::vector<Ternary> state(c.num_state_vars(), Ternary::X);
  for (unsigned j = 0; j < c.num_latches(); ++j)
    state[c.latch_var(j) - 1] = latches[j];
  return ternary_eval(c, state).next;
}

std::vector<CubeLasso> find_lassos(const Circuit &c, unsigned max_steps) {
  TernaryVec state = ternary_reset(c);
  std::vector<Cube> cubes = {cube_of(c, state)};
  unsigned delta = 0, omega = 0;
  bool closed = false;
  for (unsigned k = 1; k <= max_steps && !closed; ++k) {
    state = ternary_step(c, state);
    Cube next = cube_of(c, state);
    for (unsigned e = 0; e < cubes.size(); ++e)
      if (cubes[e].subsumes(next)) {
        delta = e;
        omega = k - 1 - e;
        closed = true;
        break;
      }
    if (!closed) cubes.push_back(std::move(next));
  }
  if (!closed) return {};
  cubes.push_back(cube_of(c, state));  // the cube that closed the loop
  // extend the simulation so every loop rotation has its cubes
  while (cubes.size() <= size_t(delta) + 2 * omega + 1) {
    state = ternary_step(c, state);
    cubes.push_back(cube_of(c, state));
  }
  std::vector<CubeLasso> out;
  for (unsigned j = 0; j <= omega; ++j) {
    // rotation j: stem grows by j steps, the loop starts at delta + j
    if (!cubes[delta + j].subsumes(cubes[delta + j + omega + 1])) continue;
    CubeLasso lasso;
    lasso.delta = delta + j;
    lasso.omega = omega;
    lasso.cubes.assign(cubes.begin(), cubes.begin() + delta + j + omega + 1);
    out.push_back(std::move(lasso));
  }
  return out;
}

LassoCheck verify_lasso(const Circuit &c, const CubeLasso &lasso) {
  if (lasso.cubes.size() != size_t(lasso.delta) + lasso.omega + 1)
    return {false, -1};
  CombView v = comb_view(c);
  TseitinResult t = tseitin(v.comb, {});
  Solver s;
  s.add_formula(t.cnf);
  auto state_dimacs = [&](Lit cube_lit) {
    unsigned i = c.latch_index(var_of(cube_lit));
    return t.lit(apply_sign(v.states[i], sign_of(cube_lit)));
  };
  auto next_dimacs = [&](Lit cube_lit) {
    unsigned i = c.latch_index(var_of(cube_lit));
    return t.lit(apply_sign(v.next[i], sign_of(cube_lit)));
  };
  int base = t.cnf.num_vars;
  auto fresh = [&] { s.ensure_var(++base); return base; };

  // some reset state outside cube 0?
  {
    int act = fresh();
    std::vector<int> clause = {-act};
    for (Lit l : lasso.cubes[0].lits) clause.push_back(-state_dimacs(l));
    s.add_clause(clause);
    SatResult r = s.solve({act, t.lit(v.reset_pred)});
    if (!r.unsat()) return {false, -1};
  }
  // a transition from cube i outside its successor?
  for (unsigned i = 0; i < lasso.cubes.size(); ++i) {
    const Cube &target = i + 1 < lasso.cubes.size() ? lasso.cubes[i + 1]
                                                    : lasso.cubes[lasso.delta];
    int act = fresh();
    std::vector<int> clause = {-act};
    for (Lit l : target.lits) clause.push_back(-next_dimacs(l));
    s.add_clause(clause);
    std::vector<int> assumptions = {act};
    for (Lit l : lasso.cubes[i].lits) assumptions.push_back(state_dimacs(l));
    SatResult r = s.solve(assumptions);
    if (!r.unsat()) return {false, (int)i};
  }
  return {};
}

}  // namespace mc2
