#include "mc2/netlist.hpp"

#include <algorithm>
#include <cassert>

namespace mc2 {

std::string Circuit::effective_input_name(unsigned i) const {
  if (i < input_names.size() && !input_names[i].empty()) return input_names[i];
  return "i" + std::to_string(i);
}

std::string Circuit::effective_latch_name(unsigned i) const {
  if (i < latch_names.size() && !latch_names[i].empty()) return latch_names[i];
  return "l" + std::to_string(i);
}

std::optional<unsigned> Circuit::find_input(const std::string &name) const {
  for (unsigned i = 0; i < num_inputs; ++i)
    if (effective_input_name(i) == name) return i;
  return std::nullopt;
}

std::optional<unsigned> Circuit::find_latch(const std::string &name) const {
  for (unsigned i = 0; i < num_latches(); ++i)
    if (effective_latch_name(i) == name) return i;
  return std::nullopt;
}

void Circuit::validate() const {
  const unsigned n = num_vars();
  auto check = [&](Lit l, const char *what) {
    if (var_of(l) > n)
      throw StructuralError(std::string("literal out of range in ") + what +
                            ": " + std::to_string(l));
  };
  for (unsigned i = 0; i < num_latches(); ++i) {
    if (latches[i].var != latch_var(i))
      throw StructuralError("latch variable out of sequence");
    check(latches[i].next, "latch next");
    check(latches[i].reset, "latch reset");
  }
  for (unsigned i = 0; i < num_ands(); ++i) {
    const AndGate &g = ands[i];
    if (g.var != num_inputs + num_latches() + i + 1)
      throw StructuralError("and variable out of sequence");
    if (var_of(g.rhs0) >= g.var || var_of(g.rhs1) >= g.var)
      throw StructuralError("and gate not topologically ordered at var " +
                            std::to_string(g.var));
  }
  check(bad, "bad");
}

Lit CircuitBuilder::check_lit(Lit l) const {
  if (var_of(l) > circuit_.num_vars())
    throw StructuralError("builder: literal " + std::to_string(l) +
                          " not defined yet");
  return l;
}

Lit CircuitBuilder::add_input(std::string name) {
  if (gates_started_ || !circuit_.latches.empty())
    throw StructuralError("builder: inputs must come first");
  circuit_.num_inputs++;
  circuit_.input_names.push_back(std::move(name));
  return make_lit(circuit_.num_inputs);
}

Lit CircuitBuilder::add_latch(std::string name) {
  if (gates_started_)
    throw StructuralError("builder: latches must precede gates");
  unsigned var = circuit_.num_inputs + circuit_.num_latches() + 1;
  circuit_.latches.push_back({var, lit_false, lit_false});
  circuit_.latch_names.push_back(std::move(name));
  return make_lit(var);
}

void CircuitBuilder::set_next(Lit latch, Lit next) {
  unsigned v = var_of(latch);
  if (!circuit_.is_latch_var(v) || sign_of(latch))
    throw StructuralError("builder: set_next on non-latch literal");
  circuit_.latches[circuit_.latch_index(v)].next = check_lit(next);
}

void CircuitBuilder::set_reset(Lit latch, Lit reset) {
  unsigned v = var_of(latch);
  if (!circuit_.is_latch_var(v) || sign_of(latch))
    throw StructuralError("builder: set_reset on non-latch literal");
  circuit_.latches[circuit_.latch_index(v)].reset = check_lit(reset);
}

Lit CircuitBuilder::make_and(Lit a, Lit b) {
  check_lit(a), check_lit(b);
  if (a == lit_false || b == lit_false) return lit_false;
  if (a == lit_true) return b;
  if (b == lit_true) return a;
  if (a == b) return a;
  if (a == negate(b)) return lit_false;
  gates_started_ = true;
  if (a < b) std::swap(a, b);
  uint64_t key = (uint64_t(a) << 32) | b;
  if (auto it = strash_.find(key); it != strash_.end()) return it->second;
  unsigned var = circuit_.num_vars() + 1;
  circuit_.ands.push_back({var, a, b});
  Lit out = make_lit(var);
  strash_.emplace(key, out);
  return out;
}

Lit CircuitBuilder::make_conj(std::span<const Lit> lits) {
  Lit acc = lit_true;
  for (Lit l : lits) acc = make_and(acc, l);
  return acc;
}

Lit CircuitBuilder::make_disj(std::span<const Lit> lits) {
  Lit acc = lit_false;
  for (Lit l : lits) acc = make_or(acc, l);
  return acc;
}

Circuit CircuitBuilder::finish() {
  circuit_.validate();
  return std::move(circuit_);
}

void Instantiator::bind(unsigned src_var, Lit dst_lit) {
  assert(src_var <= src_.num_vars());
  map_[src_var] = dst_lit;
}

Lit Instantiator::walk(Lit src_lit) {
  if (is_constant(src_lit)) return src_lit;
  unsigned v = var_of(src_lit);
  if (map_[v] != lit_invalid) return apply_sign(map_[v], sign_of(src_lit));
  if (!src_.is_and_var(v))
    throw StructuralError("instantiate: unbound leaf var " + std::to_string(v));
  const AndGate &g = src_.and_of(v);
  Lit a = walk(g.rhs0);  // gates are topologically ordered, recursion is finite
  Lit b = walk(g.rhs1);
  Lit out = dst_.make_and(a, b);
  map_[v] = out;
  return apply_sign(out, sign_of(src_lit));
}

std::vector<unsigned> latch_support(const Circuit &c, Lit l) {
  std::vector<char> seen(c.num_vars() + 1, 0);
  std::vector<unsigned> stack, out;
  if (!is_constant(l)) stack.push_back(var_of(l));
  while (!stack.empty()) {
    unsigned v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = 1;
    if (c.is_latch_var(v)) {
      out.push_back(c.latch_index(v));
    } else if (c.is_and_var(v)) {
      const AndGate &g = c.and_of(v);
      if (!is_constant(g.rhs0)) stack.push_back(var_of(g.rhs0));
      if (!is_constant(g.rhs1)) stack.push_back(var_of(g.rhs1));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<unsigned> input_support(const Circuit &c, Lit l) {
  std::vector<char> seen(c.num_vars() + 1, 0);
  std::vector<unsigned> stack, out;
  if (!is_constant(l)) stack.push_back(var_of(l));
  while (!stack.empty()) {
    unsigned v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = 1;
    if (c.is_input_var(v)) {
      out.push_back(c.input_index(v));
    } else if (c.is_and_var(v)) {
      const AndGate &g = c.and_of(v);
      if (!is_constant(g.rhs0)) stack.push_back(var_of(g.rhs0));
      if (!is_constant(g.rhs1)) stack.push_back(var_of(g.rhs1));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

StratResult check_stratified(const Circuit &c) {
  c.validate();
  const unsigned n = c.num_latches();
  // deps[i] = latches the reset of latch i structurally depends on
  std::vector<std::vector<unsigned>> deps(n);
  for (unsigned i = 0; i < n; ++i) {
    if (c.latch_uninitialized(i)) continue;  // self-reset is a base case
    deps[i] = latch_support(c, c.latches[i].reset);
  }
  // Kahn over the reverse graph
  std::vector<unsigned> indeg(n, 0);
  for (unsigned i = 0; i < n; ++i) indeg[i] = (unsigned)deps[i].size();
  std::vector<std::vector<unsigned>> users(n);
  for (unsigned i = 0; i < n; ++i)
    for (unsigned d : deps[i]) users[d].push_back(i);
  StratResult res;
  std::vector<unsigned> stack;
  for (unsigned i = 0; i < n; ++i)
    if (!indeg[i]) stack.push_back(i);
  while (!stack.empty()) {
    unsigned i = stack.back();
    stack.pop_back();
    res.order.push_back(i);
    for (unsigned u : users[i])
      if (!--indeg[u]) stack.push_back(u);
  }
  if (res.order.size() == n) return res;
  for (unsigned i = 0; i < n; ++i)
    if (indeg[i]) res.cycle.push_back(i);
  res.order.clear();
  return res;
}

EvalResult eval(const Circuit &c, std::span<const uint8_t> state) {
  if (state.size() != c.num_state_vars())
    throw Error("eval: assignment covers " + std::to_string(state.size()) +
                " vars, need " + std::to_string(c.num_state_vars()));
  EvalResult r;
  r.value.assign(c.num_vars() + 1, 0);
  for (unsigned v = 1; v <= c.num_state_vars(); ++v) {
    uint8_t x = state[v - 1];
    if (x > 1) throw Error("eval: missing value for var " + std::to_string(v));
    r.value[v] = x;
  }
  for (const AndGate &g : c.ands)
    r.value[g.var] = r.lit(g.rhs0) & r.lit(g.rhs1);
  r.bad = r.lit(c.bad);
  r.next.resize(c.num_latches());
  for (unsigned i = 0; i < c.num_latches(); ++i)
    r.next[i] = r.lit(c.latches[i].next);
  return r;
}

std::vector<uint8_t> reset_state(const Circuit &c,
                                 std::span<const uint8_t> inputs,
                                 std::span<const uint8_t> self_hint) {
  if (inputs.size() != c.num_inputs) throw Error("reset_state: input size");
  StratResult strat = check_stratified(c);
  if (!strat.ok()) throw StructuralError("reset_state: circuit not stratified");
  const unsigned L = c.num_latches();
  std::vector<uint8_t> latch(L, 2);
  // Evaluate one reset cone; latch leaves must already be computed.
  auto eval_cone = [&](Lit root) -> uint8_t {
    std::vector<uint8_t> memo(c.num_vars() + 1, 2);
    auto lit_val = [&](Lit l) { return memo[var_of(l)] ^ sign_of(l); };
    std::vector<unsigned> stack;
    if (!is_constant(root)) stack.push_back(var_of(root));
    while (!stack.empty()) {
      unsigned v = stack.back();
      if (memo[v] != 2) {
        stack.pop_back();
        continue;
      }
      if (c.is_input_var(v)) {
        memo[v] = inputs[c.input_index(v)];
        stack.pop_back();
      } else if (c.is_latch_var(v)) {
        memo[v] = latch[c.latch_index(v)];
        assert(memo[v] != 2);
        stack.pop_back();
      } else {
        const AndGate &g = c.and_of(v);
        bool ready = true;
        for (Lit r : {g.rhs0, g.rhs1})
          if (!is_constant(r) && memo[var_of(r)] == 2) {
            stack.push_back(var_of(r));
            ready = false;
          }
        if (ready) {
          auto val = [&](Lit l) -> uint8_t {
            return is_constant(l) ? uint8_t(l) : lit_val(l);
          };
          memo[v] = val(g.rhs0) & val(g.rhs1);
          stack.pop_back();
        }
      }
    }
    return is_constant(root) ? uint8_t(root) : lit_val(root);
  };
  for (unsigned i : strat.order) {
    if (c.latch_uninitialized(i)) {
      latch[i] = (i < self_hint.size()) ? self_hint[i] : uint8_t(0);
    } else {
      latch[i] = eval_cone(c.latches[i].reset);
    }
  }
  return latch;
}

Circuit substitute(const Circuit &c,
                   std::span<const std::pair<unsigned, Lit>> map) {
  c.validate();
  CircuitBuilder b;
  std::vector<Lit> image(c.num_vars() + 1, lit_invalid);
  for (auto [v, l] : map) {
    if (v == 0 || v > c.num_vars())
      throw StructuralError("substitute: bad domain var");
    image[v] = l;
  }
  std::vector<Lit> base(c.num_vars() + 1, lit_invalid);
  for (unsigned i = 0; i < c.num_inputs; ++i)
    base[c.input_var(i)] = b.add_input(i < c.input_names.size()
                                           ? c.input_names[i]
                                           : std::string());
  for (unsigned i = 0; i < c.num_latches(); ++i)
    base[c.latch_var(i)] = b.add_latch(i < c.latch_names.size()
                                           ? c.latch_names[i]
                                           : std::string());
  // Resolve a source literal, following the substitution map once per
  // variable, copying gate cones on demand. on_stack detects cycles
  // introduced by the map.
  std::vector<char> on_stack(c.num_vars() + 1, 0), done(c.num_vars() + 1, 0);
  std::vector<Lit> out(c.num_vars() + 1, lit_invalid);
  auto resolve = [&](auto &&self, Lit l) -> Lit {
    if (is_constant(l)) return l;
    unsigned v = var_of(l);
    if (done[v]) return apply_sign(out[v], sign_of(l));
    if (on_stack[v])
      throw StructuralError("substitute: combinational cycle through var " +
                            std::to_string(v));
    on_stack[v] = 1;
    Lit res;
    if (image[v] != lit_invalid) {
      res = self(self, image[v]);
    } else if (c.is_and_var(v)) {
      const AndGate &g = c.and_of(v);
      Lit a = self(self, g.rhs0);
      Lit d = self(self, g.rhs1);
      res = b.make_and(a, d);
    } else {
      res = base[v];
    }
    on_stack[v] = 0;
    done[v] = 1;
    out[v] = res;
    return apply_sign(res, sign_of(l));
  };
  // A mapped latch keeps its definition; only uses are replaced. The
  // latch's own next/reset are still emitted.
  auto resolve_use = [&](Lit l) { return resolve(resolve, l); };
  for (unsigned i = 0; i < c.num_latches(); ++i) {
    Lit lv = base[c.latch_var(i)];
    b.set_next(lv, resolve_use(c.latches[i].next));
    b.set_reset(lv, resolve_use(c.latches[i].reset));
  }
  b.set_bad(resolve_use(c.bad));
  Circuit r = b.finish();
  r.output_name = c.output_name;
  r.comments = c.comments;
  return r;
}

unsigned CoiSet::num_inputs() const {
  return (unsigned)std::count(input_in.begin(), input_in.end(), 1);
}
unsigned CoiSet::num_latches() const {
  return (unsigned)std::count(latch_in.begin(), latch_in.end(), 1);
}

CoiSet coi(const Circuit &c) {
  CoiSet s;
  s.input_in.assign(c.num_inputs, 0);
  s.latch_in.assign(c.num_latches(), 0);
  std::vector<unsigned> work;
  auto add_support = [&](Lit l) {
    for (unsigned i : input_support(c, l)) s.input_in[i] = 1;
    for (unsigned i : latch_support(c, l))
      if (!s.latch_in[i]) {
        s.latch_in[i] = 1;
        work.push_back(i);
      }
  };
  add_support(c.bad);
  while (!work.empty()) {
    unsigned i = work.back();
    work.pop_back();
    add_support(c.latches[i].next);
    if (!c.latch_uninitialized(i)) add_support(c.latches[i].reset);
  }
  return s;
}

CombView comb_view(const Circuit &c) {
  CombView v;
  CircuitBuilder b;
  Instantiator inst(c, b);
  for (unsigned i = 0; i < c.num_inputs; ++i) {
    Lit l = b.add_input(c.effective_input_name(i));
    v.inputs.push_back(l);
    inst.bind(c.input_var(i), l);
  }
  for (unsigned i = 0; i < c.num_latches(); ++i) {
    Lit l = b.add_input(c.effective_latch_name(i));
    v.states.push_back(l);
    inst.bind(c.latch_var(i), l);
  }
  for (unsigned i = 0; i < c.num_latches(); ++i) {
    v.next.push_back(inst.walk(c.latches[i].next));
    v.reset.push_back(inst.walk(c.latches[i].reset));
  }
  v.bad = inst.walk(c.bad);
  Lit pred = lit_true;
  for (unsigned i = 0; i < c.num_latches(); ++i)
    pred = b.make_and(pred, b.make_equiv(v.states[i], v.reset[i]));
  v.reset_pred = pred;
  v.comb = b.finish();
  return v;
}

Unrolling unroll(const Circuit &c, unsigned k) {
  Unrolling u;
  CircuitBuilder b;
  u.inputs.resize(k + 1);
  u.states.resize(k + 1);
  for (unsigned t = 0; t <= k; ++t) {
    for (unsigned i = 0; i < c.num_inputs; ++i)
      u.inputs[t].push_back(
          b.add_input(c.effective_input_name(i) + "@" + std::to_string(t)));
    for (unsigned i = 0; i < c.num_latches(); ++i)
      u.states[t].push_back(
          b.add_input(c.effective_latch_name(i) + "@" + std::to_string(t)));
  }
  Lit trans = lit_true;
  std::vector<std::vector<Lit>> nexts(k + 1);
  for (unsigned t = 0; t <= k; ++t) {
    Instantiator inst(c, b);
    for (unsigned i = 0; i < c.num_inputs; ++i)
      inst.bind(c.input_var(i), u.inputs[t][i]);
    for (unsigned i = 0; i < c.num_latches(); ++i)
      inst.bind(c.latch_var(i), u.states[t][i]);
    u.bads.push_back(inst.walk(c.bad));
    if (t == 0) {
      Lit pred = lit_true;
      for (unsigned i = 0; i < c.num_latches(); ++i) {
        if (c.latch_uninitialized(i)) continue;
        pred = b.make_and(
            pred, b.make_equiv(u.states[0][i], inst.walk(c.latches[i].reset)));
      }
      u.reset_pred = pred;
    }
    if (t < k)
      for (unsigned i = 0; i < c.num_latches(); ++i)
        trans = b.make_and(trans, b.make_equiv(u.states[t + 1][i],
                                               inst.walk(c.latches[i].next)));
  }
  u.trans = trans;
  u.comb = b.finish();
  return u;
}

}  // namespace mc2
