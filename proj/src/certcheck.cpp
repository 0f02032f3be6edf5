#include "mc2/certcheck.hpp"

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <unordered_map>

#include <json.hpp>

#include "mc2/satkit.hpp"

namespace mc2::certcheck {

namespace {

// --- independent reset-stratification check ------------------------

// latch indices appearing in the cone of a literal; a pure self-reset
// is the "uninitialized" base case and contributes nothing
std::vector<unsigned> reset_deps(const Circuit &c, unsigned latch) {
  Lit r = c.latches[latch].reset;
  if (r == make_lit(c.latches[latch].var)) return {};
  std::vector<unsigned> out;
  std::vector<char> seen(c.num_vars() + 1, 0);
  std::vector<Lit> stack{r};
  while (!stack.empty()) {
    Lit l = stack.back();
    stack.pop_back();
    if (is_constant(l)) continue;
    unsigned v = var_of(l);
    if (seen[v]) continue;
    seen[v] = 1;
    if (c.is_latch_var(v)) {
      out.push_back(c.latch_index(v));
    } else if (c.is_and_var(v)) {
      stack.push_back(c.and_of(v).rhs0);
      stack.push_back(c.and_of(v).rhs1);
    }
  }
  return out;
}

bool is_stratified(const Circuit &c) {
  enum { White, Grey, Black };
  std::vector<char> color(c.num_latches(), White);
  // iterative DFS with an explicit finish marker
  for (unsigned root = 0; root < c.num_latches(); ++root) {
    if (color[root] != White) continue;
    std::vector<std::pair<unsigned, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [l, done] = stack.back();
      stack.pop_back();
      if (done) {
        color[l] = Black;
        continue;
      }
      if (color[l] == Black) continue;
      if (color[l] == Grey) return false;
      color[l] = Grey;
      stack.push_back({l, true});
      for (unsigned d : reset_deps(c, l)) {
        if (color[d] == Grey) return false;
        if (color[d] == White) stack.push_back({d, false});
      }
    }
  }
  return true;
}

// --- CNF encoding --------------------------------------------------

struct Enc {
  CnfFormula cnf;
  // structural hashing: one dimacs variable per distinct AND of dimacs
  // literals, so identical cones (for example a latch function copied
  // verbatim into a witness) share their encoding
  std::unordered_map<uint64_t, int> and_cache;
  Enc() {
    cnf.num_vars = 1;  // dimacs var 1 is constant true
    cnf.clauses.push_back({1});
  }
  int fresh() { return ++cnf.num_vars; }
  void clause(std::vector<int> lits) { cnf.clauses.push_back(std::move(lits)); }
  void equal(int a, int b) {
    clause({a, -b});
    clause({-a, b});
  }
  int make_xor(int a, int b) {
    if (a == b) return -1;
    if (a == -b) return 1;
    if (a == 1 || a == -1) return a == 1 ? -b : b;
    if (b == 1 || b == -1) return b == 1 ? -a : a;
    int x = fresh();
    clause({-x, a, b});
    clause({-x, -a, -b});
    clause({x, a, -b});
    clause({x, -a, b});
    return x;
  }
  // dimacs literal equivalent to a AND b (1 / -1 are the constants)
  int make_and(int a, int b) {
    if (a == -1 || b == -1 || a == -b) return -1;
    if (a == 1 || a == b) return b;
    if (b == 1) return a;
    if (a > b) std::swap(a, b);
    uint64_t key = (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
    auto [it, fresh_entry] = and_cache.emplace(key, 0);
    if (fresh_entry) {
      int o = fresh();
      it->second = o;
      clause({-o, a});
      clause({-o, b});
      clause({o, -a, -b});
    }
    return it->second;
  }
};

// one instance of a circuit's combinational logic; inputs and latches
// use caller-supplied dimacs variables (0 entries get fresh ones)
struct Frame {
  const Circuit *c = nullptr;
  // circuit var -> dimacs literal; gate entries may be negative or a
  // constant (+-1) after structural simplification
  std::vector<int> var;
  int lit(Lit l) const {
    if (is_constant(l)) return l == lit_true ? 1 : -1;
    int v = var[var_of(l)];
    return sign_of(l) ? -v : v;
  }
};

// Gate clauses are restricted to the cone of `roots`, the literals the
// query constrains; input and latch variables are always allocated so
// frames can share them regardless of the cone.
Frame encode(Enc &e, const Circuit &c, std::span<const Lit> roots,
             std::vector<int> inputs = {}, std::vector<int> latches = {}) {
  Frame f;
  f.c = &c;
  f.var.assign(c.num_vars() + 1, 0);
  inputs.resize(c.num_inputs, 0);
  latches.resize(c.num_latches(), 0);
  for (unsigned i = 0; i < c.num_inputs; ++i)
    f.var[c.input_var(i)] = inputs[i] ? inputs[i] : e.fresh();
  for (unsigned i = 0; i < c.num_latches(); ++i)
    f.var[c.latch_var(i)] = latches[i] ? latches[i] : e.fresh();
  std::vector<char> need(c.num_vars() + 1, 0);
  std::vector<Lit> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    Lit l = stack.back();
    stack.pop_back();
    if (is_constant(l)) continue;
    unsigned v = var_of(l);
    if (need[v]) continue;
    need[v] = 1;
    if (c.is_and_var(v)) {
      stack.push_back(c.and_of(v).rhs0);
      stack.push_back(c.and_of(v).rhs1);
    }
  }
  for (const AndGate &g : c.ands) {
    if (!need[g.var]) continue;
    f.var[g.var] = e.make_and(f.lit(g.rhs0), f.lit(g.rhs1));
  }
  return f;
}

std::vector<Lit> reset_roots(const Circuit &c) {
  std::vector<Lit> r;
  for (unsigned i = 0; i < c.num_latches(); ++i)
    if (!c.latch_uninitialized(i)) r.push_back(c.latches[i].reset);
  return r;
}

void label_frame(const Frame &f, const std::string &prefix,
                 const std::vector<uint8_t> &model,
                 std::vector<std::pair<std::string, uint8_t>> &out) {
  const Circuit &c = *f.c;
  auto value = [&](unsigned v) -> uint8_t {
    int dv = f.var[v];
    if (dv == 1) return 1;
    if (dv == -1 || dv == 0) return 0;
    size_t av = size_t(std::abs(dv));
    return av < model.size() ? uint8_t(model[av] ^ (dv < 0)) : 0;
  };
  for (unsigned i = 0; i < c.num_inputs; ++i)
    out.push_back({prefix + c.effective_input_name(i), value(c.input_var(i))});
  for (unsigned i = 0; i < c.num_latches(); ++i)
    out.push_back({prefix + c.effective_latch_name(i), value(c.latch_var(i))});
}

// All six checks run against one shared encoding; each query is a set
// of assumption literals (guard variables activate the constraints
// that belong to it). One persistent solver serves every query unless
// an external solver is configured.
struct QueryRunner {
  const Enc &enc;
  const CheckOptions &opt;
  const char *external;
  std::optional<Solver> solver;

  QueryRunner(const Enc &e, const CheckOptions &o)
      : enc(e), opt(o), external(std::getenv("MC2_SAT_SOLVER")) {
    if (!external) solver.emplace(enc.cnf);
  }

  CheckResult run(const char *tag, std::span<const int> assumptions,
                  std::span<const std::pair<const Frame *, std::string>> frames) {
    if (!opt.dump_cnf_dir.empty()) {
      std::filesystem::create_directories(opt.dump_cnf_dir);
      CnfFormula f = enc.cnf;
      for (int a : assumptions) f.clauses.push_back({a});
      std::ofstream out(opt.dump_cnf_dir + "/" + tag + ".cnf");
      out << write_dimacs(f);
    }
    SatResult r;
    if (external) {
      r = solve_external(enc.cnf, external, assumptions);
    } else {
      solver->set_conflict_budget(opt.conflict_budget);
      r = solver->solve(assumptions);
    }
    CheckResult res;
    if (r.unsat()) {
      res.outcome = Outcome::Pass;
    } else if (r.sat()) {
      res.outcome = Outcome::Fail;
      for (auto &[f, prefix] : frames)
        label_frame(*f, prefix, r.model, res.model);
    } else {
      res.outcome = Outcome::Unknown;
    }
    return res;
  }
};

std::unordered_map<std::string, unsigned> name_table(
    const Circuit &c, bool latches) {
  std::unordered_map<std::string, unsigned> t;
  unsigned n = latches ? c.num_latches() : c.num_inputs;
  for (unsigned i = 0; i < n; ++i) {
    std::string name =
        latches ? c.effective_latch_name(i) : c.effective_input_name(i);
    if (!t.emplace(name, i).second)
      throw Error("certcheck: duplicate " +
                  std::string(latches ? "latch" : "input") + " name '" + name +
                  "'");
  }
  return t;
}

const char *outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    default: return "unknown";
  }
}

}  // namespace

CommonMap match_common(const Circuit &model, const Circuit &witness) {
  CommonMap cm;
  auto mi = name_table(model, false);
  auto ml = name_table(model, true);
  name_table(witness, false);  // duplicate detection on both sides
  name_table(witness, true);
  for (unsigned w = 0; w < witness.num_inputs; ++w) {
    auto it = mi.find(witness.effective_input_name(w));
    if (it != mi.end()) cm.inputs.push_back({it->second, w});
  }
  for (unsigned w = 0; w < witness.num_latches(); ++w) {
    auto it = ml.find(witness.effective_latch_name(w));
    if (it != ml.end()) cm.latches.push_back({it->second, w});
  }
  return cm;
}

CheckReport check(const Circuit &model, const Circuit &witness,
                  const CheckOptions &opt) {
  model.validate();
  witness.validate();
  CheckReport rep;
  CommonMap cm = match_common(model, witness);
  rep.common_inputs = (unsigned)cm.inputs.size();
  rep.common_latches = (unsigned)cm.latches.size();
  rep.stratified = is_stratified(model) && is_stratified(witness);
  if (!rep.stratified) return rep;

  Enc e;
  Lit prop = declared_property(witness).value_or(negate(witness.bad));

  // witness frame 0: property, resets and next-state cones
  std::vector<Lit> w0roots = reset_roots(witness);
  w0roots.push_back(witness.bad);
  w0roots.push_back(prop);
  for (const Latch &l : witness.latches) w0roots.push_back(l.next);
  Frame w0 = encode(e, witness, w0roots);

  // guard aR activates the witness reset predicate S(M)
  int aR = e.fresh();
  for (unsigned i = 0; i < witness.num_latches(); ++i) {
    if (witness.latch_uninitialized(i)) continue;
    int a = w0.var[witness.latch_var(i)];
    int b = w0.lit(witness.latches[i].reset);
    e.clause({-aR, -a, b});
    e.clause({-aR, a, -b});
  }

  // witness frame 1: latches bound to G(J0, M0) directly, fresh J1
  std::vector<int> m1;
  for (unsigned i = 0; i < witness.num_latches(); ++i)
    m1.push_back(w0.lit(witness.latches[i].next));
  Frame w1 = encode(e, witness, std::array<Lit, 1>{witness.bad}, {},
                    std::move(m1));

  // model frame sharing the common variables with witness frame 0
  std::vector<Lit> mroots{model.bad};
  for (auto [m, w] : cm.latches) {
    mroots.push_back(model.latches[m].reset);
    mroots.push_back(model.latches[m].next);
  }
  std::vector<int> mi(model.num_inputs, 0), mlat(model.num_latches(), 0);
  for (auto [m, w] : cm.inputs) mi[m] = w0.var[witness.input_var(w)];
  for (auto [m, w] : cm.latches) mlat[m] = w0.var[witness.latch_var(w)];
  Frame fm = encode(e, model, mroots, std::move(mi), std::move(mlat));

  // guards aD/aE demand that some common reset/next pair disagrees
  int aD = e.fresh(), aE = e.fresh();
  {
    std::vector<int> rdiff{-aD}, ndiff{-aE};
    for (auto [m, w] : cm.latches) {
      rdiff.push_back(e.make_xor(fm.lit(model.latches[m].reset),
                                 w0.lit(witness.latches[w].reset)));
      ndiff.push_back(e.make_xor(fm.lit(model.latches[m].next),
                                 w0.lit(witness.latches[w].next)));
    }
    e.clause(std::move(rdiff));
    e.clause(std::move(ndiff));
  }

  QueryRunner runner(e, opt);
  using Frames = std::vector<std::pair<const Frame *, std::string>>;
  const Frames wf{{&w0, "witness."}};
  const Frames bf{{&w0, "witness@0."}, {&w1, "witness@1."}};
  const Frames jf{{&fm, "model."}, {&w0, "witness."}};

  // A: S(M) & ~Q
  rep.a = runner.run("A", std::array{aR, w0.lit(witness.bad)}, wf);
  // B: Q & (M1 = G(J0, M0)) & ~Q'
  rep.b = runner.run(
      "B", std::array{-w0.lit(witness.bad), w1.lit(witness.bad)}, bf);
  // C: Q & ~(declared property); Q itself when none is declared
  rep.c = runner.run("C", std::array{-w0.lit(witness.bad), -w0.lit(prop)}, wf);
  // D/E: some common reset / transition function disagrees
  if (cm.latches.empty()) {
    rep.d.outcome = Outcome::Pass;
    rep.e.outcome = Outcome::Pass;
  } else {
    rep.d = runner.run("D", std::array{aD}, jf);
    rep.e = runner.run("E", std::array{aE}, jf);
  }
  // F: Q & ~P on the shared common variables
  rep.f = runner.run(
      "F", std::array{-w0.lit(witness.bad), fm.lit(model.bad)}, jf);
  return rep;
}

std::string CheckReport::to_json() const {
  nlohmann::json j;
  j["stratified"] = stratified;
  j["common"] = {{"inputs", common_inputs}, {"latches", common_latches}};
  const std::pair<const char *, const CheckResult *> checks[] = {
      {"A", &a}, {"B", &b}, {"C", &c}, {"D", &d}, {"E", &e}, {"F", &f}};
  for (auto [name, res] : checks) {
    nlohmann::json c;
    c["result"] = outcome_name(res->outcome);
    if (res->outcome == Outcome::Fail) {
      nlohmann::json vals = nlohmann::json::array();
      for (auto &[var, value] : res->model)
        vals.push_back({{"name", var}, {"value", (int)value}});
      c["model"] = vals;
    }
    j["checks"][name] = c;
  }
  j["overall"] = overall();
  return j.dump(2);
}

bool lemma1_probe(const Circuit &model, const Circuit &witness) {
  CommonMap cm = match_common(model, witness);
  std::vector<char> in_common_input(witness.num_inputs, 0);
  std::vector<char> in_common_latch(witness.num_latches(), 0);
  for (auto [m, w] : cm.inputs) in_common_input[w] = 1;
  for (auto [m, w] : cm.latches) in_common_latch[w] = 1;

  // the common-reset predicate as a single dimacs variable
  auto predicate = [&](Enc &e, const Frame &f) {
    std::vector<int> eqs;
    for (auto [m, w] : cm.latches) {
      if (witness.latch_uninitialized(w)) continue;
      eqs.push_back(-e.make_xor(f.var[witness.latch_var(w)],
                                f.lit(witness.latches[w].reset)));
    }
    int z = e.fresh();
    std::vector<int> back{z};
    for (int y : eqs) {
      e.clause({-z, y});
      back.push_back(-y);
    }
    e.clause(std::move(back));
    return z;
  };

  std::vector<Lit> roots;
  for (auto [m, w] : cm.latches)
    if (!witness.latch_uninitialized(w))
      roots.push_back(witness.latches[w].reset);

  auto probe = [&](bool input, unsigned idx) {
    Enc e;
    Frame f0 = encode(e, witness, roots);
    // second instance shares everything except the probed variable
    std::vector<int> ins(witness.num_inputs), lats(witness.num_latches());
    for (unsigned i = 0; i < witness.num_inputs; ++i)
      ins[i] = f0.var[witness.input_var(i)];
    for (unsigned i = 0; i < witness.num_latches(); ++i)
      lats[i] = f0.var[witness.latch_var(i)];
    int flipped = e.fresh();
    int orig = input ? ins[idx] : lats[idx];
    (input ? ins[idx] : lats[idx]) = flipped;
    e.equal(flipped, -orig);
    Frame f1 = encode(e, witness, roots, std::move(ins), std::move(lats));
    int z0 = predicate(e, f0), z1 = predicate(e, f1);
    e.clause({z0, z1});
    e.clause({-z0, -z1});
    return solve_auto(e.cnf).unsat();
  };

  for (unsigned i = 0; i < witness.num_inputs; ++i)
    if (!in_common_input[i] && !probe(true, i)) return false;
  for (unsigned i = 0; i < witness.num_latches(); ++i)
    if (!in_common_latch[i] && !probe(false, i)) return false;
  return true;
}

}  // namespace mc2::certcheck
