#include "mc2/satkit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mc2 {

namespace {

// index into watch lists / seen arrays
inline int widx(int lit) { return 2 * std::abs(lit) + (lit < 0); }

}  // namespace

struct Solver::Impl {
  // clause storage
  std::vector<std::vector<int>> clauses;
  struct Watch {
    int ci;       // clause id
    int blocker;  // some other literal of the clause; true => satisfied
  };
  std::vector<std::vector<Watch>> watches;  // widx -> watchers

  std::vector<int8_t> assigns;  // var -> -1/0/1
  std::vector<int> level;       // var -> decision level
  std::vector<int> reason;      // var -> clause id or -1
  std::vector<uint8_t> polarity;
  std::vector<double> activity;
  double var_inc = 1.0;

  std::vector<int> trail;
  std::vector<int> trail_lim;
  size_t qhead = 0;

  // indexed max-heap over activity
  std::vector<int> heap;
  std::vector<int> heap_pos;  // var -> index in heap or -1

  int nvars = 0;
  bool unsat0 = false;
  int64_t budget = -1;
  int64_t conflicts = 0;

  int value(int lit) const {
    int8_t a = assigns[std::abs(lit)];
    if (a < 0) return -1;
    return (a == 1) == (lit > 0);
  }
  int decision_level() const { return (int)trail_lim.size(); }

  void ensure(int v) {
    if (v < nvars + 1) return;
    assigns.resize(v + 1, -1);
    level.resize(v + 1, 0);
    reason.resize(v + 1, -1);
    polarity.resize(v + 1, 0);
    activity.resize(v + 1, 0.0);
    heap_pos.resize(v + 1, -1);
    watches.resize(2 * (v + 1));
    for (int x = nvars + 1; x <= v; ++x) heap_insert(x);
    nvars = v;
  }

  // --- heap -------------------------------------------------------
  bool heap_less(int a, int b) const { return activity[a] < activity[b]; }
  void heap_up(int i) {
    int v = heap[i];
    while (i > 0) {
      int p = (i - 1) / 2;
      if (!heap_less(heap[p], v)) break;
      heap[i] = heap[p];
      heap_pos[heap[i]] = i;
      i = p;
    }
    heap[i] = v;
    heap_pos[v] = i;
  }
  void heap_down(int i) {
    int v = heap[i];
    size_t n = heap.size();
    while (true) {
      size_t c = 2 * i + 1;
      if (c >= n) break;
      if (c + 1 < n && heap_less(heap[c], heap[c + 1])) ++c;
      if (!heap_less(v, heap[c])) break;
      heap[i] = heap[c];
      heap_pos[heap[i]] = i;
      i = (int)c;
    }
    heap[i] = v;
    heap_pos[v] = i;
  }
  void heap_insert(int v) {
    if (heap_pos[v] >= 0) return;
    heap.push_back(v);
    heap_pos[v] = (int)heap.size() - 1;
    heap_up((int)heap.size() - 1);
  }
  int heap_pop() {
    int v = heap[0];
    heap_pos[v] = -1;
    heap[0] = heap.back();
    heap.pop_back();
    if (!heap.empty()) {
      heap_pos[heap[0]] = 0;
      heap_down(0);
    }
    return v;
  }

  void bump(int v) {
    activity[v] += var_inc;
    if (activity[v] > 1e100) {
      for (double &a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    if (heap_pos[v] >= 0) heap_up(heap_pos[v]);
  }

  // --- assignment -------------------------------------------------
  void enqueue(int lit, int from) {
    int v = std::abs(lit);
    assert(assigns[v] < 0);
    assigns[v] = lit > 0;
    level[v] = decision_level();
    reason[v] = from;
    polarity[v] = lit > 0;
    trail.push_back(lit);
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (int i = (int)trail.size() - 1; i >= trail_lim[lvl]; --i) {
      int v = std::abs(trail[i]);
      assigns[v] = -1;
      reason[v] = -1;
      if (heap_pos[v] < 0) heap_insert(v);
    }
    trail.resize(trail_lim[lvl]);
    trail_lim.resize(lvl);
    qhead = trail.size();
  }

  // returns conflicting clause id or -1
  int propagate() {
    while (qhead < trail.size()) {
      int p = trail[qhead++];
      std::vector<Watch> &ws = watches[widx(p)];
      size_t i = 0, j = 0;
      while (i < ws.size()) {
        Watch w = ws[i++];
        // cheap satisfiability test without touching the clause
        if (value(w.blocker) == 1) {
          ws[j++] = w;
          continue;
        }
        int ci = w.ci;
        std::vector<int> &cl = clauses[ci];
        // make cl[0] the other watched literal
        int false_lit = -p;
        if (cl[0] == false_lit) std::swap(cl[0], cl[1]);
        if (value(cl[0]) == 1) {
          ws[j++] = {ci, cl[0]};
          continue;
        }
        bool found = false;
        for (size_t k = 2; k < cl.size(); ++k) {
          if (value(cl[k]) != 0) {
            std::swap(cl[1], cl[k]);
            watches[widx(-cl[1])].push_back({ci, cl[0]});
            found = true;
            break;
          }
        }
        if (found) continue;
        ws[j++] = {ci, cl[0]};
        if (value(cl[0]) == 0) {
          // conflict
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          qhead = trail.size();
          return ci;
        }
        enqueue(cl[0], ci);
      }
      ws.resize(j);
    }
    return -1;
  }

  // first-UIP learning; returns (learnt clause, backjump level)
  std::pair<std::vector<int>, int> analyze(int confl) {
    std::vector<int> learnt{0};  // slot for the asserting literal
    std::vector<uint8_t> seen(nvars + 1, 0);
    int counter = 0;
    int p = 0;
    int idx = (int)trail.size() - 1;
    do {
      const std::vector<int> &cl = clauses[confl];
      for (size_t k = (p == 0 ? 0 : 1); k < cl.size(); ++k) {
        int q = cl[k];
        int v = std::abs(q);
        if (seen[v] || level[v] == 0) continue;
        seen[v] = 1;
        bump(v);
        if (level[v] == decision_level())
          ++counter;
        else
          learnt.push_back(q);
      }
      while (!seen[std::abs(trail[idx])]) --idx;
      p = trail[idx];
      confl = reason[std::abs(p)];
      seen[std::abs(p)] = 0;
      --counter;
      --idx;
    } while (counter > 0);
    learnt[0] = -p;
    int bj = 0;
    if (learnt.size() > 1) {
      size_t max_i = 1;
      for (size_t k = 2; k < learnt.size(); ++k)
        if (level[std::abs(learnt[k])] > level[std::abs(learnt[max_i])])
          max_i = k;
      std::swap(learnt[1], learnt[max_i]);
      bj = level[std::abs(learnt[1])];
    }
    return {std::move(learnt), bj};
  }

  void attach(int ci) {
    const std::vector<int> &cl = clauses[ci];
    assert(cl.size() >= 2);
    watches[widx(-cl[0])].push_back({ci, cl[1]});
    watches[widx(-cl[1])].push_back({ci, cl[0]});
  }

  std::vector<int> scratch_cl, scratch_out;  // reused across add_clause calls

  void add_clause(std::span<const int> lits) {
    cancel_until(0);
    std::vector<int> &cl = scratch_cl;
    cl.clear();
    for (int l : lits) {
      int v = std::abs(l);
      if (v == 0) throw Error("satkit: literal 0 in clause");
      ensure(v);
      cl.push_back(l);
    }
    std::sort(cl.begin(), cl.end(), [](int a, int b) {
      return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b);
    });
    cl.erase(std::unique(cl.begin(), cl.end()), cl.end());
    std::vector<int> &out = scratch_out;
    out.clear();
    for (size_t i = 0; i < cl.size(); ++i) {
      if (i + 1 < cl.size() && cl[i] == -cl[i + 1]) return;  // tautology
      int val = value(cl[i]);
      if (val == 1 && level[std::abs(cl[i])] == 0) return;  // satisfied at 0
      if (val == 0 && level[std::abs(cl[i])] == 0) continue;
      out.push_back(cl[i]);
    }
    if (out.empty()) {
      unsat0 = true;
      return;
    }
    if (out.size() == 1) {
      if (value(out[0]) == 0)
        unsat0 = true;
      else if (value(out[0]) < 0) {
        enqueue(out[0], -1);
        if (propagate() >= 0) unsat0 = true;
      }
      return;
    }
    clauses.emplace_back(out.begin(), out.end());
    attach((int)clauses.size() - 1);
  }

  int pick_branch() {
    while (!heap.empty()) {
      int v = heap_pop();
      if (assigns[v] < 0) return v;
    }
    return 0;
  }

  SatResult search(std::span<const int> assumptions) {
    conflicts = 0;
    int64_t restart_limit = 64;
    int64_t next_restart = restart_limit;
    while (true) {
      int confl = propagate();
      if (confl >= 0) {
        ++conflicts;
        if (decision_level() == 0) return {SatStatus::Unsat, {}};
        auto [learnt, bj] = analyze(confl);
        cancel_until(bj);
        if (learnt.size() == 1) {
          if (value(learnt[0]) == 0) return {SatStatus::Unsat, {}};
          if (value(learnt[0]) < 0) enqueue(learnt[0], -1);
        } else {
          clauses.push_back(learnt);
          attach((int)clauses.size() - 1);
          enqueue(learnt[0], (int)clauses.size() - 1);
        }
        var_inc /= 0.95;
        if (budget >= 0 && conflicts > budget) {
          cancel_until(0);
          return {SatStatus::Unknown, {}};
        }
        if (conflicts >= next_restart) {
          restart_limit = restart_limit * 3 / 2;
          next_restart = conflicts + restart_limit;
          cancel_until(0);
        }
        continue;
      }
      if (decision_level() < (int)assumptions.size()) {
        int p = assumptions[decision_level()];
        if (std::abs(p) > nvars) ensure(std::abs(p));
        int val = value(p);
        if (val == 0) return {SatStatus::Unsat, {}};
        trail_lim.push_back((int)trail.size());
        if (val < 0) enqueue(p, -1);
        continue;
      }
      int v = pick_branch();
      if (v == 0) {
        SatResult r;
        r.status = SatStatus::Sat;
        r.model.assign(nvars + 1, 0);
        for (int x = 1; x <= nvars; ++x) r.model[x] = assigns[x] == 1;
        verify_model(r.model, assumptions);
        cancel_until(0);
        return r;
      }
      trail_lim.push_back((int)trail.size());
      enqueue(polarity[v] ? v : -v, -1);
    }
  }

  void verify_model(const std::vector<uint8_t> &model,
                    std::span<const int> assumptions) const {
    auto holds = [&](int l) {
      return (model[std::abs(l)] == 1) == (l > 0);
    };
    for (const auto &cl : clauses) {
      bool sat = false;
      for (int l : cl) sat |= holds(l);
      if (!sat) throw Error("satkit: internal model check failed");
    }
    for (int l : assumptions)
      if (!holds(l)) throw Error("satkit: model violates assumption");
  }

  SatResult solve(std::span<const int> assumptions) {
    if (unsat0) return {SatStatus::Unsat, {}};
    cancel_until(0);
    for (int l : assumptions) ensure(std::abs(l));
    return search(assumptions);
  }
};

Solver::Solver() : impl_(new Impl) {}
Solver::Solver(const CnfFormula &base) : impl_(new Impl) { add_formula(base); }
Solver::~Solver() = default;
Solver::Solver(Solver &&) noexcept = default;
Solver &Solver::operator=(Solver &&) noexcept = default;

int Solver::new_var() {
  impl_->ensure(impl_->nvars + 1);
  return impl_->nvars;
}
int Solver::num_vars() const { return impl_->nvars; }
void Solver::ensure_var(int v) { impl_->ensure(v); }
void Solver::add_clause(std::span<const int> lits) { impl_->add_clause(lits); }
void Solver::add_formula(const CnfFormula &f) {
  impl_->ensure(f.num_vars);
  for (const auto &cl : f.clauses) impl_->add_clause(cl);
}
void Solver::set_conflict_budget(int64_t budget) { impl_->budget = budget; }
SatResult Solver::solve(std::span<const int> assumptions) {
  return impl_->solve(assumptions);
}

SatResult solve(const CnfFormula &f, std::span<const int> assumptions,
                int64_t conflict_budget) {
  Solver s(f);
  s.set_conflict_budget(conflict_budget);
  return s.solve(assumptions);
}

SatResult solve_external(const CnfFormula &f, const std::string &solver_path,
                         std::span<const int> assumptions) {
  CnfFormula g = f;
  for (int l : assumptions) {
    g.clauses.push_back({l});
    g.num_vars = std::max(g.num_vars, std::abs(l));
  }
  char tmpl[] = "/tmp/mc2_cnf_XXXXXX";
  int fd = mkstemp(tmpl);
  if (fd < 0) throw Error("satkit: cannot create temporary file");
  {
    std::ofstream out(tmpl);
    out << write_dimacs(g);
  }
  std::string cmd = solver_path + " " + tmpl + " 2>/dev/null";
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    close(fd);
    std::remove(tmpl);
    throw Error("satkit: cannot run external solver");
  }
  std::string output;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  pclose(pipe);
  close(fd);
  std::remove(tmpl);

  SatResult r;
  r.model.assign(g.num_vars + 1, 0);
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("s SATISFIABLE", 0) == 0) r.status = SatStatus::Sat;
    else if (line.rfind("s UNSATISFIABLE", 0) == 0) r.status = SatStatus::Unsat;
    else if (!line.empty() && line[0] == 'v') {
      std::istringstream vs(line.substr(1));
      int l;
      while (vs >> l)
        if (l != 0 && std::abs(l) <= g.num_vars) r.model[std::abs(l)] = l > 0;
    }
  }
  if (!r.sat()) r.model.clear();
  return r;
}

SatResult solve_auto(const CnfFormula &f, std::span<const int> assumptions,
                     int64_t conflict_budget) {
  if (const char *path = std::getenv("MC2_SAT_SOLVER"); path && *path)
    return solve_external(f, path, assumptions);
  return solve(f, assumptions, conflict_budget);
}

}  // namespace mc2
