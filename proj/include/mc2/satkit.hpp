#pragma once

// CNF satisfiability service: a small conflict-driven solver with
// two-watched-literal propagation, first-UIP learning and restarts,
// plus an escape hatch to an external solver over DIMACS files.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mc2/aiger_io.hpp"

namespace mc2 {

enum class SatStatus { Sat, Unsat, Unknown };

struct SatResult {
  SatStatus status = SatStatus::Unknown;
  std::vector<uint8_t> model;  // indexed by dimacs var, values 0/1; iff Sat
  bool sat() const { return status == SatStatus::Sat; }
  bool unsat() const { return status == SatStatus::Unsat; }
};

class Solver {
 public:
  Solver();
  explicit Solver(const CnfFormula &base);
  ~Solver();
  Solver(Solver &&) noexcept;
  Solver &operator=(Solver &&) noexcept;

  int new_var();
  int num_vars() const;
  void ensure_var(int v);
  void add_clause(std::span<const int> lits);
  void add_clause(std::initializer_list<int> lits) {
    add_clause(std::span<const int>(lits.begin(), lits.size()));
  }
  void add_formula(const CnfFormula &f);

  // budget < 0 means unlimited conflicts
  void set_conflict_budget(int64_t budget);
  SatResult solve(std::span<const int> assumptions = {});
  SatResult solve(std::initializer_list<int> assumptions) {
    return solve(std::span<const int>(assumptions.begin(), assumptions.size()));
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SatResult solve(const CnfFormula &f, std::span<const int> assumptions = {},
                int64_t conflict_budget = -1);

// Runs `solver_path <dimacs file>` and parses the "s"/"v" lines.
// Assumptions are encoded as unit clauses.
SatResult solve_external(const CnfFormula &f, const std::string &solver_path,
                         std::span<const int> assumptions = {});

// Consults the MC2_SAT_SOLVER environment variable; falls back to the
// built-in solver when unset.
SatResult solve_auto(const CnfFormula &f, std::span<const int> assumptions = {},
                     int64_t conflict_budget = -1);

}  // namespace mc2
