#pragma once

// Standalone certificate checker. Given a model circuit and a witness
// circuit it verifies stratification plus six SAT checks (A-F):
//   A  every witness reset state satisfies the invariant Q (= ~bad)
//   B  Q is preserved by the witness transition for any next inputs
//   C  Q implies the witness's declared target property
//   D  reset functions of common latches are equivalent
//   E  transition functions of common latches are equivalent
//   F  Q implies the model's property
// Variables are identified across the two circuits by effective name.
// The checker is intentionally limited to the parsed circuit structure
// and the SAT service; it re-derives stratification and all encodings
// itself so a bug in the model checker's transformation code cannot
// also hide the evidence.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mc2/aiger_io.hpp"

namespace mc2::certcheck {

enum class Outcome { Pass, Fail, Unknown };

struct CheckResult {
  Outcome outcome = Outcome::Unknown;
  // on Fail backed by a SAT model: labeled values of the named
  // variables of every frame involved in the query
  std::vector<std::pair<std::string, uint8_t>> model;
  bool pass() const { return outcome == Outcome::Pass; }
};

// name-keyed correspondence; first index into the model, second into
// the witness
struct CommonMap {
  std::vector<std::pair<unsigned, unsigned>> inputs;
  std::vector<std::pair<unsigned, unsigned>> latches;
};

// throws Error when either circuit repeats an effective name
CommonMap match_common(const Circuit &model, const Circuit &witness);

struct CheckReport {
  bool stratified = false;
  CheckResult a, b, c, d, e, f;
  unsigned common_inputs = 0;
  unsigned common_latches = 0;
  bool overall() const {
    return stratified && a.pass() && b.pass() && c.pass() && d.pass() &&
           e.pass() && f.pass();
  }
  std::string to_json() const;
};

struct CheckOptions {
  std::string dump_cnf_dir;      // when nonempty, one DIMACS file per check
  int64_t conflict_budget = -1;  // per SAT call; < 0 unlimited
};

// Stratification failure aborts the SAT checks (they stay Unknown).
// Solver Unknown is never a pass.
CheckReport check(const Circuit &model, const Circuit &witness,
                  const CheckOptions &opt = {});

// Diagnostic (assumes check D passed): the witness reset predicate
// restricted to common latches must be unaffected by flipping any
// single non-common variable.
bool lemma1_probe(const Circuit &model, const Circuit &witness);

}  // namespace mc2::certcheck
