#pragma once

// End-to-end model checking: lasso extraction, candidate selection,
// the preprocessing pipeline, a backend engine on the reduced circuit,
// and reconstruction of either an original-circuit counterexample or a
// certificate (witness circuit) for the original circuit.

#include <string>
#include <vector>

#include "mc2/engine.hpp"
#include "mc2/periodic.hpp"

namespace mc2 {

struct McOptions {
  std::string engine = "ic3";  // "bmc" | "kind" | "ic3" | "portfolio"
  unsigned max_phase = 8;      // cap on the unfolding factor n
  unsigned max_duration = 8;   // cap on the startup duration d
  bool no_forward = false;     // restrict candidates to d = 0
  bool want_certificate = true;
  bool self_check = true;  // run the certificate checker on the result
  EngineOptions engine_opt;
  unsigned max_sim_steps = 1000;  // ternary simulation horizon
};

struct McResult {
  Status status = Status::Unknown;
  std::vector<TraceStep> trace;  // iff Unsafe: replayable on the input
  bool has_certificate = false;
  Circuit certificate;  // iff has_certificate: witness for the input
  bool self_check_ok = false;
  unsigned d = 0;  // selected startup duration
  unsigned n = 1;  // selected phase count
  long score = -1;
  unsigned depth = 0;  // backend depth (cex length / frame / k)
  std::string note;    // human-readable disposition
};

McResult model_check(const Circuit &c, const McOptions &opt = {});

}  // namespace mc2
