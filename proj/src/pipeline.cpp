#include "mc2/pipeline.hpp"

#include <utility>

#include "mc2/certcheck.hpp"
#include "mc2/tersim.hpp"
#include "mc2/transform.hpp"
#include "mc2/witness.hpp"

namespace mc2 {
namespace {

// Plain run on the input circuit itself; used when no abstraction
// candidate is usable and as the recovery path when a verification
// step downstream of the abstraction fails.
McResult direct_check(const Circuit &c, const McOptions &opt,
                      std::string note) {
  McResult r;
  r.note = std::move(note);
  Verdict v = run_engine(c, opt.engine, opt.engine_opt);
  r.status = v.status;
  r.depth = v.depth;
  if (v.status == Status::Unsafe) {
    r.trace = std::move(v.trace);
    return r;
  }
  if (v.status == Status::Safe && opt.want_certificate) {
    if (v.has_invariant) {
      r.certificate = terminal_witness(c, v);
      r.has_certificate = true;
      if (opt.self_check) {
        r.self_check_ok = certcheck::check(c, r.certificate).overall();
        if (!r.self_check_ok)
          r.note = "certificate failed the independent check";
      }
    } else if (r.note.empty()) {
      r.note = "certificate unavailable: backend produced no invariant";
    }
  }
  return r;
}

}  // namespace

McResult model_check(const Circuit &c, const McOptions &opt) {
  c.validate();

  std::vector<CubeLasso> lassos = find_lassos(c, opt.max_sim_steps);
  std::erase_if(lassos,
                [&](const CubeLasso &l) { return !verify_lasso(c, l).ok; });
  unsigned max_d = opt.no_forward ? 0 : opt.max_duration;
  std::vector<Candidate> cands =
      make_candidates(c, lassos, max_d, opt.max_phase);
  std::erase_if(cands, [](const Candidate &cd) { return !cd.usable; });
  if (cands.empty())
    return direct_check(c, opt,
                        "no usable abstraction candidate; checked directly");

  const Candidate &best = select_best(cands);
  McResult r;
  r.d = best.d;
  r.n = best.n;
  r.score = best.score;

  if (best.d > 0) {
    // forwarding discards the first d steps, so they get their own
    // bounded check first
    Verdict pre = bmc(c, best.d - 1, opt.engine_opt.conflict_budget);
    if (pre.status == Status::Unsafe) {
      r.status = Status::Unsafe;
      r.depth = pre.depth;
      r.trace = std::move(pre.trace);
      r.note = "counterexample within the startup prefix";
      return r;
    }
  }

  Stages st = run_pipeline(c, best.d, best.n, best.signals);
  Verdict v = run_engine(st.reduced, opt.engine, opt.engine_opt);
  r.depth = v.depth;

  if (v.status == Status::Unknown) {
    r.note = "backend inconclusive on the reduced circuit";
    return r;
  }

  if (v.status == Status::Unsafe) {
    // a reduced counterexample of k macro steps bounds an original one
    // by d + n*(k+1) micro steps; re-derive it concretely there
    unsigned bound = best.d + best.n * (v.depth + 1) + best.n;
    Verdict orig = bmc(c, bound, opt.engine_opt.conflict_budget);
    if (orig.status != Status::Unsafe)
      return direct_check(
          c, opt,
          "reduced counterexample did not concretize; checked directly");
    r.status = Status::Unsafe;
    r.depth = orig.depth;
    r.trace = std::move(orig.trace);
    return r;
  }

  // SAFE on the reduced circuit only transfers if the loop invariant
  // behind the factoring actually holds on the unfolded circuit
  LoopInvariant phi = build_loop_invariant(lassos[best.lasso], best.d, best.n);
  // cube literals decode against the circuit the lasso was found on;
  // forwarding renumbers variables but keeps the latch order
  if (!verify_loop_invariant(c, st.unfolded, phi, best.signals))
    return direct_check(c, opt,
                        "loop invariant failed verification; checked directly");

  r.status = Status::Safe;
  if (!opt.want_certificate) return r;
  if (best.d > 0) {
    r.note = "certificate unavailable: startup forwarding was applied";
    return r;
  }
  if (!v.has_invariant) {
    r.note = "certificate unavailable: backend produced no invariant";
    return r;
  }

  Circuit wt = terminal_witness(st.reduced, v);
  Circuit wc =
      composite_witness(st.forwarded, st.unfolded, lift_witness(wt), phi);
  r.certificate = fold_witness(c, st.unfolded, wc, best.n);
  r.has_certificate = true;
  if (opt.self_check) {
    r.self_check_ok = certcheck::check(c, r.certificate).overall();
    if (!r.self_check_ok) r.note = "certificate failed the independent check";
  }
  return r;
}

}  // namespace mc2
