// mc2: certifying hardware model checker with phase abstraction.
//
// Subcommands:
//   mc     model-check an AIGER circuit; emits a witness circuit on
//          SAFE runs and a replayable trace on UNSAFE runs
//   check  validate a (model, witness) pair with the independent
//          certificate checker
//   fuzz   differential testing against an explicit-state oracle
//   info   structural statistics, lassos and abstraction candidates
//
// Exit codes, `mc`:   0 safe, 10 unsafe, 2 parse error, 3 resource
//                     exhaustion, 4 certificate self-check failure
//             `check`: 0 pass, 1 fail, 2 parse error
//             `fuzz`:  0 clean, 1 discrepancy found, 2 bad input
//
// The MC2_SAT_SOLVER environment variable selects an external DIMACS
// solver binary for every SAT query; unset means the built-in solver.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mc2/certcheck.hpp"
#include "mc2/fuzz.hpp"
#include "mc2/pipeline.hpp"
#include "mc2/tersim.hpp"

using namespace mc2;
using nlohmann::json;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitUnsafe = 10;
constexpr int kExitParse = 2;
constexpr int kExitResource = 3;
constexpr int kExitSelfCheck = 4;

std::string status_name(Status s) {
  switch (s) {
    case Status::Safe: return "SAFE";
    case Status::Unsafe: return "UNSAFE";
    default: return "UNKNOWN";
  }
}

std::string bits(const std::vector<uint8_t> &v) {
  std::string s;
  for (uint8_t b : v) s += char('0' + b);
  return s;
}

void print_trace(const std::vector<TraceStep> &trace) {
  for (size_t k = 0; k < trace.size(); ++k)
    std::printf("  step %zu: inputs %s latches %s\n", k,
                bits(trace[k].inputs).c_str(), bits(trace[k].latches).c_str());
}

json trace_json(const std::vector<TraceStep> &trace) {
  json arr = json::array();
  for (const TraceStep &st : trace)
    arr.push_back({{"inputs", bits(st.inputs)}, {"latches", bits(st.latches)}});
  return arr;
}

int cmd_mc(const std::string &path, const McOptions &opt,
           const std::string &witness_out, bool as_json) {
  Circuit c = read_aiger_file(path);
  McResult r = model_check(c, opt);
  if (r.status == Status::Unknown) {
    std::fprintf(stderr, "mc2: inconclusive: %s\n", r.note.c_str());
    return kExitResource;
  }
  if (r.has_certificate && !witness_out.empty())
    write_aiger_file(r.certificate, witness_out);
  if (as_json) {
    json j = {{"status", status_name(r.status)},
              {"d", r.d},
              {"n", r.n},
              {"score", r.score},
              {"depth", r.depth},
              {"certificate", r.has_certificate},
              {"self_check", r.self_check_ok},
              {"note", r.note}};
    if (r.status == Status::Unsafe) j["trace"] = trace_json(r.trace);
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("%s d=%u n=%u depth=%u%s%s\n", status_name(r.status).c_str(),
                r.d, r.n, r.depth,
                r.has_certificate ? " certificate=yes" : "",
                r.note.empty() ? "" : (" (" + r.note + ")").c_str());
    if (r.status == Status::Unsafe) print_trace(r.trace);
  }
  if (r.status == Status::Unsafe) return kExitUnsafe;
  if (r.has_certificate && !r.self_check_ok) {
    std::fprintf(stderr,
                 "mc2: BUG: emitted certificate failed the independent "
                 "check\n");
    return kExitSelfCheck;
  }
  return kExitSafe;
}

int cmd_check(const std::string &model_path, const std::string &witness_path,
              const std::string &dump_dir, bool as_json) {
  Circuit m = read_aiger_file(model_path);
  Circuit w = read_aiger_file(witness_path);
  certcheck::CheckOptions opt;
  opt.dump_cnf_dir = dump_dir;
  certcheck::CheckReport rep = certcheck::check(m, w, opt);
  if (as_json) {
    std::printf("%s\n", rep.to_json().c_str());
  } else {
    auto line = [](const char *name, const certcheck::CheckResult &r) {
      const char *s = r.outcome == certcheck::Outcome::Pass   ? "pass"
                      : r.outcome == certcheck::Outcome::Fail ? "FAIL"
                                                              : "unknown";
      std::printf("check %s: %s\n", name, s);
    };
    std::printf("stratified: %s\n", rep.stratified ? "yes" : "NO");
    line("A (reset => Q)", rep.a);
    line("B (Q inductive)", rep.b);
    line("C (Q => property)", rep.c);
    line("D (common resets)", rep.d);
    line("E (common transitions)", rep.e);
    line("F (Q => model property)", rep.f);
    std::printf("common: %u inputs, %u latches\n", rep.common_inputs,
                rep.common_latches);
    std::printf("overall: %s\n", rep.overall() ? "PASS" : "FAIL");
  }
  return rep.overall() ? 0 : 1;
}

int cmd_fuzz(uint64_t seed, uint64_t count, const FuzzConfig &cfg,
             const McOptions &opt, const std::string &fail_dir) {
  uint64_t safe = 0, unsafe = 0, certified = 0, unchecked = 0, bad = 0;
  for (uint64_t s = seed; s < seed + count; ++s) {
    Circuit c = fuzz_circuit(s, cfg);
    McResult r = model_check(c, opt);
    std::string complaint;
    if (r.status == Status::Unknown) {
      complaint = "inconclusive verdict";
    } else {
      bool oracle_known = false, expect = false;
      try {
        expect = oracle_safe(c);
        oracle_known = true;
      } catch (const Error &) {
        ++unchecked;  // beyond the explicit-state budget
      }
      if (oracle_known && (r.status == Status::Safe) != expect)
        complaint = "verdict disagrees with the explicit-state oracle";
      else if (r.status == Status::Unsafe && !replay_trace(c, r.trace))
        complaint = "counterexample does not replay";
      else if (r.has_certificate &&
               !certcheck::check(c, r.certificate).overall())
        complaint = "emitted certificate fails the independent check";
    }
    if (!complaint.empty()) {
      ++bad;
      std::string p = fail_dir + "/fuzz_fail_" + std::to_string(s) + ".aag";
      write_aiger_file(c, p);
      std::fprintf(stderr, "seed %llu: %s (reproducer: %s)\n",
                   (unsigned long long)s, complaint.c_str(), p.c_str());
      continue;
    }
    if (r.status == Status::Safe) {
      ++safe;
      if (r.has_certificate) ++certified;
    } else {
      ++unsafe;
    }
  }
  std::printf(
      "fuzz: %llu circuits, %llu safe (%llu certified), %llu unsafe, "
      "%llu beyond oracle budget, %llu discrepancies\n",
      (unsigned long long)count, (unsigned long long)safe,
      (unsigned long long)certified, (unsigned long long)unsafe,
      (unsigned long long)unchecked, (unsigned long long)bad);
  return bad ? 1 : 0;
}

int cmd_info(const std::string &path) {
  Circuit c = read_aiger_file(path);
  std::printf("inputs %u\nlatches %u\nands %u\n", c.num_inputs,
              c.num_latches(), c.num_ands());
  StratResult strat = check_stratified(c);
  if (!strat.ok()) {
    std::printf("stratified no; reset cycle:");
    for (unsigned i : strat.cycle) std::printf(" l%u", i);
    std::printf("\n");
    return 0;
  }
  std::printf("stratified yes; order:");
  for (unsigned i : strat.order) std::printf(" l%u", i);
  std::printf("\n");
  CoiSet cone = coi(c);
  std::printf("coi inputs %u latches %u\n", cone.num_inputs(),
              cone.num_latches());
  std::vector<CubeLasso> lassos = find_lassos(c);
  std::printf("lassos %zu\n", lassos.size());
  for (size_t i = 0; i < lassos.size(); ++i)
    std::printf("  lasso %zu: delta=%u omega=%u\n", i, lassos[i].delta,
                lassos[i].omega);
  std::vector<Candidate> cands = make_candidates(c, lassos);
  for (const Candidate &cd : cands)
    std::printf("  candidate (%u,%u) score %ld%s\n", cd.d, cd.n, cd.score,
                cd.usable ? "" : " (unusable)");
  std::erase_if(cands, [](const Candidate &cd) { return !cd.usable; });
  if (!cands.empty()) {
    const Candidate &best = select_best(cands);
    std::printf("best candidate (%u,%u) score %ld\n", best.d, best.n,
                best.score);
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"certifying hardware model checker with phase abstraction"};
  app.require_subcommand(1);

  McOptions mco;
  std::string model_path, witness_path, witness_out, dump_dir, fail_dir = ".";
  bool as_json = false;
  uint64_t seed = 0, count = 1000;
  FuzzConfig fcfg;

  auto add_mc_flags = [&](CLI::App *cmd) {
    cmd->add_option("--engine", mco.engine, "bmc | kind | ic3 | portfolio")
        ->check(CLI::IsMember({"bmc", "kind", "ic3", "portfolio"}));
    cmd->add_option("--max-phase", mco.max_phase, "cap on the phase count n")
        ->check(CLI::Range(1u, 8u));
    cmd->add_option("--max-duration", mco.max_duration,
                    "cap on the startup duration d")
        ->check(CLI::Range(0u, 8u));
    cmd->add_flag("--no-forward", mco.no_forward,
                  "disable startup forwarding (d stays 0)");
  };

  CLI::App *mc = app.add_subcommand("mc", "model-check a circuit");
  mc->add_option("model", model_path, "AIGER (aag) file")->required();
  add_mc_flags(mc);
  mc->add_option("--witness", witness_out, "write the witness circuit here");
  mc->add_flag("--json", as_json, "machine-readable result");

  CLI::App *check = app.add_subcommand("check", "validate a certificate");
  check->add_option("model", model_path, "AIGER model")->required();
  check->add_option("witness", witness_path, "AIGER witness")->required();
  check->add_option("--dump-cnf", dump_dir, "write one DIMACS file per check");
  check->add_flag("--json", as_json, "machine-readable report");

  CLI::App *fuzz = app.add_subcommand("fuzz", "differential random testing");
  fuzz->add_option("--seed", seed, "first seed");
  fuzz->add_option("--count", count, "number of circuits");
  fuzz->add_option("--max-inputs", fcfg.max_inputs, "input cap")
      ->check(CLI::Range(1u, 8u));
  fuzz->add_option("--max-latches", fcfg.max_latches, "latch cap")
      ->check(CLI::Range(1u, 16u));
  fuzz->add_option("--max-gates", fcfg.max_gates, "gate cap");
  fuzz->add_option("--fail-dir", fail_dir, "where reproducers are written");
  add_mc_flags(fuzz);

  CLI::App *info = app.add_subcommand("info", "structural statistics");
  info->add_option("model", model_path, "AIGER (aag) file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mc->parsed()) return cmd_mc(model_path, mco, witness_out, as_json);
    if (check->parsed())
      return cmd_check(model_path, witness_path, dump_dir, as_json);
    if (fuzz->parsed()) {
      McOptions fopt = mco;
      if (!fuzz->count("--engine")) fopt.engine = "portfolio";
      return cmd_fuzz(seed, count, fcfg, fopt, fail_dir);
    }
    return cmd_info(model_path);
  } catch (const ParseError &e) {
    std::fprintf(stderr, "mc2: parse error: %s\n", e.what());
    return kExitParse;
  } catch (const Error &e) {
    std::fprintf(stderr, "mc2: error: %s\n", e.what());
    return kExitParse;
  } catch (const std::bad_alloc &) {
    std::fprintf(stderr, "mc2: out of memory\n");
    return kExitResource;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "mc2: internal error: %s\n", e.what());
    return kExitResource;
  }
}
