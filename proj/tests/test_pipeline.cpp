#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mc2/aiger_io.hpp"
#include "mc2/certcheck.hpp"
#include "mc2/fuzz.hpp"
#include "mc2/pipeline.hpp"

using namespace mc2;

namespace {

std::string fixture(const std::string &name) {
  return std::string(MC2_FIXTURE_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("the toggle benchmark folds at two phases with a certificate") {
  Circuit c = read_aiger_file(fixture("fig5.aag"));
  McResult r = model_check(c);
  CHECK(r.status == Status::Safe);
  CHECK(r.d == 0);
  CHECK(r.n == 2);
  CHECK(r.score == 0);
  REQUIRE(r.has_certificate);
  CHECK(r.self_check_ok);
  // folded shape: 2 latches x 3 history copies, 3 init bits, 1 phase bit
  CHECK(r.certificate.num_inputs == 0);
  CHECK(r.certificate.num_latches() == 10);
  certcheck::CheckReport rep = certcheck::check(c, r.certificate);
  CHECK(rep.overall());
}

TEST_CASE("an unsafe circuit yields a replayable counterexample") {
  CircuitBuilder b;
  Lit t = b.add_latch("t"), c = b.add_latch("c");
  b.set_next(t, c);
  b.set_next(c, negate(c));
  b.set_reset(t, lit_false);
  b.set_reset(c, lit_false);
  b.set_bad(b.make_and(t, negate(c)));  // holds at time 2
  Circuit circ = b.finish();
  McResult r = model_check(circ);
  CHECK(r.status == Status::Unsafe);
  REQUIRE(!r.trace.empty());
  CHECK(replay_trace(circ, r.trace));
}

TEST_CASE("forwarding can be disabled") {
  Circuit c = read_aiger_file(fixture("fig5.aag"));
  McOptions opt;
  opt.no_forward = true;
  McResult r = model_check(c, opt);
  CHECK(r.status == Status::Safe);
  CHECK(r.d == 0);
}

TEST_CASE("verdicts match the explicit-state oracle across random circuits") {
  unsigned safe = 0, unsafe = 0, certified = 0;
  for (uint64_t seed = 0; seed < 150; ++seed) {
    Circuit c = fuzz_circuit(seed);
    CAPTURE(seed);
    bool expect = oracle_safe(c);
    McOptions opt;
    opt.engine = "portfolio";
    opt.max_duration = 4;
    opt.max_phase = 4;
    McResult r = model_check(c, opt);
    REQUIRE(r.status != Status::Unknown);
    CHECK((r.status == Status::Safe) == expect);
    if (r.status == Status::Unsafe) {
      ++unsafe;
      REQUIRE(!r.trace.empty());
      CHECK(replay_trace(c, r.trace));
    } else {
      ++safe;
      if (r.has_certificate) {
        CHECK(r.self_check_ok);
        CHECK(certcheck::check(c, r.certificate).overall());
        ++certified;
      }
    }
  }
  CHECK(safe > 30);
  CHECK(unsafe > 30);
  CHECK(certified > 20);
}
