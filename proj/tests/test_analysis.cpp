#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "icm/analysis.hpp"
#include "support/suite.hpp"

using namespace icm;

namespace {

Machine machine(const std::string& alphabet, const std::string& channels, const std::string& body) {
  return parse_machine("machine t\nalphabet " + alphabet + "\nchannels " + channels + "\ninit q0\n" +
                       body);
}

/// Run from s following (transition, rule) pairs; fails the test on a
/// blocked step.
Run follow(const Machine& m, Configuration s, std::vector<std::pair<std::size_t, StepRule>> path) {
  Run r{s, {}, Mode::Lazy};
  for (auto [t, rule] : path) {
    auto next = apply_rule(m, s, t, rule);
    REQUIRE(next.has_value());
    r.steps.push_back({t, rule, s, *next});
    s = *next;
  }
  return r;
}

NonTerminating nonterminating(const Verdict& v) {
  REQUIRE(std::holds_alternative<NonTerminating>(v));
  return std::get<NonTerminating>(v);
}

std::size_t terminating(const Verdict& v) {
  REQUIRE(std::holds_alternative<Terminating>(v));
  return std::get<Terminating>(v).longest_run;
}

}  // namespace

TEST_CASE("certificate checking") {
  SUBCASE("single write, no tests") {
    const Machine m = machine("a", "c", "trans q0 q0 write c a\n");
    const Run seg = follow(m, parse_configuration(m, "q0,c=aa"), {{0, StepRule::WriteRule}});
    CHECK(check_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, {}}));
  }
  SUBCASE("test on c outside D with c!a in the segment") {
    const Machine m = machine("a", "c", "trans q0 q1 write c a\ntrans q1 q2 read c a\ntrans q2 q0 notin c a\n");
    const Run seg = follow(m, initial_configuration(m),
                           {{0, StepRule::WriteRule}, {1, StepRule::ConsumeRead}, {2, StepRule::OccurrenceTestRule}});
    CHECK_FALSE(check_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, {}}));
    CHECK(check_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, ChannelSubset({ChannelId{0}})}));
  }
  SUBCASE("test on c in D with equal endpoints") {
    const Machine m = machine("a b", "c", "trans q0 q1 write c b\ntrans q1 q2 read c b\ntrans q2 q0 notin c a\n");
    const Run seg = follow(m, parse_configuration(m, "q0,c=b"),
                           {{0, StepRule::WriteRule}, {1, StepRule::ConsumeRead}, {2, StepRule::OccurrenceTestRule}});
    CHECK(seg.end().contents[0] == seg.start.contents[0]);
    CHECK(check_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, ChannelSubset({ChannelId{0}})}));
  }
  SUBCASE("endpoints must agree on D") {
    const Machine m = machine("a", "c", "trans q0 q0 write c a\n");
    const Run seg = follow(m, initial_configuration(m), {{0, StepRule::WriteRule}});
    CHECK_FALSE(check_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, ChannelSubset({ChannelId{0}})}));
  }
  SUBCASE("malformed certificates throw") {
    const Machine m = machine("a", "c", "trans q0 q0 write c a\n");
    const Run seg = follow(m, initial_configuration(m), {{0, StepRule::WriteRule}});
    const Run empty{seg.start, {}, Mode::Lazy};
    CHECK_THROWS_AS(check_certificate(m, {empty, empty, {}}), CertificateError);
    const Run detached{seg.end(), {}, Mode::Lazy};
    CHECK_THROWS_AS(check_certificate(m, {detached, seg, {}}), CertificateError);
    Run broken = seg;
    broken.steps[0].rule = StepRule::ConsumeRead;
    CHECK_THROWS_AS(check_certificate(m, {empty, broken, {}}), CertificateError);
  }
}

TEST_CASE("certificate replay") {
  SUBCASE("write loop grows by one letter per copy") {
    const Machine m = machine("a", "c", "trans q0 q0 write c a\n");
    const Run seg = follow(m, initial_configuration(m), {{0, StepRule::WriteRule}});
    const Run r = replay_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, {}}, 3);
    CHECK(r.length() == 3);
    CHECK(r.end().contents[0].size() == 3);
  }
  SUBCASE("write-read-test cycle returns to the empty channel") {
    const Machine m = oracle::load("suite/machines/write_read_test.icm");
    const Run seg = follow(m, initial_configuration(m),
                           {{0, StepRule::WriteRule}, {1, StepRule::ConsumeRead}, {2, StepRule::OccurrenceTestRule}});
    const CycleCertificate c{Run{seg.start, {}, Mode::Lazy}, seg, ChannelSubset({ChannelId{0}})};
    const Run r = replay_certificate(m, c, 2);
    REQUIRE(r.length() == 6);
    CHECK(is_legal_run(m, r));
    CHECK(r.steps[2].after == initial_configuration(m));
    CHECK(r.steps[5].after == initial_configuration(m));
  }
  SUBCASE("channels outside D are read by insertion") {
    // c is tested for a but only b is written; the reads of c stay insertions.
    const Machine m = machine("a b", "c", "trans q0 q1 write c b\ntrans q1 q2 read c b\ntrans q2 q0 notin c a\n");
    const Run seg = follow(m, initial_configuration(m),
                           {{0, StepRule::WriteRule}, {1, StepRule::ConsumeRead}, {2, StepRule::OccurrenceTestRule}});
    const CycleCertificate c{Run{seg.start, {}, Mode::Lazy}, seg, {}};
    REQUIRE(check_certificate(m, c));
    const Run r = replay_certificate(m, c, 2);
    CHECK(is_legal_run(m, r));
    CHECK(r.steps[4].rule == StepRule::InsertionRead);
    for (const auto& st : r.steps)
      CHECK(st.after.contents[0].find(letter_char(*m.find_letter("a"))) == std::string::npos);
    CHECK(suite::certificate_problem(m, c) == "");
  }
  SUBCASE("invalid certificates are refused") {
    const Machine m = machine("a", "c", "trans q0 q0 write c a\n");
    const Run seg = follow(m, initial_configuration(m), {{0, StepRule::WriteRule}});
    CHECK_THROWS_AS(replay_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, ChannelSubset({ChannelId{0}})}, 2),
                    CertificateError);
    CHECK_THROWS_AS(replay_certificate(m, {Run{seg.start, {}, Mode::Lazy}, seg, {}}, 0), CertificateError);
  }
}

TEST_CASE("termination examples") {
  SUBCASE("write self-loop") {
    const Machine m = oracle::load("suite/machines/write_loop.icm");
    const auto n = nonterminating(check_termination(m));
    CHECK(n.certificate.segment.length() == 1);
    CHECK(n.certificate.witness.empty());
  }
  SUBCASE("single read") { CHECK(terminating(check_termination(oracle::load("suite/machines/single_read.icm"))) == 1); }
  SUBCASE("write then blocked test") {
    CHECK(terminating(check_termination(oracle::load("suite/machines/write_then_test.icm"))) == 1);
  }
  SUBCASE("write-read-test cycle") {
    const Machine m = oracle::load("suite/machines/write_read_test.icm");
    const auto n = nonterminating(check_termination(m));
    CHECK(n.certificate.witness == ChannelSubset({ChannelId{0}}));
    CHECK(n.certificate.segment.start == initial_configuration(m));
  }
}

TEST_CASE("termination from a given configuration") {
  SUBCASE("initial configuration gives the same verdict") {
    for (const auto& f : oracle::suite_machine_files()) {
      const Machine m = parse_machine(oracle::read_text(f));
      CHECK(std::string(verdict_name(check_termination(m))) ==
            verdict_name(check_termination_from(m, initial_configuration(m))));
    }
  }
  SUBCASE("a pre-filled channel blocks the test") {
    const Machine m = oracle::load("suite/machines/write_then_test.icm");
    CHECK(terminating(check_termination_from(m, parse_configuration(m, "q0,c=a"))) <= 1);
  }
  SUBCASE("write loop from non-empty contents") {
    const Machine m = oracle::load("suite/machines/write_loop.icm");
    nonterminating(check_termination_from(m, parse_configuration(m, "q0,c=aaa")));
  }
}

TEST_CASE("test-free oracle") {
  CHECK(std::holds_alternative<NonTerminating>(
      testfree_termination_oracle(machine("a", "c", "trans q0 q0 write c a\n"))));
  CHECK(terminating(testfree_termination_oracle(
            machine("a b", "c", "trans q0 q1 read c a\ntrans q1 q2 write c b\n"))) == 2);
  const Machine two_cycle = machine("a b", "c", "trans q0 q1 write c a\ntrans q1 q0 read c a\ntrans q0 q2 read c b\n");
  const auto n = nonterminating(testfree_termination_oracle(two_cycle));
  CHECK(suite::certificate_problem(two_cycle, n.certificate) == "");
  CHECK_THROWS_AS(testfree_termination_oracle(oracle::load("suite/machines/write_then_test.icm")), Error);
}

TEST_CASE("bounded reachability") {
  SUBCASE("init is found with the empty run") {
    const Machine m = oracle::load("suite/machines/write_loop.icm");
    const auto r = bounded_reachability(m, m.init());
    REQUIRE(std::holds_alternative<Found>(r));
    CHECK(std::get<Found>(r).run.length() == 0);
  }
  SUBCASE("read reaches by insertion") {
    const Machine m = oracle::load("suite/machines/single_read.icm");
    const auto r = bounded_reachability(m, *m.find_state("q1"));
    REQUIRE(std::holds_alternative<Found>(r));
    const Run& run = std::get<Found>(r).run;
    REQUIRE(run.length() == 1);
    CHECK(run.steps[0].rule == StepRule::InsertionRead);
  }
  SUBCASE("blocked test is never passed") {
    const Machine m = machine("a", "c", "trans q0 q1 write c a\ntrans q1 q2 notin c a\n");
    for (std::size_t depth : {2u, 5u, 50u}) {
      const auto r = bounded_reachability(m, *m.find_state("q2"), {depth, 1000});
      REQUIRE(std::holds_alternative<NotFoundWithin>(r));
      CHECK(std::get<NotFoundWithin>(r).exhausted);
    }
  }
  SUBCASE("found runs are shortest") {
    const Machine m = machine("a", "c",
                              "trans q0 q1 write c a\ntrans q1 q2 write c a\ntrans q2 q3 write c a\n"
                              "trans q0 q3 read c a\n");
    const auto r = bounded_reachability(m, *m.find_state("q3"));
    REQUIRE(std::holds_alternative<Found>(r));
    CHECK(std::get<Found>(r).run.length() == 1);
    CHECK(is_legal_run(m, std::get<Found>(r).run));
  }
  SUBCASE("depth limit") {
    const Machine m = machine("a", "c", "trans q0 q0 write c a\ntrans q0 q1 empty c\n");
    const auto r = bounded_reachability(m, *m.find_state("q1"), {3, 1000});
    REQUIRE(std::holds_alternative<Found>(r));
    const Machine far = machine("a", "c", "trans q0 q0 write c a\ntrans q0 q1 write c a\ntrans q1 q2 write c a\n");
    const auto f = bounded_reachability(far, *far.find_state("q2"), {1, 1000});
    REQUIRE(std::holds_alternative<NotFoundWithin>(f));
    CHECK_FALSE(std::get<NotFoundWithin>(f).exhausted);
  }
}

TEST_CASE("curated suite verdicts") {
  const auto exp = suite::expectations();
  CHECK(exp.size() >= 20);
  for (const auto& e : exp) {
    CAPTURE(e.file);
    const Machine m = oracle::load("suite/machines/" + e.file);
    const Verdict v = check_termination(m);
    CHECK(suite::verdict_problem(e, normalize_empty_tests(m), v) == "");
    if (auto* n = std::get_if<NonTerminating>(&v))
      CHECK(suite::certificate_problem(normalize_empty_tests(m), n->certificate) == "");
    if (auto* t = std::get_if<Terminating>(&v)) {
      const Machine n = normalize_empty_tests(m);
      CHECK(oracle::longest_run(oracle::flatten(n), oracle::raw_initial(n), 64) == t->longest_run);
    }
  }
}

TEST_CASE("random machines: soundness, enumeration and monotonicity") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    oracle::MachineShape shape{1 + rng() % 4, 1 + rng() % 2, 1 + rng() % 2, rng() % 7, true, true};
    const Machine m = oracle::random_machine(rng, shape);
    const Machine n = normalize_empty_tests(m);
    CAPTURE(serialize_machine(m));
    const Verdict small = check_termination(m, {6, 20000});
    const Verdict big = check_termination(m, {40, 200000});
    if (!std::holds_alternative<Unknown>(small)) CHECK(std::string(verdict_name(small)) == verdict_name(big));
    if (auto* c = std::get_if<NonTerminating>(&big)) {
      CHECK(suite::certificate_problem(n, c->certificate) == "");
    }
    if (auto* t = std::get_if<Terminating>(&big)) {
      CHECK(oracle::longest_run(oracle::flatten(n), oracle::raw_initial(n), 60) == t->longest_run);
      const Verdict again = check_termination(m, {t->longest_run + 1, 200000});
      REQUIRE(std::holds_alternative<Terminating>(again));
      CHECK(std::get<Terminating>(again).longest_run == t->longest_run);
    }
    if (auto* c = std::get_if<NonTerminating>(&small)) {
      CHECK(suite::certificate_problem(n, c->certificate) == "");
    }
  }
}

TEST_CASE("test-free machines agree with the oracle") {
  std::mt19937_64 rng(99);
  for (std::size_t i = 0; i < 300; ++i) {
    const Machine m = suite::random_testfree(rng, i);
    CAPTURE(serialize_machine(m));
    const Verdict o = testfree_termination_oracle(m);
    const Verdict v = check_termination(m, {m.state_count() + 1, 1'000'000});
    REQUIRE(!std::holds_alternative<Unknown>(v));
    CHECK(std::string(verdict_name(v)) == verdict_name(o));
    if (auto* t = std::get_if<Terminating>(&v)) CHECK(t->longest_run == std::get<Terminating>(o).longest_run);
    if (auto* c = std::get_if<NonTerminating>(&o)) CHECK(suite::certificate_problem(m, c->certificate) == "");
  }
}

TEST_CASE("the equal-channel set dominates every other witness set") {
  std::mt19937_64 rng(5);
  std::size_t candidates = 0;
  for (int i = 0; i < 400; ++i) {
    const Machine m = oracle::random_machine(rng, {2, 2, 2, 6, true, false});
    SimulationOptions o;
    o.policy = Policy::SeededRandom;
    o.seed = rng();
    o.max_steps = 12;
    const Run run = simulate(m, initial_configuration(m), o).run;
    for (std::size_t a = 0; a < run.length(); ++a)
      for (std::size_t b = a + 1; b <= run.length(); ++b) {
        const Configuration& x = a == 0 ? run.start : run.steps[a - 1].after;
        const Configuration& y = run.steps[b - 1].after;
        if (x.state != y.state) continue;
        Run prefix{run.start, {run.steps.begin(), run.steps.begin() + static_cast<long>(a)}, Mode::Lazy};
        Run seg{x, {run.steps.begin() + static_cast<long>(a), run.steps.begin() + static_cast<long>(b)}, Mode::Lazy};
        std::vector<ChannelId> eq;
        for (std::uint32_t c = 0; c < m.channel_count(); ++c)
          if (x.contents[c] == y.contents[c]) eq.emplace_back(c);
        const bool with_eq = check_certificate(m, {prefix, seg, ChannelSubset(eq)});
        bool any = false;
        for (unsigned mask = 0; mask < (1u << m.channel_count()); ++mask) {
          std::vector<ChannelId> d;
          for (std::uint32_t c = 0; c < m.channel_count(); ++c)
            if (mask & (1u << c)) d.emplace_back(c);
          any = any || check_certificate(m, {prefix, seg, ChannelSubset(d)});
        }
        CHECK(any == with_eq);
        ++candidates;
      }
  }
  CHECK(candidates > 100);
}

TEST_CASE("budgets") {
  const Machine m = oracle::load("suite/machines/write_loop.icm");
  CHECK_THROWS_AS(check_termination(m, {0, 10}), Error);
  CHECK_THROWS_AS(check_termination(m, {10, 0}), Error);
  const Machine deep = machine("a", "c", "trans q0 q1 write c a\ntrans q1 q2 write c a\ntrans q2 q3 write c a\n");
  const Verdict v = check_termination(deep, {1, 100});
  REQUIRE(std::holds_alternative<Unknown>(v));
  CHECK(std::get<Unknown>(v).exhausted_depth == 1);
  CHECK(terminating(check_termination(deep, {3, 100})) == 3);
}
