#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "icm/model.hpp"
#include "icm/semantics.hpp"

namespace icm {

/// A run prefix reaching s, a segment s => s', and the channel set D with
/// s ==_D s'. Valid certificates witness an infinite run: every occurrence
/// test a-notin-c of the segment has c in D or no c!a in the segment.
struct CycleCertificate {
  Run prefix;
  Run segment;
  ChannelSubset witness;
};

class CertificateError : public Error {
 public:
  using Error::Error;
};

struct Budget {
  std::size_t max_depth = 10000;
  std::size_t max_expansions = 1'000'000;
};

struct Terminating {
  std::size_t longest_run = 0;
};
struct NonTerminating {
  CycleCertificate certificate;
};
struct Unknown {
  std::size_t exhausted_depth = 0;
};

using Verdict = std::variant<Terminating, NonTerminating, Unknown>;

const char* verdict_name(const Verdict& v);

/// Throws CertificateError when prefix or segment is not a legal run of m,
/// when they do not chain, or when the segment is empty. Otherwise reports
/// whether the endpoint equivalence and the test condition both hold.
/// Emptiness tests in the segment are treated as tests for every letter.
bool check_certificate(const Machine& m, const CycleCertificate& cert);

/// prefix, then the original segment, then times-1 further copies of its
/// labels. Copies keep the original rule on channels of D and read every
/// other channel by insertion.
Run replay_certificate(const Machine& m, const CycleCertificate& cert, std::size_t times);

/// Iterative-deepening search of the lazy run tree from (init, empty). The
/// machine is normalized first; certificates refer to
/// normalize_empty_tests(m).
Verdict check_termination(const Machine& m, const Budget& b = {});
Verdict check_termination_from(const Machine& m, const Configuration& start,
                               const Budget& b = {});

/// Exact answer for machines without tests: reachable control cycle or
/// longest path. Throws Error if m has tests.
Verdict testfree_termination_oracle(const Machine& m);

struct Found {
  Run run;
};
struct NotFoundWithin {
  std::size_t depth = 0;
  bool exhausted = false;  // the whole reachable configuration space was seen
};
using ReachResult = std::variant<Found, NotFoundWithin>;

/// Breadth-first search for a configuration with control state target.
ReachResult bounded_reachability(const Machine& m, StateId target, const Budget& b = {});

}  // namespace icm
