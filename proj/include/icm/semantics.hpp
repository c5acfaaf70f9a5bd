#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icm/model.hpp"

namespace icm {

enum class Mode { ErrorFree, Lazy };

/// Which operational rule licensed a step.
enum class StepRule { WriteRule, ConsumeRead, InsertionRead, EmptyTestRule, OccurrenceTestRule };

const char* to_string(StepRule r);
std::optional<StepRule> step_rule_from_string(std::string_view s);

struct Step {
  std::size_t transition = 0;  // index into Machine::transitions()
  StepRule rule = StepRule::WriteRule;
  Configuration before;
  Configuration after;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Run {
  Configuration start;
  std::vector<Step> steps;
  Mode mode = Mode::Lazy;

  std::size_t length() const { return steps.size(); }
  const Configuration& end() const { return steps.empty() ? start : steps.back().after; }
};

/// Applies transition t of m to s under rule r. Returns nothing when the rule
/// does not license the step from s. Rule InsertionRead is accepted here
/// regardless of mode; callers enforce the mode.
std::optional<Configuration> apply_rule(const Machine& m, const Configuration& s,
                                        std::size_t t, StepRule r);

/// All steps licensed from s, ordered by transition index and, for reads,
/// ConsumeRead before InsertionRead.
std::vector<Step> enabled_steps(const Machine& m, const Configuration& s, Mode mode);

bool is_legal_run(const Machine& m, const Run& r);

enum class Policy { DeterministicFirst, SeededRandom };

struct SimulationOptions {
  Mode mode = Mode::Lazy;
  Policy policy = Policy::DeterministicFirst;
  std::uint64_t seed = 0;
  std::size_t max_steps = 100;
  /// Step indices (0-based) at which a chosen read is forced to InsertionRead.
  std::set<std::size_t> injections;
};

enum class StopReason { MaxSteps, Deadlock };

struct SimulationResult {
  Run run;
  StopReason stop = StopReason::MaxSteps;
  /// Injections that could not be applied (non-read step, or never reached).
  std::vector<std::string> notes;
};

/// Runs m from s0. Deterministic-first picks the lowest-indexed step that is
/// not an InsertionRead, falling back to the lowest-indexed InsertionRead;
/// seeded-random picks uniformly among the enabled steps.
SimulationResult simulate(const Machine& m, const Configuration& s0,
                          const SimulationOptions& opts);

}  // namespace icm
