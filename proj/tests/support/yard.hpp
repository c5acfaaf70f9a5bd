#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "icm/bounds.hpp"
#include "icm/semantics.hpp"
#include "icm/yardstick.hpp"
#include "support/oracles.hpp"

namespace yard {

using icm::yardstick::CounterGadget;
using icm::yardstick::CounterOp;

/// Growth law |S_(k+1)| <= kGrowthC1 * |S_k|^kGrowthC2, sizes = |Q| + |Delta|.
inline constexpr double kGrowthC1 = 100.0;
inline constexpr double kGrowthC2 = 1.0;

inline icm::StateId entry_of(const CounterGadget& g, CounterOp op) {
  switch (op) {
    case CounterOp::Inc: return g.ports.inc[0].entry;
    case CounterOp::Dec: return g.ports.dec[0].entry;
    case CounterOp::Reset: return g.ports.reset[0].entry;
    case CounterOp::IsZero: return g.ports.is_zero[0].entry;
  }
  return {};
}

inline std::vector<icm::StateId> exits_of(const CounterGadget& g, CounterOp op) {
  switch (op) {
    case CounterOp::Inc: return {g.ports.inc[0].exit};
    case CounterOp::Dec: return {g.ports.dec[0].exit};
    case CounterOp::Reset: return {g.ports.reset[0].exit};
    case CounterOp::IsZero: return {*g.ports.is_zero[0].exit_true, *g.ports.is_zero[0].exit_false};
  }
  return {};
}

struct FaultOutcome {
  std::size_t reads = 0;        // read steps in the fault-free Inc
  std::size_t escapes = 0;      // faults not caught in time
  std::size_t caught_in_inc = 0;
  std::size_t caught_in_next = 0;
  std::size_t illegal_runs = 0;
};

/// For every read of one error-free Inc from the clean configuration of v,
/// replays the Inc with that read forced to an insertion, then continues
/// error-free into `next`. A fault is caught when the run deadlocks before
/// Inc exits, or in `next` before any of next's emptiness tests fires.
inline FaultOutcome inc_faults(const CounterGadget& g, unsigned long v, CounterOp next,
                               std::size_t max_steps = 100000) {
  const icm::Machine& m = g.fragment;
  const auto inc_exit = g.ports.inc[0].exit;
  FaultOutcome out;

  // Count the reads of the fault-free Inc.
  {
    icm::Configuration s = icm::yardstick::clean_configuration(g, v, g.ports.inc[0].entry);
    for (std::size_t n = 0; n < max_steps && s.state != inc_exit; ++n) {
      auto steps = icm::enabled_steps(m, s, icm::Mode::ErrorFree);
      if (steps.empty()) break;
      if (m.transitions()[steps[0].transition].label.kind == icm::LabelKind::Read) ++out.reads;
      s = steps[0].after;
    }
  }

  for (std::size_t fault = 0; fault < out.reads; ++fault) {
    icm::Run run{icm::yardstick::clean_configuration(g, v, g.ports.inc[0].entry), {}, icm::Mode::Lazy};
    icm::Configuration s = run.start;
    std::size_t reads_seen = 0;
    bool in_next = false, caught = false, escaped = false;
    const auto next_exits = exits_of(g, next);
    for (std::size_t n = 0; n < max_steps; ++n) {
      if (!in_next && s.state == inc_exit) {
        in_next = true;
        s.state = entry_of(g, next);
        run.steps.clear();
        run.start = s;
      }
      if (in_next && std::ranges::find(next_exits, s.state) != next_exits.end()) {
        escaped = true;
        break;
      }
      auto steps = icm::enabled_steps(m, s, icm::Mode::ErrorFree);
      const bool is_read = !in_next && !steps.empty() &&
                           m.transitions()[steps[0].transition].label.kind == icm::LabelKind::Read;
      if (is_read && reads_seen++ == fault) {
        const auto t = steps[0].transition;
        auto after = icm::apply_rule(m, s, t, icm::StepRule::InsertionRead);
        steps = {{t, icm::StepRule::InsertionRead, s, *after}};
      }
      if (steps.empty()) {
        caught = true;
        break;
      }
      if (in_next && m.transitions()[steps[0].transition].label.kind == icm::LabelKind::EmptyTest) {
        escaped = true;
        break;
      }
      run.steps.push_back(steps[0]);
      s = steps[0].after;
    }
    if (!icm::is_legal_run(m, run)) ++out.illegal_runs;
    if (caught && !escaped) {
      (in_next ? out.caught_in_next : out.caught_in_inc) += 1;
    } else {
      ++out.escapes;
    }
  }
  return out;
}

struct CompiledRun {
  bool halted = false;
  std::size_t steps = 0;
  bool deterministic = true;
  std::optional<std::pair<mpz_class, mpz_class>> counters;
};

/// Error-free execution of a compiled program until deadlock.
inline CompiledRun run_compiled(const icm::yardstick::CompiledProgram& c, std::size_t max_steps) {
  CompiledRun out;
  icm::Configuration s = icm::initial_configuration(c.machine);
  for (; out.steps < max_steps; ++out.steps) {
    auto steps = icm::enabled_steps(c.machine, s, icm::Mode::ErrorFree);
    if (steps.size() > 1) out.deterministic = false;
    if (steps.empty()) {
      out.halted = true;
      out.counters = icm::yardstick::decode_halt(c, s);
      return out;
    }
    s = std::move(steps[0].after);
  }
  return out;
}

}  // namespace yard
