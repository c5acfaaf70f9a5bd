#include "icm/semantics.hpp"

#include <random>

namespace icm {

const char* to_string(StepRule r) {
  switch (r) {
    case StepRule::WriteRule: return "WriteRule";
    case StepRule::ConsumeRead: return "ConsumeRead";
    case StepRule::InsertionRead: return "InsertionRead";
    case StepRule::EmptyTestRule: return "EmptyTestRule";
    case StepRule::OccurrenceTestRule: return "OccurrenceTestRule";
  }
  return "?";
}

std::optional<StepRule> step_rule_from_string(std::string_view s) {
  for (auto r : {StepRule::WriteRule, StepRule::ConsumeRead, StepRule::InsertionRead,
                 StepRule::EmptyTestRule, StepRule::OccurrenceTestRule})
    if (s == to_string(r)) return r;
  return std::nullopt;
}

std::optional<Configuration> apply_rule(const Machine& m, const Configuration& s,
                                        std::size_t t, StepRule r) {
  const auto& tr = m.transitions()[t];
  if (tr.source != s.state) return std::nullopt;
  const auto& w = s.contents[tr.label.channel.index()];
  const char a = tr.label.letter ? letter_char(*tr.label.letter) : '\0';

  switch (tr.label.kind) {
    case LabelKind::Write: {
      if (r != StepRule::WriteRule) return std::nullopt;
      Configuration next{tr.target, s.contents};
      next.contents[tr.label.channel.index()].push_back(a);
      return next;
    }
    case LabelKind::Read:
      if (r == StepRule::ConsumeRead) {
        if (w.empty() || w.front() != a) return std::nullopt;
        Configuration next{tr.target, s.contents};
        next.contents[tr.label.channel.index()].erase(0, 1);
        return next;
      }
      if (r == StepRule::InsertionRead) return Configuration{tr.target, s.contents};
      return std::nullopt;
    case LabelKind::EmptyTest:
      if (r != StepRule::EmptyTestRule || !w.empty()) return std::nullopt;
      return Configuration{tr.target, s.contents};
    case LabelKind::OccurrenceTest:
      if (r != StepRule::OccurrenceTestRule || w.find(a) != Word::npos) return std::nullopt;
      return Configuration{tr.target, s.contents};
  }
  return std::nullopt;
}

namespace {

StepRule natural_rule(LabelKind k) {
  switch (k) {
    case LabelKind::Write: return StepRule::WriteRule;
    case LabelKind::Read: return StepRule::ConsumeRead;
    case LabelKind::EmptyTest: return StepRule::EmptyTestRule;
    case LabelKind::OccurrenceTest: return StepRule::OccurrenceTestRule;
  }
  return StepRule::WriteRule;
}

}  // namespace

std::vector<Step> enabled_steps(const Machine& m, const Configuration& s, Mode mode) {
  std::vector<Step> out;
  for (std::size_t t : m.outgoing(s.state)) {
    const auto kind = m.transitions()[t].label.kind;
    auto rule = natural_rule(kind);
    if (auto next = apply_rule(m, s, t, rule)) out.push_back({t, rule, s, std::move(*next)});
    if (kind == LabelKind::Read && mode == Mode::Lazy)
      out.push_back({t, StepRule::InsertionRead, s, *apply_rule(m, s, t, StepRule::InsertionRead)});
  }
  return out;
}

bool is_legal_run(const Machine& m, const Run& r) {
  try {
    validate_configuration(m, r.start);
  } catch (const Error&) {
    return false;
  }
  const Configuration* prev = &r.start;
  for (const auto& st : r.steps) {
    if (st.before != *prev) return false;
    if (st.transition >= m.transitions().size()) return false;
    if (st.rule == StepRule::InsertionRead && r.mode != Mode::Lazy) return false;
    auto next = apply_rule(m, st.before, st.transition, st.rule);
    if (!next || *next != st.after) return false;
    prev = &st.after;
  }
  return true;
}

SimulationResult simulate(const Machine& m, const Configuration& s0,
                          const SimulationOptions& opts) {
  validate_configuration(m, s0);
  if (!opts.injections.empty()) {
    if (opts.mode != Mode::Lazy)
      throw Error("insertion injections require the lazy semantics");
    if (*opts.injections.rbegin() >= opts.max_steps)
      throw Error("injection index " + std::to_string(*opts.injections.rbegin()) +
                  " is out of range for " + std::to_string(opts.max_steps) + " steps");
  }

  SimulationResult res;
  res.run.start = s0;
  res.run.mode = opts.mode;
  std::mt19937_64 rng(opts.seed);
  Configuration cur = s0;

  while (res.run.steps.size() < opts.max_steps) {
    auto steps = enabled_steps(m, cur, opts.mode);
    if (steps.empty()) {
      res.stop = StopReason::Deadlock;
      break;
    }
    std::size_t pick = 0;
    if (opts.policy == Policy::SeededRandom) {
      pick = std::uniform_int_distribution<std::size_t>(0, steps.size() - 1)(rng);
    } else {
      pick = steps.size();
      for (std::size_t i = 0; i < steps.size() && pick == steps.size(); ++i)
        if (steps[i].rule != StepRule::InsertionRead) pick = i;
      if (pick == steps.size()) pick = 0;
    }
    Step chosen = std::move(steps[pick]);

    const std::size_t index = res.run.steps.size();
    if (opts.injections.contains(index)) {
      if (m.transitions()[chosen.transition].label.kind == LabelKind::Read) {
        chosen.rule = StepRule::InsertionRead;
        chosen.after = *apply_rule(m, cur, chosen.transition, StepRule::InsertionRead);
      } else {
        res.notes.push_back("injection at step " + std::to_string(index) +
                            " ignored: chosen transition is not a read");
      }
    }
    cur = chosen.after;
    res.run.steps.push_back(std::move(chosen));
  }
  for (auto i : opts.injections)
    if (i >= res.run.steps.size())
      res.notes.push_back("injection at step " + std::to_string(i) +
                          " not reached: run stopped earlier");
  return res;
}

}  // namespace icm
