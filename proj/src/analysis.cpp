#include "icm/analysis.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <unordered_map>

namespace icm {

const char* verdict_name(const Verdict& v) {
  if (std::holds_alternative<Terminating>(v)) return "terminating";
  if (std::holds_alternative<NonTerminating>(v)) return "nonterminating";
  return "unknown";
}

// ---------------------------------------------------------------------------
// Certificates

namespace {

bool test_condition_holds(const Machine& m, const Run& segment, const ChannelSubset& d) {
  const std::size_t nl = m.letter_count();
  std::vector<bool> written(m.channel_count() * nl, false);
  for (const auto& st : segment.steps) {
    const auto& l = m.transitions()[st.transition].label;
    if (l.kind == LabelKind::Write) written[l.channel.index() * nl + l.letter->index()] = true;
  }
  for (const auto& st : segment.steps) {
    const auto& l = m.transitions()[st.transition].label;
    if (!l.is_test() || d.contains(l.channel)) continue;
    const std::size_t base = l.channel.index() * nl;
    if (l.kind == LabelKind::OccurrenceTest) {
      if (written[base + l.letter->index()]) return false;
    } else {
      for (std::size_t a = 0; a < nl; ++a)
        if (written[base + a]) return false;
    }
  }
  return true;
}

bool equivalent_on(const Configuration& x, const Configuration& y, const ChannelSubset& d) {
  if (x.state != y.state) return false;
  return std::ranges::all_of(d.members(), [&](ChannelId c) {
    return x.contents[c.index()] == y.contents[c.index()];
  });
}

}  // namespace

bool check_certificate(const Machine& m, const CycleCertificate& cert) {
  cert.witness.validate(m);
  if (!is_legal_run(m, cert.prefix)) throw CertificateError("certificate prefix is not a legal run");
  if (!is_legal_run(m, cert.segment))
    throw CertificateError("certificate segment is not a legal run");
  if (cert.segment.start != cert.prefix.end())
    throw CertificateError("certificate segment does not continue the prefix");
  if (cert.segment.steps.empty()) throw CertificateError("certificate segment is empty");

  return equivalent_on(cert.segment.start, cert.segment.end(), cert.witness) &&
         test_condition_holds(m, cert.segment, cert.witness);
}

Run replay_certificate(const Machine& m, const CycleCertificate& cert, std::size_t times) {
  if (times == 0) throw CertificateError("replay needs at least one copy");
  if (!check_certificate(m, cert)) throw CertificateError("certificate is invalid");

  Run out;
  out.mode = Mode::Lazy;
  out.start = cert.prefix.start;
  out.steps = cert.prefix.steps;
  out.steps.insert(out.steps.end(), cert.segment.steps.begin(), cert.segment.steps.end());

  Configuration cur = cert.segment.end();
  for (std::size_t copy = 1; copy < times; ++copy) {
    for (const auto& original : cert.segment.steps) {
      const auto& l = m.transitions()[original.transition].label;
      StepRule rule = original.rule;
      if (l.kind == LabelKind::Read && !cert.witness.contains(l.channel))
        rule = StepRule::InsertionRead;
      auto next = apply_rule(m, cur, original.transition, rule);
      if (!next) throw CertificateError("replay blocked at " + m.describe(l));
      out.steps.push_back({original.transition, rule, cur, *next});
      cur = std::move(*next);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Termination search

namespace {

class DeepeningSearch {
 public:
  DeepeningSearch(const Machine& m, const Budget& b) : m_(m), budget_(b) {}

  Verdict run(const Configuration& start) {
    validate_configuration(m_, start);
    std::size_t completed = 0;
    for (std::size_t limit = 0; limit <= budget_.max_depth; ++limit) {
      auto outcome = iterate(start, limit);
      if (outcome == Outcome::Certificate) return NonTerminating{std::move(*certificate_)};
      if (outcome == Outcome::BudgetOut) return Unknown{completed};
      if (outcome == Outcome::Exhausted) return Terminating{longest_};
      completed = limit;
    }
    return Unknown{completed};
  }

 private:
  enum class Outcome { Certificate, Exhausted, Cut, BudgetOut };

  struct Frame {
    std::vector<Step> successors;
    std::size_t next = 0;
    // Undo record for the step that led to this frame.
    std::optional<std::size_t> key;
    long previous = -1;
    bool was_test = false;
  };

  std::size_t key_of(const Label& l) const {
    return l.channel.index() * m_.letter_count() + l.letter->index();
  }

  Outcome iterate(const Configuration& start, std::size_t limit) {
    const std::size_t keys = m_.channel_count() * m_.letter_count();
    last_write_.assign(keys, -1);
    last_test_.assign(keys, -1);
    path_.clear();
    rules_.clear();
    by_state_.assign(m_.state_count(), {});
    longest_ = 0;
    bool cut = false;

    std::vector<Frame> stack;
    if (auto o = enter(start, std::nullopt, stack, limit, cut)) return *o;

    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next == top.successors.size()) {
        leave(stack);
        continue;
      }
      Step st = std::move(top.successors[top.next++]);
      if (auto o = enter(std::move(st.after), std::make_pair(st.transition, st.rule), stack,
                         limit, cut))
        return *o;
    }
    return cut ? Outcome::Cut : Outcome::Exhausted;
  }

  // Pushes a node; returns an outcome when the iteration must stop.
  std::optional<Outcome> enter(Configuration cfg,
                               std::optional<std::pair<std::size_t, StepRule>> via,
                               std::vector<Frame>& stack, std::size_t limit, bool& cut) {
    if (++expansions_ > budget_.max_expansions) return Outcome::BudgetOut;

    Frame f;
    if (via) {
      const auto& l = m_.transitions()[via->first].label;
      const long pos = static_cast<long>(rules_.size());
      if (l.kind == LabelKind::Write || l.kind == LabelKind::OccurrenceTest) {
        f.key = key_of(l);
        f.was_test = l.kind == LabelKind::OccurrenceTest;
        auto& slot = f.was_test ? last_test_[*f.key] : last_write_[*f.key];
        f.previous = slot;
        slot = pos;
      }
      rules_.push_back(*via);
    }
    path_.push_back(std::move(cfg));
    const std::size_t depth = path_.size() - 1;
    longest_ = std::max(longest_, depth);
    const Configuration& here = path_.back();

    auto& same = by_state_[here.state.index()];
    for (auto it = same.rbegin(); it != same.rend(); ++it)
      if (try_certificate(*it, depth)) return Outcome::Certificate;
    same.push_back(depth);

    auto successors = enabled_steps(m_, here, Mode::Lazy);
    if (depth >= limit) {
      if (!successors.empty()) cut = true;
      successors.clear();
    }
    f.successors = std::move(successors);
    stack.push_back(std::move(f));
    return std::nullopt;
  }

  void leave(std::vector<Frame>& stack) {
    Frame& f = stack.back();
    if (f.key) (f.was_test ? last_test_ : last_write_)[*f.key] = f.previous;
    by_state_[path_.back().state.index()].pop_back();
    path_.pop_back();
    if (!rules_.empty() && stack.size() > 1) rules_.pop_back();
    stack.pop_back();
  }

  bool try_certificate(std::size_t i, std::size_t j) {
    const Configuration& a = path_[i];
    const Configuration& b = path_[j];
    std::vector<ChannelId> equal;
    std::vector<bool> in_d(m_.channel_count(), false);
    for (std::uint32_t c = 0; c < m_.channel_count(); ++c)
      if (a.contents[c] == b.contents[c]) {
        equal.emplace_back(c);
        in_d[c] = true;
      }
    const long from = static_cast<long>(i);
    for (std::size_t c = 0; c < m_.channel_count(); ++c) {
      if (in_d[c]) continue;
      for (std::size_t x = 0; x < m_.letter_count(); ++x) {
        const std::size_t k = c * m_.letter_count() + x;
        if (last_test_[k] >= from && last_write_[k] >= from) return false;
      }
    }
    CycleCertificate cert;
    cert.witness = ChannelSubset(std::move(equal));
    cert.prefix = slice(0, i);
    cert.segment = slice(i, j);
    certificate_ = std::move(cert);
    return true;
  }

  Run slice(std::size_t from, std::size_t to) const {
    Run r;
    r.mode = Mode::Lazy;
    r.start = path_[from];
    for (std::size_t k = from; k < to; ++k)
      r.steps.push_back({rules_[k].first, rules_[k].second, path_[k], path_[k + 1]});
    return r;
  }

  const Machine& m_;
  Budget budget_;
  std::size_t expansions_ = 0;
  std::size_t longest_ = 0;
  std::vector<Configuration> path_;
  std::vector<std::pair<std::size_t, StepRule>> rules_;
  std::vector<std::vector<std::size_t>> by_state_;
  std::vector<long> last_write_;
  std::vector<long> last_test_;
  std::optional<CycleCertificate> certificate_;
};

void validate_budget(const Budget& b) {
  if (b.max_depth == 0 || b.max_expansions == 0)
    throw Error("budget limits must be positive");
}

}  // namespace

Verdict check_termination(const Machine& m, const Budget& b) {
  return check_termination_from(m, initial_configuration(m), b);
}

Verdict check_termination_from(const Machine& m, const Configuration& start, const Budget& b) {
  validate_budget(b);
  validate_configuration(m, start);
  const Machine normalized = normalize_empty_tests(m);
  return DeepeningSearch(normalized, b).run(start);
}

// ---------------------------------------------------------------------------
// Exact oracle for test-free machines

Verdict testfree_termination_oracle(const Machine& m) {
  if (m.has_tests()) throw Error("the test-free oracle needs a machine without tests");

  enum class Mark { White, Grey, Black };
  const std::size_t n = m.state_count();
  std::vector<Mark> mark(n, Mark::White);
  std::vector<std::size_t> longest(n, 0);

  // Iterative post-order DFS over the control graph. Each frame remembers
  // the transition it took last, so a back edge yields the cycle directly.
  struct Frame {
    std::size_t state;
    std::size_t next = 0;
    std::size_t taken = 0;
  };
  std::vector<Frame> stack{{m.init().index()}};
  mark[m.init().index()] = Mark::Grey;
  while (!stack.empty()) {
    Frame& top = stack.back();
    auto out = m.outgoing(StateId{static_cast<std::uint32_t>(top.state)});
    if (top.next == out.size()) {
      for (auto t : out)
        longest[top.state] =
            std::max(longest[top.state], 1 + longest[m.transitions()[t].target.index()]);
      mark[top.state] = Mark::Black;
      stack.pop_back();
      continue;
    }
    top.taken = out[top.next++];
    const std::size_t r = m.transitions()[top.taken].target.index();
    if (mark[r] == Mark::Grey) {
      // Without tests every write and every (insertion) read is enabled.
      auto fire = [&](Run& run, std::size_t t) {
        const bool read = m.transitions()[t].label.kind == LabelKind::Read;
        const StepRule rule = read ? StepRule::InsertionRead : StepRule::WriteRule;
        Configuration before = run.end();
        auto after = apply_rule(m, before, t, rule);
        run.steps.push_back({t, rule, std::move(before), std::move(*after)});
      };
      CycleCertificate cert;
      cert.prefix.start = initial_configuration(m);
      std::size_t k = 0;
      for (; stack[k].state != r; ++k) fire(cert.prefix, stack[k].taken);
      cert.segment.start = cert.prefix.end();
      for (; k < stack.size(); ++k) fire(cert.segment, stack[k].taken);
      return NonTerminating{std::move(cert)};
    }
    if (mark[r] == Mark::White) {
      mark[r] = Mark::Grey;
      stack.push_back({r});
    }
  }
  return Terminating{longest[m.init().index()]};
}

// ---------------------------------------------------------------------------
// Bounded reachability

ReachResult bounded_reachability(const Machine& m, StateId target, const Budget& b) {
  validate_budget(b);
  if (target.index() >= m.state_count()) throw Error("target state out of range");

  struct Node {
    Configuration cfg;
    std::size_t parent;
    std::size_t transition;
    StepRule rule;
  };
  std::vector<Node> nodes;
  std::unordered_map<Configuration, std::size_t, ConfigurationHash> seen;
  auto rebuild = [&](std::size_t idx) {
    std::vector<std::size_t> chain;
    for (std::size_t k = idx; k != 0; k = nodes[k].parent) chain.push_back(k);
    Run r;
    r.mode = Mode::Lazy;
    r.start = nodes[0].cfg;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
      r.steps.push_back({nodes[*it].transition, nodes[*it].rule,
                         nodes[nodes[*it].parent].cfg, nodes[*it].cfg});
    return r;
  };

  nodes.push_back({initial_configuration(m), 0, 0, StepRule::WriteRule});
  seen.emplace(nodes[0].cfg, 0);
  if (m.init() == target) return Found{rebuild(0)};

  std::size_t frontier_begin = 0;
  std::size_t expansions = 0;
  for (std::size_t depth = 0; depth < b.max_depth; ++depth) {
    const std::size_t frontier_end = nodes.size();
    if (frontier_begin == frontier_end) return NotFoundWithin{depth, true};
    for (std::size_t k = frontier_begin; k < frontier_end; ++k) {
      if (++expansions > b.max_expansions) return NotFoundWithin{depth, false};
      for (auto& st : enabled_steps(m, nodes[k].cfg, Mode::Lazy)) {
        if (seen.contains(st.after)) continue;
        seen.emplace(st.after, nodes.size());
        nodes.push_back({std::move(st.after), k, st.transition, st.rule});
        if (nodes.back().cfg.state == target) return Found{rebuild(nodes.size() - 1)};
      }
    }
    frontier_begin = frontier_end;
  }
  return NotFoundWithin{b.max_depth, frontier_begin == nodes.size()};
}

}  // namespace icm
