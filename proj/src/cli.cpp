#include "icm/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "icm/analysis.hpp"
#include "icm/bounds.hpp"
#include "icm/json_io.hpp"
#include "icm/yardstick.hpp"

namespace icm {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write '" + path + "'");
}

Machine load_machine(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_machine(text);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

std::vector<std::size_t> parse_injections(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw UsageError("--inject expects comma-separated step indices, got '" + item + "'");
    out.push_back(std::stoul(item));
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string describe_steps(const Machine& m, const Run& r, std::size_t first_index = 0) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const auto& st = r.steps[i];
    out << "  " << first_index + i << ": " << m.describe(m.transitions()[st.transition].label)
        << " [" << to_string(st.rule) << "] -> " << format_configuration(m, st.after) << "\n";
  }
  return out.str();
}

CommandOutcome verdict_outcome(const Machine& m, const Verdict& v, bool json) {
  CommandOutcome o;
  o.exit_code = std::holds_alternative<Unknown>(v) ? 2 : 0;
  if (json) {
    o.payload = dump(verdict_to_json(m, v));
    return o;
  }
  std::ostringstream out;
  out << verdict_name(v) << "\n";
  if (auto* t = std::get_if<Terminating>(&v)) out << "longest run: " << t->longest_run << "\n";
  if (auto* u = std::get_if<Unknown>(&v)) out << "exhausted depth: " << u->exhausted_depth << "\n";
  if (auto* n = std::get_if<NonTerminating>(&v)) {
    const auto& c = n->certificate;
    out << "cycle from " << format_configuration(m, c.segment.start) << "\n";
    out << "prefix (" << c.prefix.length() << " steps):\n" << describe_steps(m, c.prefix);
    out << "segment (" << c.segment.length() << " steps):\n"
        << describe_steps(m, c.segment, c.prefix.length());
    out << "equal channels:";
    for (auto ch : c.witness.members()) out << " " << m.channel_name(ch);
    out << "\n";
  }
  o.payload = out.str();
  return o;
}

struct Options {
  std::string file, from, target, out, program, inject;
  std::size_t max_depth = Budget{}.max_depth;
  std::size_t max_expansions = Budget{}.max_expansions;
  std::size_t steps = 100;
  std::size_t max_steps = 1'000'000;
  std::uint64_t seed = 0;
  bool json = false, error_free = false, allow_large = false;
};

Budget budget_of(const Options& o) {
  if (o.max_depth == 0 || o.max_expansions == 0)
    throw UsageError("budgets must be positive");
  return {o.max_depth, o.max_expansions};
}

CommandOutcome cmd_check(const Options& o) {
  const Machine m = load_machine(o.file);
  const Configuration start = o.from.empty() ? initial_configuration(m) : parse_configuration(m, o.from);
  const Verdict v = check_termination_from(m, start, budget_of(o));
  return verdict_outcome(normalize_empty_tests(m), v, o.json);
}

CommandOutcome cmd_simulate(const Options& o, bool seeded) {
  const Machine m = load_machine(o.file);
  SimulationOptions s;
  s.mode = o.error_free ? Mode::ErrorFree : Mode::Lazy;
  s.policy = seeded ? Policy::SeededRandom : Policy::DeterministicFirst;
  s.seed = o.seed;
  s.max_steps = o.steps;
  for (auto i : parse_injections(o.inject)) s.injections.insert(i);
  const auto r = simulate(m, initial_configuration(m), s);
  CommandOutcome out;
  if (o.json) {
    out.payload = dump(simulation_to_json(m, r));
  } else {
    std::ostringstream text;
    text << "start " << format_configuration(m, r.run.start) << "\n"
         << describe_steps(m, r.run)
         << (r.stop == StopReason::Deadlock ? "deadlock" : "max steps reached") << " after "
         << r.run.length() << " steps\n";
    out.payload = text.str();
  }
  for (const auto& n : r.notes) out.diagnostics += "note: " + n + "\n";
  return out;
}

CommandOutcome cmd_reach(const Options& o) {
  const Machine m = load_machine(o.file);
  auto q = m.find_state(o.target);
  if (!q) throw Error("unknown target state '" + o.target + "'");
  Budget b = budget_of(o);
  const auto r = bounded_reachability(m, *q, b);
  CommandOutcome out;
  const auto* nf = std::get_if<NotFoundWithin>(&r);
  out.exit_code = nf && !nf->exhausted ? 2 : 0;
  if (o.json) {
    out.payload = dump(reach_to_json(m, r));
  } else if (auto* f = std::get_if<Found>(&r)) {
    out.payload = "found in " + std::to_string(f->run.length()) + " steps\n" + describe_steps(m, f->run);
  } else {
    out.payload = std::string(nf->exhausted ? "unreachable" : "not found") + " within depth " +
                  std::to_string(nf->depth) + "\n";
  }
  return out;
}

constexpr const char* kRecurrenceNote =
    "toolkit recurrence (concrete stand-in for the unprinted polynomial), over the normalized machine";

CommandOutcome cmd_bound(const Options& o) {
  const Machine m = load_machine(o.file);
  const Machine n = normalize_empty_tests(m);
  const BoundValue b = run_length_bound(n.state_count(), n.letter_count(), n.channel_count());
  CommandOutcome out;
  if (!o.json) {
    out.payload = bound_to_json(b).dump() + "\n# " + kRecurrenceNote + "\n";
    return out;
  }
  Json levels = Json::array();
  for (const auto& l : run_length_recurrence(n.state_count(), n.letter_count(), n.channel_count()))
    levels.push_back({{"level_bound", bound_to_json(l.level_bound)},
                      {"inverse_alpha", bound_to_json(l.inverse_alpha)},
                      {"gamma", bound_to_json(l.gamma)}});
  out.payload = dump({{"bound", bound_to_json(b)},
                      {"note", kRecurrenceNote},
                      {"states", n.state_count()},
                      {"letters", n.letter_count()},
                      {"channels", n.channel_count()},
                      {"levels", std::move(levels)}});
  return out;
}

CommandOutcome cmd_normalize(const Options& o) {
  const std::string text = serialize_machine(normalize_empty_tests(load_machine(o.file)));
  if (o.out.empty()) return {0, text, {}};
  write_file(o.out, text);
  return {};
}

CommandOutcome cmd_yardstick(const Options& o) {
  yardstick::CounterProgram p;
  try {
    p = yardstick::parse_counter_program(read_file(o.program));
  } catch (const ParseError& e) {
    throw Error(o.program + ": " + e.what());
  }
  const Machine m = yardstick::compile_counter_program(p, o.allow_large);
  const std::string text = serialize_machine(m);
  if (o.out.empty()) return {0, text, {}};
  write_file(o.out, text);
  return {0, {},
          "wrote " + o.out + " (" + std::to_string(m.state_count()) + " states, " +
              std::to_string(m.transitions().size()) + " transitions)\n"};
}

CommandOutcome cmd_counter_run(const Options& o) {
  yardstick::CounterProgram p;
  try {
    p = yardstick::parse_counter_program(read_file(o.file));
  } catch (const ParseError& e) {
    throw Error(o.file + ": " + e.what());
  }
  const auto r = yardstick::interpret_counter_program(p, o.max_steps);
  const bool halted = std::holds_alternative<yardstick::Halted>(r);
  auto fields = std::visit(
      [](const auto& x) { return std::tuple{x.steps, x.u1.get_str(), x.u2.get_str()}; }, r);
  const auto& [steps, u1, u2] = fields;
  CommandOutcome out;
  out.exit_code = halted ? 0 : 2;
  if (o.json) {
    out.payload = dump({{"result", halted ? "halted" : "running"},
                        {"steps", steps},
                        {"u1", u1},
                        {"u2", u2}});
  } else {
    out.payload = std::string(halted ? "halted" : "still running") + " after " +
                  std::to_string(steps) + " steps: u1=" + u1 + " u2=" + u2 + "\n";
  }
  return out;
}

}  // namespace

CommandOutcome run_command(const std::vector<std::string>& args) {
  CLI::App app{"Insertion channel machine toolkit", "icm"};
  app.require_subcommand(1);
  Options o;

  auto budget_flags = [&](CLI::App* sub) {
    sub->add_option("--max-depth", o.max_depth, "Deepest run explored");
    sub->add_option("--max-expansions", o.max_expansions, "Search nodes explored");
  };

  auto* check = app.add_subcommand("check", "Decide termination with a cycle certificate");
  check->add_option("file", o.file, "Machine (.icm)")->required();
  check->add_option("--from", o.from, "Start configuration 'q,c=word,...'");
  budget_flags(check);
  check->add_flag("--json", o.json);

  auto* sim = app.add_subcommand("simulate", "Simulate a run");
  sim->add_option("file", o.file, "Machine (.icm)")->required();
  sim->add_option("--steps", o.steps, "Maximum run length");
  auto* seed = sim->add_option("--seed", o.seed, "Seeded random step choice");
  sim->add_option("--inject", o.inject, "Step indices forced to InsertionRead, e.g. 3,5");
  sim->add_flag("--error-free", o.error_free, "Use the error-free semantics");
  sim->add_flag("--json", o.json);

  auto* reach = app.add_subcommand("reach", "Bounded reachability of a control state");
  reach->add_option("file", o.file, "Machine (.icm)")->required();
  reach->add_option("--target", o.target, "Target control state")->required();
  budget_flags(reach);
  reach->add_flag("--json", o.json);

  auto* bound = app.add_subcommand("bound", "Run-length bound");
  bound->add_option("file", o.file, "Machine (.icm)")->required();
  bound->add_flag("--json", o.json);

  auto* norm = app.add_subcommand("normalize", "Replace emptiness tests by occurrence tests");
  norm->add_option("file", o.file, "Machine (.icm)")->required();
  norm->add_option("-o", o.out, "Output file");

  auto* yard = app.add_subcommand("yardstick", "Compile a counter program to a machine");
  yard->add_option("--program", o.program, "Counter program (.cm)")->required();
  yard->add_option("-o", o.out, "Output file");
  yard->add_flag("--allow-large", o.allow_large, "Build levels above the desk-scale guard");

  auto* crun = app.add_subcommand("counter-run", "Interpret a counter program");
  crun->add_option("file", o.file, "Counter program (.cm)")->required();
  crun->add_option("--max-steps", o.max_steps, "Step limit");
  crun->add_flag("--json", o.json);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {0, app.help(), {}};
  } catch (const CLI::CallForAllHelp&) {
    return {0, app.help("", CLI::AppFormatMode::All), {}};
  } catch (const CLI::ParseError& e) {
    return {1, {}, std::string("error: ") + e.what() + "\n" + app.help()};
  }

  try {
    if (check->parsed()) return cmd_check(o);
    if (sim->parsed()) return cmd_simulate(o, seed->count() > 0);
    if (reach->parsed()) return cmd_reach(o);
    if (bound->parsed()) return cmd_bound(o);
    if (norm->parsed()) return cmd_normalize(o);
    if (yard->parsed()) return cmd_yardstick(o);
    if (crun->parsed()) return cmd_counter_run(o);
  } catch (const std::exception& e) {
    return {1, {}, std::string("error: ") + e.what() + "\n"};
  }
  return {1, {}, app.help()};
}

}  // namespace icm
