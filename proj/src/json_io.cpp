#include "icm/json_io.hpp"

#include <sstream>

namespace icm {

std::string label_text(const Machine& m, const Label& l) {
  const std::string& c = m.channel_name(l.channel);
  switch (l.kind) {
    case LabelKind::Write: return "write " + c + " " + m.letter_name(*l.letter);
    case LabelKind::Read: return "read " + c + " " + m.letter_name(*l.letter);
    case LabelKind::OccurrenceTest: return "notin " + c + " " + m.letter_name(*l.letter);
    case LabelKind::EmptyTest: return "empty " + c;
  }
  return {};
}

Label parse_label_text(const Machine& m, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind, ch, letter, extra;
  in >> kind >> ch >> letter >> extra;
  if (!extra.empty()) throw Error("malformed label '" + std::string(text) + "'");
  auto c = m.find_channel(ch);
  if (!c) throw Error("undeclared channel " + ch);
  if (kind == "empty") {
    if (!letter.empty()) throw Error("malformed label '" + std::string(text) + "'");
    return Label::empty_test(*c);
  }
  auto a = m.find_letter(letter);
  if (!a) throw Error("undeclared letter " + letter);
  if (kind == "write") return Label::write(*c, *a);
  if (kind == "read") return Label::read(*c, *a);
  if (kind == "notin") return Label::occurrence_test(*c, *a);
  throw Error("unknown label kind '" + kind + "'");
}

Json configuration_to_json(const Machine& m, const Configuration& s) {
  Json contents = Json::object();
  for (std::size_t c = 0; c < s.contents.size(); ++c)
    contents[m.channel_name(ChannelId{static_cast<std::uint32_t>(c)})] =
        format_word(m, s.contents[c]);
  return {{"state", m.state_name(s.state)}, {"contents", std::move(contents)}};
}

Configuration configuration_from_json(const Machine& m, const Json& j) {
  auto q = m.find_state(j.at("state").get<std::string>());
  if (!q) throw Error("unknown state in configuration");
  Configuration s{*q, std::vector<Word>(m.channel_count())};
  for (const auto& [name, word] : j.at("contents").items()) {
    auto c = m.find_channel(name);
    if (!c) throw Error("undeclared channel " + name);
    s.contents[c->index()] = parse_word(m, word.get<std::string>());
  }
  validate_configuration(m, s);
  return s;
}

Json steps_to_json(const Machine& m, const Run& r) {
  Json steps = Json::array();
  for (const auto& st : r.steps) {
    const auto& t = m.transitions()[st.transition];
    Json contents = configuration_to_json(m, st.after)["contents"];
    steps.push_back({{"from", m.state_name(t.source)},
                     {"label", label_text(m, t.label)},
                     {"variant", to_string(st.rule)},
                     {"state", m.state_name(t.target)},
                     {"contents", std::move(contents)}});
  }
  return steps;
}

Json run_to_json(const Machine& m, const Run& r) {
  return {{"mode", r.mode == Mode::Lazy ? "lazy" : "error-free"},
          {"start", configuration_to_json(m, r.start)},
          {"steps", steps_to_json(m, r)}};
}

Run run_from_json(const Machine& m, const Json& j) {
  Run r;
  const std::string mode = j.value("mode", "lazy");
  if (mode != "lazy" && mode != "error-free") throw Error("unknown mode '" + mode + "'");
  r.mode = mode == "lazy" ? Mode::Lazy : Mode::ErrorFree;
  r.start = configuration_from_json(m, j.at("start"));
  Configuration cur = r.start;
  for (const auto& st : j.at("steps")) {
    const Label l = parse_label_text(m, st.at("label").get<std::string>());
    auto from = m.find_state(st.at("from").get<std::string>());
    auto to = m.find_state(st.at("state").get<std::string>());
    auto rule = step_rule_from_string(st.at("variant").get<std::string>());
    if (!from || !to || !rule) throw Error("malformed run step");
    if (*from != cur.state) throw Error("run step does not continue from the current state");
    std::optional<std::size_t> index;
    for (auto t : m.outgoing(*from))
      if (m.transitions()[t].label == l && m.transitions()[t].target == *to) index = t;
    if (!index) throw Error("run step matches no transition: " + st.at("label").get<std::string>());
    auto after = apply_rule(m, cur, *index, *rule);
    if (!after) throw Error("run step is not licensed by its variant");
    r.steps.push_back({*index, *rule, cur, *after});
    cur = std::move(*after);
  }
  return r;
}

Json simulation_to_json(const Machine& m, const SimulationResult& r) {
  Json j = run_to_json(m, r.run);
  j["stop"] = r.stop == StopReason::Deadlock ? "deadlock" : "max_steps";
  j["notes"] = r.notes;
  return j;
}

Json verdict_to_json(const Machine& m, const Verdict& v) {
  Json j = {{"verdict", verdict_name(v)}};
  if (auto* t = std::get_if<Terminating>(&v)) j["longest_run"] = t->longest_run;
  if (auto* u = std::get_if<Unknown>(&v)) j["exhausted_depth"] = u->exhausted_depth;
  if (auto* n = std::get_if<NonTerminating>(&v)) {
    const auto& c = n->certificate;
    Json equal = Json::array();
    for (auto ch : c.witness.members()) equal.push_back(m.channel_name(ch));
    j["certificate"] = {{"start", configuration_to_json(m, c.prefix.start)},
                        {"prefix", steps_to_json(m, c.prefix)},
                        {"segment", steps_to_json(m, c.segment)},
                        {"equal_channels", std::move(equal)}};
  }
  return j;
}

Verdict verdict_from_json(const Machine& m, const Json& j) {
  const std::string name = j.at("verdict").get<std::string>();
  if (name == "terminating") return Terminating{j.at("longest_run").get<std::size_t>()};
  if (name == "unknown") return Unknown{j.at("exhausted_depth").get<std::size_t>()};
  if (name != "nonterminating") throw Error("unknown verdict '" + name + "'");
  const Json& c = j.at("certificate");
  CycleCertificate cert;
  cert.prefix = run_from_json(m, {{"start", c.at("start")}, {"steps", c.at("prefix")}});
  cert.segment = run_from_json(
      m, {{"start", configuration_to_json(m, cert.prefix.end())}, {"steps", c.at("segment")}});
  std::vector<ChannelId> d;
  for (const auto& name_j : c.at("equal_channels")) {
    auto ch = m.find_channel(name_j.get<std::string>());
    if (!ch) throw Error("undeclared channel in certificate");
    d.push_back(*ch);
  }
  cert.witness = ChannelSubset(std::move(d));
  if (!check_certificate(m, cert)) throw Error("certificate does not check");
  return NonTerminating{std::move(cert)};
}

Json reach_to_json(const Machine& m, const ReachResult& r) {
  if (auto* f = std::get_if<Found>(&r))
    return {{"result", "found"}, {"length", f->run.length()}, {"run", run_to_json(m, f->run)}};
  const auto& n = std::get<NotFoundWithin>(r);
  return {{"result", "not_found"}, {"depth", n.depth}, {"exhausted", n.exhausted}};
}

Json bound_to_json(const BoundValue& b) {
  if (b.is_exact()) return {{"exact", b.value().get_str()}};
  return {{"tower_height", b.height()}, {"top", b.top().get_str()}};
}

BoundValue bound_from_json(const Json& j) {
  if (j.contains("exact")) return BoundValue::exact(mpz_class(j.at("exact").get<std::string>()));
  return BoundValue::tower(j.at("tower_height").get<std::size_t>(),
                           mpz_class(j.at("top").get<std::string>()));
}

}  // namespace icm
