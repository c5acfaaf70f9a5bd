#include "icm/model.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

namespace icm {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
            what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Machine

namespace {

template <class IdT>
std::optional<IdT> lookup(const std::unordered_map<std::string, std::uint32_t>& table,
                          std::string_view n) {
  auto it = table.find(std::string(n));
  if (it == table.end()) return std::nullopt;
  return IdT{it->second};
}

}  // namespace

std::optional<StateId> Machine::find_state(std::string_view n) const {
  return lookup<StateId>(state_index_, n);
}
std::optional<LetterId> Machine::find_letter(std::string_view n) const {
  return lookup<LetterId>(letter_index_, n);
}
std::optional<ChannelId> Machine::find_channel(std::string_view n) const {
  return lookup<ChannelId>(channel_index_, n);
}

bool Machine::has_emptiness_tests() const {
  return std::ranges::any_of(transitions_, [](const Transition& t) {
    return t.label.kind == LabelKind::EmptyTest;
  });
}

bool Machine::has_tests() const {
  return std::ranges::any_of(transitions_,
                             [](const Transition& t) { return t.label.is_test(); });
}

std::string Machine::describe(const Label& l) const {
  const std::string& c = channel_name(l.channel);
  switch (l.kind) {
    case LabelKind::Write: return c + "!" + letter_name(*l.letter);
    case LabelKind::Read: return c + "?" + letter_name(*l.letter);
    case LabelKind::EmptyTest: return c + "=empty";
    case LabelKind::OccurrenceTest: return letter_name(*l.letter) + "!in " + c;
  }
  return {};
}

void Machine::index() {
  outgoing_.assign(states_.size(), {});
  for (std::size_t i = 0; i < transitions_.size(); ++i)
    outgoing_[transitions_[i].source.index()].push_back(i);
}

MachineBuilder::MachineBuilder(std::string name) { m_.name_ = std::move(name); }

namespace {

std::uint32_t intern(std::vector<std::string>& names,
                     std::unordered_map<std::string, std::uint32_t>& table, std::string_view n) {
  auto [it, inserted] =
      table.try_emplace(std::string(n), static_cast<std::uint32_t>(names.size()));
  if (inserted) names.emplace_back(n);
  return it->second;
}

}  // namespace

StateId MachineBuilder::state(std::string_view n) {
  return StateId{intern(m_.states_, m_.state_index_, n)};
}
LetterId MachineBuilder::letter(std::string_view n) {
  return LetterId{intern(m_.alphabet_, m_.letter_index_, n)};
}
ChannelId MachineBuilder::channel(std::string_view n) {
  return ChannelId{intern(m_.channels_, m_.channel_index_, n)};
}

void MachineBuilder::set_init(StateId q) {
  m_.init_ = q;
  init_set_ = true;
}

void MachineBuilder::add(StateId source, Label l, StateId target) {
  m_.transitions_.push_back({source, l, target});
}

Machine MachineBuilder::build() && {
  if (!init_set_) throw Error("machine '" + m_.name_ + "' has no init state");
  const auto nq = m_.states_.size();
  if (m_.init_.index() >= nq) throw Error("init state out of range");
  if (m_.alphabet_.size() > 256) throw Error("alphabets are limited to 256 letters");
  if (!m_.transitions_.empty() && m_.alphabet_.empty())
    throw Error("machine with transitions needs a non-empty alphabet");
  for (const auto& t : m_.transitions_) {
    if (t.source.index() >= nq || t.target.index() >= nq)
      throw Error("transition endpoint out of range");
    if (t.label.channel.index() >= m_.channels_.size())
      throw Error("transition references an undeclared channel");
    bool wants_letter = t.label.kind != LabelKind::EmptyTest;
    if (wants_letter != t.label.letter.has_value())
      throw Error("emptiness tests carry no letter; other labels carry exactly one");
    if (t.label.letter && t.label.letter->index() >= m_.alphabet_.size())
      throw Error("transition references an undeclared letter");
  }
  m_.index();
  return std::move(m_);
}

namespace {

using TransitionKey = std::tuple<std::string, int, std::string, std::string, std::string>;

std::multiset<TransitionKey> transition_keys(const Machine& m) {
  std::multiset<TransitionKey> keys;
  for (const auto& t : m.transitions())
    keys.emplace(m.state_name(t.source), static_cast<int>(t.label.kind),
                 m.channel_name(t.label.channel),
                 t.label.letter ? m.letter_name(*t.label.letter) : std::string(),
                 m.state_name(t.target));
  return keys;
}

std::set<std::string> name_set(std::span<const std::string> names) {
  return {names.begin(), names.end()};
}

}  // namespace

bool structurally_equal(const Machine& a, const Machine& b) {
  return a.name() == b.name() && name_set(a.states()) == name_set(b.states()) &&
         name_set(a.alphabet()) == name_set(b.alphabet()) &&
         name_set(a.channels()) == name_set(b.channels()) &&
         a.state_name(a.init()) == b.state_name(b.init()) &&
         transition_keys(a) == transition_keys(b);
}

std::size_t machine_size(const Machine& m) {
  return m.state_count() + m.transitions().size();
}

// ---------------------------------------------------------------------------
// Configurations

std::size_t ConfigurationHash::operator()(const Configuration& s) const {
  std::size_t h = std::hash<std::uint32_t>{}(s.state.value);
  for (const auto& w : s.contents)
    h ^= std::hash<std::string>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

Configuration initial_configuration(const Machine& m) {
  return {m.init(), std::vector<Word>(m.channel_count())};
}

void validate_configuration(const Machine& m, const Configuration& s) {
  if (s.state.index() >= m.state_count()) throw Error("configuration state out of range");
  if (s.contents.size() != m.channel_count())
    throw Error("configuration must hold exactly one word per channel");
  for (const auto& w : s.contents)
    for (char ch : w)
      if (char_letter(ch).index() >= m.letter_count())
        throw Error("configuration contains an undeclared letter");
}

namespace {

bool single_char_letters(const Machine& m) {
  return std::ranges::all_of(m.alphabet(), [](const std::string& a) { return a.size() == 1; });
}

}  // namespace

std::string format_word(const Machine& m, const Word& w) {
  const bool compact = single_char_letters(m);
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!compact && i > 0) out += '.';
    out += m.letter_name(char_letter(w[i]));
  }
  return out;
}

Word parse_word(const Machine& m, std::string_view text) {
  Word w;
  auto push = [&](std::string_view name) {
    auto a = m.find_letter(name);
    if (!a) throw Error("undeclared letter '" + std::string(name) + "'");
    w.push_back(letter_char(*a));
  };
  if (text.find('.') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto dot = text.find('.', start);
      auto part = text.substr(start, dot == std::string_view::npos ? dot : dot - start);
      push(part);
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return w;
  }
  if (!text.empty() && !single_char_letters(m)) {
    push(text);
    return w;
  }
  for (char ch : text) push(std::string_view(&ch, 1));
  return w;
}

Configuration parse_configuration(const Machine& m, std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto comma = text.find(',', start);
    parts.push_back(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  auto q = m.find_state(parts.front());
  if (!q) throw Error("unknown state '" + std::string(parts.front()) + "'");
  Configuration s{*q, std::vector<Word>(m.channel_count())};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto eq = parts[i].find('=');
    if (eq == std::string_view::npos)
      throw Error("expected CHANNEL=WORD, got '" + std::string(parts[i]) + "'");
    auto c = m.find_channel(parts[i].substr(0, eq));
    if (!c) throw Error("undeclared channel '" + std::string(parts[i].substr(0, eq)) + "'");
    s.contents[c->index()] = parse_word(m, parts[i].substr(eq + 1));
  }
  return s;
}

std::string format_configuration(const Machine& m, const Configuration& s) {
  std::string out = "(" + m.state_name(s.state);
  for (std::size_t c = 0; c < s.contents.size(); ++c)
    out += ", " + m.channel_name(ChannelId{static_cast<std::uint32_t>(c)}) + "=" +
           (s.contents[c].empty() ? std::string("eps") : format_word(m, s.contents[c]));
  return out + ")";
}

// ---------------------------------------------------------------------------
// Channel subsets and bounding functions

ChannelSubset::ChannelSubset(std::vector<ChannelId> members) : members_(std::move(members)) {
  std::ranges::sort(members_);
  auto dup = std::ranges::unique(members_);
  members_.erase(dup.begin(), dup.end());
}

ChannelSubset ChannelSubset::all(const Machine& m) {
  std::vector<ChannelId> cs;
  for (std::uint32_t c = 0; c < m.channel_count(); ++c) cs.emplace_back(c);
  return ChannelSubset(std::move(cs));
}

bool ChannelSubset::contains(ChannelId c) const {
  return std::ranges::binary_search(members_, c);
}

void ChannelSubset::validate(const Machine& m) const {
  for (auto c : members_)
    if (c.index() >= m.channel_count()) throw Error("channel subset member is not declared");
}

BoundingFunction::BoundingFunction(ChannelSubset domain, std::vector<std::uint64_t> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_.size())
    throw Error("bounding function must give one value per domain member");
}

BoundingFunction BoundingFunction::uniform(ChannelSubset domain, std::uint64_t bound) {
  std::vector<std::uint64_t> v(domain.size(), bound);
  return BoundingFunction(std::move(domain), std::move(v));
}

std::uint64_t BoundingFunction::operator()(ChannelId c) const {
  auto ms = domain_.members();
  auto it = std::ranges::lower_bound(ms, c);
  if (it == ms.end() || *it != c) throw Error("channel outside the bounding function's domain");
  return values_[static_cast<std::size_t>(it - ms.begin())];
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
           line[j] != '#')
      ++j;
    out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

struct PendingTransition {
  std::size_t line;
  std::vector<Token> tokens;
};

}  // namespace

Machine parse_machine(std::string_view text) {
  std::optional<std::string> name;
  std::vector<std::string> alphabet, channels, states;
  std::optional<std::pair<std::string, std::size_t>> init;
  std::vector<PendingTransition> pending;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    auto toks = tokenize(line);
    if (toks.empty()) continue;
    auto kw = toks[0].text;
    auto expect_args = [&](std::size_t n) {
      if (toks.size() != n + 1)
        throw ParseError(line_no, toks[0].column,
                         "'" + std::string(kw) + "' expects " + std::to_string(n) +
                             " argument(s)");
    };
    if (kw == "machine") {
      if (name) throw ParseError(line_no, toks[0].column, "duplicate machine header");
      expect_args(1);
      name = std::string(toks[1].text);
    } else if (kw == "alphabet" || kw == "channels" || kw == "states") {
      auto& dst = kw == "alphabet" ? alphabet : kw == "channels" ? channels : states;
      for (std::size_t i = 1; i < toks.size(); ++i) dst.emplace_back(toks[i].text);
    } else if (kw == "init") {
      if (init) throw ParseError(line_no, toks[0].column, "duplicate init statement");
      expect_args(1);
      init = {std::string(toks[1].text), toks[1].column};
    } else if (kw == "trans") {
      pending.push_back({line_no, toks});
    } else {
      throw ParseError(line_no, toks[0].column, "unknown statement '" + std::string(kw) + "'");
    }
  }
  if (!name) throw ParseError(1, 1, "missing machine header");
  if (!init) throw ParseError(line_no, 1, "missing init");

  MachineBuilder b(*name);
  for (const auto& a : alphabet) b.letter(a);
  for (const auto& c : channels) b.channel(c);
  for (const auto& q : states) b.state(q);
  b.set_init(b.state(init->first));

  // Builder lookups would intern unknown names, so check against declarations.
  std::set<std::string_view> letters(alphabet.begin(), alphabet.end());
  std::set<std::string_view> chans(channels.begin(), channels.end());
  for (const auto& p : pending) {
    const auto& t = p.tokens;
    if (t.size() < 5) throw ParseError(p.line, t[0].column, "malformed transition");
    auto kind = t[3].text;
    LabelKind k;
    std::size_t want;
    if (kind == "write") {
      k = LabelKind::Write, want = 6;
    } else if (kind == "read") {
      k = LabelKind::Read, want = 6;
    } else if (kind == "notin") {
      k = LabelKind::OccurrenceTest, want = 6;
    } else if (kind == "empty") {
      k = LabelKind::EmptyTest, want = 5;
    } else {
      throw ParseError(p.line, t[3].column, "unknown transition kind '" + std::string(kind) + "'");
    }
    if (t.size() != want)
      throw ParseError(p.line, t[0].column,
                       "'" + std::string(kind) + "' transition expects " +
                           std::to_string(want - 1) + " fields");
    if (!chans.contains(t[4].text))
      throw ParseError(p.line, t[4].column, "undeclared channel " + std::string(t[4].text));
    Label l{k, b.channel(t[4].text), std::nullopt};
    if (want == 6) {
      if (!letters.contains(t[5].text))
        throw ParseError(p.line, t[5].column, "undeclared letter " + std::string(t[5].text));
      l.letter = b.letter(t[5].text);
    }
    auto src = b.state(t[1].text);
    auto dst = b.state(t[2].text);
    b.add(src, l, dst);
  }
  try {
    return std::move(b).build();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, 1, e.what());
  }
}

std::string serialize_machine(const Machine& m) {
  std::ostringstream out;
  auto list = [&](const char* kw, std::span<const std::string> names) {
    out << kw;
    for (const auto& n : names) out << ' ' << n;
    out << '\n';
  };
  out << "machine " << m.name() << '\n';
  list("alphabet", m.alphabet());
  list("channels", m.channels());

  std::vector<bool> mentioned(m.state_count(), false);
  mentioned[m.init().index()] = true;
  for (const auto& t : m.transitions())
    mentioned[t.source.index()] = mentioned[t.target.index()] = true;
  std::vector<std::string> isolated;
  for (std::size_t q = 0; q < m.state_count(); ++q)
    if (!mentioned[q]) isolated.push_back(m.states()[q]);
  if (!isolated.empty()) list("states", isolated);

  out << "init " << m.state_name(m.init()) << '\n';
  for (const auto& t : m.transitions()) {
    out << "trans " << m.state_name(t.source) << ' ' << m.state_name(t.target) << ' ';
    const auto& c = m.channel_name(t.label.channel);
    switch (t.label.kind) {
      case LabelKind::Write: out << "write " << c << ' ' << m.letter_name(*t.label.letter); break;
      case LabelKind::Read: out << "read " << c << ' ' << m.letter_name(*t.label.letter); break;
      case LabelKind::OccurrenceTest:
        out << "notin " << c << ' ' << m.letter_name(*t.label.letter);
        break;
      case LabelKind::EmptyTest: out << "empty " << c; break;
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Emptiness-test normalization

Machine normalize_empty_tests(const Machine& m) {
  if (!m.has_emptiness_tests()) return m;

  std::vector<LetterId> order;
  for (std::uint32_t a = 0; a < m.letter_count(); ++a) order.emplace_back(a);
  std::ranges::sort(order, [&](LetterId x, LetterId y) {
    return m.letter_name(x) < m.letter_name(y);
  });

  MachineBuilder b(m.name());
  for (const auto& a : m.alphabet()) b.letter(a);
  for (const auto& c : m.channels()) b.channel(c);
  for (const auto& q : m.states()) b.state(q);
  b.set_init(m.init());

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> next_index;
  auto fresh = [&](StateId src, ChannelId c) {
    auto& idx = next_index[{src.value, c.value}];
    std::string n;
    do {
      n = m.state_name(src) + "__empty_" + m.channel_name(c) + "_" + std::to_string(++idx);
    } while (b.has_state(n));
    return b.state(n);
  };

  for (const auto& t : m.transitions()) {
    if (t.label.kind != LabelKind::EmptyTest) {
      b.add(t.source, t.label, t.target);
      continue;
    }
    StateId from = t.source;
    for (std::size_t i = 0; i < order.size(); ++i) {
      StateId to = i + 1 == order.size() ? t.target : fresh(t.source, t.label.channel);
      b.add(from, Label::occurrence_test(t.label.channel, order[i]), to);
      from = to;
    }
  }
  return std::move(b).build();
}

}  // namespace icm
