#pragma once

// Test-side oracles and generators, written against the raw rules rather
// than the library's step engine.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icm/model.hpp"

namespace oracle {

inline std::string source_dir() { return ICM_SOURCE_DIR; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline icm::Machine load(const std::string& relative) {
  return icm::parse_machine(read_text(source_dir() + "/" + relative));
}

inline std::vector<std::string> suite_machine_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(source_dir() + "/suite/machines"))
    if (e.path().extension() == ".icm") out.push_back(e.path().string());
  std::ranges::sort(out);
  return out;
}

inline std::vector<std::string> suite_program_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(source_dir() + "/suite/programs"))
    if (e.path().extension() == ".cm") out.push_back(e.path().string());
  std::ranges::sort(out);
  return out;
}

/// A flattened copy of a machine: (source, kind, channel, letter, target).
struct RawTransition {
  std::size_t from;
  char kind;  // '!', '?', '=', '#'
  std::size_t channel;
  char letter;
  std::size_t to;
};

struct RawConfig {
  std::size_t state;
  std::vector<std::string> channels;
  auto operator<=>(const RawConfig&) const = default;
};

inline std::vector<RawTransition> flatten(const icm::Machine& m) {
  std::vector<RawTransition> out;
  for (const auto& t : m.transitions()) {
    char kind = '!';
    switch (t.label.kind) {
      case icm::LabelKind::Write: kind = '!'; break;
      case icm::LabelKind::Read: kind = '?'; break;
      case icm::LabelKind::EmptyTest: kind = '='; break;
      case icm::LabelKind::OccurrenceTest: kind = '#'; break;
    }
    out.push_back({t.source.index(), kind, t.label.channel.index(),
                   t.label.letter ? icm::letter_char(*t.label.letter) : '\0', t.target.index()});
  }
  return out;
}

/// Successors under rules (1)-(4), plus (5) when lazy. Each successor is
/// paired with the transition index and whether it was an insertion.
struct RawStep {
  std::size_t transition;
  bool insertion;
  RawConfig after;
};

inline std::vector<RawStep> successors(const std::vector<RawTransition>& ts, const RawConfig& s,
                                       bool lazy) {
  std::vector<RawStep> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& t = ts[i];
    if (t.from != s.state) continue;
    const std::string& w = s.channels[t.channel];
    RawConfig next = s;
    next.state = t.to;
    switch (t.kind) {
      case '!':
        next.channels[t.channel].push_back(t.letter);
        out.push_back({i, false, next});
        break;
      case '?':
        if (!w.empty() && w.front() == t.letter) {
          RawConfig consumed = next;
          consumed.channels[t.channel].erase(0, 1);
          out.push_back({i, false, consumed});
        }
        if (lazy) out.push_back({i, true, next});
        break;
      case '=':
        if (w.empty()) out.push_back({i, false, next});
        break;
      case '#':
        if (w.find(t.letter) == std::string::npos) out.push_back({i, false, next});
        break;
    }
  }
  return out;
}

/// Longest lazy run from s found by exhaustive enumeration, or nothing if
/// some run reaches `limit` steps.
inline std::optional<std::size_t> longest_run(const std::vector<RawTransition>& ts,
                                              const RawConfig& s, std::size_t limit) {
  if (limit == 0) return std::nullopt;
  std::size_t best = 0;
  for (const auto& st : successors(ts, s, true)) {
    auto sub = longest_run(ts, st.after, limit - 1);
    if (!sub) return std::nullopt;
    best = std::max(best, *sub + 1);
  }
  return best;
}

inline RawConfig raw_initial(const icm::Machine& m) {
  return {m.init().index(), std::vector<std::string>(m.channel_count())};
}

/// Random machine generator: states q0.., letters a.., channels c0..
struct MachineShape {
  std::size_t states = 3, letters = 1, channels = 1, transitions = 4;
  bool tests = true;
  bool empty_tests = true;
};

inline icm::Machine random_machine(std::mt19937_64& rng, const MachineShape& shape,
                                   const std::string& name = "rand") {
  icm::MachineBuilder b(name);
  std::vector<icm::StateId> q;
  for (std::size_t i = 0; i < shape.states; ++i) q.push_back(b.state("q" + std::to_string(i)));
  std::vector<icm::LetterId> a;
  for (std::size_t i = 0; i < shape.letters; ++i) a.push_back(b.letter(std::string(1, char('a' + i))));
  std::vector<icm::ChannelId> c;
  for (std::size_t i = 0; i < shape.channels; ++i) c.push_back(b.channel("c" + std::to_string(i)));
  b.set_init(q[0]);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::size_t kinds = shape.tests ? (shape.empty_tests ? 4 : 3) : 2;
  for (std::size_t i = 0; i < shape.transitions; ++i) {
    const auto from = q[pick(q.size())], to = q[pick(q.size())];
    const auto ch = c[pick(c.size())];
    const auto letter = a[pick(a.size())];
    switch (pick(kinds)) {
      case 0: b.add(from, icm::Label::write(ch, letter), to); break;
      case 1: b.add(from, icm::Label::read(ch, letter), to); break;
      case 2: b.add(from, icm::Label::occurrence_test(ch, letter), to); break;
      default: b.add(from, icm::Label::empty_test(ch), to); break;
    }
  }
  return std::move(b).build();
}

inline icm::Configuration random_configuration(std::mt19937_64& rng, const icm::Machine& m,
                                               std::size_t max_len) {
  icm::Configuration s{icm::StateId{static_cast<std::uint32_t>(
                           std::uniform_int_distribution<std::size_t>(0, m.state_count() - 1)(rng))},
                       std::vector<icm::Word>(m.channel_count())};
  for (auto& w : s.contents) {
    const auto len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
    for (std::size_t i = 0; i < len; ++i)
      w.push_back(icm::letter_char(icm::LetterId{static_cast<std::uint32_t>(
          std::uniform_int_distribution<std::size_t>(0, m.letter_count() - 1)(rng))}));
  }
  return s;
}

/// Best number of strictly interleaved equal S-pairs with difference at most
/// `limit` (1-based positions), by dynamic programming over prefixes.
template <class T>
std::size_t max_pair_count(const std::vector<T>& seq, const std::set<T>& s, std::size_t limit) {
  const std::size_t n = seq.size();
  std::vector<std::size_t> best(n + 1, 0);  // best[k]: using positions < k
  for (std::size_t k = 1; k <= n; ++k) {
    best[k] = best[k - 1];
    const std::size_t j = k - 1;  // closing position, 0-based
    if (!s.contains(seq[j])) continue;
    for (std::size_t i = j; i-- > 0;) {
      if (j - i > limit) break;
      if (seq[i] == seq[j]) best[k] = std::max(best[k], best[i] + 1);
    }
  }
  return best[n];
}

/// Validity of a pair set against the witness invariants.
template <class T>
bool pairs_valid(const std::vector<T>& seq, const std::set<T>& s,
                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t limit) {
  std::size_t last = 0;
  for (const auto& [i, j] : pairs) {
    if (i <= last || j <= i || j > seq.size()) return false;
    if (j - i > limit) return false;
    if (!(seq[i - 1] == seq[j - 1]) || !s.contains(seq[i - 1])) return false;
    last = j;
  }
  return true;
}

}  // namespace oracle
