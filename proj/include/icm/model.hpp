#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace icm {

/// Typed index into one of a machine's name tables.
template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}
  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(Id, Id) = default;
};

using StateId = Id<struct StateTag>;
using ChannelId = Id<struct ChannelTag>;
using LetterId = Id<struct LetterTag>;

/// Channel contents. Each char holds a LetterId value, so alphabets are
/// limited to 256 letters.
using Word = std::string;

inline char letter_char(LetterId a) { return static_cast<char>(a.value); }
inline LetterId char_letter(char ch) {
  return LetterId{static_cast<std::uint8_t>(ch)};
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class LabelKind { Write, Read, EmptyTest, OccurrenceTest };

/// c!a, c?a, c=empty or a-notin-c. EmptyTest labels carry no letter.
struct Label {
  LabelKind kind = LabelKind::Write;
  ChannelId channel;
  std::optional<LetterId> letter;

  static Label write(ChannelId c, LetterId a) { return {LabelKind::Write, c, a}; }
  static Label read(ChannelId c, LetterId a) { return {LabelKind::Read, c, a}; }
  static Label empty_test(ChannelId c) { return {LabelKind::EmptyTest, c, std::nullopt}; }
  static Label occurrence_test(ChannelId c, LetterId a) {
    return {LabelKind::OccurrenceTest, c, a};
  }

  bool is_test() const {
    return kind == LabelKind::EmptyTest || kind == LabelKind::OccurrenceTest;
  }
  friend bool operator==(const Label&, const Label&) = default;
};

struct Transition {
  StateId source;
  Label label;
  StateId target;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// A channel machine (Q, init, Sigma, C, Delta). Names are interned; the
/// declaration order of states and transitions is kept because simulation
/// policies depend on it. Instances are immutable once built.
class Machine {
 public:
  const std::string& name() const { return name_; }
  std::span<const std::string> states() const { return states_; }
  std::span<const std::string> alphabet() const { return alphabet_; }
  std::span<const std::string> channels() const { return channels_; }
  std::span<const Transition> transitions() const { return transitions_; }
  StateId init() const { return init_; }

  std::size_t state_count() const { return states_.size(); }
  std::size_t letter_count() const { return alphabet_.size(); }
  std::size_t channel_count() const { return channels_.size(); }

  const std::string& state_name(StateId q) const { return states_.at(q.index()); }
  const std::string& letter_name(LetterId a) const { return alphabet_.at(a.index()); }
  const std::string& channel_name(ChannelId c) const { return channels_.at(c.index()); }

  std::optional<StateId> find_state(std::string_view n) const;
  std::optional<LetterId> find_letter(std::string_view n) const;
  std::optional<ChannelId> find_channel(std::string_view n) const;

  /// Indices of transitions leaving q, in declaration order.
  std::span<const std::size_t> outgoing(StateId q) const { return outgoing_.at(q.index()); }

  bool has_emptiness_tests() const;
  bool has_tests() const;

  /// "c!a", "c?a", "c=empty", "a!in c" rendering used in messages.
  std::string describe(const Label& l) const;

 private:
  friend class MachineBuilder;
  void index();

  std::string name_;
  std::vector<std::string> states_;
  std::vector<std::string> alphabet_;
  std::vector<std::string> channels_;
  StateId init_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::unordered_map<std::string, std::uint32_t> state_index_;
  std::unordered_map<std::string, std::uint32_t> letter_index_;
  std::unordered_map<std::string, std::uint32_t> channel_index_;
};

/// Incremental construction of a validated Machine.
class MachineBuilder {
 public:
  explicit MachineBuilder(std::string name = "m");

  StateId state(std::string_view n);
  LetterId letter(std::string_view n);
  ChannelId channel(std::string_view n);
  void set_init(StateId q);
  void add(StateId source, Label l, StateId target);

  bool has_state(std::string_view n) const { return m_.state_index_.contains(std::string(n)); }

  /// Throws Error when an invariant is violated.
  Machine build() &&;

 private:
  Machine m_;
  bool init_set_ = false;
};

/// Equality up to ordering of the name sets and of the transition list.
bool structurally_equal(const Machine& a, const Machine& b);

/// Number of states plus number of transitions.
std::size_t machine_size(const Machine& m);

/// (q, U). contents[c] is the word in channel c.
struct Configuration {
  StateId state;
  std::vector<Word> contents;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& s) const;
};

/// The configuration (init, all channels empty).
Configuration initial_configuration(const Machine& m);

/// Throws Error if s is not a configuration of m.
void validate_configuration(const Machine& m, const Configuration& s);

/// Renders a word as letter names. Letters are concatenated when every
/// letter name is one character long, and joined with '.' otherwise.
std::string format_word(const Machine& m, const Word& w);
Word parse_word(const Machine& m, std::string_view text);

/// Parses "q,c=word,d=word"; unspecified channels are empty.
Configuration parse_configuration(const Machine& m, std::string_view text);
std::string format_configuration(const Machine& m, const Configuration& s);

/// A subset D of the channels, kept sorted.
class ChannelSubset {
 public:
  ChannelSubset() = default;
  explicit ChannelSubset(std::vector<ChannelId> members);
  static ChannelSubset all(const Machine& m);

  bool contains(ChannelId c) const;
  std::span<const ChannelId> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  void validate(const Machine& m) const;
  friend bool operator==(const ChannelSubset&, const ChannelSubset&) = default;

 private:
  std::vector<ChannelId> members_;
};

/// f : D -> N, a maximum word length per channel of D.
class BoundingFunction {
 public:
  BoundingFunction() = default;
  BoundingFunction(ChannelSubset domain, std::vector<std::uint64_t> values);
  /// Every member of the domain mapped to the same bound.
  static BoundingFunction uniform(ChannelSubset domain, std::uint64_t bound);

  const ChannelSubset& domain() const { return domain_; }
  std::uint64_t operator()(ChannelId c) const;
  std::span<const std::uint64_t> values() const { return values_; }

 private:
  ChannelSubset domain_;
  std::vector<std::uint64_t> values_;
};

Machine parse_machine(std::string_view text);
std::string serialize_machine(const Machine& m);

/// Replaces every c=empty transition by a chain of occurrence tests, one per
/// letter in lexicographic order of letter names. Fresh intermediate states
/// are named <source>__empty_<channel>_<index>.
Machine normalize_empty_tests(const Machine& m);

}  // namespace icm
