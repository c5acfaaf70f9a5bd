#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "icm/model.hpp"
#include "icm/semantics.hpp"

namespace icm::yardstick {

enum class CounterOp { Inc, Dec, Reset, IsZero };
const char* to_string(CounterOp op);

/// Largest level built without an explicit override.
inline constexpr std::size_t kMaxGuardedLevel = 4;

// ---------------------------------------------------------------------------
// Counter programs

enum class Counter { U1, U2 };

struct Instruction {
  enum class Kind { Inc, Dec, Reset, IfZero, Halt };
  Kind kind = Kind::Halt;
  Counter counter = Counter::U1;
  std::size_t next = 0;       // goto target (Inc, Dec, Reset) or then-target (IfZero)
  std::size_t otherwise = 0;  // else-target (IfZero)

  static Instruction inc(Counter u, std::size_t j) { return {Kind::Inc, u, j, 0}; }
  static Instruction dec(Counter u, std::size_t j) { return {Kind::Dec, u, j, 0}; }
  static Instruction reset(Counter u, std::size_t j) { return {Kind::Reset, u, j, 0}; }
  static Instruction if_zero(Counter u, std::size_t then_target, std::size_t else_target) {
    return {Kind::IfZero, u, then_target, else_target};
  }
  static Instruction halt() { return {}; }
};

/// A deterministic two-counter program whose counters are 2^^level bounded.
/// Execution starts at instruction 0.
struct CounterProgram {
  std::string name = "p";
  std::size_t level = 1;
  std::vector<Instruction> instructions;

  /// Throws Error on out-of-range targets, an empty body or level 0.
  void validate() const;
};

CounterProgram parse_counter_program(std::string_view text);
std::string serialize_counter_program(const CounterProgram& p);

struct Halted {
  std::size_t steps = 0;
  mpz_class u1, u2;
};
struct StillRunning {
  std::size_t steps = 0;
  mpz_class u1, u2;
};
using InterpretResult = std::variant<Halted, StillRunning>;

/// Direct big-integer execution with counters modulo 2^^level.
InterpretResult interpret_counter_program(const CounterProgram& p, std::size_t max_steps);

// ---------------------------------------------------------------------------
// Counter gadgets

struct PortPair {
  StateId entry;
  StateId exit;
};
struct IsZeroPort {
  StateId entry;
  std::optional<StateId> exit_true;
  std::optional<StateId> exit_false;
};

/// Entry and exit states of each counter procedure. For level >= 2 each list
/// has one element. At level 1 the value is the control state itself, so
/// there is one element per value and the exit is the successor value.
struct GadgetPorts {
  std::vector<PortPair> inc, dec, reset;
  std::vector<IsZeroPort> is_zero;
};

/// S_k: a 2^^k bounded counter. Level 1 is two control states without
/// channels; level k >= 2 stores the counter in binary, least significant bit
/// at the head, on channel c<k-1> and uses d<k-1> as scratch, with the level
/// k-1 counter measuring the 2^^(k-1) bits.
struct CounterGadget {
  std::size_t level = 1;
  Machine fragment;
  GadgetPorts ports;

  std::string value_channel(std::size_t j) const;    // c<j>
  std::string scratch_channel(std::size_t j) const;  // d<j>
};

/// Throws Error when k is 0, or above kMaxGuardedLevel without allow_large.
CounterGadget build_counter_gadget(std::size_t k, bool allow_large = false);

/// The clean configuration encoding value v at the given state: c<j> holds
/// 2^^j bits for every embedded level j, every d<j> is empty, and lower
/// counters are zero. At level 1 the state is the value state.
Configuration clean_configuration(const CounterGadget& g, const mpz_class& v,
                                  std::optional<StateId> state = std::nullopt);

/// Clean-shape check: for every embedded level j, c<j> has 2^^j letters
/// and d<j> is empty.
bool is_clean(const CounterGadget& g, const Configuration& s);

/// The counter value held by a configuration (level >= 2: c<level-1> read
/// least significant bit first; level 1: the value state).
mpz_class decode_value(const CounterGadget& g, const Configuration& s);

struct OperationResult {
  Configuration after;
  std::optional<bool> is_zero;  // set for IsZero
  std::size_t steps = 0;
};

/// Runs one procedure from s under the error-free semantics with the
/// deterministic-first policy. Returns nothing if the procedure deadlocks or
/// exceeds max_steps before reaching an exit port.
std::optional<OperationResult> run_operation(const CounterGadget& g, CounterOp op,
                                             const Configuration& s,
                                             std::size_t max_steps = 1'000'000);

// ---------------------------------------------------------------------------
// Compiler

struct CompiledProgram {
  Machine machine;
  std::size_t level = 1;
  /// Halt states with the level-1 bits (u1, u2) folded into them.
  std::map<StateId, std::pair<bool, bool>> halt_states;
};

/// Product of the program's control with two independent counter towers
/// (channels c<j>, d<j> for u1 and c<j>', d<j>' for u2). Internal control
/// moves are eliminated; cycles made only of control moves are kept as
/// emptiness tests of a never-written channel "tick".
CompiledProgram compile_counter_program_detailed(const CounterProgram& p,
                                                 bool allow_large = false);
Machine compile_counter_program(const CounterProgram& p, bool allow_large = false);

/// Counter values at a halt configuration of a compiled program.
std::optional<std::pair<mpz_class, mpz_class>> decode_halt(const CompiledProgram& c,
                                                           const Configuration& s);

}  // namespace icm::yardstick
