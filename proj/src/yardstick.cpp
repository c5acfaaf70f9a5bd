#include "icm/yardstick.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "icm/bounds.hpp"

namespace icm::yardstick {

const char* to_string(CounterOp op) {
  switch (op) {
    case CounterOp::Inc: return "inc";
    case CounterOp::Dec: return "dec";
    case CounterOp::Reset: return "reset";
    case CounterOp::IsZero: return "iszero";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Code graph: procedures are emitted as control-flow nodes, with the level-1
// counters held in bit registers instead of states. Lowering takes the
// product with the bit registers and removes the silent moves.

struct CodeLabel {
  LabelKind kind;
  std::string channel;
  char letter = 0;  // '0', '1', or 0 for emptiness tests
};

struct Node {
  enum class Kind { Open, Labeled, Jump, Flip, Assign, Branch };
  Kind kind = Kind::Open;
  std::vector<std::pair<CodeLabel, int>> edges;
  int next = -1;
  int alt = -1;  // Branch: target when the bit is 1
  int bit = 0;
  bool value = false;
  std::string hint;
};

class CodeGraph {
 public:
  int node(std::string hint) {
    nodes_.push_back({});
    nodes_.back().hint = std::move(hint);
    return static_cast<int>(nodes_.size()) - 1;
  }
  Node& at(int n) { return nodes_.at(static_cast<std::size_t>(n)); }
  const Node& at(int n) const { return nodes_.at(static_cast<std::size_t>(n)); }
  std::size_t size() const { return nodes_.size(); }

  void edge(int from, CodeLabel l, int to) {
    Node& f = at(from);
    if (f.kind != Node::Kind::Open && f.kind != Node::Kind::Labeled)
      throw Error("internal: node already holds a control move");
    f.kind = Node::Kind::Labeled;
    f.edges.emplace_back(std::move(l), to);
  }
  void control(int from, Node::Kind k, int next, int bit = 0, bool value = false, int alt = -1) {
    Node& f = at(from);
    if (f.kind != Node::Kind::Open) throw Error("internal: node defined twice");
    f.kind = k;
    f.next = next;
    f.bit = bit;
    f.value = value;
    f.alt = alt;
  }

 private:
  std::vector<Node> nodes_;
};

struct Tower {
  std::string prime;  // "" for u1, "'" for u2
  int bit = 0;        // bit register holding this tower's level-1 counter

  std::string c(std::size_t j) const { return "c" + std::to_string(j) + prime; }
  std::string d(std::size_t j) const { return "d" + std::to_string(j) + prime; }
};

class Emitter {
 public:
  explicit Emitter(CodeGraph& g) : g_(g) {}

  /// Code for op on counter u_level of tower t from node `from`. IsZero exits
  /// to `to` when zero and to `to_false` otherwise.
  void op(CounterOp op, std::size_t level, const Tower& t, int from, int to, int to_false,
          const std::string& ctx) {
    if (level == 1) {
      switch (op) {
        case CounterOp::Inc:
        case CounterOp::Dec: g_.control(from, Node::Kind::Flip, to, t.bit); break;
        case CounterOp::Reset: g_.control(from, Node::Kind::Assign, to, t.bit, false); break;
        case CounterOp::IsZero: g_.control(from, Node::Kind::Branch, to, t.bit, false, to_false); break;
      }
      return;
    }
    const std::string here = ctx + "." + to_string(op) + std::to_string(level);
    switch (op) {
      case CounterOp::Inc: flip_until(level, t, from, to, '0', here); break;
      case CounterOp::Dec: flip_until(level, t, from, to, '1', here); break;
      case CounterOp::Reset: reset(level, t, from, to, here); break;
      case CounterOp::IsZero: is_zero(level, t, from, to, to_false, here); break;
    }
  }

  void call(CounterOp o, std::size_t level, const Tower& t, int from, int to,
            const std::string& ctx) {
    op(o, level, t, from, to, -1, ctx);
  }

  /// Writes 2^^(level-1) zeros on c<level-1>, counted by u_(level-1).
  void initialize(std::size_t level, const Tower& t, int from, int to, const std::string& ctx) {
    const std::size_t sub = level - 1;
    const std::string here = ctx + ".init" + std::to_string(level);
    int w = g_.node(here + ".w");
    g_.edge(from, {LabelKind::Write, t.c(sub), '0'}, w);
    int i = g_.node(here + ".i");
    call(CounterOp::Inc, sub, t, w, i, here);
    op(CounterOp::IsZero, sub, t, i, to, from, here);
  }

 private:
  std::pair<int, int> read_split(int from, const std::string& ch, const std::string& ctx) {
    int n0 = g_.node(ctx + ".r0");
    int n1 = g_.node(ctx + ".r1");
    g_.edge(from, {LabelKind::Read, ch, '0'}, n0);
    g_.edge(from, {LabelKind::Read, ch, '1'}, n1);
    return {n0, n1};
  }

  // Inc flips bits while carrying (stop on a read 0); Dec flips while
  // borrowing (stop on a read 1).
  void flip_until(std::size_t level, const Tower& t, int from, int to, char stop,
                  const std::string& ctx) {
    const std::size_t sub = level - 1;
    const std::string c = t.c(sub), d = t.d(sub);
    int head = g_.node(ctx + ".carry");
    call(CounterOp::Reset, sub, t, from, head, ctx);
    int test_c = g_.node(ctx + ".testc");
    int rest = g_.node(ctx + ".rest");

    auto [x0, x1] = read_split(head, c, ctx + ".carry");
    for (char x : {'0', '1'}) {
      const int read = x == '0' ? x0 : x1;
      const char flipped = x == '0' ? '1' : '0';
      int w = g_.node(ctx + ".carry" + x + ".w");
      g_.edge(read, {LabelKind::Write, d, flipped}, w);
      int i = g_.node(ctx + ".carry" + x + ".i");
      call(CounterOp::Inc, sub, t, w, i, ctx + ".carry" + x);
      op(CounterOp::IsZero, sub, t, i, test_c, x == stop ? rest : head, ctx + ".carry" + x);
    }

    auto [y0, y1] = read_split(rest, c, ctx + ".rest");
    int joined = g_.node(ctx + ".rest.w");
    g_.edge(y0, {LabelKind::Write, d, '0'}, joined);
    g_.edge(y1, {LabelKind::Write, d, '1'}, joined);
    int i = g_.node(ctx + ".rest.i");
    call(CounterOp::Inc, sub, t, joined, i, ctx + ".rest");
    op(CounterOp::IsZero, sub, t, i, test_c, rest, ctx + ".rest");

    transfer_back(level, t, test_c, to, ctx);
  }

  void reset(std::size_t level, const Tower& t, int from, int to, const std::string& ctx) {
    const std::size_t sub = level - 1;
    int head = g_.node(ctx + ".zero");
    call(CounterOp::Reset, sub, t, from, head, ctx);
    auto [x0, x1] = read_split(head, t.c(sub), ctx + ".zero");
    int w = g_.node(ctx + ".zero.w");
    g_.edge(x0, {LabelKind::Write, t.d(sub), '0'}, w);
    g_.edge(x1, {LabelKind::Write, t.d(sub), '0'}, w);
    int i = g_.node(ctx + ".zero.i");
    call(CounterOp::Inc, sub, t, w, i, ctx + ".zero");
    int test_c = g_.node(ctx + ".testc");
    op(CounterOp::IsZero, sub, t, i, test_c, head, ctx + ".zero");
    transfer_back(level, t, test_c, to, ctx);
  }

  // The flag "a 1 was seen" lives in control: scan0 / scan1.
  void is_zero(std::size_t level, const Tower& t, int from, int to_true, int to_false,
               const std::string& ctx) {
    const std::size_t sub = level - 1;
    const std::string c = t.c(sub), d = t.d(sub);
    int scan0 = g_.node(ctx + ".scan0");
    int scan1 = g_.node(ctx + ".scan1");
    call(CounterOp::Reset, sub, t, from, scan0, ctx);
    int k0 = g_.node(ctx + ".seen0");
    int k1 = g_.node(ctx + ".seen1");

    auto [a0, a1] = read_split(scan0, c, ctx + ".scan0");
    g_.edge(a0, {LabelKind::Write, d, '0'}, k0);
    g_.edge(a1, {LabelKind::Write, d, '1'}, k1);
    auto [b0, b1] = read_split(scan1, c, ctx + ".scan1");
    g_.edge(b0, {LabelKind::Write, d, '0'}, k1);
    g_.edge(b1, {LabelKind::Write, d, '1'}, k1);

    int test0 = g_.node(ctx + ".testc0");
    int test1 = g_.node(ctx + ".testc1");
    int i0 = g_.node(ctx + ".seen0.i");
    call(CounterOp::Inc, sub, t, k0, i0, ctx + ".seen0");
    op(CounterOp::IsZero, sub, t, i0, test0, scan0, ctx + ".seen0");
    int i1 = g_.node(ctx + ".seen1.i");
    call(CounterOp::Inc, sub, t, k1, i1, ctx + ".seen1");
    op(CounterOp::IsZero, sub, t, i1, test1, scan1, ctx + ".seen1");

    transfer_back(level, t, test0, to_true, ctx + ".z");
    transfer_back(level, t, test1, to_false, ctx + ".nz");
  }

  // test(c = empty); repeat d?x; c!x; Inc until IsZero; test(d = empty)
  void transfer_back(std::size_t level, const Tower& t, int test_c, int to,
                     const std::string& ctx) {
    const std::size_t sub = level - 1;
    int back = g_.node(ctx + ".back");
    g_.edge(test_c, {LabelKind::EmptyTest, t.c(sub), 0}, back);
    auto [r0, r1] = read_split(back, t.d(sub), ctx + ".back");
    int w = g_.node(ctx + ".back.w");
    g_.edge(r0, {LabelKind::Write, t.c(sub), '0'}, w);
    g_.edge(r1, {LabelKind::Write, t.c(sub), '1'}, w);
    int i = g_.node(ctx + ".back.i");
    call(CounterOp::Inc, sub, t, w, i, ctx + ".back");
    int test_d = g_.node(ctx + ".testd");
    op(CounterOp::IsZero, sub, t, i, test_d, back, ctx + ".back");
    g_.edge(test_d, {LabelKind::EmptyTest, t.d(sub), 0}, to);
  }

  CodeGraph& g_;
};

// ---------------------------------------------------------------------------
// Lowering

using ProductState = std::pair<int, unsigned>;  // node, bit registers

class Lowering {
 public:
  Lowering(const CodeGraph& g, std::string name, std::vector<std::string> channels)
      : g_(g), builder_(std::move(name)) {
    builder_.letter("0");
    builder_.letter("1");
    for (const auto& c : channels) builder_.channel(c);
  }

  /// The kept state standing for (node, bits) after silent moves.
  StateId root(int node, unsigned bits) { return id(settle({node, bits})); }

  Machine finish(StateId init) {
    drain();
    builder_.set_init(init);
    return std::move(builder_).build();
  }

  const std::map<ProductState, StateId>& states() const { return ids_; }

 private:
  bool is_control(const Node& n) const {
    return n.kind == Node::Kind::Jump || n.kind == Node::Kind::Flip ||
           n.kind == Node::Kind::Assign || n.kind == Node::Kind::Branch;
  }

  ProductState step(ProductState s) const {
    const Node& n = g_.at(s.first);
    const unsigned mask = 1u << n.bit;
    switch (n.kind) {
      case Node::Kind::Jump: return {n.next, s.second};
      case Node::Kind::Flip: return {n.next, s.second ^ mask};
      case Node::Kind::Assign: return {n.next, n.value ? (s.second | mask) : (s.second & ~mask)};
      case Node::Kind::Branch: return {(s.second & mask) ? n.alt : n.next, s.second};
      default: return s;
    }
  }

  // Follows silent moves; a silent cycle leaves s in place.
  ProductState settle(ProductState s) const {
    std::set<ProductState> seen;
    ProductState cur = s;
    while (is_control(g_.at(cur.first))) {
      if (!seen.insert(cur).second) return s;
      cur = step(cur);
    }
    return cur;
  }

  StateId id(ProductState s) {
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    std::string name = g_.at(s.first).hint + "." + std::to_string(s.first);
    if (s.second != 0) name += "~" + std::to_string(s.second);
    StateId q = builder_.state(name);
    ids_.emplace(s, q);
    pending_.push_back(s);
    return q;
  }

  void drain() {
    while (!pending_.empty()) {
      ProductState s = pending_.front();
      pending_.pop_front();
      const StateId from = ids_.at(s);
      const Node& n = g_.at(s.first);
      if (n.kind == Node::Kind::Labeled) {
        for (const auto& [l, target] : n.edges) {
          const ChannelId c = builder_.channel(l.channel);
          Label label = l.kind == LabelKind::EmptyTest
                            ? Label::empty_test(c)
                            : Label{l.kind, c, builder_.letter(std::string(1, l.letter))};
          builder_.add(from, label, id(settle({target, s.second})));
        }
      } else if (is_control(n)) {
        // Only states on or leading into a silent cycle get here.
        builder_.add(from, Label::empty_test(builder_.channel("tick")), id(settle(step(s))));
      }
    }
  }

  const CodeGraph& g_;
  MachineBuilder builder_;
  std::map<ProductState, StateId> ids_;
  std::deque<ProductState> pending_;
};

std::vector<std::string> tower_channels(const Tower& t, std::size_t level) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j < level; ++j) {
    out.push_back(t.c(j));
    out.push_back(t.d(j));
  }
  return out;
}

void check_level(std::size_t k, bool allow_large) {
  if (k == 0) throw Error("counter levels start at 1");
  if (k > kMaxGuardedLevel && !allow_large)
    throw Error("level " + std::to_string(k) + " exceeds the desk-scale guard of " +
                std::to_string(kMaxGuardedLevel) + "; pass the override to build it");
}

mpz_class counter_range(std::size_t level) {
  auto t = tetration(level);
  if (!t.is_exact()) throw Error("counter range 2^^" + std::to_string(level) + " is too large");
  return t.value();
}

std::size_t channel_bits(std::size_t j) { return counter_range(j).get_ui(); }

}  // namespace

// ---------------------------------------------------------------------------
// Gadgets

std::string CounterGadget::value_channel(std::size_t j) const { return Tower{}.c(j); }
std::string CounterGadget::scratch_channel(std::size_t j) const { return Tower{}.d(j); }

CounterGadget build_counter_gadget(std::size_t k, bool allow_large) {
  check_level(k, allow_large);
  CounterGadget g;
  g.level = k;

  if (k == 1) {
    MachineBuilder b("S1");
    b.letter("0");
    b.letter("1");
    const StateId zero = b.state("u=0");
    const StateId one = b.state("u=1");
    b.set_init(zero);
    g.fragment = std::move(b).build();
    g.ports.inc = {{zero, one}, {one, zero}};
    g.ports.dec = {{zero, one}, {one, zero}};
    g.ports.reset = {{zero, zero}, {one, zero}};
    g.ports.is_zero = {{zero, zero, std::nullopt}, {one, std::nullopt, one}};
    return g;
  }

  CodeGraph code;
  Emitter emit(code);
  const Tower t{};
  struct OpNodes {
    CounterOp op;
    int entry, exit, exit_false;
  };
  std::vector<OpNodes> ops;
  for (auto op : {CounterOp::Inc, CounterOp::Dec, CounterOp::Reset, CounterOp::IsZero}) {
    const std::string n = to_string(op);
    OpNodes o{op, code.node(n + ".entry"), code.node(n + ".exit"), -1};
    if (op == CounterOp::IsZero) {
      code.at(o.exit).hint = n + ".exit_true";
      o.exit_false = code.node(n + ".exit_false");
    }
    emit.op(op, k, t, o.entry, o.exit, o.exit_false, "");
    ops.push_back(o);
  }

  Lowering low(code, "S" + std::to_string(k), tower_channels(t, k));
  std::vector<StateId> entries;
  for (const auto& o : ops) entries.push_back(low.root(o.entry, 0));
  g.fragment = low.finish(entries.front());

  auto exit_state = [&](int node) {
    auto it = low.states().find({node, 0u});
    if (it == low.states().end()) throw Error("internal: gadget exit unreachable");
    return it->second;
  };
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& o = ops[i];
    switch (o.op) {
      case CounterOp::Inc: g.ports.inc = {{entries[i], exit_state(o.exit)}}; break;
      case CounterOp::Dec: g.ports.dec = {{entries[i], exit_state(o.exit)}}; break;
      case CounterOp::Reset: g.ports.reset = {{entries[i], exit_state(o.exit)}}; break;
      case CounterOp::IsZero:
        g.ports.is_zero = {{entries[i], exit_state(o.exit), exit_state(o.exit_false)}};
        break;
    }
  }
  return g;
}

Configuration clean_configuration(const CounterGadget& g, const mpz_class& v,
                                  std::optional<StateId> state) {
  const mpz_class range = counter_range(g.level);
  if (v < 0 || v >= range) throw Error("value outside the counter range");
  const Machine& m = g.fragment;
  if (g.level == 1) {
    const StateId q = v == 0 ? g.ports.inc[0].entry : g.ports.inc[1].entry;
    return {state.value_or(q), std::vector<Word>(m.channel_count())};
  }
  Configuration s{state.value_or(g.ports.inc[0].entry), std::vector<Word>(m.channel_count())};
  const char zero = letter_char(*m.find_letter("0"));
  const char one = letter_char(*m.find_letter("1"));
  for (std::size_t j = 1; j < g.level; ++j) {
    Word w(channel_bits(j), zero);
    if (j + 1 == g.level)
      for (std::size_t b = 0; b < w.size(); ++b)
        if (mpz_tstbit(v.get_mpz_t(), b)) w[b] = one;
    s.contents[m.find_channel(g.value_channel(j))->index()] = std::move(w);
  }
  return s;
}

bool is_clean(const CounterGadget& g, const Configuration& s) {
  const Machine& m = g.fragment;
  for (std::size_t j = 1; j < g.level; ++j) {
    if (s.contents[m.find_channel(g.value_channel(j))->index()].size() != channel_bits(j))
      return false;
    if (!s.contents[m.find_channel(g.scratch_channel(j))->index()].empty()) return false;
  }
  return true;
}

namespace {

mpz_class decode_bits(const Machine& m, const Word& w) {
  mpz_class v = 0;
  for (std::size_t b = w.size(); b-- > 0;) {
    v <<= 1;
    if (m.letter_name(char_letter(w[b])) == "1") v += 1;
  }
  return v;
}

}  // namespace

mpz_class decode_value(const CounterGadget& g, const Configuration& s) {
  if (g.level == 1) return s.state == g.ports.inc[1].entry ? 1 : 0;
  const Machine& m = g.fragment;
  return decode_bits(m, s.contents[m.find_channel(g.value_channel(g.level - 1))->index()]);
}

std::optional<OperationResult> run_operation(const CounterGadget& g, CounterOp op,
                                             const Configuration& s, std::size_t max_steps) {
  if (g.level == 1) {
    const bool one = s.state == g.ports.inc[1].entry;
    OperationResult r{s, std::nullopt, 0};
    switch (op) {
      case CounterOp::Inc: r.after.state = g.ports.inc[one].exit; break;
      case CounterOp::Dec: r.after.state = g.ports.dec[one].exit; break;
      case CounterOp::Reset: r.after.state = g.ports.reset[one].exit; break;
      case CounterOp::IsZero: r.is_zero = !one; break;
    }
    return r;
  }

  StateId entry;
  std::vector<std::pair<StateId, std::optional<bool>>> exits;
  switch (op) {
    case CounterOp::Inc: entry = g.ports.inc[0].entry, exits = {{g.ports.inc[0].exit, {}}}; break;
    case CounterOp::Dec: entry = g.ports.dec[0].entry, exits = {{g.ports.dec[0].exit, {}}}; break;
    case CounterOp::Reset:
      entry = g.ports.reset[0].entry, exits = {{g.ports.reset[0].exit, {}}};
      break;
    case CounterOp::IsZero:
      entry = g.ports.is_zero[0].entry;
      exits = {{*g.ports.is_zero[0].exit_true, true}, {*g.ports.is_zero[0].exit_false, false}};
      break;
  }

  Configuration cur{entry, s.contents};
  for (std::size_t n = 0; n <= max_steps; ++n) {
    for (const auto& [q, flag] : exits)
      if (cur.state == q) return OperationResult{std::move(cur), flag, n};
    auto steps = enabled_steps(g.fragment, cur, Mode::ErrorFree);
    if (steps.empty()) return std::nullopt;
    cur = std::move(steps.front().after);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Counter programs

void CounterProgram::validate() const {
  if (level == 0) throw Error("counter program level must be at least 1");
  if (instructions.empty()) throw Error("counter program has no instructions");
  const std::size_t n = instructions.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ins = instructions[i];
    if (ins.kind == Instruction::Kind::Halt) continue;
    if (ins.next >= n || (ins.kind == Instruction::Kind::IfZero && ins.otherwise >= n))
      throw Error("instruction " + std::to_string(i) + " jumps out of range");
  }
}

namespace {

std::vector<std::string> words(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::size_t parse_index(const std::string& s, std::size_t line) {
  if (s.empty() || !std::ranges::all_of(s, [](char ch) { return ch >= '0' && ch <= '9'; }))
    throw ParseError(line, 1, "expected an instruction index, got '" + s + "'");
  return std::stoul(s);
}

Counter parse_counter(const std::string& s, std::size_t line) {
  if (s == "u1") return Counter::U1;
  if (s == "u2") return Counter::U2;
  throw ParseError(line, 1, "unknown counter '" + s + "'");
}

}  // namespace

CounterProgram parse_counter_program(std::string_view text) {
  CounterProgram p;
  bool have_name = false, have_level = false;
  std::map<std::size_t, Instruction> body;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto w = words(raw);
    if (w.empty()) continue;
    if (w[0] == "program") {
      if (have_name || w.size() != 2) throw ParseError(line_no, 1, "malformed program header");
      p.name = w[1];
      have_name = true;
      continue;
    }
    if (w[0] == "level") {
      if (have_level || w.size() != 2) throw ParseError(line_no, 1, "malformed level line");
      p.level = parse_index(w[1], line_no);
      have_level = true;
      continue;
    }
    if (w[0].back() != ':') throw ParseError(line_no, 1, "expected 'IDX:'");
    const std::size_t idx = parse_index(w[0].substr(0, w[0].size() - 1), line_no);
    if (body.contains(idx))
      throw ParseError(line_no, 1, "duplicate instruction " + std::to_string(idx));
    Instruction ins;
    const std::string op = w.size() > 1 ? w[1] : "";
    if (op == "halt" && w.size() == 2) {
      ins = Instruction::halt();
    } else if ((op == "inc" || op == "dec" || op == "reset") && w.size() == 5 && w[3] == "goto") {
      const auto kind = op == "inc"   ? Instruction::Kind::Inc
                        : op == "dec" ? Instruction::Kind::Dec
                                      : Instruction::Kind::Reset;
      ins = {kind, parse_counter(w[2], line_no), parse_index(w[4], line_no), 0};
    } else if (op == "ifzero" && w.size() == 7 && w[3] == "goto" && w[5] == "else") {
      ins = Instruction::if_zero(parse_counter(w[2], line_no), parse_index(w[4], line_no),
                                 parse_index(w[6], line_no));
    } else {
      throw ParseError(line_no, 1, "malformed instruction");
    }
    body.emplace(idx, ins);
  }
  if (!have_name) throw ParseError(1, 1, "missing program header");
  if (!have_level) throw ParseError(1, 1, "missing level line");
  for (const auto& [idx, ins] : body) {
    if (idx != p.instructions.size())
      throw Error("instruction indices must be 0.." + std::to_string(body.size() - 1));
    p.instructions.push_back(ins);
  }
  p.validate();
  return p;
}

std::string serialize_counter_program(const CounterProgram& p) {
  std::ostringstream out;
  out << "program " << p.name << "\nlevel " << p.level << '\n';
  for (std::size_t i = 0; i < p.instructions.size(); ++i) {
    const auto& ins = p.instructions[i];
    const char* u = ins.counter == Counter::U1 ? "u1" : "u2";
    out << i << ": ";
    switch (ins.kind) {
      case Instruction::Kind::Inc: out << "inc " << u << " goto " << ins.next; break;
      case Instruction::Kind::Dec: out << "dec " << u << " goto " << ins.next; break;
      case Instruction::Kind::Reset: out << "reset " << u << " goto " << ins.next; break;
      case Instruction::Kind::IfZero:
        out << "ifzero " << u << " goto " << ins.next << " else " << ins.otherwise;
        break;
      case Instruction::Kind::Halt: out << "halt"; break;
    }
    out << '\n';
  }
  return out.str();
}

InterpretResult interpret_counter_program(const CounterProgram& p, std::size_t max_steps) {
  p.validate();
  const mpz_class range = counter_range(p.level);
  mpz_class u[2] = {0, 0};
  std::size_t pc = 0;
  for (std::size_t steps = 0;; ++steps) {
    const auto& ins = p.instructions[pc];
    if (ins.kind == Instruction::Kind::Halt) return Halted{steps, u[0], u[1]};
    if (steps == max_steps) return StillRunning{steps, u[0], u[1]};
    mpz_class& v = u[ins.counter == Counter::U1 ? 0 : 1];
    switch (ins.kind) {
      case Instruction::Kind::Inc: v = (v + 1) % range; break;
      case Instruction::Kind::Dec: v = (v + range - 1) % range; break;
      case Instruction::Kind::Reset: v = 0; break;
      case Instruction::Kind::IfZero: pc = v == 0 ? ins.next : ins.otherwise; continue;
      case Instruction::Kind::Halt: break;
    }
    pc = ins.next;
  }
}

// ---------------------------------------------------------------------------
// Compiler

CompiledProgram compile_counter_program_detailed(const CounterProgram& p, bool allow_large) {
  p.validate();
  check_level(p.level, allow_large);
  const std::size_t k = p.level;
  const Tower towers[2] = {Tower{"", 0}, Tower{"'", 1}};

  CodeGraph code;
  Emitter emit(code);
  const int start = code.node("start");
  std::vector<int> pcs;
  for (std::size_t i = 0; i < p.instructions.size(); ++i)
    pcs.push_back(code.node("p" + std::to_string(i)));

  int cur = start;
  for (const auto& t : towers) {
    for (std::size_t j = 2; j <= k; ++j) {
      int next = code.node("ready" + std::to_string(j) + t.prime);
      emit.initialize(j, t, cur, next, t.prime.empty() ? "u1" : "u2");
      cur = next;
    }
  }
  code.control(cur, Node::Kind::Jump, pcs[0]);

  std::set<int> halt_nodes;
  for (std::size_t i = 0; i < p.instructions.size(); ++i) {
    const auto& ins = p.instructions[i];
    const Tower& t = towers[ins.counter == Counter::U1 ? 0 : 1];
    const std::string ctx = "p" + std::to_string(i);
    switch (ins.kind) {
      case Instruction::Kind::Inc:
        emit.call(CounterOp::Inc, k, t, pcs[i], pcs[ins.next], ctx);
        break;
      case Instruction::Kind::Dec:
        emit.call(CounterOp::Dec, k, t, pcs[i], pcs[ins.next], ctx);
        break;
      case Instruction::Kind::Reset:
        emit.call(CounterOp::Reset, k, t, pcs[i], pcs[ins.next], ctx);
        break;
      case Instruction::Kind::IfZero:
        emit.op(CounterOp::IsZero, k, t, pcs[i], pcs[ins.next], pcs[ins.otherwise], ctx);
        break;
      case Instruction::Kind::Halt: halt_nodes.insert(pcs[i]); break;
    }
  }

  std::vector<std::string> channels = tower_channels(towers[0], k);
  for (auto& c : tower_channels(towers[1], k)) channels.push_back(c);
  Lowering low(code, p.name, channels);
  const StateId init = low.root(start, 0);
  CompiledProgram out{low.finish(init), k, {}};
  for (const auto& [s, q] : low.states())
    if (halt_nodes.contains(s.first)) out.halt_states.emplace(q, std::pair{(s.second & 1u) != 0, (s.second & 2u) != 0});
  return out;
}

Machine compile_counter_program(const CounterProgram& p, bool allow_large) {
  return compile_counter_program_detailed(p, allow_large).machine;
}

std::optional<std::pair<mpz_class, mpz_class>> decode_halt(const CompiledProgram& c,
                                                           const Configuration& s) {
  auto it = c.halt_states.find(s.state);
  if (it == c.halt_states.end()) return std::nullopt;
  if (c.level == 1)
    return std::pair<mpz_class, mpz_class>{it->second.first ? 1 : 0, it->second.second ? 1 : 0};
  const Machine& m = c.machine;
  const std::string top = "c" + std::to_string(c.level - 1);
  return std::pair{decode_bits(m, s.contents[m.find_channel(top)->index()]),
                   decode_bits(m, s.contents[m.find_channel(top + "'")->index()])};
}

}  // namespace icm::yardstick
