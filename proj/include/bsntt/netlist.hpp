#pragma once

// Gate-level boolean programs. Every net carries one 32-bit word, so a single
// pass over the gate list evaluates 32 independent copies of the circuit.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bsntt {

enum class GateOp : std::uint8_t { And2, Or2, Xor2, Not1 };

[[nodiscard]] constexpr std::string_view op_name(GateOp op) noexcept {
  switch (op) {
    case GateOp::And2: return "AND2";
    case GateOp::Or2: return "OR2";
    case GateOp::Xor2: return "XOR2";
    case GateOp::Not1: return "NOT1";
  }
  return "?";
}

using NetId = std::uint32_t;

struct Gate {
  GateOp op;
  NetId in0;
  NetId in1;  // unused for Not1
  NetId out;
};

struct NetGroup {
  std::string name;
  std::vector<NetId> nets;
};

/// Leveled netlist. Input nets are numbered first (IN groups, then STATE
/// groups); gate i drives net `input_net_count + i`.
struct Netlist {
  std::string name;
  std::vector<NetGroup> inputs;
  std::vector<NetGroup> states;
  std::vector<NetGroup> outputs;
  std::vector<Gate> gates;
  std::size_t input_net_count = 0;

  [[nodiscard]] std::size_t net_count() const noexcept { return input_net_count + gates.size(); }

  [[nodiscard]] const NetGroup* find_output(std::string_view group) const noexcept {
    for (const auto& g : outputs)
      if (g.name == group) return &g;
    return nullptr;
  }
};

class unbound_net : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class netlist_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Structural check: single assignment and leveled order.
inline void validate(const Netlist& nl) {
  std::size_t expected = 0;
  for (const auto* list : {&nl.inputs, &nl.states}) {
    for (const auto& g : *list) {
      for (auto id : g.nets) {
        if (id != expected++) throw netlist_error("input nets must be numbered contiguously");
      }
    }
  }
  if (expected != nl.input_net_count) throw netlist_error("input net count mismatch");
  for (std::size_t i = 0; i < nl.gates.size(); ++i) {
    const Gate& g = nl.gates[i];
    const NetId self = static_cast<NetId>(nl.input_net_count + i);
    if (g.out != self) throw netlist_error("gate " + std::to_string(i) + " drives the wrong net");
    if (g.in0 >= self || (g.op != GateOp::Not1 && g.in1 >= self))
      throw netlist_error("gate " + std::to_string(i) + " reads a net that is not yet written");
  }
  for (const auto& g : nl.outputs) {
    for (auto id : g.nets)
      if (id >= nl.net_count()) throw netlist_error("output " + g.name + " references an unknown net");
  }
}

using WordEnv = std::map<std::string, std::vector<std::uint32_t>, std::less<>>;

[[nodiscard]] constexpr std::uint32_t apply_gate(GateOp op, std::uint32_t a, std::uint32_t b) noexcept {
  switch (op) {
    case GateOp::And2: return a & b;
    case GateOp::Or2: return a | b;
    case GateOp::Xor2: return a ^ b;
    case GateOp::Not1: return ~a;
  }
  return 0;
}

/// Reference evaluator: gates in list order over a flat net array.
[[nodiscard]] inline WordEnv evaluate(const Netlist& nl, const WordEnv& env) {
  std::vector<std::uint32_t> nets(nl.net_count(), 0);
  for (const auto* list : {&nl.inputs, &nl.states}) {
    for (const auto& g : *list) {
      auto it = env.find(g.name);
      if (it == env.end()) throw unbound_net("unbound input group '" + g.name + "'");
      if (it->second.size() != g.nets.size())
        throw unbound_net("input group '" + g.name + "' has " + std::to_string(it->second.size()) +
                          " words, expected " + std::to_string(g.nets.size()));
      for (std::size_t i = 0; i < g.nets.size(); ++i) nets[g.nets[i]] = it->second[i];
    }
  }
  for (const Gate& g : nl.gates) nets[g.out] = apply_gate(g.op, nets[g.in0], nets[g.in1]);

  WordEnv result = env;
  for (const auto& g : nl.outputs) {
    std::vector<std::uint32_t> words(g.nets.size());
    for (std::size_t i = 0; i < g.nets.size(); ++i) words[i] = nets[g.nets[i]];
    result[g.name] = std::move(words);
  }
  return result;
}

struct GateHistogram {
  std::size_t and2 = 0;
  std::size_t or2 = 0;
  std::size_t xor2 = 0;
  std::size_t not1 = 0;

  [[nodiscard]] std::size_t total() const noexcept { return and2 + or2 + xor2 + not1; }
  bool operator==(const GateHistogram&) const = default;
};

[[nodiscard]] inline GateHistogram gate_histogram(const Netlist& nl) noexcept {
  GateHistogram h;
  for (const Gate& g : nl.gates) {
    switch (g.op) {
      case GateOp::And2: ++h.and2; break;
      case GateOp::Or2: ++h.or2; break;
      case GateOp::Xor2: ++h.xor2; break;
      case GateOp::Not1: ++h.not1; break;
    }
  }
  return h;
}

/// A signal is either a net or one of the two constants; the builder folds
/// constants away so they never reach the gate list.
struct Signal {
  static constexpr std::int64_t kZero = -1;
  static constexpr std::int64_t kOne = -2;
  std::int64_t id = kZero;

  [[nodiscard]] constexpr bool is_const() const noexcept { return id < 0; }
  [[nodiscard]] constexpr bool is_zero() const noexcept { return id == kZero; }
  [[nodiscard]] constexpr bool is_one() const noexcept { return id == kOne; }
  constexpr bool operator==(const Signal&) const = default;

  static constexpr Signal zero() noexcept { return {kZero}; }
  static constexpr Signal one() noexcept { return {kOne}; }
  static constexpr Signal constant(bool v) noexcept { return v ? one() : zero(); }
};

/// Little-endian bit vector of signals.
using Bus = std::vector<Signal>;

class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::string name) { nl_.name = std::move(name); }

  Bus add_input(const std::string& group, std::size_t width = 32) {
    return add_group(nl_.inputs, group, width);
  }

  Bus add_state(const std::string& group, std::size_t width = 32) {
    return add_group(nl_.states, group, width);
  }

  Signal and2(Signal a, Signal b) {
    if (a.is_zero() || b.is_zero()) return Signal::zero();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    if (a == b) return a;
    if (complement_of(a, b)) return Signal::zero();
    return emit(GateOp::And2, a, b);
  }

  Signal or2(Signal a, Signal b) {
    if (a.is_one() || b.is_one()) return Signal::one();
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a == b) return a;
    if (complement_of(a, b)) return Signal::one();
    return emit(GateOp::Or2, a, b);
  }

  Signal xor2(Signal a, Signal b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_one()) return not1(b);
    if (b.is_one()) return not1(a);
    if (a == b) return Signal::zero();
    if (complement_of(a, b)) return Signal::one();
    return emit(GateOp::Xor2, a, b);
  }

  Signal not1(Signal a) {
    if (a.is_zero()) return Signal::one();
    if (a.is_one()) return Signal::zero();
    if (auto it = inverse_.find(a.id); it != inverse_.end()) return Signal{it->second};
    Signal r = emit(GateOp::Not1, a, a);
    inverse_[a.id] = r.id;
    inverse_[r.id] = a.id;
    return r;
  }

  /// Output bits become dedicated gates: constants, input wires and repeated
  /// signals are materialized so each output net has its own driver.
  void add_output(const std::string& group, const Bus& bits) {
    NetGroup g{group, {}};
    for (Signal s : bits) {
      if (s.is_const() || static_cast<std::size_t>(s.id) < nl_.input_net_count ||
          claimed_.contains(s.id)) {
        s = materialize(s);
      }
      claimed_.insert(s.id);
      g.nets.push_back(static_cast<NetId>(s.id));
    }
    nl_.outputs.push_back(std::move(g));
  }

  [[nodiscard]] Netlist finish() && {
    validate(nl_);
    return std::move(nl_);
  }

 private:
  Bus add_group(std::vector<NetGroup>& list, const std::string& group, std::size_t width) {
    if (!nl_.gates.empty()) throw netlist_error("inputs must be declared before any gate");
    if (&list == &nl_.inputs && !nl_.states.empty())
      throw netlist_error("IN groups must be declared before STATE groups");
    NetGroup g{group, {}};
    Bus bus;
    for (std::size_t i = 0; i < width; ++i) {
      const auto id = static_cast<NetId>(nl_.input_net_count++);
      g.nets.push_back(id);
      bus.push_back(Signal{static_cast<std::int64_t>(id)});
    }
    list.push_back(std::move(g));
    return bus;
  }

  Signal emit(GateOp op, Signal a, Signal b) {
    std::int64_t x = a.id, y = b.id;
    if (op != GateOp::Not1 && x > y) std::swap(x, y);
    const std::uint64_t key = (static_cast<std::uint64_t>(op) << 62) |
                              (static_cast<std::uint64_t>(x) << 31) | static_cast<std::uint64_t>(y);
    if (auto it = cache_.find(key); it != cache_.end()) return Signal{it->second};
    const Signal r = raw(op, x, y);
    cache_.emplace(key, r.id);
    return r;
  }

  Signal raw(GateOp op, std::int64_t x, std::int64_t y) {
    const auto out = static_cast<NetId>(nl_.net_count());
    nl_.gates.push_back(Gate{op, static_cast<NetId>(x), static_cast<NetId>(op == GateOp::Not1 ? x : y), out});
    return Signal{static_cast<std::int64_t>(out)};
  }

  Signal materialize(Signal s) {
    if (nl_.input_net_count == 0) throw netlist_error("constant output in a circuit without inputs");
    if (s.is_const()) {
      // x ^ x == 0 for any input word; the complement gives all-ones.
      Signal z = raw(GateOp::Xor2, 0, 0);
      return s.is_zero() ? z : raw(GateOp::Not1, z.id, z.id);
    }
    return raw(GateOp::Or2, s.id, s.id);
  }

  bool complement_of(Signal a, Signal b) const {
    auto it = inverse_.find(a.id);
    return it != inverse_.end() && it->second == b.id;
  }

  Netlist nl_;
  std::unordered_map<std::uint64_t, std::int64_t> cache_;
  std::unordered_map<std::int64_t, std::int64_t> inverse_;
  std::unordered_set<std::int64_t> claimed_;
};

/// Forces the output word of one gate for a single evaluation.
struct GateFault {
  std::size_t gate = 0;  // index into Netlist::gates
  std::uint32_t value = 0;
};

/// Evaluation-optimized form of a netlist. Gates are reordered by (level,
/// op) so that runs of identical operations execute without dispatch; the
/// result is word-for-word identical to `evaluate`.
class CompiledCircuit {
 public:
  CompiledCircuit() = default;

  explicit CompiledCircuit(const Netlist& nl) : name_(nl.name) {
    validate(nl);
    const std::size_t in_count = nl.input_net_count;
    std::vector<std::uint32_t> level(nl.net_count(), 0);
    for (const Gate& g : nl.gates) {
      std::uint32_t l = level[g.in0];
      if (g.op != GateOp::Not1) l = std::max(l, level[g.in1]);
      level[g.out] = l + 1;
    }
    std::vector<std::size_t> order(nl.gates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Gate& ga = nl.gates[a];
      const Gate& gb = nl.gates[b];
      if (level[ga.out] != level[gb.out]) return level[ga.out] < level[gb.out];
      return ga.op < gb.op;
    });

    std::vector<NetId> remap(nl.net_count());
    for (std::size_t i = 0; i < in_count; ++i) remap[i] = static_cast<NetId>(i);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      remap[nl.gates[order[pos]].out] = static_cast<NetId>(in_count + pos);

    position_of_gate_.resize(nl.gates.size());
    ops_.reserve(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const Gate& g = nl.gates[order[pos]];
      position_of_gate_[order[pos]] = pos;
      ops_.push_back({remap[g.in0], remap[g.in1]});
      if (runs_.empty() || runs_.back().op != g.op) runs_.push_back({g.op, pos, pos});
      runs_.back().end = pos + 1;
    }
    input_count_ = in_count;
    net_count_ = nl.net_count();
    for (const auto* list : {&nl.inputs, &nl.states})
      for (const auto& g : *list) input_groups_.push_back({g.name, g.nets.size()});
    for (const auto& g : nl.outputs) {
      OutputGroup og{g.name, {}};
      for (auto id : g.nets) og.nets.push_back(remap[id]);
      output_groups_.push_back(std::move(og));
    }
    gate_count_ = nl.gates.size();
  }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t gate_count() const noexcept { return gate_count_; }
  [[nodiscard]] std::size_t net_count() const noexcept { return net_count_; }
  [[nodiscard]] std::size_t input_group_count() const noexcept { return input_groups_.size(); }
  [[nodiscard]] std::size_t output_group_count() const noexcept { return output_groups_.size(); }

  /// inputs[i] must point at as many words as input group i is wide (IN
  /// groups, then STATE groups); outputs likewise. `scratch` is resized to
  /// net_count(). Output and input ranges may alias.
  void run(std::span<const std::uint32_t* const> inputs, std::span<std::uint32_t* const> outputs,
           std::vector<std::uint32_t>& scratch, const GateFault* fault = nullptr) const {
    if (inputs.size() != input_groups_.size() || outputs.size() != output_groups_.size())
      throw std::invalid_argument("circuit " + name_ + ": wrong number of operand groups");
    scratch.resize(net_count_);
    std::uint32_t* net = scratch.data();
    std::size_t base = 0;
    for (std::size_t g = 0; g < inputs.size(); ++g) {
      const std::size_t w = input_groups_[g].width;
      std::copy_n(inputs[g], w, net + base);
      base += w;
    }
    if (fault == nullptr) {
      for (const Run& r : runs_) exec_run(r.op, r.begin, r.end, net);
    } else {
      if (fault->gate >= gate_count_) throw std::out_of_range("gate fault index out of range");
      const std::size_t target = position_of_gate_[fault->gate];
      for (const Run& r : runs_) {
        if (target >= r.begin && target < r.end) {
          exec_run(r.op, r.begin, target + 1, net);
          net[input_count_ + target] = fault->value;
          exec_run(r.op, target + 1, r.end, net);
        } else {
          exec_run(r.op, r.begin, r.end, net);
        }
      }
    }
    for (std::size_t g = 0; g < outputs.size(); ++g) {
      const auto& og = output_groups_[g];
      for (std::size_t i = 0; i < og.nets.size(); ++i) outputs[g][i] = net[og.nets[i]];
    }
  }

  /// Value gate `gate` (original numbering) takes for the given inputs; used
  /// to decide whether a stuck-at fault is observable at all.
  [[nodiscard]] std::uint32_t probe(std::span<const std::uint32_t* const> inputs, std::size_t gate,
                                    std::vector<std::uint32_t>& scratch) const {
    std::vector<std::vector<std::uint32_t>> sinks;
    std::vector<std::uint32_t*> outs;
    for (const auto& og : output_groups_) sinks.emplace_back(og.nets.size());
    for (auto& s : sinks) outs.push_back(s.data());
    run(inputs, outs, scratch);
    return scratch[input_count_ + position_of_gate_.at(gate)];
  }

 private:
  struct Operands {
    NetId a;
    NetId b;
  };
  struct Run {
    GateOp op;
    std::size_t begin;
    std::size_t end;
  };
  struct InputGroup {
    std::string name;
    std::size_t width;
  };
  struct OutputGroup {
    std::string name;
    std::vector<NetId> nets;
  };

  void exec_run(GateOp op, std::size_t begin, std::size_t end, std::uint32_t* net) const {
    const Operands* o = ops_.data();
    std::uint32_t* dst = net + input_count_;
    switch (op) {
      case GateOp::And2:
        for (std::size_t i = begin; i < end; ++i) dst[i] = net[o[i].a] & net[o[i].b];
        break;
      case GateOp::Or2:
        for (std::size_t i = begin; i < end; ++i) dst[i] = net[o[i].a] | net[o[i].b];
        break;
      case GateOp::Xor2:
        for (std::size_t i = begin; i < end; ++i) dst[i] = net[o[i].a] ^ net[o[i].b];
        break;
      case GateOp::Not1:
        for (std::size_t i = begin; i < end; ++i) dst[i] = ~net[o[i].a];
        break;
    }
  }

  std::string name_;
  std::vector<Operands> ops_;
  std::vector<Run> runs_;
  std::vector<std::size_t> position_of_gate_;
  std::vector<InputGroup> input_groups_;
  std::vector<OutputGroup> output_groups_;
  std::size_t input_count_ = 0;
  std::size_t net_count_ = 0;
  std::size_t gate_count_ = 0;
};

}  // namespace bsntt
