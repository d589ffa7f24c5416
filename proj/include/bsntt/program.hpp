#pragma once

// Straight-line program text for a netlist.
//
//   IN <group> <width>       input group (declared first)
//   STATE <group> <width>    state group, threaded by the caller from <group>_next
//   OUT <group> <width>      output group
//   AND2 <dst> <src1> <src2> | OR2 ... | XOR2 ... | NOT1 <dst> <src>
//
// Nets are `<group>[<index>]` or `t<number>`. '#' starts a comment.

#include <charconv>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netlist.hpp"

namespace bsntt {

class program_parse_error : public std::runtime_error {
 public:
  program_parse_error(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[nodiscard]] inline std::string emit_program(const Netlist& nl) {
  validate(nl);
  std::vector<std::string> names(nl.net_count());
  for (const auto* list : {&nl.inputs, &nl.states})
    for (const auto& g : *list)
      for (std::size_t i = 0; i < g.nets.size(); ++i)
        names[g.nets[i]] = g.name + "[" + std::to_string(i) + "]";
  for (const auto& g : nl.outputs)
    for (std::size_t i = 0; i < g.nets.size(); ++i)
      names[g.nets[i]] = g.name + "[" + std::to_string(i) + "]";
  std::size_t temp = 0;
  for (const Gate& g : nl.gates)
    if (names[g.out].empty()) names[g.out] = "t" + std::to_string(temp++);

  std::string out;
  out.reserve(nl.gates.size() * 32);
  out += "# " + nl.name + ": " + std::to_string(nl.gates.size()) + " gates\n";
  for (const auto& g : nl.inputs) out += "IN " + g.name + " " + std::to_string(g.nets.size()) + "\n";
  for (const auto& g : nl.states) out += "STATE " + g.name + " " + std::to_string(g.nets.size()) + "\n";
  for (const auto& g : nl.outputs) out += "OUT " + g.name + " " + std::to_string(g.nets.size()) + "\n";
  for (const Gate& g : nl.gates) {
    out += op_name(g.op);
    out += ' ';
    out += names[g.out];
    out += ' ';
    out += names[g.in0];
    if (g.op != GateOp::Not1) {
      out += ' ';
      out += names[g.in1];
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

inline bool parse_size(std::string_view s, std::size_t& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

/// Parses program text back into a netlist.
[[nodiscard]] inline Netlist parse_program(std::string_view text) {
  Netlist nl;
  nl.name = "program";
  std::unordered_map<std::string, NetId> defined;
  struct PendingOutput {
    std::string name;
    std::size_t width;
    std::size_t line;
  };
  std::vector<PendingOutput> outputs;
  bool in_body = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_tokens(line);
    if (tok.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::string_view kw = tok[0];

    if (kw == "IN" || kw == "STATE" || kw == "OUT") {
      if (in_body) throw program_parse_error(line_no, "declaration after the first instruction");
      std::size_t width = 0;
      if (tok.size() != 3 || !detail::parse_size(tok[2], width) || width == 0 || width > 32)
        throw program_parse_error(line_no, "expected '" + std::string(kw) + " <group> <width 1..32>'");
      const std::string group(tok[1]);
      if (kw == "OUT") {
        outputs.push_back({group, width, line_no});
        continue;
      }
      if (kw == "IN" && !nl.states.empty())
        throw program_parse_error(line_no, "IN declarations must precede STATE declarations");
      NetGroup g{group, {}};
      for (std::size_t i = 0; i < width; ++i) {
        const auto id = static_cast<NetId>(nl.input_net_count++);
        const std::string net = group + "[" + std::to_string(i) + "]";
        if (!defined.emplace(net, id).second) throw program_parse_error(line_no, "duplicate net " + net);
        g.nets.push_back(id);
      }
      (kw == "IN" ? nl.inputs : nl.states).push_back(std::move(g));
      continue;
    }

    GateOp op;
    std::size_t arity;
    if (kw == "AND2") {
      op = GateOp::And2, arity = 2;
    } else if (kw == "OR2") {
      op = GateOp::Or2, arity = 2;
    } else if (kw == "XOR2") {
      op = GateOp::Xor2, arity = 2;
    } else if (kw == "NOT1") {
      op = GateOp::Not1, arity = 1;
    } else {
      throw program_parse_error(line_no, "unknown instruction '" + std::string(kw) + "'");
    }
    if (tok.size() != arity + 2)
      throw program_parse_error(line_no, std::string(kw) + " expects " + std::to_string(arity + 1) + " operands");
    in_body = true;
    NetId src[2] = {0, 0};
    for (std::size_t k = 0; k < arity; ++k) {
      auto it = defined.find(std::string(tok[2 + k]));
      if (it == defined.end())
        throw unbound_net("line " + std::to_string(line_no) + ": net '" + std::string(tok[2 + k]) +
                          "' is read before it is written");
      src[k] = it->second;
    }
    const auto out = static_cast<NetId>(nl.net_count());
    if (!defined.emplace(std::string(tok[1]), out).second)
      throw program_parse_error(line_no, "net '" + std::string(tok[1]) + "' is assigned twice");
    nl.gates.push_back(Gate{op, src[0], arity == 2 ? src[1] : src[0], out});
    if (eol == text.size()) break;
  }

  for (const auto& o : outputs) {
    NetGroup g{o.name, {}};
    for (std::size_t i = 0; i < o.width; ++i) {
      const std::string net = o.name + "[" + std::to_string(i) + "]";
      auto it = defined.find(net);
      if (it == defined.end()) throw unbound_net("output net '" + net + "' is never written");
      g.nets.push_back(it->second);
    }
    nl.outputs.push_back(std::move(g));
  }
  validate(nl);
  return nl;
}

[[nodiscard]] inline WordEnv interpret_program(std::string_view text, const WordEnv& env) {
  return evaluate(parse_program(text), env);
}

}  // namespace bsntt
