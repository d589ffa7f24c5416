#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "bsntt/circuits.hpp"
#include "bsntt/program.hpp"
#include "test_support.hpp"

namespace {

using namespace bsntt;
using test::from_slices;
using test::random_field_values;
using test::to_slices;

using Values = std::array<std::uint32_t, 32>;

constexpr int kEnvironments = 100'000;

Netlist single_xor() {
  CircuitBuilder cb("xor");
  const Bus a = cb.add_input("a", 1);
  const Bus b = cb.add_input("b", 1);
  cb.add_output("y", Bus{cb.xor2(a[0], b[0])});
  return std::move(cb).finish();
}

Values out_values(const WordEnv& env, const char* group) { return from_slices(env.at(group)); }

// Applies a two-operand scalar function slice by slice.
void check_binary(const Netlist& nl, const std::function<std::uint32_t(std::uint32_t, std::uint32_t)>& f, int rounds,
                  std::uint64_t seed) {
  const CompiledCircuit cc(nl);
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> scratch, result(32);
  for (int r = 0; r < rounds; ++r) {
    const Values va = random_field_values(rng), vb = random_field_values(rng);
    const auto wa = to_slices(va), wb = to_slices(vb);
    const std::uint32_t* in[] = {wa.data(), wb.data()};
    std::uint32_t* outs[] = {result.data()};
    cc.run(in, outs, scratch);
    const Values got = from_slices(result);
    for (unsigned k = 0; k < 32; ++k) {
      ASSERT_EQ(got[k], f(va[k], vb[k])) << nl.name << " slice " << k << " a=" << va[k] << " b=" << vb[k];
      ASSERT_LT(got[k], kQ);
    }
  }
}

WordEnv uniform_env(std::initializer_list<std::pair<const char*, std::uint32_t>> values) {
  WordEnv env;
  for (auto [name, v] : values) {
    Values vals{};
    vals.fill(v);
    env[name] = to_slices(vals);
  }
  return env;
}

TEST(Evaluate, SingleXorExample) {
  const Netlist nl = single_xor();
  const WordEnv out = evaluate(nl, {{"a", {0xFFFF0000u}}, {"b", {0x0F0F0F0Fu}}});
  EXPECT_EQ(out.at("y")[0], 0xF0F00F0Fu);
}

TEST(Evaluate, MissingInputThrowsUnboundNet) {
  const Netlist nl = single_xor();
  EXPECT_THROW((void)evaluate(nl, {{"a", {1u}}}), unbound_net);
  EXPECT_THROW((void)evaluate(nl, {{"a", {1u}}, {"b", {}}}), unbound_net);
}

TEST(Circuits, GroupsAreThirtyTwoNetsWide) {
  for (const Netlist& nl : {build_mod_adder(), build_mod_subtractor(), build_mod_multiplier(), build_butterfly(),
                            build_pointwise_multiplier(), build_pointwise_accumulator()}) {
    for (const auto* list : {&nl.inputs, &nl.states, &nl.outputs})
      for (const auto& g : *list) EXPECT_EQ(g.nets.size(), 32u) << nl.name << "." << g.name;
    EXPECT_NO_THROW(validate(nl));
  }
}

TEST(Circuits, LeveledOrderNeverReadsUnwrittenNets) {
  const Netlist nl = build_butterfly();
  std::vector<bool> written(nl.net_count(), false);
  for (std::size_t i = 0; i < nl.input_net_count; ++i) written[i] = true;
  for (const Gate& g : nl.gates) {
    ASSERT_TRUE(written[g.in0]);
    ASSERT_TRUE(written[g.in1]);
    ASSERT_FALSE(written[g.out]);
    written[g.out] = true;
  }
}

TEST(ModAdder, Examples) {
  const Netlist nl = build_mod_adder();
  auto r = evaluate(nl, uniform_env({{"a", 0}, {"b", 0}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 0u);
  r = evaluate(nl, uniform_env({{"a", kQ - 1}, {"b", 1}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 0u);
}

TEST(ModAdder, MatchesScalarOracle) {
  check_binary(build_mod_adder(), fq_add, kEnvironments, 1);
}

TEST(ModSubtractor, Examples) {
  const Netlist nl = build_mod_subtractor();
  auto r = evaluate(nl, uniform_env({{"a", 12345}, {"b", 12345}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 0u);
  r = evaluate(nl, uniform_env({{"a", 0}, {"b", 1}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 8380416u);
}

TEST(ModSubtractor, MatchesScalarOracle) {
  check_binary(build_mod_subtractor(),
               [](std::uint32_t a, std::uint32_t b) { return static_cast<std::uint32_t>((std::uint64_t{a} + kQ - b) % kQ); },
               kEnvironments, 2);
}

TEST(ModMultiplier, Examples) {
  const Netlist nl = build_mod_multiplier();
  auto r = evaluate(nl, uniform_env({{"a", 1}, {"b", 4242}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 4242u);
  r = evaluate(nl, uniform_env({{"a", kQ - 1}, {"b", kQ - 1}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 1u);
}

TEST(ModMultiplier, MatchesScalarOracle) {
  check_binary(build_mod_multiplier(),
               [](std::uint32_t a, std::uint32_t b) { return static_cast<std::uint32_t>(std::uint64_t{a} * b % kQ); },
               kEnvironments, 3);
}

TEST(ModMultiplier, BarrettEdgeOperands) {
  const CompiledCircuit cc(build_mod_multiplier());
  const std::array<std::uint32_t, 8> edges = {0, 1, 2, kQ - 1, kQ - 2, 1u << 22, (1u << 23) - (1u << 13), 4194305};
  std::vector<std::uint32_t> scratch, result(32);
  for (std::uint32_t x : edges) {
    Values va{}, vb{};
    for (unsigned k = 0; k < 32; ++k) {
      va[k] = x;
      vb[k] = edges[k % edges.size()];
    }
    const auto wa = to_slices(va), wb = to_slices(vb);
    const std::uint32_t* in[] = {wa.data(), wb.data()};
    std::uint32_t* outs[] = {result.data()};
    cc.run(in, outs, scratch);
    const Values got = from_slices(result);
    for (unsigned k = 0; k < 32; ++k) EXPECT_EQ(got[k], fq_mul(va[k], vb[k]));
  }
}

TEST(PointwiseMultiplier, Examples) {
  const Netlist nl = build_pointwise_multiplier();
  auto r = evaluate(nl, uniform_env({{"in1", 1}, {"in2", 777}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 777u);
  r = evaluate(nl, uniform_env({{"in1", kQ - 1}, {"in2", kQ - 1}}));
  for (auto v : out_values(r, "out")) EXPECT_EQ(v, 1u);
}

TEST(PointwiseMultiplier, MatchesScalarOracle) {
  check_binary(build_pointwise_multiplier(), fq_mul, kEnvironments, 4);
}

TEST(Butterfly, Examples) {
  const Netlist nl = build_butterfly();
  auto r = evaluate(nl, uniform_env({{"in1", 1}, {"in2", 1}, {"w", 1}}));
  for (auto v : out_values(r, "out1")) EXPECT_EQ(v, 2u);
  for (auto v : out_values(r, "out2")) EXPECT_EQ(v, 0u);
  r = evaluate(nl, uniform_env({{"in1", 0}, {"in2", 0}, {"w", 1234567}}));
  for (auto v : out_values(r, "out1")) EXPECT_EQ(v, 0u);
  for (auto v : out_values(r, "out2")) EXPECT_EQ(v, 0u);
  r = evaluate(nl, uniform_env({{"in1", 0}, {"in2", 0}, {"w", 0}}));
  for (const auto& [name, words] : r)
    for (auto w : words) EXPECT_EQ(w, 0u) << name;
}

TEST(Butterfly, MatchesScalarOracle) {
  const CompiledCircuit cc(build_butterfly());
  std::mt19937_64 rng(5);
  std::vector<std::uint32_t> scratch, o1(32), o2(32);
  for (int r = 0; r < kEnvironments; ++r) {
    const Values a = random_field_values(rng), b = random_field_values(rng), w = random_field_values(rng);
    const auto wa = to_slices(a), wb = to_slices(b), ww = to_slices(w);
    const std::uint32_t* in[] = {wa.data(), wb.data(), ww.data()};
    std::uint32_t* outs[] = {o1.data(), o2.data()};
    cc.run(in, outs, scratch);
    const Values g1 = from_slices(o1), g2 = from_slices(o2);
    for (unsigned k = 0; k < 32; ++k) {
      const std::uint32_t t = fq_mul(b[k], w[k]);
      ASSERT_EQ(g1[k], fq_add(a[k], t));
      ASSERT_EQ(g2[k], fq_sub(a[k], t));
    }
  }
}

TEST(Accumulator, Examples) {
  const Netlist nl = build_pointwise_accumulator();
  auto r = evaluate(nl, uniform_env({{"in", 31337}, {"state", 0}}));
  for (auto v : out_values(r, "state_next")) EXPECT_EQ(v, 31337u);
  WordEnv env = uniform_env({{"in", 6000000}, {"state", 0}});
  for (int i = 0; i < 2; ++i) env["state"] = evaluate(nl, env).at("state_next");
  for (auto v : from_slices(env.at("state"))) EXPECT_EQ(v, (2u * 6000000u) % kQ);
}

TEST(Accumulator, ThreadsStateOverFourInputs) {
  const CompiledCircuit cc(build_pointwise_accumulator());
  std::mt19937_64 rng(6);
  std::vector<std::uint32_t> scratch;
  for (int r = 0; r < 1000; ++r) {
    std::vector<std::uint32_t> state(32, 0);
    Values expect{};
    for (int n = 0; n < 4; ++n) {
      const Values x = random_field_values(rng);
      const auto wx = to_slices(x);
      const std::uint32_t* in[] = {wx.data(), state.data()};
      std::uint32_t* outs[] = {state.data()};
      cc.run(in, outs, scratch);
      for (unsigned k = 0; k < 32; ++k) expect[k] = fq_add(expect[k], x[k]);
    }
    ASSERT_EQ(from_slices(state), expect);
  }
}

TEST(CompiledCircuit, MatchesReferenceEvaluator) {
  const Netlist nl = build_butterfly();
  const CompiledCircuit cc(nl);
  std::mt19937_64 rng(8);
  std::vector<std::uint32_t> scratch, o1(32), o2(32);
  for (int r = 0; r < 50; ++r) {
    WordEnv env;
    for (const char* g : {"in1", "in2", "w"}) {
      env[g].resize(32);
      for (auto& w : env[g]) w = static_cast<std::uint32_t>(rng());
    }
    const WordEnv ref = evaluate(nl, env);
    const std::uint32_t* in[] = {env["in1"].data(), env["in2"].data(), env["w"].data()};
    std::uint32_t* outs[] = {o1.data(), o2.data()};
    cc.run(in, outs, scratch);
    EXPECT_EQ(o1, ref.at("out1"));
    EXPECT_EQ(o2, ref.at("out2"));
  }
}

TEST(CompiledCircuit, GateFaultForcesOneGate) {
  const Netlist nl = build_mod_adder();
  const CompiledCircuit cc(nl);
  std::vector<std::uint32_t> scratch, out(32);
  const std::vector<std::uint32_t> a(32, 0), b(32, 0);
  const std::uint32_t* in[] = {a.data(), b.data()};
  std::uint32_t* outs[] = {out.data()};
  // The gate driving out[0] forced to all ones flips bit 0 of every slice.
  const NetId target = nl.find_output("out")->nets[0];
  const std::size_t gate = target - nl.input_net_count;
  const GateFault f{gate, 0xFFFFFFFFu};
  cc.run(in, outs, scratch, &f);
  EXPECT_EQ(out[0], 0xFFFFFFFFu);
  EXPECT_EQ(cc.probe(in, gate, scratch), 0u);
}

TEST(GateHistogram, Examples) {
  EXPECT_EQ(gate_histogram(Netlist{}), GateHistogram{});
  CircuitBuilder cb("not");
  const Bus a = cb.add_input("a", 1);
  cb.add_output("y", Bus{cb.not1(a[0])});
  const GateHistogram h = gate_histogram(std::move(cb).finish());
  EXPECT_EQ(h.not1, 1u);
  EXPECT_EQ(h.and2 + h.or2 + h.xor2, 0u);
  const Netlist bf = build_butterfly();
  const GateHistogram hb = gate_histogram(bf);
  EXPECT_EQ(hb.total(), bf.gates.size());
}

TEST(Program, SingleXorHasOneInstructionLine) {
  const std::string text = emit_program(single_xor());
  std::size_t instr = 0, header = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.rfind("XOR2", 0) == 0) ++instr;
    if (line.rfind("IN ", 0) == 0 || line.rfind("OUT ", 0) == 0) ++header;
  }
  EXPECT_EQ(instr, 1u);
  EXPECT_EQ(header, 3u);
  EXPECT_EQ(interpret_program(text, {{"a", {0xFFFF0000u}}, {"b", {0x0F0F0F0Fu}}}).at("y")[0], 0xF0F00F0Fu);
}

TEST(Program, InstructionCountEqualsGateCount) {
  for (const Netlist& nl : {build_butterfly(), build_pointwise_accumulator()}) {
    const std::string text = emit_program(nl);
    std::size_t instr = 0, pos = 0;
    while (pos < text.size()) {
      const std::size_t eol = text.find('\n', pos);
      const std::string_view line(text.data() + pos, eol - pos);
      pos = eol + 1;
      for (std::string_view op : {"AND2 ", "OR2 ", "XOR2 ", "NOT1 "})
        if (line.substr(0, op.size()) == op) ++instr;
    }
    EXPECT_EQ(instr, nl.gates.size()) << nl.name;
  }
}

TEST(Program, RoundTripMatchesEvaluate) {
  std::mt19937_64 rng(9);
  for (const Netlist& nl : {build_butterfly(), build_pointwise_accumulator(), build_mod_subtractor()}) {
    const Netlist parsed = parse_program(emit_program(nl));
    for (int r = 0; r < 20; ++r) {
      WordEnv env;
      for (const auto* list : {&nl.inputs, &nl.states})
        for (const auto& g : *list) {
          env[g.name].resize(g.nets.size());
          for (auto& w : env[g.name]) w = static_cast<std::uint32_t>(rng());
        }
      EXPECT_EQ(evaluate(parsed, env), evaluate(nl, env)) << nl.name;
    }
  }
}

TEST(Program, ParseErrorsCarryLineNumbers) {
  try {
    (void)parse_program("IN a 1\nIN b 1\nOUT y 1\nFROB y[0] a[0] b[0]\n");
    FAIL() << "expected program_parse_error";
  } catch (const program_parse_error& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  try {
    (void)parse_program("IN a 1\nOUT y 1\nXOR2 y[0] a[0]\n");
    FAIL() << "expected program_parse_error";
  } catch (const program_parse_error& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW((void)parse_program("IN a 1\nOUT y 1\nXOR2 y[0] a[0] t7\n"), unbound_net);
  EXPECT_THROW((void)parse_program("IN a 1\nOUT y 1\nNOT1 t0 a[0]\n"), unbound_net);
  EXPECT_THROW((void)parse_program("IN a 1\nOUT y 1\nNOT1 y[0] a[0]\nNOT1 y[0] a[0]\n"), program_parse_error);
}

TEST(Program, CommentsAndBlankLinesAreIgnored) {
  const WordEnv out = interpret_program("# demo\n\nIN a 1   # first\nIN b 1\nOUT y 1\n\nAND2 y[0] a[0] b[0] # and\n",
                                        {{"a", {0xF0F0F0F0u}}, {"b", {0xFF00FF00u}}});
  EXPECT_EQ(out.at("y")[0], 0xF000F000u);
}

}  // namespace
