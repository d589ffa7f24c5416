#pragma once

// Bit-sliced polynomial arithmetic driven by the gate-level circuits.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "circuits.hpp"
#include "field.hpp"
#include "netlist.hpp"
#include "slicing.hpp"
#include "transform_plan.hpp"

namespace bsntt {

class dimension_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The four working buffers (trans_in1, trans_in2, trans_out1, trans_out2)
/// plus the sticky detection flag set by a Check step.
struct SlicedPolyState {
  std::size_t block_count = 0;
  std::array<std::vector<std::uint32_t>, kBufferCount> buffers;
  bool fault_detected = false;

  SlicedPolyState() = default;
  explicit SlicedPolyState(std::size_t blocks) : block_count(blocks) {
    for (auto& b : buffers) b.assign(blocks * 32, 0);
  }

  [[nodiscard]] std::uint32_t* block(BlockRef r) {
    return buffers[static_cast<std::size_t>(r.buffer)].data() + std::size_t{r.block} * 32;
  }
  [[nodiscard]] const std::uint32_t* block(BlockRef r) const {
    return buffers[static_cast<std::size_t>(r.buffer)].data() + std::size_t{r.block} * 32;
  }
  [[nodiscard]] std::vector<std::uint32_t>& buffer(Buffer b) { return buffers[static_cast<std::size_t>(b)]; }
  [[nodiscard]] const std::vector<std::uint32_t>& buffer(Buffer b) const {
    return buffers[static_cast<std::size_t>(b)];
  }

  bool operator==(const SlicedPolyState&) const = default;
};

/// Per-call inputs, output and evaluation scratch for executing a plan.
struct Workspace {
  std::array<const Poly*, 2> operands{};
  Poly output{};
  std::vector<std::uint32_t> scratch;
};

struct ProtectedResult {
  Poly value{};
  bool fault_detected = false;
};

template <class T>
struct ProtectedValue {
  T value{};
  bool fault_detected = false;
};

enum class CircuitId : std::uint8_t { Butterfly = 0, PointwiseMultiplier = 1, PointwiseAccumulator = 2 };

[[nodiscard]] constexpr std::string_view circuit_id_name(CircuitId c) noexcept {
  switch (c) {
    case CircuitId::Butterfly: return "butterfly";
    case CircuitId::PointwiseMultiplier: return "pointwise_multiplier";
    case CircuitId::PointwiseAccumulator: return "pointwise_accumulator";
  }
  return "?";
}

/// Circuit evaluated by a step, if any.
[[nodiscard]] constexpr std::optional<CircuitId> step_circuit(const Step& s) noexcept {
  if (s.kind == StepKind::Butterfly) return CircuitId::Butterfly;
  if (s.kind == StepKind::Multiply) return CircuitId::PointwiseMultiplier;
  return std::nullopt;
}

/// Buffers read by the Check and Store steps of a plan.
[[nodiscard]] inline std::vector<Buffer> result_buffers(const TransformPlan& plan) {
  std::vector<Buffer> out;
  for (const SlotMap& m : plan.store)
    if (std::find(out.begin(), out.end(), m.buffer) == out.end()) out.push_back(m.buffer);
  std::sort(out.begin(), out.end());
  return out;
}

struct NoHook {};

class Engine {
 public:
  explicit Engine(const FieldParams& fp = FieldParams::dilithium()) : params_(fp) {
    require(fp.valid(), "invalid field parameters");
    netlists_ = {build_butterfly(), build_pointwise_multiplier(), build_pointwise_accumulator()};
    for (std::size_t i = 0; i < netlists_.size(); ++i) circuits_[i] = CompiledCircuit(netlists_[i]);
    for (int r = 0; r < 2; ++r) {
      plans_[0][r] = make_plan(PlanKind::Ntt, r == 1, fp);
      plans_[1][r] = make_plan(PlanKind::Intt, r == 1, fp);
      plans_[2][r] = make_plan(PlanKind::Pointwise, r == 1, fp);
    }
  }

  static const Engine& shared() {
    static const Engine engine;
    return engine;
  }

  [[nodiscard]] const FieldParams& params() const noexcept { return params_; }
  [[nodiscard]] const TransformPlan& plan(PlanKind kind, bool redundant) const {
    return plans_[static_cast<std::size_t>(kind)][redundant ? 1 : 0];
  }
  [[nodiscard]] const CompiledCircuit& circuit(CircuitId id) const { return circuits_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] const Netlist& netlist(CircuitId id) const { return netlists_[static_cast<std::size_t>(id)]; }

  /// Executes step `index` of `plan`. A gate fault applies to the step's
  /// circuit evaluation and is ignored by steps without one.
  void run_step(const TransformPlan& plan, std::size_t index, SlicedPolyState& st, Workspace& ws,
                const GateFault* fault = nullptr) const {
    const Step& s = plan.steps.at(index);
    switch (s.kind) {
      case StepKind::Load: load(plan, st, ws); break;
      case StepKind::Multiply: {
        const std::uint32_t* second = s.table == kNoTable ? st.block(s.b) : plan.tables[s.table].data();
        const std::uint32_t* in[] = {st.block(s.a), second};
        std::uint32_t* out[] = {st.block(s.out_a)};
        circuit(CircuitId::PointwiseMultiplier).run(in, out, ws.scratch, fault);
        break;
      }
      case StepKind::Butterfly: {
        const std::uint32_t* in[] = {st.block(s.a), st.block(s.b), plan.tables[s.table].data()};
        std::uint32_t* out[] = {st.block(s.out_a), st.block(s.out_b)};
        circuit(CircuitId::Butterfly).run(in, out, ws.scratch, fault);
        break;
      }
      case StepKind::Shuffle: {
        const auto p = StageShuffleParams::for_stage(s.stage);
        const std::uint32_t* o1 = st.block({Buffer::Out1, s.a.block});
        const std::uint32_t* o2 = st.block({Buffer::Out2, s.a.block});
        std::uint32_t* i1 = st.block({Buffer::In1, s.a.block});
        std::uint32_t* i2 = st.block({Buffer::In2, s.a.block});
        for (std::size_t w = 0; w < 32; ++w) std::tie(i1[w], i2[w]) = slice_shuffle(o1[w], o2[w], p);
        break;
      }
      case StepKind::Copy:
        st.buffer(Buffer::In1) = st.buffer(Buffer::Out1);
        st.buffer(Buffer::In2) = st.buffer(Buffer::Out2);
        break;
      case StepKind::Check:
        for (Buffer b : result_buffers(plan)) st.fault_detected |= redundancy_check(st.buffer(b));
        break;
      case StepKind::Store: store(plan, st, ws); break;
    }
  }

  /// Runs steps [first, last). A hook is called after every step as
  /// hook(index, step, state) and stops execution by returning false.
  template <class Hook = NoHook>
  void execute(const TransformPlan& plan, SlicedPolyState& st, Workspace& ws, std::size_t first,
               std::size_t last, Hook&& hook = {}) const {
    for (std::size_t i = first; i < last; ++i) {
      run_step(plan, i, st, ws);
      if constexpr (!std::is_same_v<std::remove_cvref_t<Hook>, NoHook>) {
        if (!hook(i, plan.steps[i], st)) return;
      }
    }
  }

  template <class Hook = NoHook>
  ProtectedResult run_plan(const TransformPlan& plan, const Poly& a, const Poly* b = nullptr,
                           Hook&& hook = {}) const {
    SlicedPolyState st(plan.block_count);
    Workspace ws;
    ws.operands = {&a, b};
    execute(plan, st, ws, 0, plan.steps.size(), std::forward<Hook>(hook));
    return {ws.output, st.fault_detected};
  }

  [[nodiscard]] Poly ntt256(const Poly& a) const { return checked(PlanKind::Ntt, false, a).value; }
  [[nodiscard]] Poly intt256(const Poly& a_hat) const { return checked(PlanKind::Intt, false, a_hat).value; }
  [[nodiscard]] Poly pointwise_mul(const Poly& a_hat, const Poly& b_hat) const {
    return checked(PlanKind::Pointwise, false, a_hat, &b_hat).value;
  }
  [[nodiscard]] Poly poly_mul(const Poly& a, const Poly& b) const { return poly_mul_impl(a, b, false).value; }
  [[nodiscard]] std::vector<Poly> matvec_mul(const std::vector<std::vector<Poly>>& m,
                                             const std::vector<Poly>& v) const {
    return matvec_impl(m, v, false).value;
  }

  [[nodiscard]] ProtectedResult protected_ntt256(const Poly& a) const { return checked(PlanKind::Ntt, true, a); }
  [[nodiscard]] ProtectedResult protected_intt256(const Poly& a_hat) const {
    return checked(PlanKind::Intt, true, a_hat);
  }
  [[nodiscard]] ProtectedResult protected_pointwise_mul(const Poly& a_hat, const Poly& b_hat) const {
    return checked(PlanKind::Pointwise, true, a_hat, &b_hat);
  }
  [[nodiscard]] ProtectedResult protected_poly_mul(const Poly& a, const Poly& b) const {
    return poly_mul_impl(a, b, true);
  }
  [[nodiscard]] ProtectedValue<std::vector<Poly>> protected_matvec_mul(const std::vector<std::vector<Poly>>& m,
                                                                       const std::vector<Poly>& v) const {
    return matvec_impl(m, v, true);
  }

  /// One accumulator evaluation per block: acc <- acc + product (mod q).
  void accumulate(std::span<std::uint32_t> acc, std::span<const std::uint32_t> product,
                  std::vector<std::uint32_t>& scratch) const {
    if (acc.size() != product.size() || acc.size() % 32 != 0)
      throw std::invalid_argument("accumulate: block size mismatch");
    for (std::size_t off = 0; off < acc.size(); off += 32) {
      const std::uint32_t* in[] = {product.data() + off, acc.data() + off};
      std::uint32_t* out[] = {acc.data() + off};
      circuit(CircuitId::PointwiseAccumulator).run(in, out, scratch);
    }
  }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  }

  ProtectedResult checked(PlanKind kind, bool redundant, const Poly& a, const Poly* b = nullptr) const {
    require_valid(a, "polynomial");
    if (b != nullptr) require_valid(*b, "polynomial");
    return run_plan(plan(kind, redundant), a, b);
  }

  ProtectedResult poly_mul_impl(const Poly& a, const Poly& b, bool redundant) const {
    const auto ah = checked(PlanKind::Ntt, redundant, a);
    const auto bh = checked(PlanKind::Ntt, redundant, b);
    const auto ch = run_plan(plan(PlanKind::Pointwise, redundant), ah.value, &bh.value);
    const auto c = run_plan(plan(PlanKind::Intt, redundant), ch.value);
    return {c.value, ah.fault_detected || bh.fault_detected || ch.fault_detected || c.fault_detected};
  }

  ProtectedValue<std::vector<Poly>> matvec_impl(const std::vector<std::vector<Poly>>& m,
                                                const std::vector<Poly>& v, bool redundant) const {
    for (const auto& row : m)
      if (row.size() != v.size())
        throw dimension_mismatch("matvec_mul: row has " + std::to_string(row.size()) + " columns, vector has " +
                                 std::to_string(v.size()) + " entries");
    for (const auto& p : v) require_valid(p, "vector entry");
    for (const auto& row : m)
      for (const auto& p : row) require_valid(p, "matrix entry");

    const TransformPlan& pw = plan(PlanKind::Pointwise, redundant);
    const std::size_t check_at = static_cast<std::size_t>(
        std::find_if(pw.steps.begin(), pw.steps.end(),
                     [](const Step& s) { return s.kind == StepKind::Store; }) -
        pw.steps.begin());

    ProtectedValue<std::vector<Poly>> result;
    Workspace ws;
    for (const auto& row : m) {
      std::vector<std::uint32_t> acc(pw.buffer_words(), 0);
      for (std::size_t j = 0; j < v.size(); ++j) {
        SlicedPolyState st(pw.block_count);
        ws.operands = {&row[j], &v[j]};
        execute(pw, st, ws, 0, check_at);
        result.fault_detected |= st.fault_detected;
        accumulate(acc, st.buffer(Buffer::Out1), ws.scratch);
      }
      if (redundant) result.fault_detected |= redundancy_check(acc);
      SlicedPolyState st(pw.block_count);
      st.buffer(Buffer::Out1) = acc;
      store(pw, st, ws);
      const auto r = run_plan(plan(PlanKind::Intt, redundant), ws.output);
      result.fault_detected |= r.fault_detected;
      result.value.push_back(r.value);
    }
    return result;
  }

  static void load(const TransformPlan& plan, SlicedPolyState& st, Workspace& ws) {
    std::array<std::vector<SliceBlock>, kBufferCount> coeffs;
    std::array<std::vector<bool>, kBufferCount> touched;
    for (std::size_t b = 0; b < kBufferCount; ++b) {
      coeffs[b].assign(plan.block_count, SliceBlock{});
      touched[b].assign(plan.block_count, false);
    }
    for (const SlotMap& m : plan.load) {
      const Poly* src = ws.operands[m.operand];
      if (src == nullptr) throw std::invalid_argument("plan operand missing");
      const unsigned idx = plan.bit_reverse_input ? bit_reverse(m.index, kLogN) : m.index;
      const auto b = static_cast<std::size_t>(m.buffer);
      coeffs[b][m.block][m.slice] = (*src)[idx];
      if (plan.redundant) coeffs[b][m.block][m.slice + kHalf] = (*src)[idx];
      touched[b][m.block] = true;
    }
    for (std::size_t b = 0; b < kBufferCount; ++b) {
      for (std::size_t j = 0; j < plan.block_count; ++j) {
        if (!touched[b][j]) continue;
        const SliceBlock words = transpose(coeffs[b][j]);
        std::copy(words.begin(), words.end(), st.block({static_cast<Buffer>(b), static_cast<std::uint16_t>(j)}));
      }
    }
  }

  static void store(const TransformPlan& plan, const SlicedPolyState& st, Workspace& ws) {
    std::array<std::vector<SliceBlock>, kBufferCount> coeffs;
    for (Buffer b : result_buffers(plan)) {
      auto& dst = coeffs[static_cast<std::size_t>(b)];
      dst.resize(plan.block_count);
      for (std::size_t j = 0; j < plan.block_count; ++j) {
        SliceBlock words{};
        const std::uint32_t* src = st.block({b, static_cast<std::uint16_t>(j)});
        std::copy_n(src, 32, words.begin());
        dst[j] = reverse_transpose(words);
      }
    }
    for (const SlotMap& m : plan.store) ws.output[m.index] = coeffs[static_cast<std::size_t>(m.buffer)][m.block][m.slice];
  }

  FieldParams params_;
  std::array<Netlist, 3> netlists_;
  std::array<CompiledCircuit, 3> circuits_;
  std::array<std::array<TransformPlan, 2>, 3> plans_;
};

}  // namespace bsntt
