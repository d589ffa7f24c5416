#pragma once

// Fault injection into the bit-sliced pipelines and campaign aggregation.
//
// Time is the global step index across the stages of a target. A data
// fault (BitFlip, WordCorrupt) at time t mutates the buffers after step t
// has run; SkipOp omits step t; StuckAt forces one gate of step t's circuit.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "engine.hpp"
#include "field.hpp"
#include "poly_io.hpp"
#include "transform_plan.hpp"

namespace bsntt {

class invalid_site : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class campaign_config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FaultModel : std::uint8_t { BitFlip, StuckAt0, StuckAt1, SkipOp, WordCorrupt };
inline constexpr std::array kAllFaultModels = {FaultModel::BitFlip, FaultModel::StuckAt0, FaultModel::StuckAt1,
                                               FaultModel::SkipOp, FaultModel::WordCorrupt};

[[nodiscard]] constexpr std::string_view fault_model_name(FaultModel m) noexcept {
  switch (m) {
    case FaultModel::BitFlip: return "bit_flip";
    case FaultModel::StuckAt0: return "stuck_at_0";
    case FaultModel::StuckAt1: return "stuck_at_1";
    case FaultModel::SkipOp: return "skip_op";
    case FaultModel::WordCorrupt: return "word_corrupt";
  }
  return "?";
}

[[nodiscard]] constexpr bool is_data_fault(FaultModel m) noexcept {
  return m == FaultModel::BitFlip || m == FaultModel::WordCorrupt;
}
[[nodiscard]] constexpr bool is_gate_fault(FaultModel m) noexcept {
  return m == FaultModel::StuckAt0 || m == FaultModel::StuckAt1;
}

enum class Target : std::uint8_t { Ntt, Intt, Pointwise, PolyMul };

[[nodiscard]] constexpr std::string_view target_name(Target t) noexcept {
  switch (t) {
    case Target::Ntt: return "ntt";
    case Target::Intt: return "intt";
    case Target::Pointwise: return "pointwise";
    case Target::PolyMul: return "polymul";
  }
  return "?";
}

enum class Classification : std::uint8_t { NoEffect, FaultDetected, FaultNotDetected };

[[nodiscard]] constexpr std::string_view classification_name(Classification c) noexcept {
  switch (c) {
    case Classification::NoEffect: return "no_effect";
    case Classification::FaultDetected: return "fault_detected";
    case Classification::FaultNotDetected: return "fault_not_detected";
  }
  return "?";
}

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& all, std::string_view (*name)(E) noexcept,
             const char* what) {
  for (E e : all)
    if (name(e) == s) return e;
  throw campaign_config_error(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

[[nodiscard]] inline FaultModel parse_fault_model(std::string_view s) {
  return parse_enum(s, kAllFaultModels, fault_model_name, "fault model");
}
[[nodiscard]] inline Target parse_target(std::string_view s) {
  return parse_enum(s, std::array{Target::Ntt, Target::Intt, Target::Pointwise, Target::PolyMul}, target_name,
                    "target");
}
[[nodiscard]] inline CircuitId parse_circuit_id(std::string_view s) {
  return parse_enum(s,
                    std::array{CircuitId::Butterfly, CircuitId::PointwiseMultiplier, CircuitId::PointwiseAccumulator},
                    circuit_id_name, "netlist");
}

struct FaultSpec {
  FaultModel model = FaultModel::BitFlip;
  std::size_t time = 0;
  Buffer buffer = Buffer::In1;   // data faults
  std::size_t word = 0;          // data faults
  unsigned bit = 0;              // BitFlip
  std::uint32_t pattern = 0;     // WordCorrupt XOR mask
  CircuitId netlist = CircuitId::Butterfly;  // StuckAt
  std::size_t gate = 0;                      // StuckAt

  static FaultSpec bit_flip(std::size_t time, Buffer b, std::size_t word, unsigned bit) {
    FaultSpec s;
    s.model = FaultModel::BitFlip, s.time = time, s.buffer = b, s.word = word, s.bit = bit;
    return s;
  }
  static FaultSpec word_corrupt(std::size_t time, Buffer b, std::size_t word, std::uint32_t pattern) {
    FaultSpec s;
    s.model = FaultModel::WordCorrupt, s.time = time, s.buffer = b, s.word = word, s.pattern = pattern;
    return s;
  }
  static FaultSpec skip(std::size_t time) {
    FaultSpec s;
    s.model = FaultModel::SkipOp, s.time = time;
    return s;
  }
  static FaultSpec stuck_at(bool one, std::size_t time, CircuitId c, std::size_t gate) {
    FaultSpec s;
    s.model = one ? FaultModel::StuckAt1 : FaultModel::StuckAt0, s.time = time, s.netlist = c, s.gate = gate;
    return s;
  }

  [[nodiscard]] std::uint32_t xor_mask() const noexcept {
    return model == FaultModel::BitFlip ? (std::uint32_t{1} << bit) : pattern;
  }
  bool operator==(const FaultSpec&) const = default;
};

struct FaultOutcome {
  Classification classification = Classification::NoEffect;
  bool exploitable = false;
  Poly output{};
  bool detected_flag = false;
};

/// Location of a global time inside the target's stage sequence.
struct TimePoint {
  std::size_t stage = 0;
  std::size_t step = 0;
};

namespace detail {

/// Bit (buffer * blocks + block) of a 64-bit mask.
inline std::uint64_t unit_bit(const TransformPlan& p, BlockRef r) {
  return std::uint64_t{1} << (static_cast<std::size_t>(r.buffer) * p.block_count + r.block);
}

inline std::uint64_t buffer_bits(const TransformPlan& p, Buffer b) {
  std::uint64_t m = 0;
  for (std::size_t j = 0; j < p.block_count; ++j) m |= unit_bit(p, {b, static_cast<std::uint16_t>(j)});
  return m;
}

/// live_after[i]: blocks whose value after step i is read by a later step
/// before being overwritten.
inline std::vector<std::uint64_t> plan_liveness(const TransformPlan& p) {
  if (p.block_count * kBufferCount > 64) throw std::logic_error("liveness mask too narrow");
  const std::size_t n = p.steps.size();
  std::vector<std::uint64_t> reads(n, 0), writes(n, 0);
  std::uint64_t results = 0;
  for (Buffer b : result_buffers(p)) results |= buffer_bits(p, b);
  for (std::size_t i = 0; i < n; ++i) {
    const Step& s = p.steps[i];
    switch (s.kind) {
      case StepKind::Load:
        for (const SlotMap& m : p.load) writes[i] |= unit_bit(p, {m.buffer, m.block});
        break;
      case StepKind::Multiply:
        reads[i] = unit_bit(p, s.a) | (s.table == kNoTable ? unit_bit(p, s.b) : 0);
        writes[i] = unit_bit(p, s.out_a);
        break;
      case StepKind::Butterfly:
        reads[i] = unit_bit(p, s.a) | unit_bit(p, s.b);
        writes[i] = unit_bit(p, s.out_a) | unit_bit(p, s.out_b);
        break;
      case StepKind::Shuffle:
        reads[i] = unit_bit(p, {Buffer::Out1, s.a.block}) | unit_bit(p, {Buffer::Out2, s.a.block});
        writes[i] = unit_bit(p, {Buffer::In1, s.a.block}) | unit_bit(p, {Buffer::In2, s.a.block});
        break;
      case StepKind::Copy:
        reads[i] = buffer_bits(p, Buffer::Out1) | buffer_bits(p, Buffer::Out2);
        writes[i] = buffer_bits(p, Buffer::In1) | buffer_bits(p, Buffer::In2);
        break;
      case StepKind::Check:
      case StepKind::Store:
        reads[i] = results;
        break;
    }
  }
  std::vector<std::uint64_t> live_after(n, 0);
  std::uint64_t live = 0;
  for (std::size_t i = n; i-- > 0;) {
    live_after[i] = live;
    live = (live & ~writes[i]) | reads[i];
  }
  return live_after;
}

inline bool live_equal(const TransformPlan& p, std::uint64_t live, const SlicedPolyState& a,
                       const SlicedPolyState& b) {
  if (a.fault_detected != b.fault_detected) return false;
  while (live != 0) {
    const unsigned u = static_cast<unsigned>(std::countr_zero(live));
    live &= live - 1;
    const BlockRef r{static_cast<Buffer>(u / p.block_count), static_cast<std::uint16_t>(u % p.block_count)};
    if (std::memcmp(a.block(r), b.block(r), 32 * sizeof(std::uint32_t)) != 0) return false;
  }
  return true;
}

}  // namespace detail

/// Golden execution of one target on fixed inputs, with per-step snapshots
/// from which faulty runs resume.
class FaultSimulator {
 public:
  FaultSimulator(const Engine& engine, Target target, std::array<Poly, 2> inputs, bool redundant = true)
      : engine_(&engine), target_(target), redundant_(redundant), inputs_(inputs) {
    for (const Poly& p : inputs_) require_valid(p, "fault simulator input");
    auto add = [this](PlanKind kind, In a, In b) { stages_.push_back(Stage{kind, {a, b}}); };
    switch (target) {
      case Target::Ntt: add(PlanKind::Ntt, In::A, In::None); break;
      case Target::Intt: add(PlanKind::Intt, In::A, In::None); break;
      case Target::Pointwise: add(PlanKind::Pointwise, In::A, In::B); break;
      case Target::PolyMul:
        add(PlanKind::Ntt, In::A, In::None);
        add(PlanKind::Ntt, In::B, In::None);
        add(PlanKind::Pointwise, In::Stage0, In::Stage1);
        add(PlanKind::Intt, In::Stage2, In::None);
        break;
    }
    std::size_t offset = 0;
    for (auto& st : stages_) {
      st.plan = &engine.plan(st.kind, redundant);
      st.offset = offset;
      offset += st.plan->steps.size();
      st.live_after = detail::plan_liveness(*st.plan);
      const auto [first, last] = st.plan->compute_range();
      st.compute_first = first;
      st.compute_last = last;
      st.check_index = st.plan->steps.size() - 1;
      for (std::size_t i = 0; i < st.plan->steps.size(); ++i)
        if (st.plan->steps[i].kind == StepKind::Check) st.check_index = i;
    }
    time_count_ = offset;

    Workspace ws;
    for (std::size_t k = 0; k < stages_.size(); ++k) {
      Stage& st = stages_[k];
      SlicedPolyState s(st.plan->block_count);
      bind(k, ws, golden_outputs_);
      st.snapshots.reserve(st.plan->steps.size());
      for (std::size_t i = 0; i < st.plan->steps.size(); ++i) {
        engine.run_step(*st.plan, i, s, ws);
        st.snapshots.push_back(s);
      }
      golden_outputs_.push_back(ws.output);
      golden_detected_ |= s.fault_detected;
    }
  }

  [[nodiscard]] Target target() const noexcept { return target_; }
  [[nodiscard]] bool redundant() const noexcept { return redundant_; }
  [[nodiscard]] const std::array<Poly, 2>& inputs() const noexcept { return inputs_; }
  [[nodiscard]] const Poly& golden() const noexcept { return golden_outputs_.back(); }
  [[nodiscard]] bool golden_detected() const noexcept { return golden_detected_; }
  [[nodiscard]] std::size_t time_count() const noexcept { return time_count_; }
  [[nodiscard]] std::size_t stage_count() const noexcept { return stages_.size(); }
  [[nodiscard]] const TransformPlan& stage_plan(std::size_t k) const { return *stages_.at(k).plan; }
  [[nodiscard]] const Engine& engine() const noexcept { return *engine_; }

  [[nodiscard]] TimePoint locate(std::size_t time) const {
    if (time >= time_count_)
      throw invalid_site("time " + std::to_string(time) + " outside 0.." + std::to_string(time_count_ - 1));
    std::size_t k = stages_.size() - 1;
    while (stages_[k].offset > time) --k;
    return {k, time - stages_[k].offset};
  }
  [[nodiscard]] const Step& step_at(std::size_t time) const {
    const TimePoint tp = locate(time);
    return stages_[tp.stage].plan->steps[tp.step];
  }

  /// Data-fault hooks of the compute phase: after the step that loads the
  /// slice buffers up to after the last compute step, for every stage.
  [[nodiscard]] std::vector<std::size_t> data_hooks() const {
    std::vector<std::size_t> out;
    for (const Stage& st : stages_)
      for (std::size_t i = st.compute_first - 1; i <= st.compute_last; ++i) out.push_back(st.offset + i);
    return out;
  }
  /// Steps SkipOp may omit (circuit evaluations, shuffles and copies).
  [[nodiscard]] std::vector<std::size_t> skip_times() const {
    std::vector<std::size_t> out;
    for (const Stage& st : stages_)
      for (std::size_t i = 0; i < st.plan->steps.size(); ++i)
        if (st.plan->steps[i].is_compute()) out.push_back(st.offset + i);
    return out;
  }
  /// Steps that evaluate a circuit.
  [[nodiscard]] std::vector<std::size_t> circuit_times() const {
    std::vector<std::size_t> out;
    for (const Stage& st : stages_)
      for (std::size_t i = 0; i < st.plan->steps.size(); ++i)
        if (st.plan->steps[i].is_circuit()) out.push_back(st.offset + i);
    return out;
  }

  [[nodiscard]] std::size_t words_per_buffer(std::size_t time) const {
    return stages_[locate(time).stage].plan->buffer_words();
  }

  void validate(const FaultSpec& f) const {
    const TimePoint tp = locate(f.time);
    const Stage& st = stages_[tp.stage];
    const Step& step = st.plan->steps[tp.step];
    if (is_data_fault(f.model)) {
      if (step.kind == StepKind::Store) throw invalid_site("data fault after the final store has no target");
      if (static_cast<std::size_t>(f.buffer) >= kBufferCount) throw invalid_site("buffer out of range");
      if (f.word >= st.plan->buffer_words())
        throw invalid_site("word " + std::to_string(f.word) + " outside buffer of " +
                           std::to_string(st.plan->buffer_words()) + " words");
      if (f.model == FaultModel::BitFlip && f.bit >= 32) throw invalid_site("bit index must be in 0..31");
    } else if (f.model == FaultModel::SkipOp) {
      if (!step.is_compute())
        throw invalid_site("step " + std::to_string(f.time) + " (" + std::string(step_kind_name(step.kind)) +
                           ") cannot be skipped");
    } else {
      const auto c = step_circuit(step);
      if (!c) throw invalid_site("step " + std::to_string(f.time) + " evaluates no circuit");
      if (*c != f.netlist)
        throw invalid_site("step " + std::to_string(f.time) + " evaluates " + std::string(circuit_id_name(*c)) +
                           ", not " + std::string(circuit_id_name(f.netlist)));
      if (f.gate >= engine_->circuit(*c).gate_count()) throw invalid_site("gate index out of range");
    }
  }

  /// Faulty run that stops as soon as every live block matches the golden
  /// run again.
  [[nodiscard]] FaultOutcome run(const FaultSpec& f) const { return run_impl(f, true); }
  /// Faulty run without the early exit.
  [[nodiscard]] FaultOutcome run_full(const FaultSpec& f) const { return run_impl(f, false); }

  /// Value gate `gate` of the circuit evaluated at `time` takes in the golden run.
  [[nodiscard]] std::uint32_t golden_gate_value(std::size_t time, std::size_t gate) const {
    const TimePoint tp = locate(time);
    const Stage& st = stages_[tp.stage];
    const Step& s = st.plan->steps[tp.step];
    const auto c = step_circuit(s);
    if (!c) throw invalid_site("step evaluates no circuit");
    const SlicedPolyState& before = state_before(tp);
    std::vector<std::uint32_t> scratch;
    if (s.kind == StepKind::Butterfly) {
      const std::uint32_t* in[] = {before.block(s.a), before.block(s.b), st.plan->tables[s.table].data()};
      return engine_->circuit(*c).probe(in, gate, scratch);
    }
    const std::uint32_t* second = s.table == kNoTable ? before.block(s.b) : st.plan->tables[s.table].data();
    const std::uint32_t* in[] = {before.block(s.a), second};
    return engine_->circuit(*c).probe(in, gate, scratch);
  }

 private:
  enum class In : std::uint8_t { None, A, B, Stage0, Stage1, Stage2 };
  struct Stage {
    Stage(PlanKind k, std::array<In, 2> ops) : kind(k), operands(ops) {}
    PlanKind kind;
    std::array<In, 2> operands;
    const TransformPlan* plan = nullptr;
    std::size_t offset = 0;
    std::size_t compute_first = 0;
    std::size_t compute_last = 0;
    std::size_t check_index = 0;
    std::vector<std::uint64_t> live_after;
    std::vector<SlicedPolyState> snapshots;
  };

  void bind(std::size_t k, Workspace& ws, const std::vector<Poly>& stage_outputs) const {
    for (std::size_t i = 0; i < 2; ++i) {
      switch (stages_[k].operands[i]) {
        case In::None: ws.operands[i] = nullptr; break;
        case In::A: ws.operands[i] = &inputs_[0]; break;
        case In::B: ws.operands[i] = &inputs_[1]; break;
        case In::Stage0: ws.operands[i] = &stage_outputs.at(0); break;
        case In::Stage1: ws.operands[i] = &stage_outputs.at(1); break;
        case In::Stage2: ws.operands[i] = &stage_outputs.at(2); break;
      }
    }
  }

  const SlicedPolyState& state_before(TimePoint tp) const {
    if (tp.step == 0) throw invalid_site("the first step of a stage evaluates no circuit");
    return stages_[tp.stage].snapshots[tp.step - 1];
  }

  FaultOutcome run_impl(const FaultSpec& f, bool early_exit) const {
    validate(f);
    const TimePoint tp = locate(f.time);
    const Stage& st = stages_[tp.stage];
    const TransformPlan& plan = *st.plan;

    Workspace ws;
    std::vector<Poly> outputs(golden_outputs_.begin(), golden_outputs_.begin() + static_cast<long>(tp.stage));
    bind(tp.stage, ws, outputs);

    SlicedPolyState s = tp.step > 0 ? st.snapshots[tp.step - 1] : SlicedPolyState(plan.block_count);
    std::size_t next = tp.step;
    if (is_data_fault(f.model)) {
      s = st.snapshots[tp.step];
      s.buffer(f.buffer)[f.word] ^= f.xor_mask();
      next = tp.step + 1;
    } else if (f.model == FaultModel::SkipOp) {
      next = tp.step + 1;
    } else {
      const GateFault gf{f.gate, f.model == FaultModel::StuckAt1 ? ~std::uint32_t{0} : std::uint32_t{0}};
      engine_->run_step(plan, tp.step, s, ws, &gf);
      next = tp.step + 1;
    }

    const std::size_t touched = next - 1;
    if (early_exit && touched < st.check_index && detail::live_equal(plan, st.live_after[touched], s, st.snapshots[touched]))
      return classify(golden(), golden_detected_);

    for (std::size_t i = next; i < plan.steps.size(); ++i) {
      engine_->run_step(plan, i, s, ws);
      if (early_exit && i < st.check_index && detail::live_equal(plan, st.live_after[i], s, st.snapshots[i]))
        return classify(golden(), golden_detected_);
    }

    bool detected = golden_detected_ || s.fault_detected;
    outputs.push_back(ws.output);
    if (ws.output == golden_outputs_[tp.stage] && !s.fault_detected) return classify(golden(), golden_detected_);
    for (std::size_t k = tp.stage + 1; k < stages_.size(); ++k) {
      const TransformPlan& p = *stages_[k].plan;
      SlicedPolyState sk(p.block_count);
      bind(k, ws, outputs);
      engine_->execute(p, sk, ws, 0, p.steps.size());
      detected |= sk.fault_detected;
      outputs.push_back(ws.output);
    }
    return classify(outputs.back(), detected);
  }

  FaultOutcome classify(const Poly& out, bool detected) const {
    FaultOutcome o;
    o.output = out;
    o.detected_flag = detected;
    if (detected) {
      o.classification = Classification::FaultDetected;
    } else if (out == golden()) {
      o.classification = Classification::NoEffect;
    } else {
      o.classification = Classification::FaultNotDetected;
      o.exploitable = std::any_of(out.begin(), out.end(), [](std::uint32_t v) { return v != 0; });
    }
    return o;
  }

  const Engine* engine_;
  Target target_;
  bool redundant_;
  std::array<Poly, 2> inputs_;
  std::vector<Stage> stages_;
  std::vector<Poly> golden_outputs_;
  bool golden_detected_ = false;
  std::size_t time_count_ = 0;
};

/// Fault-free protected forward transform.
[[nodiscard]] inline Poly golden_run(const Poly& input, const Engine& engine = Engine::shared()) {
  return engine.protected_ntt256(input).value;
}

/// One fault in the protected forward transform of `input`.
[[nodiscard]] inline FaultOutcome run_with_fault(const Poly& input, const FaultSpec& spec,
                                                 const Engine& engine = Engine::shared()) {
  return FaultSimulator(engine, Target::Ntt, {input, Poly{}}).run(spec);
}

// ---------------------------------------------------------------------------
// Campaigns

enum class SiteStrategy : std::uint8_t { Exhaustive, Random, Stratified, List };
enum class RecordMode : std::uint8_t { All, Faults, None };

struct CampaignConfig {
  Target target = Target::Ntt;
  bool redundant = true;
  std::vector<FaultModel> models{FaultModel::BitFlip};
  std::optional<std::size_t> time_begin;  // inclusive
  std::optional<std::size_t> time_end;    // inclusive
  SiteStrategy strategy = SiteStrategy::Exhaustive;
  std::size_t trials = 0;            // Random
  std::size_t trials_per_hook = 0;   // Stratified
  std::vector<FaultSpec> sites;      // List
  std::vector<Buffer> buffers{Buffer::In1, Buffer::In2, Buffer::Out1, Buffer::Out2};
  std::optional<std::pair<std::size_t, std::size_t>> words;  // inclusive word range
  std::vector<unsigned> bits;        // BitFlip; empty = all 32
  std::vector<std::uint32_t> patterns;  // WordCorrupt
  bool aligned_pairs = false;        // WordCorrupt: (1<<b)|(1<<(b+16)) for b in 0..15
  std::optional<std::vector<std::size_t>> gates;  // StuckAt; empty = all gates
  std::optional<std::array<Poly, 2>> inputs;      // default: drawn from the seed
  std::uint64_t seed = 0;
  RecordMode records = RecordMode::All;
};

struct CampaignRecord {
  FaultSpec spec;
  Classification classification = Classification::NoEffect;
  bool exploitable = false;
};

struct CampaignReport {
  CampaignConfig config;
  std::size_t trials = 0;
  std::array<std::size_t, 3> counts{};  // by Classification
  std::size_t exploitable = 0;
  Poly golden{};
  std::array<Poly, 2> inputs{};
  std::map<std::size_t, std::array<std::size_t, 3>> per_time;
  std::vector<CampaignRecord> records;

  [[nodiscard]] std::size_t count(Classification c) const { return counts[static_cast<std::size_t>(c)]; }
  [[nodiscard]] std::size_t non_exploitable() const { return trials - exploitable; }

  [[nodiscard]] nlohmann::ordered_json to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

namespace detail {

/// Uniform draw from [0, bound) by rejection, independent of the standard
/// library's distribution implementations.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bounded: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

inline Poly random_poly(std::mt19937_64& rng) {
  Poly p{};
  for (auto& c : p) c = static_cast<std::uint32_t>(bounded(rng, kQ));
  return p;
}

/// Enumerable fault space of one model at one time.
class SiteSpace {
 public:
  SiteSpace(const FaultSimulator& sim, const CampaignConfig& cfg) : sim_(sim), cfg_(cfg) {
    bits_ = cfg.bits;
    if (bits_.empty())
      for (unsigned b = 0; b < 32; ++b) bits_.push_back(b);
    for (unsigned b : bits_)
      if (b >= 32) throw campaign_config_error("bit index must be in 0..31");
    patterns_ = cfg.patterns;
    if (cfg.aligned_pairs)
      for (unsigned b = 0; b < kHalf; ++b) patterns_.push_back((std::uint32_t{1} << b) | (std::uint32_t{1} << (b + kHalf)));
    if (cfg.buffers.empty()) throw campaign_config_error("buffer list is empty");
  }

  /// Times at which `m` may be injected, clipped to the configured range.
  std::vector<std::size_t> times(FaultModel m) const {
    std::vector<std::size_t> t;
    if (is_data_fault(m)) {
      t = sim_.data_hooks();
    } else if (m == FaultModel::SkipOp) {
      t = sim_.skip_times();
    } else {
      t = sim_.circuit_times();
    }
    const std::size_t lo = cfg_.time_begin.value_or(0);
    const std::size_t hi = cfg_.time_end.value_or(std::numeric_limits<std::size_t>::max());
    std::erase_if(t, [&](std::size_t x) { return x < lo || x > hi; });
    return t;
  }

  std::pair<std::size_t, std::size_t> word_range(std::size_t time) const {
    const std::size_t n = sim_.words_per_buffer(time);
    std::size_t lo = 0, hi = n - 1;
    if (cfg_.words) {
      lo = cfg_.words->first;
      hi = std::min(cfg_.words->second, n - 1);
      if (lo > hi) throw campaign_config_error("empty word range");
    }
    return {lo, hi};
  }

  std::size_t gates_at(std::size_t time) const {
    if (cfg_.gates && !cfg_.gates->empty()) return cfg_.gates->size();
    return sim_.engine().circuit(*step_circuit(sim_.step_at(time))).gate_count();
  }

  /// Number of sites of model `m` at `time`.
  std::size_t size(FaultModel m, std::size_t time) const {
    switch (m) {
      case FaultModel::BitFlip:
      case FaultModel::WordCorrupt: {
        const auto [lo, hi] = word_range(time);
        const std::size_t per_word = m == FaultModel::BitFlip ? bits_.size() : patterns_.size();
        return cfg_.buffers.size() * (hi - lo + 1) * per_word;
      }
      case FaultModel::SkipOp: return 1;
      case FaultModel::StuckAt0:
      case FaultModel::StuckAt1: return gates_at(time);
    }
    return 0;
  }

  FaultSpec site(FaultModel m, std::size_t time, std::size_t index) const {
    switch (m) {
      case FaultModel::BitFlip:
      case FaultModel::WordCorrupt: {
        const auto [lo, hi] = word_range(time);
        const std::size_t per_word = m == FaultModel::BitFlip ? bits_.size() : patterns_.size();
        const std::size_t words = hi - lo + 1;
        const std::size_t inner = index % per_word;
        const std::size_t word = lo + (index / per_word) % words;
        const Buffer buf = cfg_.buffers[index / per_word / words];
        return m == FaultModel::BitFlip ? FaultSpec::bit_flip(time, buf, word, bits_[inner])
                                        : FaultSpec::word_corrupt(time, buf, word, patterns_[inner]);
      }
      case FaultModel::SkipOp: return FaultSpec::skip(time);
      case FaultModel::StuckAt0:
      case FaultModel::StuckAt1: {
        const std::size_t gate = cfg_.gates && !cfg_.gates->empty() ? (*cfg_.gates)[index] : index;
        return FaultSpec::stuck_at(m == FaultModel::StuckAt1, time, *step_circuit(sim_.step_at(time)), gate);
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  const FaultSimulator& sim_;
  const CampaignConfig& cfg_;
  std::vector<unsigned> bits_;
  std::vector<std::uint32_t> patterns_;
};

struct Block {
  FaultModel model;
  std::size_t time;
  std::size_t size;
};

inline std::vector<FaultSpec> enumerate_sites(const FaultSimulator& sim, const CampaignConfig& cfg) {
  if (cfg.strategy == SiteStrategy::List) return cfg.sites;
  if (cfg.models.empty()) throw campaign_config_error("no fault models configured");
  for (FaultModel m : cfg.models)
    if (m == FaultModel::WordCorrupt && cfg.patterns.empty() && !cfg.aligned_pairs)
      throw campaign_config_error("word_corrupt needs 'patterns' or 'aligned_pairs'");
  const SiteSpace space(sim, cfg);
  std::vector<Block> blocks;
  for (FaultModel m : cfg.models)
    for (std::size_t t : space.times(m)) blocks.push_back({m, t, space.size(m, t)});

  std::vector<FaultSpec> out;
  std::mt19937_64 rng(cfg.seed ^ 0x5eed5eed5eedULL);
  switch (cfg.strategy) {
    case SiteStrategy::Exhaustive:
      for (const Block& b : blocks)
        for (std::size_t i = 0; i < b.size; ++i) out.push_back(space.site(b.model, b.time, i));
      break;
    case SiteStrategy::Random: {
      std::vector<std::size_t> prefix;
      std::size_t total = 0;
      for (const Block& b : blocks) prefix.push_back(total += b.size);
      if (cfg.trials > 0 && total == 0) throw campaign_config_error("fault space is empty");
      for (std::size_t k = 0; k < cfg.trials; ++k) {
        const std::size_t x = bounded(rng, total);
        const std::size_t bi =
            static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), x) - prefix.begin());
        const std::size_t base = bi == 0 ? 0 : prefix[bi - 1];
        out.push_back(space.site(blocks[bi].model, blocks[bi].time, x - base));
      }
      break;
    }
    case SiteStrategy::Stratified:
      for (const Block& b : blocks)
        for (std::size_t k = 0; k < cfg.trials_per_hook; ++k)
          out.push_back(space.site(b.model, b.time, bounded(rng, b.size)));
      break;
    case SiteStrategy::List: break;
  }
  return out;
}

}  // namespace detail

/// Inputs a campaign runs on: the configured ones or two polynomials drawn
/// from the seed.
[[nodiscard]] inline std::array<Poly, 2> campaign_inputs(const CampaignConfig& cfg) {
  if (cfg.inputs) return *cfg.inputs;
  std::mt19937_64 rng(cfg.seed);
  std::array<Poly, 2> in{};
  in[0] = detail::random_poly(rng);
  in[1] = detail::random_poly(rng);
  return in;
}

[[nodiscard]] inline CampaignReport run_campaign(const CampaignConfig& cfg, unsigned threads = 1,
                                                 const Engine& engine = Engine::shared()) {
  CampaignReport rep;
  rep.config = cfg;
  rep.inputs = campaign_inputs(cfg);
  const FaultSimulator sim(engine, cfg.target, rep.inputs, cfg.redundant);
  rep.golden = sim.golden();

  const std::vector<FaultSpec> sites = detail::enumerate_sites(sim, cfg);
  for (const FaultSpec& s : sites) sim.validate(s);
  rep.trials = sites.size();

  std::vector<std::uint8_t> cls(sites.size());
  std::vector<std::uint8_t> expl(sites.size());
  std::atomic<std::size_t> cursor{0};
  constexpr std::size_t kChunk = 64;
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = cursor.fetch_add(kChunk);
      if (begin >= sites.size()) return;
      const std::size_t end = std::min(begin + kChunk, sites.size());
      for (std::size_t i = begin; i < end; ++i) {
        const FaultOutcome o = sim.run(sites[i]);
        cls[i] = static_cast<std::uint8_t>(o.classification);
        expl[i] = o.exploitable ? 1 : 0;
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || sites.size() <= kChunk) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto c = static_cast<Classification>(cls[i]);
    ++rep.counts[cls[i]];
    ++rep.per_time[sites[i].time][cls[i]];
    rep.exploitable += expl[i];
    const bool keep = cfg.records == RecordMode::All ||
                      (cfg.records == RecordMode::Faults && c != Classification::NoEffect);
    if (keep) rep.records.push_back({sites[i], c, expl[i] != 0});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline std::string percent(std::size_t part, std::size_t total) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << (total == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(total));
  return os.str();
}

inline std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

inline std::uint32_t parse_u32(const nlohmann::json& j, const char* what) {
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v > 0xFFFFFFFFu) throw campaign_config_error(std::string(what) + " exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos, 0);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty() || v > 0xFFFFFFFFul)
      throw campaign_config_error(std::string("bad ") + what + " '" + s + "'");
    return static_cast<std::uint32_t>(v);
  }
  throw campaign_config_error(std::string(what) + " must be an unsigned integer or a string");
}

inline std::size_t parse_size(const nlohmann::json& j, const char* what) {
  if (!j.is_number_unsigned()) throw campaign_config_error(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace detail

[[nodiscard]] inline nlohmann::ordered_json fault_spec_to_json(const FaultSpec& s) {
  nlohmann::ordered_json j;
  j["model"] = fault_model_name(s.model);
  j["time"] = s.time;
  if (is_data_fault(s.model)) {
    j["buffer"] = buffer_name(s.buffer);
    j["word"] = s.word;
    if (s.model == FaultModel::BitFlip) {
      j["bit"] = s.bit;
    } else {
      j["pattern"] = detail::hex32(s.pattern);
    }
  } else if (is_gate_fault(s.model)) {
    j["netlist"] = circuit_id_name(s.netlist);
    j["gate"] = s.gate;
  }
  return j;
}

[[nodiscard]] inline FaultSpec fault_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw campaign_config_error("fault site must be an object");
  static const std::array<std::string_view, 8> known = {"model", "time", "buffer", "word",
                                                        "bit",   "pattern", "netlist", "gate"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw campaign_config_error("unknown fault site key '" + k + "'");
  if (!j.contains("model") || !j.contains("time")) throw campaign_config_error("fault site needs 'model' and 'time'");
  FaultSpec s;
  s.model = parse_fault_model(j.at("model").get<std::string>());
  s.time = detail::parse_size(j.at("time"), "time");
  if (is_data_fault(s.model)) {
    try {
      s.buffer = parse_buffer(j.at("buffer").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw campaign_config_error(e.what());
    }
    s.word = detail::parse_size(j.at("word"), "word");
    if (s.model == FaultModel::BitFlip) {
      s.bit = static_cast<unsigned>(detail::parse_size(j.at("bit"), "bit"));
    } else {
      s.pattern = detail::parse_u32(j.at("pattern"), "pattern");
    }
  } else if (is_gate_fault(s.model)) {
    s.netlist = parse_circuit_id(j.at("netlist").get<std::string>());
    s.gate = detail::parse_size(j.at("gate"), "gate");
  }
  return s;
}

[[nodiscard]] inline std::string_view strategy_name(SiteStrategy s) noexcept {
  switch (s) {
    case SiteStrategy::Exhaustive: return "exhaustive";
    case SiteStrategy::Random: return "random";
    case SiteStrategy::Stratified: return "stratified";
    case SiteStrategy::List: return "list";
  }
  return "?";
}

[[nodiscard]] inline std::string_view record_mode_name(RecordMode r) noexcept {
  switch (r) {
    case RecordMode::All: return "all";
    case RecordMode::Faults: return "faults";
    case RecordMode::None: return "none";
  }
  return "?";
}

/// Parses a campaign configuration object. The seed comes from the config
/// unless the caller overrides it afterwards.
[[nodiscard]] inline CampaignConfig campaign_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw campaign_config_error("campaign config must be a JSON object");
  static const std::array<std::string_view, 17> known = {
      "target", "protected", "models", "time_range", "strategy", "trials", "trials_per_hook", "sites", "buffers",
      "words",  "bits",      "patterns", "aligned_pairs", "gates", "inputs", "seed", "records"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw campaign_config_error("unknown config key '" + k + "'");

  CampaignConfig c;
  try {
    if (j.contains("target")) c.target = parse_target(j["target"].get<std::string>());
    if (j.contains("protected")) c.redundant = j["protected"].get<bool>();
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j["models"]) c.models.push_back(parse_fault_model(m.get<std::string>()));
    }
    if (j.contains("time_range")) {
      const auto& r = j["time_range"];
      if (!r.is_array() || r.size() != 2) throw campaign_config_error("time_range must be [first, last]");
      c.time_begin = detail::parse_size(r[0], "time_range");
      c.time_end = detail::parse_size(r[1], "time_range");
    }
    if (j.contains("strategy")) {
      const std::string s = j["strategy"].get<std::string>();
      c.strategy = parse_enum(s,
                              std::array{SiteStrategy::Exhaustive, SiteStrategy::Random, SiteStrategy::Stratified,
                                         SiteStrategy::List},
                              +[](SiteStrategy x) noexcept { return strategy_name(x); }, "strategy");
    }
    if (j.contains("trials")) c.trials = detail::parse_size(j["trials"], "trials");
    if (j.contains("trials_per_hook")) c.trials_per_hook = detail::parse_size(j["trials_per_hook"], "trials_per_hook");
    if (j.contains("sites"))
      for (const auto& s : j["sites"]) c.sites.push_back(fault_spec_from_json(s));
    if (j.contains("buffers")) {
      c.buffers.clear();
      for (const auto& b : j["buffers"]) c.buffers.push_back(parse_buffer(b.get<std::string>()));
    }
    if (j.contains("words")) {
      const auto& r = j["words"];
      if (!r.is_array() || r.size() != 2) throw campaign_config_error("words must be [first, last]");
      c.words = std::pair{detail::parse_size(r[0], "words"), detail::parse_size(r[1], "words")};
    }
    if (j.contains("bits"))
      for (const auto& b : j["bits"]) c.bits.push_back(static_cast<unsigned>(detail::parse_size(b, "bit")));
    if (j.contains("patterns"))
      for (const auto& p : j["patterns"]) c.patterns.push_back(detail::parse_u32(p, "pattern"));
    if (j.contains("aligned_pairs")) c.aligned_pairs = j["aligned_pairs"].get<bool>();
    if (j.contains("gates")) {
      c.gates.emplace();
      for (const auto& g : j["gates"]) c.gates->push_back(detail::parse_size(g, "gate"));
    }
    if (j.contains("inputs")) {
      const auto& in = j["inputs"];
      if (!in.is_array() || in.empty() || in.size() > 2)
        throw campaign_config_error("inputs must hold one or two polynomials");
      std::array<Poly, 2> polys{};
      for (std::size_t i = 0; i < in.size(); ++i) polys[i] = poly_from_json(in[i]);
      c.inputs = polys;
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("records")) {
      c.records = parse_enum(j["records"].get<std::string>(),
                             std::array{RecordMode::All, RecordMode::Faults, RecordMode::None},
                             +[](RecordMode x) noexcept { return record_mode_name(x); }, "records mode");
    }
  } catch (const nlohmann::json::exception& e) {
    throw campaign_config_error(std::string("malformed campaign config: ") + e.what());
  } catch (const poly_format_error& e) {
    throw campaign_config_error(std::string("bad input polynomial: ") + e.what());
  } catch (const campaign_config_error&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw campaign_config_error(e.what());
  }
  if (c.strategy == SiteStrategy::List && j.contains("models") && !c.sites.empty()) {
    for (const FaultSpec& s : c.sites)
      if (std::find(c.models.begin(), c.models.end(), s.model) == c.models.end())
        throw campaign_config_error("listed site uses a model missing from 'models'");
  }
  return c;
}

inline nlohmann::ordered_json CampaignReport::to_json() const {
  nlohmann::ordered_json j;
  j["target"] = target_name(config.target);
  j["protected"] = config.redundant;
  j["strategy"] = strategy_name(config.strategy);
  j["seed"] = config.seed;
  auto models = nlohmann::ordered_json::array();
  for (FaultModel m : config.models) models.push_back(fault_model_name(m));
  j["models"] = models;
  j["trials"] = trials;

  nlohmann::ordered_json cats = nlohmann::ordered_json::array();
  auto row = [&](std::string_view name, std::size_t n, std::string_view note = {}) {
    nlohmann::ordered_json r;
    r["category"] = name;
    r["count"] = n;
    r["percent"] = detail::percent(n, trials);
    if (!note.empty()) r["note"] = note;
    cats.push_back(r);
  };
  row("no_effect", count(Classification::NoEffect));
  row("fault_detected", count(Classification::FaultDetected));
  row("fault_not_detected", count(Classification::FaultNotDetected));
  row("crash", 0, "no crash analogue in simulation; always zero");
  j["categories"] = cats;

  nlohmann::ordered_json split;
  split["potentially_exploitable"] = exploitable;
  split["potentially_exploitable_percent"] = detail::percent(exploitable, trials);
  split["non_exploitable"] = non_exploitable();
  split["non_exploitable_percent"] = detail::percent(non_exploitable(), trials);
  split["definition"] = "output differs from golden, no detection, non-zero output";
  j["exploitability"] = split;

  nlohmann::ordered_json pt = nlohmann::ordered_json::array();
  for (const auto& [t, c] : per_time) {
    nlohmann::ordered_json r;
    r["time"] = t;
    r["no_effect"] = c[0];
    r["fault_detected"] = c[1];
    r["fault_not_detected"] = c[2];
    pt.push_back(r);
  }
  j["per_time"] = pt;
  j["golden"] = nlohmann::ordered_json::parse(poly_to_json(golden));
  j["records_mode"] = record_mode_name(config.records);
  auto recs = nlohmann::ordered_json::array();
  for (const CampaignRecord& r : records) {
    auto o = fault_spec_to_json(r.spec);
    o["classification"] = classification_name(r.classification);
    o["exploitable"] = r.exploitable;
    recs.push_back(std::move(o));
  }
  j["records"] = recs;
  return j;
}

inline std::string CampaignReport::to_csv() const {
  std::string out = "model,time,buffer,word,bit,classification,exploitable,pattern,netlist,gate\n";
  for (const CampaignRecord& r : records) {
    const FaultSpec& s = r.spec;
    out += fault_model_name(s.model);
    out += ',' + std::to_string(s.time) + ',';
    if (is_data_fault(s.model)) {
      out += std::string(buffer_name(s.buffer)) + ',' + std::to_string(s.word) + ',';
      if (s.model == FaultModel::BitFlip) out += std::to_string(s.bit);
    } else {
      out += ",,";
    }
    out += ',';
    out += classification_name(r.classification);
    out += r.exploitable ? ",1," : ",0,";
    if (s.model == FaultModel::WordCorrupt) out += detail::hex32(s.pattern);
    out += ',';
    if (is_gate_fault(s.model)) out += std::string(circuit_id_name(s.netlist)) + ',' + std::to_string(s.gate);
    else out += ',';
    out += '\n';
  }
  return out;
}

}  // namespace bsntt
