#pragma once

// Step lists for the bit-sliced transforms and the twiddle tables they use.
//
// A plan is derived mechanically: every coefficient slot is tagged with its
// position in the decimation-in-time array, the tags are pushed through the
// same loads, shuffles and copies the engine executes, and each butterfly's
// twiddle is read off the positions that meet in its slices. The plain
// layout splits the 256-point transform into four 64-point sub-transforms
// (32 data slices per block); the redundant layout uses eight 32-point
// sub-transforms with 16 data slices mirrored into the upper half-word.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "field.hpp"
#include "slicing.hpp"

namespace bsntt {

enum class Buffer : std::uint8_t { In1 = 0, In2 = 1, Out1 = 2, Out2 = 3 };
inline constexpr std::size_t kBufferCount = 4;

[[nodiscard]] constexpr std::string_view buffer_name(Buffer b) noexcept {
  switch (b) {
    case Buffer::In1: return "in1";
    case Buffer::In2: return "in2";
    case Buffer::Out1: return "out1";
    case Buffer::Out2: return "out2";
  }
  return "?";
}

[[nodiscard]] inline Buffer parse_buffer(std::string_view s) {
  for (std::size_t i = 0; i < kBufferCount; ++i)
    if (buffer_name(static_cast<Buffer>(i)) == s) return static_cast<Buffer>(i);
  throw std::invalid_argument("unknown buffer '" + std::string(s) + "'");
}

struct BlockRef {
  Buffer buffer = Buffer::In1;
  std::uint16_t block = 0;
  bool operator==(const BlockRef&) const = default;
};

enum class StepKind : std::uint8_t {
  Load,       // transpose input polynomial(s) into the slice buffers
  Multiply,   // pointwise-multiplier circuit: dst = src * (table or second operand)
  Butterfly,  // butterfly circuit on (a, b) with a twiddle table
  Shuffle,    // route one block's outputs into next-stage inputs
  Copy,       // in1/in2 <- out1/out2, all blocks
  Check,      // ODS/RDS comparison over the result buffers
  Store,      // reverse transpose into the output polynomial
};

[[nodiscard]] constexpr std::string_view step_kind_name(StepKind k) noexcept {
  switch (k) {
    case StepKind::Load: return "load";
    case StepKind::Multiply: return "multiply";
    case StepKind::Butterfly: return "butterfly";
    case StepKind::Shuffle: return "shuffle";
    case StepKind::Copy: return "copy";
    case StepKind::Check: return "check";
    case StepKind::Store: return "store";
  }
  return "?";
}

inline constexpr std::uint16_t kNoTable = 0xFFFF;

struct Step {
  StepKind kind = StepKind::Load;
  BlockRef a{};         // Butterfly: first input; Multiply: first operand; Shuffle: block in a.block
  BlockRef b{};         // Butterfly: second input; Multiply: second operand when table == kNoTable
  BlockRef out_a{};     // Butterfly: first output; Multiply: destination
  BlockRef out_b{};     // Butterfly: second output
  std::uint16_t table = kNoTable;
  std::uint8_t stage = 0;  // Butterfly: transform stage 0..7; Shuffle: shuffle stage 0..4

  [[nodiscard]] bool is_circuit() const noexcept {
    return kind == StepKind::Butterfly || kind == StepKind::Multiply;
  }
  [[nodiscard]] bool is_compute() const noexcept {
    return is_circuit() || kind == StepKind::Shuffle || kind == StepKind::Copy;
  }
};

/// Where coefficient `index` of input `operand` is placed (or, for the
/// output map, which result coefficient a slot holds).
struct SlotMap {
  Buffer buffer;
  std::uint16_t block;
  std::uint8_t slice;
  std::uint8_t operand;
  std::uint16_t index;
};

enum class PlanKind : std::uint8_t { Ntt, Intt, Pointwise };

struct TransformPlan {
  PlanKind kind = PlanKind::Ntt;
  bool redundant = false;
  std::size_t block_count = 0;   // blocks per buffer
  unsigned data_slices = 32;     // 32 plain, 16 redundant
  bool bit_reverse_input = false;
  std::vector<Step> steps;
  std::vector<SliceBlock> tables;
  std::vector<SlotMap> load;     // data slices only; redundant copies mirror them
  std::vector<SlotMap> store;

  [[nodiscard]] std::size_t buffer_words() const noexcept { return block_count * 32; }

  [[nodiscard]] std::size_t count(StepKind k) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [k](const Step& s) { return s.kind == k; }));
  }

  /// Steps from the first to the last compute step, inclusive.
  [[nodiscard]] std::pair<std::size_t, std::size_t> compute_range() const {
    std::size_t first = steps.size(), last = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (steps[i].is_compute()) {
        first = std::min(first, i);
        last = i;
      }
    }
    return {first, last};
  }
};

namespace detail {

inline constexpr int kNoLabel = -1;

/// Per-slot position tags mirroring the four slice buffers.
class LabelState {
 public:
  explicit LabelState(std::size_t blocks) {
    for (auto& b : labels_) b.assign(blocks * 32, kNoLabel);
  }
  int& at(BlockRef r, unsigned slice) { return labels_[static_cast<int>(r.buffer)][r.block * 32 + slice]; }
  int at(BlockRef r, unsigned slice) const { return labels_[static_cast<int>(r.buffer)][r.block * 32 + slice]; }

  void copy_block(BlockRef from, BlockRef to) {
    for (unsigned s = 0; s < 32; ++s) at(to, s) = at(from, s);
  }

 private:
  std::array<std::vector<int>, kBufferCount> labels_;
};

/// Destination of every source bit of a shuffle, found by probing the
/// word-level routine with one-hot inputs.
struct ShuffleRoute {
  // route[src_word][bit] = (dst_word, dst_bit); src/dst word 0 = first, 1 = second.
  std::array<std::array<std::pair<int, int>, 32>, 2> route{};
};

inline ShuffleRoute shuffle_route(unsigned stage) {
  const auto p = StageShuffleParams::for_stage(stage);
  ShuffleRoute r;
  for (int src = 0; src < 2; ++src) {
    for (int bit = 0; bit < 32; ++bit) {
      const std::uint32_t one = 1u << bit;
      const auto [x, y] = src == 0 ? slice_shuffle(one, 0, p) : slice_shuffle(0, one, p);
      if (std::popcount(x) + std::popcount(y) != 1)
        throw std::logic_error("slice shuffle does not route bits one-to-one");
      r.route[src][bit] = x != 0 ? std::pair{0, std::countr_zero(x)} : std::pair{1, std::countr_zero(y)};
    }
  }
  return r;
}

inline SliceBlock factors_block(const std::array<std::uint32_t, 32>& per_slice) {
  for (auto v : per_slice)
    if (v >= kQ) throw std::logic_error("table factor out of range");
  return transpose(per_slice);
}

class PlanBuilder {
 public:
  PlanBuilder(PlanKind kind, bool redundant, const FieldParams& fp)
      : fp_(fp), labels_(blocks_for(kind, redundant)) {
    plan_.kind = kind;
    plan_.redundant = redundant;
    plan_.block_count = blocks_for(kind, redundant);
    plan_.data_slices = redundant ? kHalf : 32;
  }

  static std::size_t blocks_for(PlanKind kind, bool redundant) {
    const std::size_t per_block = redundant ? kHalf : 32;
    return kind == PlanKind::Pointwise ? kN / per_block : kN / 2 / per_block;
  }

  TransformPlan build() {
    if (plan_.kind == PlanKind::Pointwise) {
      build_pointwise();
    } else {
      build_transform(plan_.kind == PlanKind::Intt);
    }
    return std::move(plan_);
  }

 private:
  unsigned data() const { return plan_.data_slices; }
  std::uint16_t blocks() const { return static_cast<std::uint16_t>(plan_.block_count); }

  void mirror(BlockRef r) {
    if (!plan_.redundant) return;
    for (unsigned s = 0; s < kHalf; ++s) labels_.at(r, s + kHalf) = labels_.at(r, s);
  }

  std::uint16_t add_table(const std::array<std::uint32_t, 32>& per_slice) {
    plan_.tables.push_back(factors_block(per_slice));
    return static_cast<std::uint16_t>(plan_.tables.size() - 1);
  }

  template <class F>
  std::uint16_t table_from_labels(BlockRef r, F&& factor) {
    std::array<std::uint32_t, 32> f{};
    for (unsigned s = 0; s < data(); ++s) {
      const int p = labels_.at(r, s);
      if (p < 0) throw std::logic_error("unlabelled slot while building a table");
      f[s] = factor(static_cast<unsigned>(p));
    }
    if (plan_.redundant)
      for (unsigned s = 0; s < kHalf; ++s) f[s + kHalf] = f[s];
    return add_table(f);
  }

  void build_pointwise() {
    // Operand 0 -> In1, operand 1 -> In2, natural coefficient order.
    for (std::uint16_t j = 0; j < blocks(); ++j) {
      for (unsigned s = 0; s < data(); ++s) {
        const auto idx = static_cast<std::uint16_t>(j * data() + s);
        plan_.load.push_back({Buffer::In1, j, static_cast<std::uint8_t>(s), 0, idx});
        plan_.load.push_back({Buffer::In2, j, static_cast<std::uint8_t>(s), 1, idx});
        plan_.store.push_back({Buffer::Out1, j, static_cast<std::uint8_t>(s), 0, idx});
      }
    }
    plan_.steps.push_back({StepKind::Load});
    for (std::uint16_t j = 0; j < blocks(); ++j) {
      Step st{StepKind::Multiply};
      st.a = {Buffer::In1, j};
      st.b = {Buffer::In2, j};
      st.out_a = {Buffer::Out1, j};
      plan_.steps.push_back(st);
    }
    if (plan_.redundant) plan_.steps.push_back({StepKind::Check});
    plan_.steps.push_back({StepKind::Store});
  }

  void butterfly(BlockRef a, BlockRef b, BlockRef out_a, BlockRef out_b, bool inverse) {
    int stage = -1;
    for (unsigned s = 0; s < data(); ++s) {
      const int p1 = labels_.at(a, s), p2 = labels_.at(b, s);
      const int d = p2 - p1;
      if (p1 < 0 || d <= 0 || !std::has_single_bit(static_cast<unsigned>(d)) || (p1 & d) != 0)
        throw std::logic_error("butterfly slots do not pair positions p and p + 2^s");
      const int st = std::countr_zero(static_cast<unsigned>(d));
      if (stage >= 0 && st != stage) throw std::logic_error("mixed stages inside one butterfly call");
      stage = st;
    }
    const unsigned half = 1u << stage;
    const std::uint32_t root = inverse ? fp_.omega_inv : fp_.omega;
    Step step{StepKind::Butterfly};
    step.a = a;
    step.b = b;
    step.out_a = out_a;
    step.out_b = out_b;
    step.stage = static_cast<std::uint8_t>(stage);
    step.table = table_from_labels(a, [&](unsigned p) {
      return fq_pow(root, static_cast<std::uint64_t>(p % half) * (kN / (2 * half)));
    });
    plan_.steps.push_back(step);
    const std::array<int, 32> la = snapshot(a), lb = snapshot(b);
    restore(out_a, la);
    restore(out_b, lb);
  }

  std::array<int, 32> snapshot(BlockRef r) const {
    std::array<int, 32> v{};
    for (unsigned s = 0; s < 32; ++s) v[s] = labels_.at(r, s);
    return v;
  }
  void restore(BlockRef r, const std::array<int, 32>& v) {
    for (unsigned s = 0; s < 32; ++s) labels_.at(r, s) = v[s];
  }

  void shuffle(std::uint16_t block, unsigned stage) {
    const auto route = shuffle_route(stage);
    const BlockRef src[2] = {{Buffer::Out1, block}, {Buffer::Out2, block}};
    const BlockRef dst[2] = {{Buffer::In1, block}, {Buffer::In2, block}};
    std::array<std::array<int, 32>, 2> out{};
    for (auto& o : out) o.fill(kNoLabel);
    for (int w = 0; w < 2; ++w) {
      for (int bit = 0; bit < 32; ++bit) {
        const auto [dw, db] = route.route[w][bit];
        out[dw][db] = labels_.at(src[w], bit);
      }
    }
    restore(dst[0], out[0]);
    restore(dst[1], out[1]);
    Step st{StepKind::Shuffle};
    st.a = {Buffer::Out1, block};
    st.stage = static_cast<std::uint8_t>(stage);
    plan_.steps.push_back(st);
  }

  void copy_all() {
    for (std::uint16_t j = 0; j < blocks(); ++j) {
      labels_.copy_block({Buffer::Out1, j}, {Buffer::In1, j});
      labels_.copy_block({Buffer::Out2, j}, {Buffer::In2, j});
    }
    plan_.steps.push_back({StepKind::Copy});
  }

  void multiply_by_table(BlockRef src, BlockRef dst, std::uint16_t table) {
    Step st{StepKind::Multiply};
    st.a = src;
    st.out_a = dst;
    st.table = table;
    plan_.steps.push_back(st);
    restore(dst, snapshot(src));
  }

  void build_transform(bool inverse) {
    plan_.bit_reverse_input = true;
    const unsigned sub_stages = static_cast<unsigned>(std::countr_zero(2 * data()));
    // Forward: loaded data is staged in Out1/Out2 and scaled into In1/In2.
    const Buffer first = inverse ? Buffer::In1 : Buffer::Out1;
    const Buffer second = inverse ? Buffer::In2 : Buffer::Out2;

    // in1[i] = b[2i], in2[i] = b[2i+1]; block j holds i in [j*D, (j+1)*D).
    for (std::uint16_t j = 0; j < blocks(); ++j) {
      for (unsigned s = 0; s < data(); ++s) {
        const unsigned i = j * data() + s;
        plan_.load.push_back({first, j, static_cast<std::uint8_t>(s), 0, static_cast<std::uint16_t>(2 * i)});
        plan_.load.push_back({second, j, static_cast<std::uint8_t>(s), 0, static_cast<std::uint16_t>(2 * i + 1)});
        labels_.at({first, j}, s) = static_cast<int>(2 * i);
        labels_.at({second, j}, s) = static_cast<int>(2 * i + 1);
      }
      mirror({first, j});
      mirror({second, j});
    }
    plan_.steps.push_back({StepKind::Load});

    if (!inverse) {
      // Slot p holds a[bitrev(p)], which is scaled by psi^bitrev(p).
      for (std::uint16_t j = 0; j < blocks(); ++j) {
        for (auto [src, dst] : {std::pair{Buffer::Out1, Buffer::In1}, std::pair{Buffer::Out2, Buffer::In2}}) {
          const auto t = table_from_labels({src, j}, [&](unsigned p) {
            return fq_pow(fp_.psi, bit_reverse(p, kLogN));
          });
          multiply_by_table({src, j}, {dst, j}, t);
        }
      }
    }

    for (std::uint16_t j = 0; j < blocks(); ++j) {
      for (unsigned s = 0; s < sub_stages; ++s) {
        butterfly({Buffer::In1, j}, {Buffer::In2, j}, {Buffer::Out1, j}, {Buffer::Out2, j}, inverse);
        if (s + 1 != sub_stages) shuffle(j, s);
      }
    }

    for (unsigned stage = sub_stages; stage < kLogN; ++stage) {
      copy_all();
      merge_stage(stage, inverse);
    }

    if (inverse) {
      for (std::uint16_t j = 0; j < blocks(); ++j) {
        for (Buffer b : {Buffer::Out1, Buffer::Out2}) {
          const auto t = table_from_labels({b, j}, [&](unsigned p) {
            return fq_mul(fp_.n_inv, fq_pow(fp_.psi_inv, p));
          });
          multiply_by_table({b, j}, {b, j}, t);
        }
      }
    }

    if (plan_.redundant) plan_.steps.push_back({StepKind::Check});

    for (Buffer b : {Buffer::Out1, Buffer::Out2}) {
      for (std::uint16_t j = 0; j < blocks(); ++j) {
        for (unsigned s = 0; s < data(); ++s) {
          const int p = labels_.at({b, j}, s);
          if (p < 0) throw std::logic_error("unlabelled output slot");
          plan_.store.push_back({b, j, static_cast<std::uint8_t>(s), 0, static_cast<std::uint16_t>(p)});
        }
      }
    }
    plan_.steps.push_back({StepKind::Store});
  }

  /// Pairs whole blocks whose data slots hold positions p and p + 2^stage.
  /// Calls are ordered by the first position of their first operand.
  void merge_stage(unsigned stage, bool inverse) {
    struct Unit {
      BlockRef ref;
      int first;
    };
    std::vector<Unit> units;
    for (std::uint16_t j = 0; j < blocks(); ++j)
      for (Buffer b : {Buffer::In1, Buffer::In2}) units.push_back({{b, j}, labels_.at({b, j}, 0)});
    std::sort(units.begin(), units.end(), [](const Unit& x, const Unit& y) { return x.first < y.first; });

    const int dist = 1 << stage;
    std::vector<std::pair<BlockRef, BlockRef>> calls;
    for (const Unit& u : units) {
      if ((u.first & dist) != 0) continue;
      const Unit* partner = nullptr;
      for (const Unit& v : units) {
        if (v.first != u.first + dist) continue;
        bool match = true;
        for (unsigned s = 0; s < data() && match; ++s)
          match = labels_.at(v.ref, s) == labels_.at(u.ref, s) + dist;
        if (match) partner = &v;
      }
      if (partner == nullptr) throw std::logic_error("no partner block for merge stage");
      calls.emplace_back(u.ref, partner->ref);
    }
    if (calls.size() * data() != kN / 2) throw std::logic_error("merge stage does not cover all butterflies");
    for (auto [a, b] : calls) {
      const BlockRef oa{a.buffer == Buffer::In1 ? Buffer::Out1 : Buffer::Out2, a.block};
      const BlockRef ob{b.buffer == Buffer::In1 ? Buffer::Out1 : Buffer::Out2, b.block};
      butterfly(a, b, oa, ob, inverse);
    }
  }

  const FieldParams& fp_;
  LabelState labels_;
  TransformPlan plan_;
};

}  // namespace detail

[[nodiscard]] inline TransformPlan make_plan(PlanKind kind, bool redundant,
                                             const FieldParams& fp = FieldParams::dilithium()) {
  return detail::PlanBuilder(kind, redundant, fp).build();
}

/// Twiddle and scaling factors of one transform, grouped by role.
struct TwiddleTables {
  bool inverse = false;
  bool redundant = false;
  // trans_w[stage] lists the twiddle block of every butterfly call at that
  // stage, in execution order.
  std::array<std::vector<SliceBlock>, kLogN> trans_w;
  std::vector<SliceBlock> trans_psi1;  // forward pre-scaling of In1 blocks
  std::vector<SliceBlock> trans_psi2;  // forward pre-scaling of In2 blocks
  std::vector<SliceBlock> trans_scale; // inverse post-scaling, Out1 blocks then Out2 blocks
};

[[nodiscard]] inline TwiddleTables gen_twiddle_tables(const FieldParams& fp, bool inverse, bool redundant) {
  const TransformPlan plan = make_plan(inverse ? PlanKind::Intt : PlanKind::Ntt, redundant, fp);
  TwiddleTables t;
  t.inverse = inverse;
  t.redundant = redundant;
  for (const Step& s : plan.steps) {
    if (s.kind == StepKind::Butterfly) {
      t.trans_w[s.stage].push_back(plan.tables[s.table]);
    } else if (s.kind == StepKind::Multiply && s.table != kNoTable) {
      if (inverse) {
        t.trans_scale.push_back(plan.tables[s.table]);
      } else {
        (s.out_a.buffer == Buffer::In1 ? t.trans_psi1 : t.trans_psi2).push_back(plan.tables[s.table]);
      }
    }
  }
  return t;
}

}  // namespace bsntt
