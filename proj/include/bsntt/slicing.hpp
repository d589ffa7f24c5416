#pragma once

// Bit-sliced data layout. In a SliceBlock, words[i] holds bit i of 32
// coefficients and coefficient k sits in bit position k of every word.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

#include "field.hpp"

namespace bsntt {

using SliceBlock = std::array<std::uint32_t, 32>;

inline constexpr unsigned kHalf = 16;
inline constexpr std::uint32_t kLowHalf = 0x0000FFFFu;

/// words[i] bit j = input[j] bit i. Masked swap network over halving block
/// sizes; the matrix is square so the operation is its own inverse.
[[nodiscard]] constexpr SliceBlock transpose(SliceBlock a) noexcept {
  std::uint32_t mask = 0x0000FFFFu;
  for (unsigned j = 16; j != 0; j >>= 1, mask ^= mask << j) {
    for (unsigned k = 0; k < 32; k = ((k | j) + 1) & ~j) {
      const std::uint32_t t = ((a[k] >> j) ^ a[k | j]) & mask;
      a[k] ^= t << j;
      a[k | j] ^= t;
    }
  }
  return a;
}

[[nodiscard]] constexpr SliceBlock reverse_transpose(const SliceBlock& a) noexcept { return transpose(a); }

[[nodiscard]] constexpr unsigned bit_reverse(unsigned i, unsigned bits) noexcept {
  unsigned r = 0;
  for (unsigned j = 0; j < bits; ++j) r |= ((i >> j) & 1u) << (bits - 1 - j);
  return r;
}

[[nodiscard]] inline Poly bit_reversal_permute(const Poly& a) noexcept {
  Poly b{};
  for (unsigned i = 0; i < kN; ++i) b[i] = a[bit_reverse(i, kLogN)];
  return b;
}

struct StageShuffleParams {
  unsigned stage = 0;
  std::uint32_t mask = 0;
  std::uint32_t inv_mask = 0;
  unsigned shift = 0;

  static constexpr std::array<std::uint32_t, 5> kMasks = {0x55555555u, 0x33333333u, 0x0F0F0F0Fu,
                                                          0x00FF00FFu, 0x0000FFFFu};
  static constexpr std::array<std::uint32_t, 5> kInvMasks = {0xAAAAAAAAu, 0xCCCCCCCCu, 0xF0F0F0F0u,
                                                             0xFF00FF00u, 0xFFFF0000u};

  static constexpr StageShuffleParams for_stage(unsigned stage) {
    if (stage >= kMasks.size()) throw std::out_of_range("shuffle stage must be in 0..4");
    return {stage, kMasks[stage], kInvMasks[stage], 1u << stage};
  }
};

/// Routes butterfly outputs of one stage into the next stage's inputs:
///   in1' = (out1 & mask) | ((out2 & mask) << shift)
///   in2' = (out2 & inv_mask) | ((out1 & inv_mask) >> shift)
[[nodiscard]] constexpr std::pair<std::uint32_t, std::uint32_t> slice_shuffle(
    std::uint32_t out1, std::uint32_t out2, const StageShuffleParams& p) noexcept {
  const std::uint32_t andout1 = out1 & p.mask;
  const std::uint32_t andout2 = out2 & p.mask;
  const std::uint32_t andnout1 = out1 & p.inv_mask;
  const std::uint32_t andnout2 = out2 & p.inv_mask;
  const std::uint32_t orout1 = andout1 | (andout2 << p.shift);
  const std::uint32_t orout2 = andnout2 | (andnout1 >> p.shift);
  return {orout1, orout2};
}

/// Slices 0..15 carry original data (ODS), 16..31 the redundant copy (RDS).
struct RedundantBlock {
  SliceBlock words{};
  bool operator==(const RedundantBlock&) const = default;
};

[[nodiscard]] inline RedundantBlock pack_redundant(std::span<const std::uint32_t, kHalf> values) {
  SliceBlock coeffs{};
  for (unsigned k = 0; k < kHalf; ++k) {
    if (values[k] >= kQ) throw std::invalid_argument("pack_redundant: value not reduced mod q");
    coeffs[k] = values[k];
    coeffs[k + kHalf] = values[k];
  }
  return {transpose(coeffs)};
}

[[nodiscard]] inline std::array<std::uint32_t, kHalf> unpack_ods(const RedundantBlock& b) noexcept {
  const SliceBlock c = reverse_transpose(b.words);
  std::array<std::uint32_t, kHalf> out{};
  for (unsigned k = 0; k < kHalf; ++k) out[k] = c[k];
  return out;
}

[[nodiscard]] inline std::array<std::uint32_t, kHalf> unpack_rds(const RedundantBlock& b) noexcept {
  const SliceBlock c = reverse_transpose(b.words);
  std::array<std::uint32_t, kHalf> out{};
  for (unsigned k = 0; k < kHalf; ++k) out[k] = c[k + kHalf];
  return out;
}

/// True when any word's upper half differs from its lower half.
[[nodiscard]] constexpr bool redundancy_check(std::span<const std::uint32_t> words) noexcept {
  std::uint32_t diff = 0;
  for (std::uint32_t w : words) diff |= ((w >> kHalf) ^ w) & kLowHalf;
  return diff != 0;
}

[[nodiscard]] constexpr bool redundancy_check(const RedundantBlock& b) noexcept {
  return redundancy_check(std::span<const std::uint32_t>(b.words));
}

}  // namespace bsntt
