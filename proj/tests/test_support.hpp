#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "bsntt/field.hpp"
#include "bsntt/netlist.hpp"

namespace bsntt::test {

inline std::uint32_t draw_below(std::mt19937_64& rng, std::uint32_t bound) {
  return static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng));
}

inline Poly random_poly(std::mt19937_64& rng) {
  Poly p{};
  for (auto& c : p) c = draw_below(rng, kQ);
  return p;
}

/// Word i bit k = bit i of values[k], computed bit by bit.
inline std::vector<std::uint32_t> to_slices(const std::array<std::uint32_t, 32>& values) {
  std::vector<std::uint32_t> words(32, 0);
  for (unsigned i = 0; i < 32; ++i)
    for (unsigned k = 0; k < 32; ++k) words[i] |= ((values[k] >> i) & 1u) << k;
  return words;
}

inline std::array<std::uint32_t, 32> from_slices(const std::vector<std::uint32_t>& words) {
  std::array<std::uint32_t, 32> values{};
  for (unsigned i = 0; i < 32; ++i)
    for (unsigned k = 0; k < 32; ++k) values[k] |= ((words[i] >> k) & 1u) << i;
  return values;
}

inline std::array<std::uint32_t, 32> random_field_values(std::mt19937_64& rng) {
  std::array<std::uint32_t, 32> v{};
  for (auto& x : v) x = draw_below(rng, kQ);
  return v;
}

}  // namespace bsntt::test
