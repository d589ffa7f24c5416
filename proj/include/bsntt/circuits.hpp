#pragma once

// Generators for the modular-arithmetic circuits over F_q. Operands are
// 32-net groups; only bits 0..22 are read and bits 23..31 of every output
// are constant zero.

#include <cstddef>
#include <cstdint>
#include <string>

#include "field.hpp"
#include "netlist.hpp"

namespace bsntt {

inline constexpr std::size_t kWordBits = 32;
inline constexpr std::size_t kFieldBits = 23;

// Barrett parameters for a 23-bit modulus: mu = floor(2^46 / q).
inline constexpr unsigned kBarrettShift = 2 * kFieldBits;
inline constexpr std::uint64_t kBarrettMu = (std::uint64_t{1} << kBarrettShift) / kQ;
static_assert(kBarrettMu == 8396807);

namespace gates {

struct SumCarry {
  Signal sum;
  Signal carry;
};

inline SumCarry full_adder(CircuitBuilder& cb, Signal a, Signal b, Signal c) {
  const Signal p = cb.xor2(a, b);
  return {cb.xor2(p, c), cb.or2(cb.and2(a, b), cb.and2(p, c))};
}

inline Bus constant_bus(std::uint64_t value, std::size_t width) {
  Bus bus(width);
  for (std::size_t i = 0; i < width; ++i) bus[i] = Signal::constant(((value >> i) & 1) != 0);
  return bus;
}

inline Signal bit_or_zero(const Bus& bus, std::size_t i) {
  return i < bus.size() ? bus[i] : Signal::zero();
}

/// Ripple-carry sum truncated to `width` bits; the final carry is appended
/// as bit `width`.
inline Bus ripple_add(CircuitBuilder& cb, const Bus& a, const Bus& b, std::size_t width,
                      Signal carry_in = Signal::zero()) {
  Bus out(width + 1);
  Signal c = carry_in;
  for (std::size_t i = 0; i < width; ++i) {
    auto fa = full_adder(cb, bit_or_zero(a, i), bit_or_zero(b, i), c);
    out[i] = fa.sum;
    c = fa.carry;
  }
  out[width] = c;
  return out;
}

/// a - b mod 2^width via a + ~b + 1; bit `width` is set iff a >= b.
inline Bus ripple_sub(CircuitBuilder& cb, const Bus& a, const Bus& b, std::size_t width) {
  Bus nb(width);
  for (std::size_t i = 0; i < width; ++i) nb[i] = cb.not1(bit_or_zero(b, i));
  return ripple_add(cb, a, nb, width, Signal::one());
}

inline Bus shifted(const Bus& a, std::size_t by) {
  Bus out(by, Signal::zero());
  out.insert(out.end(), a.begin(), a.end());
  return out;
}

inline Bus slice_bits(const Bus& a, std::size_t from, std::size_t count) {
  Bus out(count, Signal::zero());
  for (std::size_t i = 0; i < count; ++i) out[i] = bit_or_zero(a, from + i);
  return out;
}

/// sel ? when_one : when_zero, bitwise.
inline Bus mux(CircuitBuilder& cb, Signal sel, const Bus& when_one, const Bus& when_zero) {
  const Signal nsel = cb.not1(sel);
  Bus out(when_one.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = cb.or2(cb.and2(sel, when_one[i]), cb.and2(nsel, bit_or_zero(when_zero, i)));
  return out;
}

/// r >= q ? r - q : r, for a `width`-bit r with r < 2q.
inline Bus conditional_subtract_q(CircuitBuilder& cb, const Bus& r, std::size_t width) {
  const std::uint64_t neg_q = (std::uint64_t{1} << width) - kQ;
  Bus d = ripple_add(cb, r, constant_bus(neg_q, width), width);
  const Signal ge = d[width];  // carry out <=> r + 2^w - q >= 2^w <=> r >= q
  d.resize(width);
  return mux(cb, ge, d, slice_bits(r, 0, width));
}

/// Unsigned array multiplier: every partial product row a & b[i] is added
/// into the accumulator with a ripple-carry adder.
inline Bus multiply(CircuitBuilder& cb, const Bus& a, const Bus& b) {
  const std::size_t wa = a.size(), wb = b.size();
  Bus acc(wa + wb, Signal::zero());
  for (std::size_t i = 0; i < wa; ++i) acc[i] = cb.and2(a[i], b[0]);
  for (std::size_t j = 1; j < wb; ++j) {
    Bus row(wa);
    for (std::size_t i = 0; i < wa; ++i) row[i] = cb.and2(a[i], b[j]);
    Bus upper = slice_bits(acc, j, wa);
    Bus sum = ripple_add(cb, upper, row, wa);
    for (std::size_t i = 0; i <= wa; ++i) acc[j + i] = sum[i];
  }
  return acc;
}

/// Barrett reduction of a product x < q^2 (46 bits):
///   q1 = x >> 22, q3 = (q1 * mu) >> 24, r = x - q3 * q  (0 <= r < 3q),
/// followed by two conditional subtractions. Since 3q > 2^24 the remainder is
/// tracked on 25 bits.
inline Bus barrett_reduce(CircuitBuilder& cb, const Bus& x) {
  constexpr std::size_t k = kFieldBits;
  constexpr std::size_t rbits = k + 2;
  const Bus q1 = slice_bits(x, k - 1, k + 1);

  // q1 * mu with mu = 2^23 + 2^13 + 7 as a shift-and-add network.
  Bus q2 = Bus(q1.begin(), q1.end());
  const std::size_t pw = 2 * (k + 1);
  for (std::size_t bit = 1; bit < 2 * k + 2; ++bit) {
    if (((kBarrettMu >> bit) & 1) == 0) continue;
    q2 = ripple_add(cb, q2, shifted(q1, bit), pw);
    q2.resize(pw);
  }
  const Bus q3 = slice_bits(q2, k + 1, k + 1);

  // q3 * q mod 2^25 = q3 + (q3 << 23) - (q3 << 13).
  Bus t = ripple_add(cb, q3, shifted(q3, 23), rbits);
  t.resize(rbits);
  Bus prod = ripple_sub(cb, t, shifted(q3, 13), rbits);
  prod.resize(rbits);

  Bus r = ripple_sub(cb, slice_bits(x, 0, rbits), prod, rbits);
  r.resize(rbits);
  r = conditional_subtract_q(cb, r, rbits);
  r = conditional_subtract_q(cb, r, rbits);
  return slice_bits(r, 0, k);
}

inline Bus field_operand(const Bus& word) { return slice_bits(word, 0, kFieldBits); }

inline Bus to_word(const Bus& value) { return slice_bits(value, 0, kWordBits); }

inline Bus mod_add(CircuitBuilder& cb, const Bus& a, const Bus& b) {
  Bus s = ripple_add(cb, field_operand(a), field_operand(b), kFieldBits);  // 24 bits
  return slice_bits(conditional_subtract_q(cb, s, kFieldBits + 1), 0, kFieldBits);
}

inline Bus mod_sub(CircuitBuilder& cb, const Bus& a, const Bus& b) {
  Bus d = ripple_sub(cb, field_operand(a), field_operand(b), kFieldBits);
  const Signal no_borrow = d[kFieldBits];
  d.resize(kFieldBits);
  Bus e = ripple_add(cb, d, constant_bus(kQ, kFieldBits), kFieldBits);
  e.resize(kFieldBits);
  return mux(cb, no_borrow, d, e);
}

inline Bus mod_mul(CircuitBuilder& cb, const Bus& a, const Bus& b) {
  return barrett_reduce(cb, multiply(cb, field_operand(a), field_operand(b)));
}

}  // namespace gates

[[nodiscard]] inline Netlist build_mod_adder() {
  CircuitBuilder cb("mod_adder");
  const Bus a = cb.add_input("a");
  const Bus b = cb.add_input("b");
  cb.add_output("out", gates::to_word(gates::mod_add(cb, a, b)));
  return std::move(cb).finish();
}

[[nodiscard]] inline Netlist build_mod_subtractor() {
  CircuitBuilder cb("mod_subtractor");
  const Bus a = cb.add_input("a");
  const Bus b = cb.add_input("b");
  cb.add_output("out", gates::to_word(gates::mod_sub(cb, a, b)));
  return std::move(cb).finish();
}

[[nodiscard]] inline Netlist build_mod_multiplier() {
  CircuitBuilder cb("mod_multiplier");
  const Bus a = cb.add_input("a");
  const Bus b = cb.add_input("b");
  cb.add_output("out", gates::to_word(gates::mod_mul(cb, a, b)));
  return std::move(cb).finish();
}

/// out1 = in1 + in2*w, out2 = in1 - in2*w (mod q).
[[nodiscard]] inline Netlist build_butterfly() {
  CircuitBuilder cb("butterfly");
  const Bus in1 = cb.add_input("in1");
  const Bus in2 = cb.add_input("in2");
  const Bus w = cb.add_input("w");
  const Bus t = gates::mod_mul(cb, in2, w);
  cb.add_output("out1", gates::to_word(gates::mod_add(cb, in1, t)));
  cb.add_output("out2", gates::to_word(gates::mod_sub(cb, in1, t)));
  return std::move(cb).finish();
}

[[nodiscard]] inline Netlist build_pointwise_multiplier() {
  CircuitBuilder cb("pointwise_multiplier");
  const Bus in1 = cb.add_input("in1");
  const Bus in2 = cb.add_input("in2");
  cb.add_output("out", gates::to_word(gates::mod_mul(cb, in1, in2)));
  return std::move(cb).finish();
}

/// state_next = state + in (mod q); the caller feeds state_next back in.
[[nodiscard]] inline Netlist build_pointwise_accumulator() {
  CircuitBuilder cb("pointwise_accumulator");
  const Bus in = cb.add_input("in");
  const Bus state = cb.add_state("state");
  cb.add_output("state_next", gates::to_word(gates::mod_add(cb, state, in)));
  return std::move(cb).finish();
}

}  // namespace bsntt
