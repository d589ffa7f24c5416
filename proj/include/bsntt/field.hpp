#pragma once

// Scalar arithmetic in F_q for q = 2^23 - 2^13 + 1 and the direct-sum
// transform oracles that the bit-sliced code is checked against.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace bsntt {

inline constexpr std::uint32_t kQ = 8380417;
inline constexpr std::size_t kN = 256;
inline constexpr unsigned kLogN = 8;

static_assert(kQ == (1u << 23) - (1u << 13) + 1);

/// Coefficients are canonical unsigned residues in [0, q).
using Poly = std::array<std::uint32_t, kN>;

[[nodiscard]] constexpr std::uint32_t fq_add(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint32_t s = a + b;
  return s >= kQ ? s - kQ : s;
}

[[nodiscard]] constexpr std::uint32_t fq_sub(std::uint32_t a, std::uint32_t b) noexcept {
  return a >= b ? a - b : a + kQ - b;
}

[[nodiscard]] constexpr std::uint32_t fq_mul(std::uint32_t a, std::uint32_t b) noexcept {
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(a) * b % kQ);
}

[[nodiscard]] constexpr std::uint32_t fq_pow(std::uint32_t base, std::uint64_t exp) noexcept {
  std::uint32_t result = 1;
  while (exp != 0) {
    if (exp & 1) result = fq_mul(result, base);
    base = fq_mul(base, base);
    exp >>= 1;
  }
  return result;
}

/// Inverse by extended Euclid. Throws on zero.
[[nodiscard]] constexpr std::uint32_t fq_inv(std::uint32_t a) {
  if (a % kQ == 0) throw std::domain_error("fq_inv: zero has no inverse");
  std::int64_t r0 = kQ, r1 = a % kQ;
  std::int64_t t0 = 0, t1 = 1;
  while (r1 != 0) {
    const std::int64_t quot = r0 / r1;
    const std::int64_t r2 = r0 - quot * r1;
    const std::int64_t t2 = t0 - quot * t1;
    r0 = r1;
    r1 = r2;
    t0 = t1;
    t1 = t2;
  }
  if (t0 < 0) t0 += kQ;
  return static_cast<std::uint32_t>(t0);
}

struct FieldParams {
  std::uint32_t q = kQ;
  std::uint32_t n = kN;
  unsigned log_n = kLogN;
  std::uint32_t psi = 0;        // primitive 2n-th root of unity
  std::uint32_t omega = 0;      // psi^2, primitive n-th root
  std::uint32_t n_inv = 0;
  std::uint32_t psi_inv = 0;
  std::uint32_t omega_inv = 0;

  /// The smallest g >= 2 with g^n = -1 (hence g^2n = 1) is taken as psi.
  static FieldParams derive() {
    FieldParams p;
    for (std::uint32_t g = 2; g < kQ; ++g) {
      if (fq_pow(g, kN) == kQ - 1) {
        p.psi = g;
        break;
      }
    }
    if (p.psi == 0) throw std::logic_error("no primitive 2n-th root of unity");
    p.omega = fq_mul(p.psi, p.psi);
    p.n_inv = fq_inv(kN);
    p.psi_inv = fq_inv(p.psi);
    p.omega_inv = fq_inv(p.omega);
    return p;
  }

  static const FieldParams& dilithium() {
    static const FieldParams params = derive();
    return params;
  }

  [[nodiscard]] bool valid() const noexcept {
    return q == kQ && n == kN && fq_pow(psi, n) == q - 1 && fq_pow(psi, 2 * n) == 1 &&
           fq_pow(omega, n) == 1 && fq_pow(omega, n / 2) != 1 &&
           fq_mul(n % q, n_inv) == 1 && fq_mul(psi, psi_inv) == 1 &&
           fq_mul(omega, omega_inv) == 1;
  }
};

[[nodiscard]] inline bool is_valid(const Poly& a) noexcept {
  for (auto c : a)
    if (c >= kQ) return false;
  return true;
}

inline void require_valid(const Poly& a, const char* what) {
  for (std::size_t i = 0; i < kN; ++i) {
    if (a[i] >= kQ)
      throw std::invalid_argument(std::string(what) + ": coefficient " + std::to_string(i) +
                                  " is not reduced mod q");
  }
}

namespace detail {

inline std::array<std::uint32_t, kN> power_table(std::uint32_t base) {
  std::array<std::uint32_t, kN> t{};
  t[0] = 1;
  for (std::size_t i = 1; i < kN; ++i) t[i] = fq_mul(t[i - 1], base);
  return t;
}

}  // namespace detail

/// a_hat[i] = sum_j omega^(ij) psi^j a[j], evaluated term by term.
[[nodiscard]] inline Poly ntt_ref(const Poly& a, const FieldParams& p = FieldParams::dilithium()) {
  const auto w = detail::power_table(p.omega);
  const auto s = detail::power_table(p.psi);
  Poly scaled{};
  for (std::size_t j = 0; j < kN; ++j) scaled[j] = fq_mul(s[j], a[j]);
  Poly out{};
  for (std::size_t i = 0; i < kN; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < kN; ++j) {
      acc += static_cast<std::uint64_t>(w[(i * j) % kN]) * scaled[j] % kQ;
    }
    out[i] = static_cast<std::uint32_t>(acc % kQ);
  }
  return out;
}

/// a[i] = psi^-i n^-1 sum_j omega^(-ij) a_hat[j].
[[nodiscard]] inline Poly intt_ref(const Poly& a_hat,
                                   const FieldParams& p = FieldParams::dilithium()) {
  const auto w = detail::power_table(p.omega_inv);
  const auto s = detail::power_table(p.psi_inv);
  Poly out{};
  for (std::size_t i = 0; i < kN; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < kN; ++j) {
      acc += static_cast<std::uint64_t>(w[(i * j) % kN]) * a_hat[j] % kQ;
    }
    out[i] = fq_mul(fq_mul(static_cast<std::uint32_t>(acc % kQ), p.n_inv), s[i]);
  }
  return out;
}

/// Schoolbook product in Z_q[x]/(x^n + 1).
[[nodiscard]] inline Poly negacyclic_mul_ref(const Poly& a, const Poly& b) {
  Poly c{};
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < kN; ++j) {
      const std::uint32_t t = fq_mul(a[i], b[j]);
      const std::size_t k = i + j;
      if (k < kN) {
        c[k] = fq_add(c[k], t);
      } else {
        c[k - kN] = fq_sub(c[k - kN], t);
      }
    }
  }
  return c;
}

[[nodiscard]] inline Poly pointwise_ref(const Poly& a, const Poly& b) noexcept {
  Poly c{};
  for (std::size_t i = 0; i < kN; ++i) c[i] = fq_mul(a[i], b[i]);
  return c;
}

}  // namespace bsntt
