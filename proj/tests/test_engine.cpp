#include <gtest/gtest.h>

#include <random>

#include "bsntt/engine.hpp"
#include "test_support.hpp"

namespace {

using namespace bsntt;
using test::random_poly;

const Engine& engine() { return Engine::shared(); }

Poly delta() {
  Poly d{};
  d[0] = 1;
  return d;
}

Poly filled(std::uint32_t v) {
  Poly p{};
  p.fill(v);
  return p;
}

TEST(Ntt256, Examples) {
  EXPECT_EQ(engine().ntt256(Poly{}), Poly{});
  EXPECT_EQ(engine().ntt256(delta()), filled(1));
}

TEST(Ntt256, MatchesOracle) {
  std::mt19937_64 rng(100);
  for (int i = 0; i < 100; ++i) {
    const Poly a = random_poly(rng);
    ASSERT_EQ(engine().ntt256(a), ntt_ref(a));
  }
}

TEST(Intt256, ExamplesAndOracle) {
  EXPECT_EQ(engine().intt256(Poly{}), Poly{});
  EXPECT_EQ(engine().intt256(filled(1)), delta());
  std::mt19937_64 rng(101);
  for (int i = 0; i < 100; ++i) {
    const Poly a = random_poly(rng);
    ASSERT_EQ(engine().intt256(engine().ntt256(a)), a);
    ASSERT_EQ(engine().intt256(a), intt_ref(a));
  }
}

TEST(PointwiseMul, Examples) {
  std::mt19937_64 rng(102);
  const Poly a = random_poly(rng), b = random_poly(rng);
  EXPECT_EQ(engine().pointwise_mul(a, filled(1)), a);
  EXPECT_EQ(engine().pointwise_mul(a, Poly{}), Poly{});
  EXPECT_EQ(engine().pointwise_mul(a, b), pointwise_ref(a, b));
}

TEST(PolyMul, Examples) {
  std::mt19937_64 rng(103);
  const Poly a = random_poly(rng);
  EXPECT_EQ(engine().poly_mul(a, delta()), a);
  Poly x255{}, x1{};
  x255[255] = 1;
  x1[1] = 1;
  Poly expect{};
  expect[0] = kQ - 1;
  EXPECT_EQ(engine().poly_mul(x255, x1), expect);
  for (int i = 0; i < 10; ++i) {
    const Poly x = random_poly(rng), y = random_poly(rng);
    ASSERT_EQ(engine().poly_mul(x, y), negacyclic_mul_ref(x, y));
  }
}

std::vector<Poly> scalar_matvec(const std::vector<std::vector<Poly>>& m, const std::vector<Poly>& v) {
  std::vector<Poly> out;
  for (const auto& row : m) {
    Poly acc{};
    for (std::size_t j = 0; j < v.size(); ++j)
      for (std::size_t k = 0; k < kN; ++k) acc[k] = fq_add(acc[k], fq_mul(row[j][k], v[j][k]));
    out.push_back(intt_ref(acc));
  }
  return out;
}

TEST(MatvecMul, Examples) {
  std::mt19937_64 rng(104);
  const Poly v0 = random_poly(rng);
  const auto one = engine().matvec_mul({{filled(1)}}, {v0});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], engine().intt256(v0));
  const auto zero = engine().matvec_mul({{Poly{}, Poly{}}, {Poly{}, Poly{}}}, {v0, v0});
  EXPECT_EQ(zero, (std::vector<Poly>{Poly{}, Poly{}}));
  std::vector<std::vector<Poly>> m = {{random_poly(rng), random_poly(rng)}, {random_poly(rng), random_poly(rng)}};
  const std::vector<Poly> v = {random_poly(rng), random_poly(rng)};
  EXPECT_EQ(engine().matvec_mul(m, v), scalar_matvec(m, v));
  const auto prot = engine().protected_matvec_mul(m, v);
  EXPECT_EQ(prot.value, scalar_matvec(m, v));
  EXPECT_FALSE(prot.fault_detected);
}

TEST(MatvecMul, DimensionMismatch) {
  EXPECT_THROW((void)engine().matvec_mul({{Poly{}, Poly{}}}, {Poly{}}), dimension_mismatch);
  EXPECT_THROW((void)engine().protected_matvec_mul({{Poly{}}, {Poly{}, Poly{}}}, {Poly{}}), dimension_mismatch);
  EXPECT_TRUE(engine().matvec_mul({}, {Poly{}}).empty());
}

TEST(Engine, RejectsUnreducedInput) {
  Poly bad{};
  bad[17] = kQ;
  EXPECT_THROW((void)engine().ntt256(bad), std::invalid_argument);
  EXPECT_THROW((void)engine().protected_poly_mul(bad, Poly{}), std::invalid_argument);
}

std::size_t butterflies_via_hooks(const TransformPlan& plan, const Poly& a) {
  std::size_t n = 0;
  (void)engine().run_plan(plan, a, nullptr, [&](std::size_t, const Step& s, const SlicedPolyState&) {
    n += s.kind == StepKind::Butterfly ? 1 : 0;
    return true;
  });
  return n;
}

TEST(Engine, ButterflyEvaluationCounts) {
  std::mt19937_64 rng(105);
  const Poly a = random_poly(rng);
  EXPECT_EQ(butterflies_via_hooks(engine().plan(PlanKind::Ntt, false), a), 32u);
  EXPECT_EQ(butterflies_via_hooks(engine().plan(PlanKind::Intt, false), a), 32u);
  EXPECT_EQ(butterflies_via_hooks(engine().plan(PlanKind::Ntt, true), a), 64u);
  EXPECT_EQ(butterflies_via_hooks(engine().plan(PlanKind::Intt, true), a), 64u);
}

TEST(Engine, BufferSizes) {
  SlicedPolyState plain(engine().plan(PlanKind::Ntt, false).block_count);
  for (const auto& b : plain.buffers) EXPECT_EQ(b.size(), 128u);
  SlicedPolyState red(engine().plan(PlanKind::Ntt, true).block_count);
  for (const auto& b : red.buffers) EXPECT_EQ(b.size(), 256u);
}

TEST(Engine, HookCanStopExecution) {
  std::size_t seen = 0;
  (void)engine().run_plan(engine().plan(PlanKind::Ntt, false), Poly{}, nullptr,
                          [&](std::size_t i, const Step&, const SlicedPolyState&) {
                            seen = i;
                            return i < 3;
                          });
  EXPECT_EQ(seen, 3u);
}

TEST(Protected, FaultFreeMatchesUnprotected) {
  std::mt19937_64 rng(106);
  for (int i = 0; i < 20; ++i) {
    const Poly a = random_poly(rng), b = random_poly(rng);
    const auto f = engine().protected_ntt256(a);
    EXPECT_EQ(f.value, engine().ntt256(a));
    EXPECT_FALSE(f.fault_detected);
    const auto g = engine().protected_intt256(a);
    EXPECT_EQ(g.value, engine().intt256(a));
    EXPECT_FALSE(g.fault_detected);
    const auto p = engine().protected_pointwise_mul(a, b);
    EXPECT_EQ(p.value, pointwise_ref(a, b));
    EXPECT_FALSE(p.fault_detected);
  }
  const Poly a = random_poly(rng), b = random_poly(rng);
  const auto m = engine().protected_poly_mul(a, b);
  EXPECT_EQ(m.value, negacyclic_mul_ref(a, b));
  EXPECT_FALSE(m.fault_detected);
  const auto id = engine().protected_poly_mul(a, delta());
  EXPECT_EQ(id.value, a);
  EXPECT_FALSE(id.fault_detected);
}

TEST(Protected, CorruptedOdsSliceBeforeCheckIsFlagged) {
  std::mt19937_64 rng(107);
  const Poly a = random_poly(rng);
  const TransformPlan& plan = engine().plan(PlanKind::Ntt, true);
  std::size_t check = 0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i)
    if (plan.steps[i].kind == StepKind::Check) check = i;
  const auto r = engine().run_plan(plan, a, nullptr, [&](std::size_t i, const Step&, SlicedPolyState& st) {
    if (i + 1 == check) st.buffer(Buffer::Out1)[40] ^= 1u << 2;
    return true;
  });
  EXPECT_TRUE(r.fault_detected);
}

}  // namespace
