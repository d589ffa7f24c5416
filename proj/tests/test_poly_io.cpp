#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "bsntt/poly_io.hpp"
#include "test_support.hpp"

namespace {

using namespace bsntt;

TEST(PolyIo, JsonRoundTripIsNewlineFree) {
  std::mt19937_64 rng(1);
  const Poly a = test::random_poly(rng);
  const std::string s = poly_to_json(a);
  EXPECT_EQ(s.find('\n'), std::string::npos);
  EXPECT_EQ(parse_poly(s), a);
}

TEST(PolyIo, BinaryIsLittleEndian) {
  Poly a{};
  a[0] = 0x00123456;
  a[255] = kQ - 1;
  const std::string b = poly_to_binary(a);
  ASSERT_EQ(b.size(), 1024u);
  EXPECT_EQ(static_cast<unsigned char>(b[0]), 0x56);
  EXPECT_EQ(static_cast<unsigned char>(b[1]), 0x34);
  EXPECT_EQ(static_cast<unsigned char>(b[2]), 0x12);
  EXPECT_EQ(static_cast<unsigned char>(b[3]), 0x00);
  EXPECT_EQ(parse_poly(b), a);
}

TEST(PolyIo, RejectsMalformedInput) {
  EXPECT_THROW((void)parse_poly("[1,2,3]"), poly_format_error);
  EXPECT_THROW((void)parse_poly("hello"), poly_format_error);
  Poly a{};
  std::string j = poly_to_json(a);
  j.replace(1, 1, "8380417");
  EXPECT_THROW((void)parse_poly(j), poly_format_error);
  j = poly_to_json(a);
  j.replace(1, 1, "-1");
  EXPECT_THROW((void)parse_poly(j), poly_format_error);
  std::string bin = poly_to_binary(a);
  bin[3] = static_cast<char>(0x7f);
  EXPECT_THROW((void)parse_poly(bin), poly_format_error);
}

TEST(PolyIo, AtomicWriteReplacesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "bsntt_poly_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "p.json";
  Poly a{};
  a[7] = 7;
  write_file_atomic(path, poly_to_json(a));
  a[7] = 8;
  write_file_atomic(path, poly_to_json(a));
  EXPECT_EQ(load_poly(path), a);
  EXPECT_FALSE(std::filesystem::exists(dir / "p.json.tmp"));
  std::filesystem::remove_all(dir);
}

}  // namespace
