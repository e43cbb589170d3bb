#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "ccmetrics/io.hpp"
#include "oracle.hpp"

using namespace ccm;

namespace {

std::string serialize(const auto& vol) {
  std::ostringstream os(std::ios::binary);
  io::write(os, vol);
  return os.str();
}

io::AnyVolume parse(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return io::read(is);
}

}  // namespace

TEST(Mask3DFormat, HeaderLayoutIsBitExact) {
  Mask3D m({2, 3, 4}, {0.5, 1.0, 2.5});
  m(1, 2, 3) = 1;
  const auto bytes = serialize(m);
  ASSERT_EQ(bytes.size(), 4u + 12u + 12u + 1u + 24u);
  EXPECT_EQ(bytes.substr(0, 4), "CCM1");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  EXPECT_EQ(p[4], 2);
  EXPECT_EQ(p[5] | p[6] | p[7], 0);
  EXPECT_EQ(p[8], 3);
  EXPECT_EQ(p[12], 4);
  // 0.5f = 0x3F000000, little-endian.
  EXPECT_EQ(p[16], 0x00);
  EXPECT_EQ(p[19], 0x3F);
  // 2.5f = 0x40200000
  EXPECT_EQ(p[26], 0x20);
  EXPECT_EQ(p[27], 0x40);
  EXPECT_EQ(p[28], 0);  // dtype
  EXPECT_EQ(p[29 + 23], 1);  // last voxel, c fastest
  EXPECT_EQ(std::count(bytes.begin() + 29, bytes.end(), '\1'), 1);
}

TEST(Mask3DFormat, LabelPayloadIsLittleEndianU32) {
  LabelVolume l({1, 1, 2}, {1, 1, 1});
  l[1] = 0x01020304u;
  const auto bytes = serialize(l);
  ASSERT_EQ(bytes.size(), 29u + 8u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[28]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[33]), 0x04);
  EXPECT_EQ(static_cast<unsigned char>(bytes[36]), 0x01);
}

TEST(Mask3DFormat, RoundTrip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_mask(rng, oracle::random_dims(rng, 10), {0.5, 1.25, 3.0}, 0.3);
    const auto back = parse(serialize(m));
    ASSERT_TRUE(std::holds_alternative<Mask3D>(back));
    EXPECT_EQ(std::get<Mask3D>(back), m);

    LabelVolume l(m.dims(), m.spacing());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<std::uint32_t>(rng());
    const auto lb = parse(serialize(l));
    ASSERT_TRUE(std::holds_alternative<LabelVolume>(lb));
    EXPECT_EQ(std::get<LabelVolume>(lb), l);
  }
}

TEST(Mask3DFormat, RejectsMalformedInput) {
  Mask3D m({2, 2, 2}, {1, 1, 1});
  const auto good = serialize(m);

  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(parse(bad), FormatError);

  EXPECT_THROW(parse(good.substr(0, 10)), FormatError);               // short header
  EXPECT_THROW(parse(good.substr(0, good.size() - 1)), FormatError);  // short payload
  EXPECT_THROW(parse(good + '\0'), FormatError);                      // trailing bytes

  bad = good;
  bad[28] = 7;  // dtype
  EXPECT_THROW(parse(bad), FormatError);

  bad = good;
  bad[29] = 2;  // non-binary payload
  EXPECT_THROW(parse(bad), FormatError);

  bad = good;
  std::memset(bad.data() + 4, 0, 4);  // h = 0
  EXPECT_THROW(parse(bad), FormatError);

  bad = good;
  const float neg = -1.0f;
  std::memcpy(bad.data() + 16, &neg, 4);
  EXPECT_THROW(parse(bad), FormatError);

  EXPECT_THROW(parse(""), FormatError);
}

TEST(Mask3DFormat, FileHelpers) {
  const std::string path = ::testing::TempDir() + "io_helpers.ccm";
  Mask3D m({3, 3, 3}, {1, 1, 1});
  m(1, 1, 1) = 1;
  io::write_file(path, m);
  EXPECT_EQ(io::read_mask_file(path), m);
  EXPECT_THROW(io::read_labels_file(path), FormatError);
  EXPECT_THROW(io::read_file(path + ".missing"), InputError);
}
