#include <gtest/gtest.h>

#include "petacat/errors.hpp"
#include "petacat/units.hpp"

using namespace petacat;

TEST(Units, BytesAreDecimal) {
  EXPECT_DOUBLE_EQ(parse_bytes("120TB"), 120e12);
  EXPECT_DOUBLE_EQ(parse_bytes("1KB"), 1e3);
  EXPECT_DOUBLE_EQ(parse_bytes("4 tb"), 4e12);
  EXPECT_DOUBLE_EQ(parse_bytes("2.5GB"), 2.5e9);
  EXPECT_DOUBLE_EQ(parse_bytes("1PB"), 1e15);
  EXPECT_DOUBLE_EQ(parse_bytes("512"), 512.0);
  EXPECT_DOUBLE_EQ(parse_bytes("512B"), 512.0);
}

TEST(Units, ByteRates) {
  EXPECT_DOUBLE_EQ(parse_byte_rate("150MB/s"), 150e6);
  EXPECT_DOUBLE_EQ(parse_byte_rate("0.6MB/s"), 0.6e6);
  EXPECT_DOUBLE_EQ(parse_byte_rate("75GBps"), 75e9);
  EXPECT_DOUBLE_EQ(parse_byte_rate("10"), 10.0);
}

TEST(Units, BitRates) {
  EXPECT_DOUBLE_EQ(parse_bit_rate("155Mbit/s"), 155e6);
  EXPECT_DOUBLE_EQ(parse_bit_rate("1Gbps"), 1e9);
  EXPECT_DOUBLE_EQ(parse_bit_rate("64kbit/s"), 64e3);
}

TEST(Units, AnglesNeedSuffix) {
  EXPECT_NEAR(parse_angle("1d"), 3.14159265358979 / 180.0, 1e-15);
  EXPECT_NEAR(parse_angle("60s"), parse_angle("1m"), 1e-18);
  EXPECT_NEAR(parse_angle("60m"), parse_angle("1d"), 1e-16);
  EXPECT_DOUBLE_EQ(parse_angle("0.5r"), 0.5);
  EXPECT_THROW(parse_angle("5"), ValidationError);
  EXPECT_THROW(parse_angle("5q"), ValidationError);
}

TEST(Units, Days) {
  EXPECT_DOUBLE_EQ(parse_days("14"), 14.0);
  EXPECT_DOUBLE_EQ(parse_days("2w"), 14.0);
  EXPECT_DOUBLE_EQ(parse_days("12h"), 0.5);
}

TEST(Units, RejectsGarbage) {
  EXPECT_THROW(parse_bytes("lots"), ValidationError);
  EXPECT_THROW(parse_bytes("12XB"), ValidationError);
  EXPECT_THROW(parse_byte_rate("3 furlongs"), ValidationError);
  EXPECT_THROW(parse_bit_rate(""), ValidationError);
}

TEST(Units, Formatting) {
  EXPECT_EQ(format_bytes(20e12), "20 TB");
  EXPECT_EQ(format_rate(150e6), "150 MB/s");
  EXPECT_EQ(format_duration(53.3333), "53.3 s");
  EXPECT_EQ(format_duration(7.4074 * 3600), "7.41 h");
}
