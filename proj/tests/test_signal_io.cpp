#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "icaprep/errors.hpp"
#include "icaprep/oracle.hpp"
#include "icaprep/signal_io.hpp"

using namespace icaprep;

namespace {

SignalMatrix sample_signals(std::size_t n = 4, std::size_t m = 16) {
  return quantize_signals(generate_bss(n, m, 3, ScenarioKind::QpskSources).y, kDefaultFormat);
}

std::string parse_error_text(const std::string& csv) {
  std::istringstream in(csv);
  try {
    parse_signals_csv(in);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("icaprep_io_" + name);
}

}  // namespace

TEST(SignalFormat, FromExtension) {
  EXPECT_EQ(signal_format_from_path("a/b.csv"), SignalFormat::Csv);
  EXPECT_EQ(signal_format_from_path("x.raw"), SignalFormat::Raw);
  EXPECT_EQ(signal_format_from_path("x.bin"), SignalFormat::Raw);
  EXPECT_THROW(signal_format_from_path("x.txt"), ConfigError);
}

TEST(RawFormat, RoundTripIsBitIdentical) {
  const SignalMatrix y = sample_signals(8, 64);
  const auto bytes = encode_signals_raw(y);
  EXPECT_EQ(bytes.size(), 16u + 8 * 64 * 4);
  EXPECT_EQ(parse_signals_raw(bytes), y);
}

TEST(RawFormat, HeaderLayout) {
  const auto bytes = encode_signals_raw(sample_signals(4, 16));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "ICAP");
  EXPECT_EQ(bytes[4], 4);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 16);
  EXPECT_EQ(bytes[8], 10);
  EXPECT_EQ(bytes[9], 8);
  for (std::size_t k = 10; k < 16; ++k) EXPECT_EQ(bytes[k], 0);
}

TEST(RawFormat, TruncatedFileNamesByteCounts) {
  auto bytes = encode_signals_raw(sample_signals(4, 16));
  bytes.resize(bytes.size() - 3);
  try {
    parse_signals_raw(bytes);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("expected 272 bytes, got 269"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_signals_raw(std::span<const std::uint8_t>(bytes.data(), 5)), ParseError);
}

TEST(RawFormat, BadHeaderRejected) {
  auto bytes = encode_signals_raw(sample_signals(4, 16));
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(parse_signals_raw(magic), ParseError);
  auto odd = bytes;
  odd[4] = 3;
  EXPECT_THROW(parse_signals_raw(odd), ParseError);
  auto reserved = bytes;
  reserved[12] = 1;
  EXPECT_THROW(parse_signals_raw(reserved), ParseError);
  auto range = bytes;
  range[16] = 0xff;
  range[17] = 0x7f;  // 32767 is outside Q(10,8)
  EXPECT_THROW(parse_signals_raw(range), ParseError);
}

TEST(CsvFormat, RoundTripIsBitIdentical) {
  const SignalMatrix y = sample_signals(4, 32);
  std::istringstream in(encode_signals_csv(y));
  EXPECT_EQ(parse_signals_csv(in), y);
}

TEST(CsvFormat, HeaderLineIsOptionalAndValuesQuantize) {
  std::istringstream in("2,2,8,10\n0.5:-0.25,1:0\n0.001:3.0,-0.5:0.5\n");
  const SignalMatrix y = parse_signals_csv(in);
  EXPECT_EQ(y(0, 0), CFix::from_raw(128, -64, kDefaultFormat));
  EXPECT_EQ(y(1, 0).re.raw(), 0);
  EXPECT_EQ(y(1, 0).im.raw(), 511);
}

TEST(CsvFormat, OddNRejected) {
  EXPECT_NE(parse_error_text("N,M,frac_bits,word_length\n3,2,8,10\n0:0,0:0\n0:0,0:0\n0:0,0:0\n").find("N must be even"),
            std::string::npos);
}

TEST(CsvFormat, ErrorsNameTheLine) {
  const std::string bad_sample = "N,M,frac_bits,word_length\n2,2,8,10\n0:0,0:0\n0:0,abc:0\n";
  const std::string err = parse_error_text(bad_sample);
  EXPECT_NE(err.find("line 4"), std::string::npos) << err;
  EXPECT_NE(parse_error_text("2,2,8,10\n0:0,0:0\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error_text("2,2,8,10\n0:0\n0:0,0:0\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error_text("2,3,8,10\n").find("power of two"), std::string::npos);
  EXPECT_NE(parse_error_text("").find("empty"), std::string::npos);
  EXPECT_NE(parse_error_text("2,2,8,10\n0:0,0:0\n0:0,0:0\n1:1,1:1\n").find("trailing"), std::string::npos);
  EXPECT_FALSE(parse_error_text("2,2,8,10\n0:0,0;0\n0:0,0:0\n").empty());
}

TEST(SignalFiles, SaveAndLoadBothFormats) {
  const SignalMatrix y = sample_signals(4, 16);
  for (const auto& [name, fmt] : {std::pair{"a.raw", SignalFormat::Raw}, std::pair{"a.csv", SignalFormat::Csv}}) {
    const auto path = temp_path(name);
    save_signals(y, path.string(), fmt);
    EXPECT_EQ(load_signals(path.string()), y);
    std::filesystem::remove(path);
  }
  EXPECT_THROW(load_signals(temp_path("missing.raw").string()), std::runtime_error);
}
