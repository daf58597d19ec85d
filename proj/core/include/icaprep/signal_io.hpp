#pragma once

// Signal matrix file formats.
//
// csv: an optional "N,M,frac_bits,word_length" names line, a line with the
//      four values, then N lines of M comma-separated "re:im" pairs.
//      Values are real numbers and are quantized on load.
// raw: 16-byte header ("ICAP", u16 N, u16 M, u8 word_length, u8 frac_bits,
//      6 zero bytes) followed by little-endian int16 raw values, re then im,
//      row-major.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "icaprep/prep.hpp"

namespace icaprep {

enum class SignalFormat { Csv, Raw };

// From the file extension: .csv, or .raw / .bin / .icap.
SignalFormat signal_format_from_path(const std::string& path);

SignalMatrix parse_signals_csv(std::istream& in);
std::string encode_signals_csv(const SignalMatrix& y);

SignalMatrix parse_signals_raw(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_signals_raw(const SignalMatrix& y);

SignalMatrix load_signals(const std::string& path, SignalFormat format);
SignalMatrix load_signals(const std::string& path);
void save_signals(const SignalMatrix& y, const std::string& path, SignalFormat format);

}  // namespace icaprep
