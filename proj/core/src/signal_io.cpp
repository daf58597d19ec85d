#include "icaprep/signal_io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

#include "icaprep/errors.hpp"

namespace icaprep {
namespace {

constexpr std::size_t kRawHeaderBytes = 16;

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

long long parse_int(std::string_view s, std::size_t line, const char* what) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(at_line(line) + "expected integer " + what + ", got '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::size_t line, std::size_t col) {
  s = trim(s);
  // from_chars for double is missing in older libstdc++; strtod on a copy.
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw ParseError(at_line(line) + "value " + std::to_string(col + 1) + ": bad number '" + tmp + "'");
  }
  return v;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

}  // namespace

SignalFormat signal_format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "csv") return SignalFormat::Csv;
  if (ext == "raw" || ext == "bin" || ext == "icap") return SignalFormat::Raw;
  throw ConfigError("cannot infer signal format from '" + path + "' (use .csv or .raw)");
}

SignalMatrix parse_signals_csv(std::istream& in) {
  std::string text;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, text)) {
      ++line_no;
      if (!trim(text).empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError("line 1: empty file, expected header N,M,frac_bits,word_length");
  if (trim(text) == "N,M,frac_bits,word_length") {
    if (!next_line()) throw ParseError(at_line(line_no + 1) + "missing header values");
  }
  const auto head = split(trim(text), ',');
  if (head.size() != 4) throw ParseError(at_line(line_no) + "header needs 4 fields N,M,frac_bits,word_length");
  const long long n = parse_int(head[0], line_no, "N");
  const long long m = parse_int(head[1], line_no, "M");
  const FixFormat fmt{static_cast<int>(parse_int(head[3], line_no, "word_length")),
                      static_cast<int>(parse_int(head[2], line_no, "frac_bits"))};
  if (n < 2 || n % 2 != 0) throw ParseError(at_line(line_no) + "N must be even and >= 2 (got " + std::to_string(n) + ")");
  if (m < 2 || !is_power_of_two(m)) {
    throw ParseError(at_line(line_no) + "M must be a power of two >= 2 (got " + std::to_string(m) + ")");
  }
  if (!fmt.valid()) throw ParseError(at_line(line_no) + "invalid fixed-point format");

  CFixMatrix data = make_cfix_matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(m), fmt);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (!next_line()) {
      throw ParseError(at_line(line_no + 1) + "expected " + std::to_string(n) + " signal rows, found " + std::to_string(r));
    }
    const auto cells = split(trim(text), ',');
    if (cells.size() != data.cols()) {
      throw ParseError(at_line(line_no) + "expected " + std::to_string(m) + " samples, found " +
                       std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto parts = split(cells[k], ':');
      if (parts.size() != 2) {
        throw ParseError(at_line(line_no) + "value " + std::to_string(k + 1) + ": expected re:im");
      }
      data(r, k) = {quantize(parse_real(parts[0], line_no, k), fmt), quantize(parse_real(parts[1], line_no, k), fmt)};
    }
  }
  if (next_line()) throw ParseError(at_line(line_no) + "unexpected trailing data after " + std::to_string(n) + " rows");
  return SignalMatrix(std::move(data));
}

std::string encode_signals_csv(const SignalMatrix& y) {
  std::string out = "N,M,frac_bits,word_length\n";
  out += std::to_string(y.n()) + "," + std::to_string(y.m()) + "," + std::to_string(y.format().frac_bits) + "," +
         std::to_string(y.format().word_length) + "\n";
  char buf[64];
  for (std::size_t r = 0; r < y.n(); ++r) {
    for (std::size_t k = 0; k < y.m(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", k == 0 ? "" : ",", y(r, k).re.value(), y(r, k).im.value());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

SignalMatrix parse_signals_raw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kRawHeaderBytes) {
    throw ParseError("truncated header: expected " + std::to_string(kRawHeaderBytes) + " bytes, got " +
                     std::to_string(bytes.size()));
  }
  if (bytes[0] != 'I' || bytes[1] != 'C' || bytes[2] != 'A' || bytes[3] != 'P') {
    throw ParseError("byte 0: bad magic, expected \"ICAP\"");
  }
  const std::size_t n = get_u16(bytes, 4);
  const std::size_t m = get_u16(bytes, 6);
  const FixFormat fmt{bytes[8], bytes[9]};
  for (std::size_t off = 10; off < kRawHeaderBytes; ++off) {
    if (bytes[off] != 0) throw ParseError("byte " + std::to_string(off) + ": reserved header byte is not zero");
  }
  if (n < 2 || n % 2 != 0) throw ParseError("byte 4: N must be even and >= 2 (got " + std::to_string(n) + ")");
  if (m < 2 || !is_power_of_two(static_cast<std::int64_t>(m))) {
    throw ParseError("byte 6: M must be a power of two >= 2 (got " + std::to_string(m) + ")");
  }
  if (!fmt.valid() || fmt.word_length > 16) throw ParseError("byte 8: invalid fixed-point format for raw storage");

  const std::size_t expected = kRawHeaderBytes + n * m * 4;
  if (bytes.size() != expected) {
    throw ParseError(std::string(bytes.size() < expected ? "truncated" : "oversized") + " raw file: expected " +
                     std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
  }
  CFixMatrix data = make_cfix_matrix(n, m, fmt);
  std::size_t off = kRawHeaderBytes;
  auto next = [&]() {
    const auto v = static_cast<std::int16_t>(get_u16(bytes, off));
    if (v > fmt.max_raw() || v < fmt.min_raw()) {
      throw ParseError("byte " + std::to_string(off) + ": raw value " + std::to_string(v) + " outside Q(" +
                       std::to_string(fmt.word_length) + "," + std::to_string(fmt.frac_bits) + ")");
    }
    off += 2;
    return FixPoint::from_raw(v, fmt);
  };
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < m; ++k) {
      const FixPoint re = next();
      const FixPoint im = next();
      data(r, k) = {re, im};
    }
  }
  return SignalMatrix(std::move(data));
}

std::vector<std::uint8_t> encode_signals_raw(const SignalMatrix& y) {
  if (y.format().word_length > 16) throw ConfigError("raw format stores at most 16-bit words");
  if (y.n() > 0xffff || y.m() > 0xffff) throw ConfigError("raw format limits N and M to 65535");
  std::vector<std::uint8_t> out = {'I', 'C', 'A', 'P'};
  put_u16(out, static_cast<std::uint16_t>(y.n()));
  put_u16(out, static_cast<std::uint16_t>(y.m()));
  out.push_back(static_cast<std::uint8_t>(y.format().word_length));
  out.push_back(static_cast<std::uint8_t>(y.format().frac_bits));
  out.resize(kRawHeaderBytes, 0);
  out.reserve(kRawHeaderBytes + y.n() * y.m() * 4);
  for (std::size_t r = 0; r < y.n(); ++r) {
    for (const CFix& z : y.row(r)) {
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(z.re.raw())));
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(z.im.raw())));
    }
  }
  return out;
}

SignalMatrix load_signals(const std::string& path, SignalFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  if (format == SignalFormat::Csv) return parse_signals_csv(in);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_signals_raw(bytes);
}

SignalMatrix load_signals(const std::string& path) { return load_signals(path, signal_format_from_path(path)); }

void save_signals(const SignalMatrix& y, const std::string& path, SignalFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  if (format == SignalFormat::Csv) {
    out << encode_signals_csv(y);
  } else {
    const auto bytes = encode_signals_raw(y);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace icaprep
