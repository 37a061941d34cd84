#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "asl/grid.hpp"

namespace asl {

// Field snapshot: one text line "ASFIELD v1 n=<n> L=<float>\n" followed by n*n
// little-endian IEEE-754 doubles in row-major (y-major) order.

inline std::string snapshot_header(const TorusGrid& g) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "ASFIELD v1 n=%d L=%.17g\n", g.n(), g.length());
  return buf;
}

inline void write_snapshot(std::ostream& os, const ScalarField& f) {
  os << snapshot_header(f.grid());
  for (double v : f.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    os.write(reinterpret_cast<const char*>(bytes), 8);
  }
  if (!os) throw std::runtime_error("write_snapshot: stream error");
}

inline ScalarField read_snapshot(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_snapshot: missing header");
  int n = 0;
  char lbuf[64] = {0};
  if (std::sscanf(line.c_str(), "ASFIELD v1 n=%d L=%63s", &n, lbuf) != 2)
    throw std::runtime_error("read_snapshot: malformed header '" + line + "'");
  char* end = nullptr;
  const double length = std::strtod(lbuf, &end);
  if (end == lbuf || *end != '\0') throw std::runtime_error("read_snapshot: malformed period in header");
  TorusGrid grid(n, length);
  ScalarField f(grid);
  for (double& v : f.values()) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("read_snapshot: truncated payload");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  if (!f.all_finite()) throw std::runtime_error("read_snapshot: non-finite samples");
  return f;
}

inline void save_snapshot(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_snapshot(os, f);
}

inline ScalarField load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace asl
