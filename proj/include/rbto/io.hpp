#pragma once
// Output files. Every file is written to a temporary sibling and renamed into
// place, so readers never see a truncated file.

#include "rbto/error.hpp"
#include "rbto/optimizer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rbto::io {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

inline std::string history_csv(const RunHistory& h) {
  std::ostringstream os;
  os << "iteration,batch_objective,p_hat,alpha,beta_norm,failure_update\n";
  for (std::size_t i = 0; i < h.completed(); ++i) {
    os << (i + 1) << ',' << format_double(h.batch_objective[i]) << ',';
    if (h.p_hat[i]) os << format_double(*h.p_hat[i]);
    os << ',' << format_double(h.alpha[i]) << ',' << format_double(h.beta_norm[i]) << ','
       << (h.failure_update[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

/// Header line, then one value per line.
inline std::string vector_csv(const std::string& header, const std::vector<double>& values) {
  std::ostringstream os;
  os << header << '\n';
  for (double v : values) os << format_double(v) << '\n';
  return os.str();
}

inline std::string grid_csv(const std::vector<double>& grid, int cols) {
  std::ostringstream os;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << format_double(grid[i]);
    os << (((i + 1) % static_cast<std::size_t>(cols) == 0) ? '\n' : ',');
  }
  return os.str();
}

/// Binary 8-bit PGM, gray = 255 (1 - rho): material is dark.
inline std::string grid_pgm(const std::vector<double>& grid, int cols) {
  const int rows = static_cast<int>(grid.size()) / cols;
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (double rho : grid) {
    const double clamped = rho < 0.0 ? 0.0 : (rho > 1.0 ? 1.0 : rho);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - clamped)))));
  }
  return out;
}

/// Reads numbers from a text file, skipping non-numeric tokens such as headers.
/// Commas, whitespace and newlines all separate values.
inline std::vector<double> read_numbers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read design file '" + path.string() + "'");
  std::vector<double> out;
  std::string token;
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',' || ch == ';') ch = ' ';
    std::istringstream ls(line);
    while (ls >> token) {
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec == std::errc() && res.ptr == token.data() + token.size()) out.push_back(v);
    }
  }
  return out;
}

inline std::string fnv1a_hex(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rbto::io
