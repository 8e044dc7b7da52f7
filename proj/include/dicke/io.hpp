#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dicke::io {

// Shortest round-trippable decimal form of a double ("%.17g").
std::string fmt_g17(double v);

// Write via a temp file in the same directory and rename over the target, so
// readers never observe a partially written file.
void atomic_write_file(const std::string& path, std::string_view content);
void atomic_write_file(const std::string& path, const void* data,
                       std::size_t size);

std::string read_file(const std::string& path);

// FNV-1a 64-bit, used for output checksums in run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

// One CSV table: header row plus numeric columns, all |%.17g| formatted.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string serialize() const;
  void write(const std::string& path) const;
  static Csv parse(std::string_view text);
  static Csv load(const std::string& path);

  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

}  // namespace dicke::io
