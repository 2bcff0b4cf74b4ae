#pragma once

// Artifact writers.  CSV numbers use the shortest decimal form that
// round-trips the exact double, so re-parsing reproduces payloads bit for
// bit; every artifact opens with version, seed and the canonical config.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace arflab {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const nlohmann::json& config,
            std::uint64_t seed, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open artifact for writing: " + path.string());
    out_ << "# arflab-artifact v1\n";
    out_ << "# seed: " << seed << "\n";
    out_ << "# config: " << config.dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json_artifact(const std::filesystem::path& path,
                                const nlohmann::json& config, std::uint64_t seed,
                                nlohmann::json payload) {
  nlohmann::json j;
  j["artifact_version"] = 1;
  j["seed"] = seed;
  j["config"] = config;
  j["payload"] = std::move(payload);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open artifact for writing: " + path.string());
  out << j.dump(2) << "\n";
}

/// Raw grid dump: one ASCII header line with d and extent, then the cells
/// as 64-bit little-endian reals in row-major order.
inline void write_grid_binary(const std::filesystem::path& path,
                              const std::vector<std::int64_t>& extent,
                              const std::vector<double>& cells) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open grid dump for writing: " + path.string());
  out << "arflab-grid v1 d=" << extent.size() << " extent=";
  for (std::size_t s = 0; s < extent.size(); ++s) out << (s ? "," : "") << extent[s];
  out << "\n";
  static_assert(std::endian::native == std::endian::little,
                "grid dump assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(cells.data()),
            static_cast<std::streamsize>(cells.size() * sizeof(double)));
}

}  // namespace arflab
