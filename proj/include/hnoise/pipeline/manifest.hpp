#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hnoise/pipeline/config.hpp"

namespace hnoise::pipeline {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Version string stamped into manifests and reports.
const char* tool_version();

struct ManifestEntry {
  /// Relative to the output directory, '/' separated.
  std::string path;
  std::string kind;
  std::string command;
  std::string sha256;
  std::uint64_t bytes = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

/// manifest.json in the output directory, keyed by path.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& out_dir);
void write_manifest(const std::filesystem::path& out_dir, std::vector<ManifestEntry> entries);

/// Writes command outputs under config.out_dir and records each in the manifest.
/// finish() persists the effective config next to the outputs and merges the
/// new entries into manifest.json.
class OutputWriter {
 public:
  OutputWriter(const PipelineConfig& config, std::string command);

  std::filesystem::path write(const std::string& relative_path, const std::string& content,
                              const std::string& kind);
  void finish();

  const std::filesystem::path& out_dir() const { return out_dir_; }
  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::filesystem::path out_dir_;
  std::string command_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::string effective_ini_;
  std::vector<ManifestEntry> entries_;
};

}  // namespace hnoise::pipeline
