#include "hnoise/pipeline/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "hnoise/errors.hpp"

namespace hnoise::pipeline {

namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* bytes, unsigned int n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (unsigned int i = 0; i < n; ++i) {
    out += digits[bytes[i] >> 4];
    out += digits[bytes[i] & 0xf];
  }
  return out;
}

struct DigestDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("SHA-256 initialisation failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("SHA-256 update failed");
  }
  std::string hex_digest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) {
      throw std::runtime_error("SHA-256 finalisation failed");
    }
    return hex(md.data(), len);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + path.parent_path().string() + ": " +
                      ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex_digest();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

const char* tool_version() { return HNOISE_VERSION; }

std::vector<ManifestEntry> read_manifest(const fs::path& out_dir) {
  const fs::path path = out_dir / "manifest.json";
  std::vector<ManifestEntry> out;
  if (!fs::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    for (const auto& e : doc.at("files")) {
      out.push_back(ManifestEntry{e.at("path").get<std::string>(), e.at("kind").get<std::string>(),
                                  e.at("command").get<std::string>(), e.at("sha256").get<std::string>(),
                                  e.at("bytes").get<std::uint64_t>(), e.at("config_hash").get<std::string>(),
                                  e.at("seed").get<std::uint64_t>(), e.at("version").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed manifest: " + e.what());
  }
  return out;
}

void write_manifest(const fs::path& out_dir, std::vector<ManifestEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    files.push_back({{"path", e.path},
                     {"kind", e.kind},
                     {"command", e.command},
                     {"sha256", e.sha256},
                     {"bytes", e.bytes},
                     {"config_hash", e.config_hash},
                     {"seed", e.seed},
                     {"version", e.version}});
  }
  nlohmann::ordered_json doc = {{"tool", "hnoise"}, {"version", tool_version()}, {"files", files}};
  write_file(out_dir / "manifest.json", doc.dump(2) + "\n");
}

OutputWriter::OutputWriter(const PipelineConfig& config, std::string command)
    : out_dir_(config.out_dir),
      command_(std::move(command)),
      config_hash_(config_hash(config)),
      seed_(config.seed),
      effective_ini_(to_ini(config, false)) {
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec || !fs::is_directory(out_dir_)) {
    throw ConfigError("cannot create output directory " + out_dir_.string() +
                      (ec ? ": " + ec.message() : std::string()));
  }
}

fs::path OutputWriter::write(const std::string& relative_path, const std::string& content,
                             const std::string& kind) {
  const fs::path path = out_dir_ / relative_path;
  write_file(path, content);
  entries_.push_back(ManifestEntry{fs::path(relative_path).generic_string(), kind, command_,
                                   sha256_hex(content), content.size(), config_hash_, seed_,
                                   tool_version()});
  return path;
}

void OutputWriter::finish() {
  write("effective_config.ini", effective_ini_, "config");
  std::map<std::string, ManifestEntry> merged;
  for (auto& e : read_manifest(out_dir_)) merged[e.path] = std::move(e);
  for (const auto& e : entries_) merged[e.path] = e;
  std::vector<ManifestEntry> all;
  for (auto& [path, e] : merged) all.push_back(std::move(e));
  write_manifest(out_dir_, std::move(all));
}

}  // namespace hnoise::pipeline
