#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sib/numcore/tensor.hpp"

namespace sib {

struct NamedTensor {
  std::string name;
  Tensor2D value;
};

// Self-describing container for model weights. Layout (little-endian):
//
//   "SIBARCH\0"            8 bytes
//   format version         u32
//   header length          u32
//   header                 JSON: {"kind", "metadata", "tensors": [{name, rows, cols}]}
//   tensor payloads        float32, in header order
//   checksum               u64 FNV-1a over every preceding byte
struct ModelArchive {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string kind;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor2D& tensor(const std::string& name) const;
  void add(std::string name, Tensor2D value) { tensors.push_back({std::move(name), std::move(value)}); }
};

std::vector<std::uint8_t> encode_archive(const ModelArchive& archive);
ModelArchive decode_archive(const std::vector<std::uint8_t>& bytes);

// Writes through a temporary file and renames it into place.
void save_archive(const ModelArchive& archive, const std::filesystem::path& path);
ModelArchive load_archive(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

// Shared by every writer that must not leave half-written files behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace sib
