#include "sib/numcore/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sib {
namespace {

constexpr char kMagic[8] = {'S', 'I', 'B', 'A', 'R', 'C', 'H', '\0'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw DataError(DataError::Kind::truncated,
                      "archive truncated: needed " + std::to_string(n) + " bytes at offset " +
                          std::to_string(pos_) + ", file has " + std::to_string(bytes_.size()));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  const std::uint8_t* take(std::size_t n) {
    need(n);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

const Tensor2D& ModelArchive::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw DataError(DataError::Kind::missing_entry, "archive has no tensor named '" + name + "'");
}

std::vector<std::uint8_t> encode_archive(const ModelArchive& archive) {
  nlohmann::json header;
  header["kind"] = archive.kind;
  header["metadata"] = archive.metadata;
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : archive.tensors) {
    header["tensors"].push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, ModelArchive::kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : archive.tensors) {
    for (float v : t.value.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  put_u64(out, fnv1a64(out.data(), out.size()));
  return out;
}

ModelArchive decode_archive(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  const std::uint8_t* magic = in.take(sizeof(kMagic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(DataError::Kind::bad_magic, "not a model archive (bad magic)");
  }
  const std::uint32_t version = in.u32();
  if (version != ModelArchive::kFormatVersion) {
    throw DataError(DataError::Kind::version_mismatch,
                    "archive format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(ModelArchive::kFormatVersion) + ")");
  }
  const std::uint32_t header_len = in.u32();
  const auto* header_bytes = in.take(header_len);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes, header_bytes + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataError::Kind::corrupt, std::string("archive header is not valid JSON: ") + e.what());
  }

  ModelArchive archive;
  try {
    archive.kind = header.at("kind").get<std::string>();
    archive.metadata = header.at("metadata");
    for (const auto& entry : header.at("tensors")) {
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto cols = entry.at("cols").get<std::size_t>();
      const std::size_t count = rows * cols;
      const std::uint8_t* raw = in.take(count * 4);
      std::vector<float> values(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t word = 0;
        for (int b = 0; b < 4; ++b) word |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
        values[i] = std::bit_cast<float>(word);
      }
      archive.tensors.push_back({entry.at("name").get<std::string>(), Tensor2D(rows, cols, std::move(values))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataError::Kind::corrupt, std::string("archive header is malformed: ") + e.what());
  }

  const std::size_t body_end = in.position();
  const std::uint64_t stored = in.u64();
  if (stored != fnv1a64(bytes.data(), body_end)) {
    throw DataError(DataError::Kind::corrupt, "archive checksum mismatch");
  }
  if (in.position() != bytes.size()) {
    throw DataError(DataError::Kind::corrupt, "trailing bytes after archive checksum");
  }
  return archive;
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(DataError::Kind::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError(DataError::Kind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  write_file_atomic(path, std::vector<std::uint8_t>(contents.begin(), contents.end()));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::io, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void save_archive(const ModelArchive& archive, const std::filesystem::path& path) {
  write_file_atomic(path, encode_archive(archive));
}

ModelArchive load_archive(const std::filesystem::path& path) { return decode_archive(read_file_bytes(path)); }

}  // namespace sib
