#include "sib/dataio/mnist.hpp"

#include <zlib.h>

#include <cstdio>

#include "sib/numcore/archive.hpp"

namespace sib::dataio {
namespace {

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::string& file) {
  if (offset + 4 > bytes.size()) {
    throw DataError(DataError::Kind::truncated, file + ": truncated IDX header");
  }
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) | (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) | static_cast<std::uint32_t>(bytes[offset + 3]);
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& compressed, const std::string& file) {
  z_stream stream{};
  if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK) throw DataError(DataError::Kind::io, "zlib init failed");
  stream.next_in = const_cast<Bytef*>(compressed.data());
  stream.avail_in = static_cast<uInt>(compressed.size());
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 16);
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    stream.next_out = chunk.data();
    stream.avail_out = static_cast<uInt>(chunk.size());
    status = inflate(&stream, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&stream);
      throw DataError(status == Z_BUF_ERROR ? DataError::Kind::truncated : DataError::Kind::corrupt,
                      file + ": gzip stream is damaged or truncated");
    }
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - stream.avail_out));
  }
  inflateEnd(&stream);
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path.string());
  return bytes;
}

Dataset load_mnist(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto image_bytes = read_maybe_gzip(images_path);
  const auto label_bytes = read_maybe_gzip(labels_path);
  const std::string image_name = images_path.string();
  const std::string label_name = labels_path.string();

  const auto image_magic = read_be32(image_bytes, 0, image_name);
  if (image_magic != kIdxImagesMagic) {
    throw DataError(DataError::Kind::bad_magic,
                    image_name + ": bad IDX image magic " + hex32(image_magic) + " (expected 0x00000803)");
  }
  const auto label_magic = read_be32(label_bytes, 0, label_name);
  if (label_magic != kIdxLabelsMagic) {
    throw DataError(DataError::Kind::bad_magic,
                    label_name + ": bad IDX label magic " + hex32(label_magic) + " (expected 0x00000801)");
  }

  const std::size_t count = read_be32(image_bytes, 4, image_name);
  const std::size_t rows = read_be32(image_bytes, 8, image_name);
  const std::size_t cols = read_be32(image_bytes, 12, image_name);
  const std::size_t label_count = read_be32(label_bytes, 4, label_name);
  if (count != label_count) {
    throw DataError(DataError::Kind::count_mismatch, image_name + " holds " + std::to_string(count) + " images but " +
                                                         label_name + " holds " + std::to_string(label_count) +
                                                         " labels");
  }
  const std::size_t dim = rows * cols;
  if (image_bytes.size() < 16 + count * dim) {
    throw DataError(DataError::Kind::truncated, image_name + ": truncated pixel data");
  }
  if (label_bytes.size() < 8 + count) {
    throw DataError(DataError::Kind::truncated, label_name + ": truncated label data");
  }

  Dataset out;
  out.class_count = 10;
  out.source = image_name;
  out.images = Tensor2D(count, dim);
  auto pixels = out.images.values();
  for (std::size_t i = 0; i < count * dim; ++i) pixels[i] = static_cast<float>(image_bytes[16 + i]) / 255.0f;
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto label = label_bytes[8 + i];
    if (label >= out.class_count) {
      throw DataError(DataError::Kind::corrupt, label_name + ": label " + std::to_string(label) + " at index " +
                                                    std::to_string(i) + " is not a digit");
    }
    out.labels[i] = label;
  }
  return out;
}

}  // namespace sib::dataio
