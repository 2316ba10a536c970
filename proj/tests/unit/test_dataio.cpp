#include <zlib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "sib/dataio/dataset.hpp"
#include "sib/dataio/mnist.hpp"
#include "sib/dataio/orl.hpp"
#include "sib/dataio/pgm.hpp"
#include "sib/error.hpp"
#include "sib/numcore/rng.hpp"

using namespace sib;
using namespace sib::dataio;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sib_dataio_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::vector<std::uint8_t> idx_images(std::uint32_t magic, std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                                     std::uint8_t base) {
  std::vector<std::uint8_t> out;
  put_be32(out, magic);
  put_be32(out, n);
  put_be32(out, rows);
  put_be32(out, cols);
  for (std::uint32_t i = 0; i < n * rows * cols; ++i) out.push_back(static_cast<std::uint8_t>(base + i));
  return out;
}

std::vector<std::uint8_t> idx_labels(std::uint32_t magic, std::vector<std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, magic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_gzip(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  gzFile f = gzopen(p.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
  gzclose(f);
}

DataError::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.kind();
  }
  FAIL("expected a DataError");
  return DataError::Kind::io;
}

void write_p5(const fs::path& p, std::size_t w, std::size_t h, unsigned maxval, std::uint8_t fill) {
  std::ofstream f(p, std::ios::binary);
  f << "P5\n# synthetic\n" << w << " " << h << "\n" << maxval << "\n";
  const std::vector<char> raster(w * h, static_cast<char>(fill));
  f.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

void build_orl_tree(const fs::path& root) {
  for (std::size_t s = 1; s <= kOrlSubjects; ++s) {
    const auto dir = root / ("s" + std::to_string(s));
    fs::create_directories(dir);
    for (std::size_t i = 1; i <= kOrlImagesPerSubject; ++i) {
      write_p5(dir / (std::to_string(i) + ".pgm"), kOrlWidth, kOrlHeight, 255, static_cast<std::uint8_t>(s * 5 + i));
    }
  }
}

Dataset toy_dataset(std::size_t per_class, std::size_t classes) {
  Dataset d;
  d.class_count = classes;
  d.images = Tensor2D(per_class * classes, 2);
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    d.labels.push_back(i % classes);
    d.images(i, 0) = static_cast<float>(i) / static_cast<float>(per_class * classes);
  }
  return d;
}

}  // namespace

TEST_SUITE("load_mnist") {
  TEST_CASE("raw and gzip files parse to the same scaled dataset") {
    TempDir tmp;
    const auto images = idx_images(kIdxImagesMagic, 3, 2, 2, 250);
    const auto labels = idx_labels(kIdxLabelsMagic, {7, 0, 9});
    write_bytes(tmp.path / "img", images);
    write_bytes(tmp.path / "lbl", labels);
    write_gzip(tmp.path / "img.gz", images);
    write_gzip(tmp.path / "lbl.gz", labels);
    const auto raw = load_mnist(tmp.path / "img", tmp.path / "lbl");
    const auto gz = load_mnist(tmp.path / "img.gz", tmp.path / "lbl.gz");
    CHECK(raw.size() == 3);
    CHECK(raw.dim() == 4);
    CHECK(raw.class_count == 10);
    CHECK(raw.labels == std::vector<std::size_t>{7, 0, 9});
    CHECK(raw.images(1, 1) == 1.0f);  // byte 255
    CHECK(raw.images(0, 0) == 250.0f / 255.0f);
    CHECK(raw.images == gz.images);
    CHECK(raw.labels == gz.labels);
  }

  TEST_CASE("wrong magic, count mismatch and truncation are distinct errors") {
    TempDir tmp;
    write_bytes(tmp.path / "img", idx_images(kIdxImagesMagic, 2, 2, 2, 0));
    write_bytes(tmp.path / "lbl", idx_labels(kIdxLabelsMagic, {1, 2}));
    write_bytes(tmp.path / "bad_lbl", idx_labels(0x00000803, {1, 2}));
    write_bytes(tmp.path / "three", idx_labels(kIdxLabelsMagic, {1, 2, 3}));
    auto truncated = idx_images(kIdxImagesMagic, 2, 2, 2, 0);
    truncated.resize(truncated.size() - 3);
    write_bytes(tmp.path / "short", truncated);

    try {
      load_mnist(tmp.path / "img", tmp.path / "bad_lbl");
      FAIL("expected bad magic");
    } catch (const DataError& e) {
      CHECK(e.kind() == DataError::Kind::bad_magic);
      CHECK(std::string(e.what()).find("803") != std::string::npos);
    }
    CHECK(kind_of([&] { load_mnist(tmp.path / "img", tmp.path / "three"); }) == DataError::Kind::count_mismatch);
    CHECK(kind_of([&] { load_mnist(tmp.path / "short", tmp.path / "lbl"); }) == DataError::Kind::truncated);
    CHECK(kind_of([&] { load_mnist(tmp.path / "nope", tmp.path / "lbl"); }) == DataError::Kind::io);
  }

  TEST_CASE("standard training files when available") {
    const char* dir = std::getenv("SIB_MNIST_DIR");
    if (dir == nullptr || !fs::exists(fs::path(dir) / "train-images-idx3-ubyte")) {
      MESSAGE("SIB_MNIST_DIR not set; skipping");
      return;
    }
    const auto train = load_mnist(fs::path(dir) / "train-images-idx3-ubyte", fs::path(dir) / "train-labels-idx1-ubyte");
    CHECK(train.size() == 60000);
    CHECK(train.dim() == 784);
    CHECK(train.class_count == 10);
    for (std::size_t c : train.class_counts()) CHECK(c > 5000);
    const auto [lo, hi] = std::minmax_element(train.images.values().begin(), train.images.values().end());
    CHECK(*lo == 0.0f);
    CHECK(*hi == 1.0f);
  }
}

TEST_SUITE("load_orl") {
  TEST_CASE("intact tree gives 400 faces over 40 subjects") {
    TempDir tmp;
    build_orl_tree(tmp.path);
    const auto d = load_orl(tmp.path);
    CHECK(d.size() == 400);
    CHECK(d.dim() == 10304);
    CHECK(d.class_count == 40);
    CHECK(d.labels.front() == 0);
    CHECK(d.labels.back() == 39);
    // s1/10.pgm comes after s1/9.pgm in numeric order.
    CHECK(d.images(8, 0) == 14.0f / 255.0f);
    CHECK(d.images(9, 0) == 15.0f / 255.0f);
  }

  TEST_CASE("byte 128 at maxval 255 maps to 128/255") {
    TempDir tmp;
    write_p5(tmp.path / "a.pgm", 3, 2, 255, 128);
    const auto img = read_pgm(tmp.path / "a.pgm");
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.pixels[0] == 128);
    build_orl_tree(tmp.path / "orl");
    write_p5(tmp.path / "orl" / "s3" / "4.pgm", kOrlWidth, kOrlHeight, 255, 128);
    const auto d = load_orl(tmp.path / "orl");
    CHECK(d.images(23, 100) == doctest::Approx(0.50196).epsilon(1e-5));
  }

  TEST_CASE("ascii files, wrong dimensions and missing subjects are rejected") {
    TempDir tmp;
    build_orl_tree(tmp.path);
    {
      std::ofstream f(tmp.path / "s2" / "3.pgm");
      f << "P2\n2 1\n255\n0 255\n";
    }
    CHECK(kind_of([&] { load_orl(tmp.path); }) == DataError::Kind::unsupported_format);
    write_p5(tmp.path / "s2" / "3.pgm", 92, 111, 255, 0);
    CHECK(kind_of([&] { load_orl(tmp.path); }) == DataError::Kind::bad_dimensions);
    write_p5(tmp.path / "s2" / "3.pgm", 92, 112, 255, 0);
    fs::remove_all(tmp.path / "s17");
    CHECK(kind_of([&] { load_orl(tmp.path); }) == DataError::Kind::missing_entry);
  }

  TEST_CASE("truncated raster") {
    TempDir tmp;
    std::ofstream f(tmp.path / "t.pgm", std::ios::binary);
    f << "P5\n4 4\n255\nabc";
    f.close();
    CHECK(kind_of([&] { read_pgm(tmp.path / "t.pgm"); }) == DataError::Kind::truncated);
  }
}

TEST_SUITE("stratified_split") {
  TEST_CASE("one test sample per class out of ten") {
    const auto d = toy_dataset(10, 40);
    const auto [train, test] = stratified_split(d, 1, 3);
    CHECK(train.size() == 360);
    CHECK(test.size() == 40);
    for (std::size_t c : test.class_counts()) CHECK(c == 1);
  }

  TEST_CASE("deterministic by seed and a true partition") {
    const auto d = toy_dataset(7, 5);
    const auto [a_train, a_test] = stratified_split(d, 2, 11);
    const auto [b_train, b_test] = stratified_split(d, 2, 11);
    CHECK(a_test.images == b_test.images);
    CHECK(a_train.labels == b_train.labels);
    std::vector<float> all;
    for (const auto* part : {&a_train, &a_test})
      for (std::size_t i = 0; i < part->size(); ++i) all.push_back(part->images(i, 0));
    std::vector<float> original;
    for (std::size_t i = 0; i < d.size(); ++i) original.push_back(d.images(i, 0));
    std::sort(all.begin(), all.end());
    CHECK(all == original);
    const auto [c_train, c_test] = stratified_split(d, 2, 12);
    CHECK(c_test.images != a_test.images);
  }

  TEST_CASE("a class that is too small is rejected") {
    CHECK_THROWS_AS(stratified_split(toy_dataset(2, 3), 2, 0), ValidationError);
  }
}

TEST_SUITE("write_image_grid") {
  TEST_CASE("single black tile") {
    TempDir tmp;
    write_image_grid(Tensor2D(1, 784), 28, 28, 1, tmp.path / "g.pgm");
    const auto img = read_pgm(tmp.path / "g.pgm");
    CHECK(img.width == 28);
    CHECK(img.height == 28);
    CHECK(std::all_of(img.pixels.begin(), img.pixels.end(), [](std::uint8_t p) { return p == 0; }));
  }

  TEST_CASE("ten tiles in a row with separators") {
    TempDir tmp;
    Tensor2D images(10, 784, 0.0f);
    write_image_grid(images, 28, 28, 10, tmp.path / "g.pgm");
    const auto img = read_pgm(tmp.path / "g.pgm");
    CHECK(img.width == 10 * 28 + 9);
    CHECK(img.height == 28);
    CHECK(img.pixels[28] == 255);
    CHECK(img.pixels[27] == 0);
  }

  TEST_CASE("round trip stays within one quantization step") {
    TempDir tmp;
    Rng rng(4);
    const auto images = rng_uniform01<float>(rng, 1, 12);
    write_image_grid(images, 4, 3, 1, tmp.path / "g.pgm");
    const auto img = read_pgm(tmp.path / "g.pgm");
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(img.pixels[i] / 255.0 - images(0, i)) <= 1.0 / 255.0);
  }

  TEST_CASE("dimension mismatch and out of range values") {
    TempDir tmp;
    CHECK_THROWS_AS(write_image_grid(Tensor2D(1, 10), 3, 3, 1, tmp.path / "g.pgm"), ValidationError);
    CHECK_THROWS_AS(write_image_grid(Tensor2D(1, 9, 1.5f), 3, 3, 1, tmp.path / "g.pgm"), ValidationError);
  }
}
