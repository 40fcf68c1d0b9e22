/* Copyright 2026 The vclass Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// IDX reader/writer. Files are read through zlib so gzip-compressed and
// raw files are handled by the same code path.

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>

#include "vclass/datagen.hpp"
#include "vclass/errors.hpp"

namespace vc {
namespace {

class IdxReader {
 public:
  explicit IdxReader(const std::filesystem::path& path) : path_(path.string()) {
    file_ = gzopen(path_.c_str(), "rb");
    if (file_ == nullptr) throw FormatError("cannot open IDX file " + path_, 0);
  }
  ~IdxReader() { gzclose(file_); }
  IdxReader(const IdxReader&) = delete;
  IdxReader& operator=(const IdxReader&) = delete;

  std::uint32_t read_u32(const char* what) {
    unsigned char b[4];
    read_bytes(b, 4, what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  void read_bytes(unsigned char* out, std::size_t n, const char* what) {
    std::size_t done = 0;
    while (done < n) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n - done, 1u << 30));
      const int got = gzread(file_, out + done, chunk);
      if (got < 0) fail(std::string("read error in ") + what, offset_ + done);
      if (got == 0) {
        fail(std::string("truncated ") + what + ": expected " + std::to_string(n) + " bytes, got " +
                 std::to_string(done),
             offset_ + done);
      }
      done += static_cast<std::size_t>(got);
    }
    offset_ += n;
  }

  void expect_end() {
    unsigned char extra;
    if (gzread(file_, &extra, 1) > 0) fail("unexpected trailing data", offset_);
  }

  [[noreturn]] void fail(const std::string& what, std::uint64_t at) const {
    throw FormatError(path_ + ": " + what, at);
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::string path_;
  gzFile file_ = nullptr;
  std::uint64_t offset_ = 0;
};

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  const bool gz = path.extension() == ".gz";
  if (gz) {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (f == nullptr) throw std::runtime_error("cannot write " + path.string());
    const int wrote = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
    if (wrote != static_cast<int>(bytes.size())) throw std::runtime_error("short write to " + path.string());
    return;
  }
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!f || std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size()) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

std::filesystem::path find_file(const std::filesystem::path& dir, const std::string& stem) {
  for (const char* suffix : {"", ".gz"}) {
    const auto p = dir / (stem + suffix);
    if (std::filesystem::exists(p)) return p;
  }
  throw FormatError("missing " + stem + " in " + dir.string(), 0);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 Split split) {
  IdxReader images(images_path);
  if (const auto magic = images.read_u32("image magic"); magic != kIdxImagesMagic) {
    images.fail("bad image magic " + std::to_string(magic), 0);
  }
  const std::uint32_t n = images.read_u32("image count");
  const std::uint32_t rows = images.read_u32("row count");
  const std::uint32_t cols = images.read_u32("column count");
  if (rows == 0 || cols == 0) images.fail("empty image dimensions", 8);
  const std::size_t f = std::size_t{rows} * cols;
  std::vector<unsigned char> pixels(std::size_t{n} * f);
  images.read_bytes(pixels.data(), pixels.size(), "image data");
  images.expect_end();

  IdxReader labels(labels_path);
  if (const auto magic = labels.read_u32("label magic"); magic != kIdxLabelsMagic) {
    labels.fail("bad label magic " + std::to_string(magic), 0);
  }
  const std::uint32_t n_labels = labels.read_u32("label count");
  if (n_labels != n) {
    labels.fail("label count " + std::to_string(n_labels) + " does not match image count " +
                    std::to_string(n),
                4);
  }
  std::vector<unsigned char> raw_labels(n);
  labels.read_bytes(raw_labels.data(), raw_labels.size(), "label data");
  labels.expect_end();

  Dataset ds;
  ds.num_features = f;
  ds.image_shape = ImageShape{rows, cols};
  ds.xs.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) ds.xs[i] = pixels[i] / 255.0;
  std::size_t max_label = 1;
  for (unsigned char y : raw_labels) {
    ds.ys.push_back(y);
    max_label = std::max<std::size_t>(max_label, y);
  }
  ds.num_classes = max_label + 1;
  ds.splits.assign(n, split);
  return ds;
}

Dataset load_mnist_dir(const std::filesystem::path& dir) {
  Dataset train = load_idx(find_file(dir, "train-images-idx3-ubyte"),
                           find_file(dir, "train-labels-idx1-ubyte"), Split::train);
  Dataset test = load_idx(find_file(dir, "t10k-images-idx3-ubyte"),
                          find_file(dir, "t10k-labels-idx1-ubyte"), Split::test);
  return concat(train, test);
}

void write_idx_images(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
  if (rows == 0 || cols == 0 || pixels.size() % (rows * cols) != 0) {
    throw DimensionError("write_idx_images: pixel count is not a multiple of rows * cols");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + pixels.size());
  put_u32(bytes, kIdxImagesMagic);
  put_u32(bytes, static_cast<std::uint32_t>(pixels.size() / (rows * cols)));
  put_u32(bytes, static_cast<std::uint32_t>(rows));
  put_u32(bytes, static_cast<std::uint32_t>(cols));
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_file(path, bytes);
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::vector<unsigned char> bytes;
  put_u32(bytes, kIdxLabelsMagic);
  put_u32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_file(path, bytes);
}

}  // namespace vc
