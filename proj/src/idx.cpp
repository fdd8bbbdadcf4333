#include "cibound/idx.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <vector>

#include "cibound/errors.hpp"

namespace cibound {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803u;
constexpr std::uint32_t kLabelsMagic = 0x00000801u;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path, 0);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& buf, std::size_t offset,
                          const std::string& field) {
  if (offset + 4 > buf.size()) {
    throw FormatError("truncated file while reading " + field, offset);
  }
  return (static_cast<std::uint32_t>(buf[offset]) << 24) |
         (static_cast<std::uint32_t>(buf[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(buf[offset + 2]) << 8) |
         static_cast<std::uint32_t>(buf[offset + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  if (read_u32_be(images, 0, "images magic") != kImagesMagic) {
    throw FormatError("bad images magic (expected 0x00000803)", 0);
  }
  const std::uint32_t count = read_u32_be(images, 4, "image count");
  const std::uint32_t rows = read_u32_be(images, 8, "image rows");
  const std::uint32_t cols = read_u32_be(images, 12, "image cols");
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const std::size_t image_bytes = 16 + static_cast<std::size_t>(count) * pixels;
  if (images.size() < image_bytes) {
    throw FormatError("truncated image data: expected " + std::to_string(image_bytes) +
                          " bytes",
                      images.size());
  }

  if (read_u32_be(labels, 0, "labels magic") != kLabelsMagic) {
    throw FormatError("bad labels magic (expected 0x00000801)", 0);
  }
  const std::uint32_t label_count = read_u32_be(labels, 4, "label count");
  if (label_count != count) {
    throw FormatError("label count " + std::to_string(label_count) +
                          " does not match image count " + std::to_string(count),
                      4);
  }
  const std::size_t label_bytes = 8 + static_cast<std::size_t>(label_count);
  if (labels.size() < label_bytes) {
    throw FormatError("truncated label data: expected " + std::to_string(label_bytes) +
                          " bytes",
                      labels.size());
  }

  Dataset out;
  int max_label = 0;
  out.items.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Instance& it = out.items[i];
    it.x.resize(pixels);
    const std::size_t base = 16 + static_cast<std::size_t>(i) * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      it.x[p] = static_cast<double>(images[base + p]) / 255.0;
    }
    it.label = static_cast<int>(labels[8 + i]);
    max_label = std::max(max_label, it.label);
  }
  out.num_classes = std::max(2, max_label + 1);
  return out;
}

}  // namespace cibound
