#pragma once

#include <string>

#include "cibound/data.hpp"

namespace cibound {

// Reads an images/labels pair in the big-endian IDX container format
// (magic 0x00000803 for u8 image tensors, 0x00000801 for u8 label
// vectors). Pixels are scaled to [0, 1]; image and label counts must
// agree. Malformed input throws FormatError naming the field and the byte
// offset where parsing failed.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace cibound
