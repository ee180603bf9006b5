#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/tensor.hpp"

namespace pqc {

enum class Split { train, val, test };

/// Images in [0,1], NCHW; one integer label per sample. Per-channel
/// normalization statistics are recorded alongside but not applied.
struct Dataset {
  Tensor images;            // N x C x H x W
  std::vector<int> labels;  // values in [0, num_classes)
  int num_classes = 0;
  Split split = Split::train;
  std::array<double, 3> channel_mean{0.0, 0.0, 0.0};
  std::array<double, 3> channel_std{1.0, 1.0, 1.0};

  int64_t size() const { return images.empty() ? 0 : images.shape[0]; }

  Tensor batch_images(const std::vector<int64_t>& idx) const {
    const int64_t c = images.shape[1], h = images.shape[2], w = images.shape[3];
    const int64_t stride = c * h * w;
    Tensor out({static_cast<int64_t>(idx.size()), c, h, w});
    for (size_t i = 0; i < idx.size(); ++i) {
      std::copy(images.data.begin() + idx[i] * stride, images.data.begin() + (idx[i] + 1) * stride,
                out.data.begin() + static_cast<int64_t>(i) * stride);
    }
    return out;
  }

  std::vector<int> batch_labels(const std::vector<int64_t>& idx) const {
    std::vector<int> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out[i] = labels[static_cast<size_t>(idx[i])];
    return out;
  }
};

inline void compute_channel_stats(Dataset& ds) {
  const int64_t n = ds.size(), c = ds.images.shape[1], hw = ds.images.shape[2] * ds.images.shape[3];
  for (int64_t ch = 0; ch < std::min<int64_t>(c, 3); ++ch) {
    double sum = 0.0, sum_sq = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const float* p = ds.images.data.data() + (i * c + ch) * hw;
      for (int64_t k = 0; k < hw; ++k) {
        sum += p[k];
        sum_sq += double(p[k]) * double(p[k]);
      }
    }
    const double count = static_cast<double>(n * hw);
    const double mean = sum / count;
    ds.channel_mean[static_cast<size_t>(ch)] = mean;
    ds.channel_std[static_cast<size_t>(ch)] = std::sqrt(std::max(sum_sq / count - mean * mean, 1e-12));
  }
}

// CIFAR-10 binary record: 1 label byte then 3072 pixel bytes, channel-planar
// (1024 R, 1024 G, 1024 B), each plane row-major 32x32. Pixel v maps to v/255.
inline constexpr int64_t kCifarRecordBytes = 3073;
inline constexpr int64_t kCifarImageBytes = 3072;

inline void append_cifar_file(Dataset& ds, const std::filesystem::path& file, std::vector<uint8_t>& buf) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cifar10: cannot open " + file.string());
  in.seekg(0, std::ios::end);
  const int64_t bytes = static_cast<int64_t>(in.tellg());
  in.seekg(0);
  if (bytes <= 0 || bytes % kCifarRecordBytes != 0) {
    throw std::runtime_error("cifar10: " + file.string() + " has " + std::to_string(bytes) +
                             " bytes, not a multiple of 3073");
  }
  buf.resize(static_cast<size_t>(bytes));
  in.read(reinterpret_cast<char*>(buf.data()), bytes);
  if (!in) throw std::runtime_error("cifar10: short read on " + file.string());
  const int64_t records = bytes / kCifarRecordBytes;
  for (int64_t r = 0; r < records; ++r) {
    const uint8_t label = buf[static_cast<size_t>(r * kCifarRecordBytes)];
    if (label > 9) {
      throw std::runtime_error("cifar10: record " + std::to_string(r) + " of " + file.string() +
                               " has label byte " + std::to_string(int(label)));
    }
    ds.labels.push_back(label);
    const uint8_t* px = buf.data() + r * kCifarRecordBytes + 1;
    for (int64_t k = 0; k < kCifarImageBytes; ++k) {
      ds.images.data.push_back(static_cast<float>(px[k]) / 255.0f);
    }
  }
}

/// Loads the standard binary layout from a directory (data_batch_1..5.bin for
/// train, test_batch.bin for test) or a single .bin file given directly.
inline Dataset load_cifar10(const std::filesystem::path& path, Split split) {
  Dataset ds;
  ds.split = split;
  ds.num_classes = 10;
  ds.images.shape = {0, 3, 32, 32};
  std::vector<uint8_t> buf;
  if (std::filesystem::is_regular_file(path)) {
    append_cifar_file(ds, path, buf);
  } else if (split == Split::train) {
    for (int i = 1; i <= 5; ++i) {
      append_cifar_file(ds, path / ("data_batch_" + std::to_string(i) + ".bin"), buf);
    }
  } else {
    append_cifar_file(ds, path / "test_batch.bin", buf);
  }
  ds.images.shape[0] = static_cast<int64_t>(ds.labels.size());
  if (ds.labels.empty()) throw std::runtime_error("cifar10: no records loaded from " + path.string());
  compute_channel_stats(ds);
  return ds;
}

struct SyntheticConfig {
  uint64_t seed = 7;
  int n_per_class = 64;
  int classes = 10;
  int image_size = 8;
  double noise = 0.05;
};

/// Class-conditional Gaussian blobs: each class owns a blob position, color
/// and width drawn once from the seed; images add per-sample noise. Fully
/// determined by (seed, params).
inline Dataset gen_synthetic(const SyntheticConfig& cfg, Split split = Split::train) {
  if (cfg.classes < 2) throw std::invalid_argument("gen_synthetic: need at least 2 classes");
  // split tag participates in the stream so train/test draws are disjoint
  Rng rng(cfg.seed * 1000003ULL + static_cast<uint64_t>(split) * 7919ULL);
  const int s = cfg.image_size;

  struct Blob {
    double cx, cy, sigma;
    double color[3];
  };
  // class parameters come from a stream that does not depend on the split,
  // so train and test describe the same classes
  Rng class_rng(cfg.seed * 1000003ULL + 1);
  std::vector<Blob> blobs;
  for (int c = 0; c < cfg.classes; ++c) {
    Blob b{};
    b.cx = class_rng.uniform(1.0, s - 2.0);
    b.cy = class_rng.uniform(1.0, s - 2.0);
    b.sigma = class_rng.uniform(0.9, 1.6);
    for (auto& col : b.color) col = class_rng.uniform(0.35, 1.0);
    blobs.push_back(b);
  }

  const int64_t n = static_cast<int64_t>(cfg.classes) * cfg.n_per_class;
  Dataset ds;
  ds.split = split;
  ds.num_classes = cfg.classes;
  ds.images = Tensor({n, 3, s, s});
  ds.labels.resize(static_cast<size_t>(n));
  int64_t idx = 0;
  for (int c = 0; c < cfg.classes; ++c) {
    const Blob& b = blobs[static_cast<size_t>(c)];
    for (int i = 0; i < cfg.n_per_class; ++i, ++idx) {
      ds.labels[static_cast<size_t>(idx)] = c;
      for (int ch = 0; ch < 3; ++ch) {
        float* img = ds.images.data.data() + ((idx * 3) + ch) * s * s;
        for (int y = 0; y < s; ++y) {
          for (int x = 0; x < s; ++x) {
            const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
            double v = b.color[ch] * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
            if (cfg.noise > 0.0) v += cfg.noise * rng.normal();
            img[y * s + x] = static_cast<float>(std::min(std::max(v, 0.0), 1.0));
          }
        }
      }
    }
  }
  compute_channel_stats(ds);
  return ds;
}

/// Seeded, disjoint train/val split; val gets `val_fraction` of the samples
/// (at least one when the dataset is non-trivial).
inline std::pair<std::vector<int64_t>, std::vector<int64_t>> split_train_val(int64_t n, double val_fraction,
                                                                             uint64_t seed) {
  std::vector<int64_t> idx(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  Rng rng(seed ^ 0x5eedULL);
  rng.shuffle(idx.begin(), idx.end());
  int64_t val_n = static_cast<int64_t>(std::floor(val_fraction * static_cast<double>(n)));
  if (val_fraction > 0.0 && val_n == 0 && n > 1) val_n = 1;
  std::vector<int64_t> val(idx.begin(), idx.begin() + val_n);
  std::vector<int64_t> train(idx.begin() + val_n, idx.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

inline Dataset subset(const Dataset& ds, const std::vector<int64_t>& idx, Split tag) {
  Dataset out;
  out.split = tag;
  out.num_classes = ds.num_classes;
  if (!idx.empty()) {
    out.images = ds.batch_images(idx);
    out.labels = ds.batch_labels(idx);
  }
  out.channel_mean = ds.channel_mean;
  out.channel_std = ds.channel_std;
  return out;
}

}  // namespace pqc
