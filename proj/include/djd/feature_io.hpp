#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "djd/features.hpp"

namespace djd {

/// Row-major feature table as stored in a DJFM file (values narrowed to f32 on disk).
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::Global;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  void append(const FeatureVector& fv);

  bool operator==(const FeatureMatrix&) const = default;
};

enum class Label : std::uint8_t { Single = 0, Double = 1 };

std::vector<std::uint8_t> encode_djfm(const FeatureMatrix& m);
FeatureMatrix decode_djfm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_djlb(std::span<const Label> labels);
std::vector<Label> decode_djlb(std::span<const std::uint8_t> bytes);

void save_features(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix load_features(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, std::span<const Label> labels);
std::vector<Label> load_labels(const std::filesystem::path& path);

}  // namespace djd
