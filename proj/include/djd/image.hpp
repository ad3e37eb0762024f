#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace djd {

/// Row-major 8-bit grayscale raster.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int row, int col) const { return samples[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return samples[static_cast<std::size_t>(row) * width + col]; }

  bool operator==(const GrayImage&) const = default;
};

/// round(0.299 r + 0.587 g + 0.114 b), clamped to [0,255].
std::uint8_t luma_from_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Top-left sub-image with both dimensions floored to a multiple of 8.
GrayImage crop_to_blocks(const GrayImage& img);

// Binary PNM (P5 grayscale, P6 color converted through luma_from_rgb). maxval must be 255.
GrayImage decode_pnm(std::span<const std::uint8_t> bytes);
GrayImage read_pnm(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

}  // namespace djd
