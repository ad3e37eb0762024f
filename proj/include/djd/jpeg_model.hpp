#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "djd/image.hpp"

namespace djd {

using Block = std::array<double, 64>;     // row-major (u, v) or (y, x)
using IntBlock = std::array<int, 64>;
using PixelBlock = std::array<std::uint8_t, 64>;

/// kZigZag[k] is the natural (row-major) index of the k-th coefficient in zig-zag order.
inline constexpr std::array<int, 64> kZigZag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

/// Annex K luminance quantization table, natural order.
inline constexpr std::array<int, 64> kBaseLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

struct QuantTable {
  std::array<std::uint16_t, 64> entries{};  // natural order, each in [1,255]
  std::optional<int> quality;               // provenance only; ignored by equality

  std::uint16_t at(int u, int v) const { return entries[u * 8 + v]; }
  bool operator==(const QuantTable& o) const { return entries == o.entries; }
};

/// Quantized luminance DCT coefficients laid out on the pixel grid: element (8r+u, 8c+v)
/// holds mode (u,v) of block (r,c).
struct CoefficientPlane {
  int block_rows = 0;
  int block_cols = 0;
  std::vector<std::int32_t> coeffs;
  QuantTable table;

  CoefficientPlane() = default;
  CoefficientPlane(int brows, int bcols, const QuantTable& t)
      : block_rows(brows), block_cols(bcols), coeffs(static_cast<std::size_t>(brows) * bcols * 64, 0), table(t) {}

  int rows() const { return block_rows * 8; }
  int cols() const { return block_cols * 8; }
  std::int32_t at(int row, int col) const { return coeffs[static_cast<std::size_t>(row) * cols() + col]; }
  std::int32_t& at(int row, int col) { return coeffs[static_cast<std::size_t>(row) * cols() + col]; }
  std::int32_t coeff(int brow, int bcol, int u, int v) const { return at(brow * 8 + u, bcol * 8 + v); }
  std::int32_t& coeff(int brow, int bcol, int u, int v) { return at(brow * 8 + u, bcol * 8 + v); }

  IntBlock block(int brow, int bcol) const;
  void set_block(int brow, int bcol, const IntBlock& b);

  bool operator==(const CoefficientPlane&) const = default;
};

QuantTable quant_table_for_quality(int quality);

Block forward_dct_block(const PixelBlock& pixels);
IntBlock quantize_block(const Block& coeffs, const QuantTable& table);
Block dequantize_block(const IntBlock& qcoeffs, const QuantTable& table);
PixelBlock inverse_dct_block(const Block& coeffs);

// Raw transforms without the level shift or rounding; exposed for the orthonormality checks.
Block dct2(const Block& spatial);
Block idct2(const Block& freq);

CoefficientPlane compress_once(const GrayImage& img, int quality);
GrayImage decompress(const CoefficientPlane& plane);
CoefficientPlane compress_twice(const GrayImage& img, int q1, int q2);

}  // namespace djd
