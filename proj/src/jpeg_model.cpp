#include "djd/jpeg_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "djd/error.hpp"

namespace djd {

namespace {

// basis[u][x] = c(u) cos((2x+1) u pi / 16), orthonormal rows.
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    for (int u = 0; u < 8; ++u) {
      const double scale = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) b[u][x] = scale * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

void require_aligned(const GrayImage& img) {
  if (img.width < 8 || img.height < 8 || img.width % 8 != 0 || img.height % 8 != 0) {
    throw Error(ErrorCode::ImageTooSmall, "image must be block aligned, got " + std::to_string(img.width) + "x" +
                                              std::to_string(img.height));
  }
}

}  // namespace

IntBlock CoefficientPlane::block(int brow, int bcol) const {
  IntBlock b{};
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) b[u * 8 + v] = coeff(brow, bcol, u, v);
  return b;
}

void CoefficientPlane::set_block(int brow, int bcol, const IntBlock& b) {
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) coeff(brow, bcol, u, v) = b[u * 8 + v];
}

QuantTable quant_table_for_quality(int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(ErrorCode::QualityOutOfRange, "quality " + std::to_string(quality) + " not in [1,100]");
  }
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  QuantTable t;
  t.quality = quality;
  for (int i = 0; i < 64; ++i) {
    t.entries[i] = static_cast<std::uint16_t>(std::clamp((kBaseLumaTable[i] * scale + 50) / 100, 1, 255));
  }
  return t;
}

Block dct2(const Block& spatial) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  // rows: tmp[y][u] = sum_x b[u][x] s[y][x]
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += b[u][x] * spatial[y * 8 + x];
      tmp[y * 8 + u] = acc;
    }
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b[u][y] * tmp[y * 8 + v];
      out[u * 8 + v] = acc;
    }
  return out;
}

Block idct2(const Block& freq) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (int u = 0; u < 8; ++u)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += b[v][x] * freq[u * 8 + v];
      tmp[u * 8 + x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b[u][y] * tmp[u * 8 + x];
      out[y * 8 + x] = acc;
    }
  return out;
}

Block forward_dct_block(const PixelBlock& pixels) {
  Block shifted{};
  for (int i = 0; i < 64; ++i) shifted[i] = static_cast<double>(pixels[i]) - 128.0;
  return dct2(shifted);
}

IntBlock quantize_block(const Block& coeffs, const QuantTable& table) {
  IntBlock out{};
  for (int i = 0; i < 64; ++i) out[i] = static_cast<int>(std::lround(coeffs[i] / table.entries[i]));
  return out;
}

Block dequantize_block(const IntBlock& qcoeffs, const QuantTable& table) {
  Block out{};
  for (int i = 0; i < 64; ++i) out[i] = static_cast<double>(qcoeffs[i]) * table.entries[i];
  return out;
}

PixelBlock inverse_dct_block(const Block& coeffs) {
  const Block spatial = idct2(coeffs);
  PixelBlock out{};
  for (int i = 0; i < 64; ++i) out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(spatial[i] + 128.0), 0L, 255L));
  return out;
}

CoefficientPlane compress_once(const GrayImage& img, int quality) {
  const QuantTable table = quant_table_for_quality(quality);
  require_aligned(img);
  CoefficientPlane plane(img.height / 8, img.width / 8, table);
  PixelBlock px{};
  for (int br = 0; br < plane.block_rows; ++br)
    for (int bc = 0; bc < plane.block_cols; ++bc) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) px[y * 8 + x] = img.at(br * 8 + y, bc * 8 + x);
      plane.set_block(br, bc, quantize_block(forward_dct_block(px), table));
    }
  return plane;
}

GrayImage decompress(const CoefficientPlane& plane) {
  GrayImage img(plane.cols(), plane.rows());
  for (int br = 0; br < plane.block_rows; ++br)
    for (int bc = 0; bc < plane.block_cols; ++bc) {
      const PixelBlock px = inverse_dct_block(dequantize_block(plane.block(br, bc), plane.table));
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) img.at(br * 8 + y, bc * 8 + x) = px[y * 8 + x];
    }
  return img;
}

CoefficientPlane compress_twice(const GrayImage& img, int q1, int q2) {
  // Validate both qualities before doing any work.
  quant_table_for_quality(q2);
  return compress_once(decompress(compress_once(img, q1)), q2);
}

}  // namespace djd
