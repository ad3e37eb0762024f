#include "djd/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "djd/error.hpp"
#include "djd/io_util.hpp"

namespace djd {

std::uint8_t luma_from_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

GrayImage crop_to_blocks(const GrayImage& img) {
  if (img.width < 8 || img.height < 8) {
    throw Error(ErrorCode::ImageTooSmall,
                std::to_string(img.width) + "x" + std::to_string(img.height) + " is below one 8x8 block");
  }
  const int w = img.width / 8 * 8;
  const int h = img.height / 8 * 8;
  if (w == img.width && h == img.height) return img;
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r) {
    std::copy_n(img.samples.begin() + static_cast<std::ptrdiff_t>(r) * img.width, w,
                out.samples.begin() + static_cast<std::ptrdiff_t>(r) * w);
  }
  return out;
}

namespace {

// Header token parser for PNM: whitespace-separated ASCII integers with '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected integer in header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 24)) fail("header value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing raster separator");
    return pos_ + 1;
  }

  [[noreturn]] static void fail(const std::string& why) { throw Error(ErrorCode::BadImageFile, why); }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    PnmHeader::fail("not a binary PGM/PPM (P5/P6)");
  }
  const bool color = bytes[1] == '6';
  PnmHeader header(bytes);
  const int w = header.next_int();
  const int h = header.next_int();
  const int maxval = header.next_int();
  if (w <= 0 || h <= 0) PnmHeader::fail("non-positive dimensions");
  if (maxval != 255) PnmHeader::fail("only 8-bit (maxval 255) rasters are supported");
  const std::size_t start = header.raster_start();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - start < need) PnmHeader::fail("raster truncated");

  GrayImage img(w, h);
  const auto* px = bytes.data() + start;
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    img.samples[i] = color ? luma_from_rgb(px[3 * i], px[3 * i + 1], px[3 * i + 2]) : px[i];
  }
  return img;
}

GrayImage read_pnm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_pnm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.samples.begin(), img.samples.end());
  return out;
}

}  // namespace djd
