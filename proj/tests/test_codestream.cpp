#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "djd/codestream.hpp"
#include "djd/error.hpp"
#include "djd/image.hpp"
#include "djd/io_util.hpp"
#include "djd/jpeg_model.hpp"
#include "oracles.hpp"

using namespace djd;
using Bytes = std::vector<std::uint8_t>;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected djd::Error");
  return ErrorCode::BadConfig;
}

Bytes fixture(const std::string& name) { return read_file(oracle::data_dir() / name); }

// Offset of the first 0xFF `marker` pair.
std::size_t find_marker(const Bytes& b, std::uint8_t marker) {
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    if (b[i] == 0xFF && b[i + 1] == marker) return i;
  FAIL("marker not found");
  return 0;
}

Bytes scan_of(const Bytes& file) {
  const auto sos = find_marker(file, 0xDA);
  const std::size_t len = (file[sos + 2] << 8) | file[sos + 3];
  return Bytes(file.begin() + sos + 2 + len, file.end() - 2);
}

HuffmanSet standard_set() {
  HuffmanSet s;
  s.dc[0] = standard_luma_dc_table();
  s.ac[0] = standard_luma_ac_table();
  return s;
}

FrameInfo gray_frame(int w, int h) {
  FrameInfo f;
  f.width = w;
  f.height = h;
  f.components.push_back({1, 1, 1, 0});
  return f;
}

ScanHeader gray_scan() { return ScanHeader{{ScanComponent{0, 0, 0}}}; }

// Hand-assembled expected file for the single all-zero block at quality 50.
Bytes expected_golden() {
  Bytes b = {0xFF, 0xD8, 0xFF, 0xDB, 0x00, 0x43, 0x00};
  const int dqt_zigzag[64] = {16, 11, 12, 14, 12, 10, 16, 14, 13, 14, 18, 17, 16, 19, 24, 40,
                              26, 24, 22, 22, 24, 49, 35, 37, 29, 40, 58, 51, 61, 60, 57, 51,
                              56, 55, 64, 72, 92, 78, 64, 68, 87, 69, 55, 56, 80, 109, 81, 87,
                              95, 98, 103, 104, 103, 62, 77, 113, 121, 112, 100, 120, 92, 101, 103, 99};
  for (int v : dqt_zigzag) b.push_back(static_cast<std::uint8_t>(v));
  b.insert(b.end(), {0xFF, 0xC0, 0x00, 0x0B, 0x08, 0x00, 0x08, 0x00, 0x08, 0x01, 0x01, 0x11, 0x00});
  b.insert(b.end(), {0xFF, 0xC4, 0x00, 0xD2, 0x00});
  b.insert(b.end(), {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
  for (int s = 0; s < 12; ++s) b.push_back(static_cast<std::uint8_t>(s));
  b.push_back(0x10);
  b.insert(b.end(), {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D});
  b.insert(b.end(), {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
                     0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
                     0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
                     0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
                     0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
                     0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
                     0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
                     0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
                     0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
                     0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
                     0xF9, 0xFA});
  b.insert(b.end(), {0xFF, 0xDA, 0x00, 0x08, 0x01, 0x01, 0x00, 0x00, 0x3F, 0x00});
  // DC category 0 = "00", EOB = "1010", padded with ones: 00101011
  b.push_back(0x2B);
  b.insert(b.end(), {0xFF, 0xD9});
  return b;
}

struct Fixture {
  const char* name;
  int quality;
  int width, height;
  int block_cols, block_rows;
};

constexpr Fixture kFixtures[] = {
    {"gray_q75_61x45", 75, 61, 45, 8, 6},
    {"gray_q90_rst_opt", 90, 72, 40, 9, 5},
    {"c420_q80_61x45_rst", 80, 61, 45, 8, 6},
    {"c444_q90_64x48_opt", 90, 64, 48, 8, 6},
    {"c420_q50_128x96", 50, 128, 96, 16, 12},
};

}  // namespace

TEST_CASE("golden vector") {
  const CoefficientPlane zero(1, 1, quant_table_for_quality(50));
  const auto written = write_baseline(zero);
  const auto stored = fixture("golden_zero_q50.jpg");
  CHECK(written == expected_golden());
  CHECK(stored == written);
  CHECK(parse_baseline(stored) == zero);

  const auto slow = decode_scan_slow(scan_of(stored), standard_set(), gray_frame(8, 8), gray_scan(), 0,
                                     quant_table_for_quality(50));
  CHECK(slow == zero);
}

TEST_CASE("single block DC decodes from the first symbol") {
  CoefficientPlane p(1, 1, quant_table_for_quality(50));
  p.coeff(0, 0, 0, 0) = 5;
  // category 3 "100", magnitude "101", EOB "1010", pad
  auto bytes = write_baseline(p);
  CHECK(scan_of(bytes) == Bytes{0x96, 0xBF});
  CHECK(decode_scan_slow(Bytes{0x96, 0xBF}, standard_set(), gray_frame(8, 8), gray_scan(), 0, p.table) == p);

  p.coeff(0, 0, 0, 0) = -5;  // magnitude bits are the complement "010"
  bytes = write_baseline(p);
  CHECK(scan_of(bytes) == Bytes{0x8A, 0xBF});
  CHECK(parse_baseline(bytes) == p);
}

TEST_CASE("writer framing and coding range") {
  Rng rng(1);
  const auto p = oracle::random_plane(rng, 3, 2, 70);
  const auto b = write_baseline(p);
  REQUIRE(b.size() > 4);
  CHECK(b[0] == 0xFF);
  CHECK(b[1] == 0xD8);
  CHECK(b[b.size() - 2] == 0xFF);
  CHECK(b.back() == 0xD9);

  const auto scan = scan_of(b);
  for (std::size_t i = 0; i + 1 < scan.size(); ++i)
    if (scan[i] == 0xFF) CHECK(scan[i + 1] == 0x00);

  CoefficientPlane top(1, 1, quant_table_for_quality(50));
  top.coeff(0, 0, 0, 0) = 2047;
  top.coeff(0, 0, 7, 7) = -1023;
  CHECK(parse_baseline(write_baseline(top)) == top);
  top.coeff(0, 0, 0, 0) = -2047;
  CHECK(parse_baseline(write_baseline(top)) == top);

  CoefficientPlane bad(1, 2, quant_table_for_quality(50));
  bad.coeff(0, 0, 0, 1) = 1024;
  CHECK(code_of([&] { write_baseline(bad); }) == ErrorCode::CoefficientOutOfRange);
  bad.coeff(0, 0, 0, 1) = 0;
  bad.coeff(0, 0, 0, 0) = 1024;
  bad.coeff(0, 1, 0, 0) = -1024;  // difference of -2048
  CHECK(code_of([&] { write_baseline(bad); }) == ErrorCode::CoefficientOutOfRange);
}

TEST_CASE("write/parse round trip over the full coefficient range") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(6));
    const int cols = 1 + static_cast<int>(rng.below(6));
    const auto p = oracle::random_plane(rng, rows, cols, 1 + static_cast<int>(rng.below(100)));
    const auto bytes = write_baseline(p);
    const auto fast = parse_baseline(bytes);
    CHECK(fast == p);
    CHECK(fast.table == p.table);
    CHECK(parse_baseline_slow(bytes) == fast);
    CHECK(decode_scan_slow(scan_of(bytes), standard_set(), gray_frame(cols * 8, rows * 8), gray_scan(), 0, p.table) == p);
  }
}

TEST_CASE("empty scan data is truncated") {
  CHECK(code_of([] {
          decode_scan_slow(Bytes{}, standard_set(), gray_frame(8, 8), gray_scan(), 0, quant_table_for_quality(50));
        }) == ErrorCode::TruncatedStream);
}

TEST_CASE("third-party files") {
  for (const auto& fx : kFixtures) {
    CAPTURE(fx.name);
    const auto bytes = fixture(std::string(fx.name) + ".jpg");
    const auto parsed = inspect_baseline(bytes);
    CHECK(parsed.info.frame.width == fx.width);
    CHECK(parsed.info.frame.height == fx.height);
    CHECK(parsed.luma.block_cols == fx.block_cols);
    CHECK(parsed.luma.block_rows == fx.block_rows);
    CHECK(parsed.luma.table == quant_table_for_quality(fx.quality));
    CHECK(parse_baseline(bytes) == parsed.luma);
    CHECK(parse_baseline_slow(bytes) == parsed.luma);

    // Our IDCT against libjpeg's own reconstruction of the luminance plane.
    const auto ours = decompress(parsed.luma);
    const auto theirs = read_pnm(oracle::data_dir() / (std::string(fx.name) + ".y.pgm"));
    REQUIRE(theirs.width == fx.width);
    REQUIRE(theirs.height == fx.height);
    int worst = 0;
    for (int r = 0; r < fx.height; ++r)
      for (int c = 0; c < fx.width; ++c) worst = std::max(worst, std::abs(ours.at(r, c) - theirs.at(r, c)));
    CHECK(worst <= 2);
  }
  const auto rst = inspect_baseline(fixture("gray_q90_rst_opt.jpg"));
  CHECK(rst.info.restart_interval > 0);
  CHECK(inspect_baseline(fixture("c420_q80_61x45_rst.jpg")).info.restart_interval == 3);
  CHECK(inspect_baseline(fixture("c420_q50_128x96.jpg")).info.frame.components.size() == 3);
}

TEST_CASE("parser errors") {
  const auto gray = fixture("gray_q75_61x45.jpg");
  const auto golden = fixture("golden_zero_q50.jpg");

  CHECK(code_of([] { parse_baseline(Bytes{0x00, 0x01, 0x02}); }) == ErrorCode::NotAJpeg);
  CHECK(code_of([] { parse_baseline(Bytes{}); }) == ErrorCode::NotAJpeg);

  SUBCASE("non-baseline frames") {
    for (std::uint8_t sof : {0xC2, 0xC3, 0xC9}) {
      auto b = golden;
      b[find_marker(b, 0xC0) + 1] = sof;
      CHECK(code_of([&] { parse_baseline(b); }) == ErrorCode::UnsupportedMode);
    }
    auto b = golden;
    b[find_marker(b, 0xC0) + 4] = 12;
    CHECK(code_of([&] { parse_baseline(b); }) == ErrorCode::UnsupportedMode);
  }

  SUBCASE("unsupported sampling") {
    auto b = fixture("c444_q90_64x48_opt.jpg");
    b[find_marker(b, 0xC0) + 11] = 0x21;  // 4:2:2
    CHECK(code_of([&] { parse_baseline(b); }) == ErrorCode::UnsupportedMode);
  }

  SUBCASE("missing tables") {
    auto no_dht = golden;  // drop the DHT segment
    const auto dht = find_marker(no_dht, 0xC4);
    no_dht.erase(no_dht.begin() + dht, no_dht.begin() + dht + 2 + 0xD2);
    CHECK(code_of([&] { parse_baseline(no_dht); }) == ErrorCode::MissingTable);

    auto no_dqt = golden;
    no_dqt.erase(no_dqt.begin() + 2, no_dqt.begin() + 2 + 2 + 0x43);
    CHECK(code_of([&] { parse_baseline(no_dqt); }) == ErrorCode::MissingTable);
  }

  SUBCASE("over-subscribed Huffman lengths") {
    auto b = golden;
    b[find_marker(b, 0xC4) + 5] = 3;  // three codes of length 1
    b[find_marker(b, 0xC4) + 6] = 0;
    CHECK(code_of([&] { parse_baseline(b); }) == ErrorCode::InvalidHuffman);
  }

  SUBCASE("truncation") {
    for (std::size_t cut : {gray.size() - 2, gray.size() - 40, std::size_t{300}, std::size_t{4}}) {
      const Bytes b(gray.begin(), gray.begin() + static_cast<long>(cut));
      CHECK(code_of([&] { parse_baseline(b); }) == ErrorCode::TruncatedStream);
    }
  }
}

TEST_CASE("mutated input fails cleanly") {
  std::vector<Bytes> seeds;
  for (const auto& fx : kFixtures) seeds.push_back(fixture(std::string(fx.name) + ".jpg"));
  Rng rng(99);
  for (int i = 0; i < 5; ++i) seeds.push_back(write_baseline(oracle::random_plane(rng, 4, 5, 60)));

  int failures = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    Bytes b = seeds[rng.below(seeds.size())];
    const int edits = 1 + static_cast<int>(rng.below(4));
    for (int e = 0; e < edits; ++e) {
      const std::size_t at = rng.below(b.size());
      switch (rng.below(4)) {
        case 0: b[at] = static_cast<std::uint8_t>(rng.below(256)); break;
        case 1: b[at] ^= static_cast<std::uint8_t>(1u << rng.below(8)); break;
        case 2: b.resize(at + 1); break;
        default: b.insert(b.begin() + static_cast<long>(at), static_cast<std::uint8_t>(rng.below(256))); break;
      }
    }
    std::optional<CoefficientPlane> fast, slow;
    std::optional<ErrorCode> fast_err, slow_err;
    try {
      fast = parse_baseline(b);
    } catch (const Error& e) {
      fast_err = e.code();
    }
    try {
      slow = parse_baseline_slow(b);
    } catch (const Error& e) {
      slow_err = e.code();
    }
    CHECK(fast.has_value() == slow.has_value());
    if (fast && slow) CHECK(*fast == *slow);
    if (fast_err && slow_err) CHECK(*fast_err == *slow_err);
    failures += fast_err.has_value();
  }
  CHECK(failures > 0);
}
