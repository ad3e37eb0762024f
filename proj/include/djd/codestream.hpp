#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "djd/jpeg_model.hpp"

namespace djd {

enum class TableClass : std::uint8_t { DC = 0, AC = 1 };

struct HuffmanTable {
  TableClass table_class = TableClass::DC;
  int id = 0;
  std::array<std::uint8_t, 16> counts{};  // counts[i] = number of codes of length i+1
  std::vector<std::uint8_t> symbols;

  bool operator==(const HuffmanTable&) const = default;
};

/// Table slots as they stand when a scan starts.
struct HuffmanSet {
  std::array<std::optional<HuffmanTable>, 4> dc;
  std::array<std::optional<HuffmanTable>, 4> ac;
};

struct FrameComponent {
  int id = 0;
  int h_sampling = 1;
  int v_sampling = 1;
  int quant_id = 0;
};

struct FrameInfo {
  int precision = 8;
  int width = 0;
  int height = 0;
  std::vector<FrameComponent> components;
};

struct ScanComponent {
  int frame_index = 0;  // index into FrameInfo::components
  int dc_table = 0;
  int ac_table = 0;
};

struct ScanHeader {
  std::vector<ScanComponent> components;
};

/// Everything the marker walk learns about a file; `inspect_baseline` returns it with the plane.
struct JpegInfo {
  FrameInfo frame;
  std::array<std::optional<QuantTable>, 4> quant_tables;
  std::vector<HuffmanTable> huffman_tables;  // every DHT definition, in file order
  int restart_interval = 0;
  int scan_count = 0;
};

struct ParsedJpeg {
  JpegInfo info;
  CoefficientPlane luma;
};

/// The standard Annex K luminance DC/AC tables.
const HuffmanTable& standard_luma_dc_table();
const HuffmanTable& standard_luma_ac_table();

/// Quantized luminance coefficients of a baseline Huffman JPEG (no dequantization, no IDCT).
CoefficientPlane parse_baseline(std::span<const std::uint8_t> bytes);

/// Same marker walk as parse_baseline, but every scan goes through decode_scan_slow.
CoefficientPlane parse_baseline_slow(std::span<const std::uint8_t> bytes);

ParsedJpeg inspect_baseline(std::span<const std::uint8_t> bytes);

/// Bit-at-a-time reference decoder for one scan's entropy-coded segment (including any RSTn
/// markers inside it). Returns the luminance plane of the frame; blocks not covered by the scan
/// stay zero. Intended as an oracle for the table-driven decoder inside parse_baseline.
CoefficientPlane decode_scan_slow(std::span<const std::uint8_t> scan_bytes, const HuffmanSet& tables,
                                  const FrameInfo& frame, const ScanHeader& scan, int restart_interval,
                                  const QuantTable& luma_table);

/// Grayscale baseline file with the plane's DQT and the standard luminance Huffman tables.
std::vector<std::uint8_t> write_baseline(const CoefficientPlane& plane);

}  // namespace djd
