#include "djd/codestream.hpp"

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <string>

#include "djd/error.hpp"

namespace djd {

namespace {

constexpr std::uint8_t kSOI = 0xD8, kEOI = 0xD9, kSOS = 0xDA, kDQT = 0xDB, kDNL = 0xDC, kDRI = 0xDD;
constexpr std::uint8_t kSOF0 = 0xC0, kSOF1 = 0xC1, kDHT = 0xC4, kCOM = 0xFE;

[[noreturn]] void fail(ErrorCode code, const std::string& what, std::size_t offset) {
  throw Error(code, what + " at offset " + std::to_string(offset));
}

int extend(int value, int bits) {
  return value < (1 << (bits - 1)) ? value - (1 << bits) + 1 : value;
}

// Canonical code assignment shared by every decoder and the writer. Rejects over-subscribed
// length distributions and the all-ones codeword, as libjpeg does.
struct CanonicalCodes {
  std::vector<std::uint8_t> lengths;
  std::vector<std::uint16_t> codes;
};

CanonicalCodes canonical_codes(const HuffmanTable& t) {
  CanonicalCodes cc;
  std::size_t total = 0;
  for (auto c : t.counts) total += c;
  if (total > 256 || total != t.symbols.size()) fail(ErrorCode::InvalidHuffman, "symbol count mismatch", 0);
  std::uint32_t code = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < t.counts[len - 1]; ++i) {
      cc.lengths.push_back(static_cast<std::uint8_t>(len));
      cc.codes.push_back(static_cast<std::uint16_t>(code++));
    }
    if (code >= (1u << len) && t.counts[len - 1] > 0) fail(ErrorCode::InvalidHuffman, "over-subscribed code lengths", 0);
    code <<= 1;
  }
  return cc;
}

// Block-grid layout implied by a frame header.
struct Geometry {
  int hmax = 1, vmax = 1;
  int mcu_cols = 0, mcu_rows = 0;
  std::vector<int> comp_block_cols, comp_block_rows;  // coverage of a non-interleaved scan
  int luma_block_cols = 0, luma_block_rows = 0;       // allocated luma plane
};

int ceil_div(int a, int b) { return (a + b - 1) / b; }

Geometry frame_geometry(const FrameInfo& frame) {
  Geometry g;
  for (const auto& c : frame.components) {
    g.hmax = std::max(g.hmax, c.h_sampling);
    g.vmax = std::max(g.vmax, c.v_sampling);
  }
  g.mcu_cols = ceil_div(frame.width, 8 * g.hmax);
  g.mcu_rows = ceil_div(frame.height, 8 * g.vmax);
  for (const auto& c : frame.components) {
    g.comp_block_cols.push_back(ceil_div(ceil_div(frame.width * c.h_sampling, g.hmax), 8));
    g.comp_block_rows.push_back(ceil_div(ceil_div(frame.height * c.v_sampling, g.vmax), 8));
  }
  if (frame.components.size() == 1) {
    g.luma_block_cols = g.comp_block_cols[0];
    g.luma_block_rows = g.comp_block_rows[0];
  } else {
    g.luma_block_cols = g.mcu_cols * frame.components[0].h_sampling;
    g.luma_block_rows = g.mcu_rows * frame.components[0].v_sampling;
  }
  return g;
}

// Visits every block of a scan in coding order: fn(component_slot, block_row, block_col) and
// on_restart() between restart intervals. Shared iteration order for all decoders.
template <typename BlockFn, typename RestartFn>
void for_each_scan_block(const FrameInfo& frame, const Geometry& g, const ScanHeader& scan, int restart_interval,
                         BlockFn&& fn, RestartFn&& on_restart) {
  const bool interleaved = scan.components.size() > 1;
  int units_cols, units_rows;
  if (interleaved) {
    units_cols = g.mcu_cols;
    units_rows = g.mcu_rows;
  } else {
    units_cols = g.comp_block_cols[scan.components[0].frame_index];
    units_rows = g.comp_block_rows[scan.components[0].frame_index];
  }
  const long total = static_cast<long>(units_cols) * units_rows;
  for (long unit = 0; unit < total; ++unit) {
    if (restart_interval > 0 && unit > 0 && unit % restart_interval == 0) {
      on_restart(static_cast<int>((unit / restart_interval - 1) % 8));
    }
    const int ur = static_cast<int>(unit / units_cols);
    const int uc = static_cast<int>(unit % units_cols);
    if (!interleaved) {
      fn(0, ur, uc);
      continue;
    }
    for (std::size_t s = 0; s < scan.components.size(); ++s) {
      const auto& fc = frame.components[scan.components[s].frame_index];
      for (int y = 0; y < fc.v_sampling; ++y)
        for (int x = 0; x < fc.h_sampling; ++x) fn(static_cast<int>(s), ur * fc.v_sampling + y, uc * fc.h_sampling + x);
    }
  }
}

// Position of the first marker (0xFF followed by a non-zero byte) at or after `pos`.
std::size_t next_marker(std::span<const std::uint8_t> data, std::size_t pos) {
  while (pos + 1 < data.size()) {
    if (data[pos] == 0xFF && data[pos + 1] != 0x00) return pos;
    ++pos;
  }
  return data.size();
}

struct ScanResult {
  std::size_t end = 0;  // offset (within the scan span) of the marker that ends the segment
};

// ---------------------------------------------------------------------------------------------
// Table-driven decoder.

constexpr int kLookupBits = 9;

class FastHuffman {
 public:
  explicit FastHuffman(const HuffmanTable& t) : symbols_(t.symbols) {
    const auto cc = canonical_codes(t);
    lookup_.fill(0);
    maxcode_.fill(-1);
    std::size_t k = 0;
    std::array<int, 17> ends{};
    int next = 0;
    for (int len = 1; len <= 16; ++len) {
      next += t.counts[len - 1];
      ends[len] = next;
      next <<= 1;
    }
    used_[16] = ends[16];
    for (int len = 15; len >= 1; --len) used_[len] = std::max(ends[len], (used_[len + 1] + 1) / 2);
    for (int len = 1; len <= 16; ++len) {
      const int n = t.counts[len - 1];
      if (n == 0) continue;
      valptr_[len] = static_cast<int>(k);
      mincode_[len] = cc.codes[k];
      maxcode_[len] = cc.codes[k + n - 1];
      for (int i = 0; i < n; ++i, ++k) {
        if (len > kLookupBits) continue;
        const int shift = kLookupBits - len;
        const int base = cc.codes[k] << shift;
        for (int fill = 0; fill < (1 << shift); ++fill) {
          lookup_[base + fill] = static_cast<std::uint16_t>((len << 8) | t.symbols[k]);
        }
      }
    }
  }

  // `bits` holds the next 16 stream bits, left-aligned.
  bool decode(std::uint32_t bits16, int& length, int& symbol) const {
    const auto entry = lookup_[bits16 >> (16 - kLookupBits)];
    if (entry != 0) {
      length = entry >> 8;
      symbol = entry & 0xFF;
      return true;
    }
    for (int len = kLookupBits + 1; len <= 16; ++len) {
      const int code = static_cast<int>(bits16 >> (16 - len));
      if (code <= maxcode_[len] && maxcode_[len] >= 0) {
        length = len;
        symbol = symbols_[valptr_[len] + code - mincode_[len]];
        return true;
      }
    }
    return false;
  }

  // Number of bits after which `bits16` leaves the code tree (only meaningful when decode fails).
  int dead_length(std::uint32_t bits16) const {
    for (int len = 1; len <= 16; ++len)
      if (static_cast<int>(bits16 >> (16 - len)) >= used_[len]) return len;
    return 16;
  }

 private:
  std::vector<std::uint8_t> symbols_;
  std::array<int, 17> used_{};  // prefixes of each length below this value are still in the tree
  std::array<std::uint16_t, 1 << kLookupBits> lookup_{};
  std::array<int, 17> maxcode_{};
  std::array<int, 17> mincode_{};
  std::array<int, 17> valptr_{};
};

class FastBitReader {
 public:
  explicit FastBitReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint32_t peek16() {
    if (count_ < 16) fill();
    std::uint64_t padded = buf_;
    if (count_ < 64) padded |= ~0ULL >> count_;  // virtual 1-bits past the end
    return static_cast<std::uint32_t>(padded >> 48);
  }

  void consume(int n) {
    if (n > count_) fail(ErrorCode::TruncatedStream, "entropy-coded data ended", pos_);
    buf_ <<= n;
    count_ -= n;
  }

  int get_bits(int n) {
    if (n == 0) return 0;
    if (count_ < n) fill();
    if (count_ < n) fail(ErrorCode::TruncatedStream, "entropy-coded data ended", pos_);
    const int v = static_cast<int>(buf_ >> (64 - n));
    consume(n);
    return v;
  }

  int real_bits() const { return count_; }

  void restart(int expected) {
    fill();
    if (count_ >= 8 || pos_ + 1 >= data_.size() || data_[pos_] != 0xFF || data_[pos_ + 1] != 0xD0 + expected) {
      fail(ErrorCode::TruncatedStream, "expected RST" + std::to_string(expected), pos_);
    }
    pos_ += 2;
    buf_ = 0;
    count_ = 0;
  }

  std::size_t position() const { return pos_; }

 private:
  void fill() {
    while (count_ <= 56) {
      if (pos_ >= data_.size()) return;
      std::uint8_t b = data_[pos_];
      if (b == 0xFF) {
        if (pos_ + 1 < data_.size() && data_[pos_ + 1] == 0x00) {
          pos_ += 2;
        } else {
          return;  // marker
        }
      } else {
        ++pos_;
      }
      buf_ |= static_cast<std::uint64_t>(b) << (56 - count_);
      count_ += 8;
    }
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint64_t buf_ = 0;
  int count_ = 0;
};

int fast_symbol(FastBitReader& bits, const FastHuffman& h) {
  int len = 0, sym = 0;
  const auto peek = bits.peek16();
  if (!h.decode(peek, len, sym)) {
    if (h.dead_length(peek) > bits.real_bits()) fail(ErrorCode::TruncatedStream, "entropy-coded data ended", bits.position());
    fail(ErrorCode::InvalidHuffman, "no matching Huffman code", bits.position());
  }
  bits.consume(len);
  return sym;
}

// Decodes one block's coefficients (natural order) into `out`; `pred` is the DC predictor.
void fast_block(FastBitReader& bits, const FastHuffman& dc, const FastHuffman& ac, int& pred, IntBlock& out) {
  out.fill(0);
  const int s = fast_symbol(bits, dc);
  if (s > 11) fail(ErrorCode::InvalidHuffman, "DC category above 11", bits.position());
  pred += s ? extend(bits.get_bits(s), s) : 0;
  out[0] = pred;
  for (int k = 1; k < 64;) {
    const int rs = fast_symbol(bits, ac);
    const int run = rs >> 4, size = rs & 15;
    if (size == 0) {
      if (run != 15) break;
      k += 16;
      if (k > 64) fail(ErrorCode::InvalidHuffman, "zero run past end of block", bits.position());
      continue;
    }
    if (size > 10) fail(ErrorCode::InvalidHuffman, "AC category above 10", bits.position());
    k += run;
    if (k > 63) fail(ErrorCode::InvalidHuffman, "AC index past end of block", bits.position());
    out[kZigZag[k]] = extend(bits.get_bits(size), size);
    ++k;
  }
}

struct ScanTables {
  std::vector<const HuffmanTable*> dc, ac;
};

ScanTables resolve_tables(const HuffmanSet& tables, const ScanHeader& scan) {
  ScanTables st;
  for (const auto& sc : scan.components) {
    if (sc.dc_table < 0 || sc.dc_table > 3 || !tables.dc[sc.dc_table]) fail(ErrorCode::MissingTable, "undefined DC table", 0);
    if (sc.ac_table < 0 || sc.ac_table > 3 || !tables.ac[sc.ac_table]) fail(ErrorCode::MissingTable, "undefined AC table", 0);
    st.dc.push_back(&*tables.dc[sc.dc_table]);
    st.ac.push_back(&*tables.ac[sc.ac_table]);
  }
  return st;
}

ScanResult decode_scan_fast(std::span<const std::uint8_t> data, const HuffmanSet& tables, const FrameInfo& frame,
                            const Geometry& g, const ScanHeader& scan, int restart_interval, CoefficientPlane& luma) {
  const auto st = resolve_tables(tables, scan);
  std::vector<FastHuffman> dc, ac;
  for (std::size_t i = 0; i < scan.components.size(); ++i) {
    dc.emplace_back(*st.dc[i]);
    ac.emplace_back(*st.ac[i]);
  }
  std::vector<int> pred(scan.components.size(), 0);
  FastBitReader bits(data);
  IntBlock block{};
  for_each_scan_block(
      frame, g, scan, restart_interval,
      [&](int slot, int brow, int bcol) {
        fast_block(bits, dc[slot], ac[slot], pred[slot], block);
        if (scan.components[slot].frame_index == 0 && brow < luma.block_rows && bcol < luma.block_cols) {
          luma.set_block(brow, bcol, block);
        }
      },
      [&](int expected) {
        bits.restart(expected);
        std::fill(pred.begin(), pred.end(), 0);
      });
  return {next_marker(data, bits.position())};
}

// ---------------------------------------------------------------------------------------------
// Reference decoder: one bit at a time through an explicit code tree.

class CodeTree {
 public:
  explicit CodeTree(const HuffmanTable& t) {
    const auto cc = canonical_codes(t);
    nodes_.push_back({});
    for (std::size_t k = 0; k < cc.codes.size(); ++k) {
      int node = 0;
      for (int b = cc.lengths[k] - 1; b >= 0; --b) {
        const int bit = (cc.codes[k] >> b) & 1;
        if (nodes_[node].child[bit] < 0) {
          nodes_[node].child[bit] = static_cast<int>(nodes_.size());
          nodes_.push_back({});
        }
        node = nodes_[node].child[bit];
      }
      nodes_[node].symbol = t.symbols[k];
    }
  }

  template <typename NextBit>
  int decode(NextBit&& next_bit) const {
    int node = 0;
    while (nodes_[node].symbol < 0) {
      node = nodes_[node].child[next_bit()];
      if (node < 0) fail(ErrorCode::InvalidHuffman, "no matching Huffman code", 0);
    }
    return nodes_[node].symbol;
  }

 private:
  struct Node {
    int child[2] = {-1, -1};
    int symbol = -1;
  };
  std::vector<Node> nodes_;
};

class SlowBitReader {
 public:
  explicit SlowBitReader(std::span<const std::uint8_t> data) : data_(data) {}

  int bit() {
    if (left_ == 0) {
      if (pos_ >= data_.size()) fail(ErrorCode::TruncatedStream, "entropy-coded data ended", pos_);
      const std::uint8_t b = data_[pos_];
      if (b == 0xFF) {
        if (pos_ + 1 >= data_.size() || data_[pos_ + 1] != 0x00) fail(ErrorCode::TruncatedStream, "entropy-coded data ended", pos_);
        pos_ += 2;
      } else {
        ++pos_;
      }
      current_ = b;
      left_ = 8;
    }
    --left_;
    return (current_ >> left_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  void restart(int expected) {
    left_ = 0;
    if (pos_ + 1 >= data_.size() || data_[pos_] != 0xFF || data_[pos_ + 1] != 0xD0 + expected) {
      fail(ErrorCode::TruncatedStream, "expected RST" + std::to_string(expected), pos_);
    }
    pos_ += 2;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint8_t current_ = 0;
  int left_ = 0;
};

void slow_block(SlowBitReader& in, const CodeTree& dc, const CodeTree& ac, int& pred, IntBlock& out) {
  auto next = [&] { return in.bit(); };
  out.fill(0);
  const int s = dc.decode(next);
  if (s > 11) fail(ErrorCode::InvalidHuffman, "DC category above 11", in.position());
  if (s > 0) pred += extend(in.bits(s), s);
  out[0] = pred;
  int k = 1;
  while (k < 64) {
    const int rs = ac.decode(next);
    const int run = rs >> 4;
    const int size = rs & 15;
    if (size == 0 && run != 15) break;
    if (size == 0) {
      k += 16;
      if (k > 64) fail(ErrorCode::InvalidHuffman, "zero run past end of block", in.position());
      continue;
    }
    if (size > 10) fail(ErrorCode::InvalidHuffman, "AC category above 10", in.position());
    k += run;
    if (k > 63) fail(ErrorCode::InvalidHuffman, "AC index past end of block", in.position());
    out[kZigZag[k++]] = extend(in.bits(size), size);
  }
}

ScanResult decode_scan_reference(std::span<const std::uint8_t> data, const HuffmanSet& tables,
                                 const FrameInfo& frame, const Geometry& g, const ScanHeader& scan,
                                 int restart_interval, CoefficientPlane& luma) {
  const auto st = resolve_tables(tables, scan);
  std::vector<CodeTree> dc, ac;
  for (std::size_t i = 0; i < scan.components.size(); ++i) {
    dc.emplace_back(*st.dc[i]);
    ac.emplace_back(*st.ac[i]);
  }
  std::vector<int> pred(scan.components.size(), 0);
  SlowBitReader in(data);
  IntBlock block{};
  for_each_scan_block(
      frame, g, scan, restart_interval,
      [&](int slot, int brow, int bcol) {
        slow_block(in, dc[slot], ac[slot], pred[slot], block);
        if (scan.components[slot].frame_index == 0 && brow < luma.block_rows && bcol < luma.block_cols) {
          luma.set_block(brow, bcol, block);
        }
      },
      [&](int expected) {
        in.restart(expected);
        std::fill(pred.begin(), pred.end(), 0);
      });
  return {next_marker(data, in.position())};
}

// ---------------------------------------------------------------------------------------------
// Marker walk.

void validate_frame(const FrameInfo& frame, std::size_t offset) {
  if (frame.precision != 8) fail(ErrorCode::UnsupportedMode, "sample precision " + std::to_string(frame.precision), offset);
  if (frame.width <= 0 || frame.height <= 0) fail(ErrorCode::UnsupportedMode, "zero frame dimension (DNL)", offset);
  const auto n = frame.components.size();
  for (const auto& c : frame.components) {
    if (c.h_sampling < 1 || c.h_sampling > 4 || c.v_sampling < 1 || c.v_sampling > 4 || c.quant_id > 3) {
      fail(ErrorCode::UnsupportedMode, "bad component parameters", offset);
    }
  }
  if (n == 1) return;
  if (n != 3) fail(ErrorCode::UnsupportedMode, std::to_string(n) + "-component frame", offset);
  const auto& y = frame.components[0];
  const bool chroma_unit = frame.components[1].h_sampling == 1 && frame.components[1].v_sampling == 1 &&
                           frame.components[2].h_sampling == 1 && frame.components[2].v_sampling == 1;
  const bool luma_ok = (y.h_sampling == 1 && y.v_sampling == 1) || (y.h_sampling == 2 && y.v_sampling == 2);
  if (!chroma_unit || !luma_ok) fail(ErrorCode::UnsupportedMode, "sampling layout other than 4:4:4 or 4:2:0", offset);
}

enum class DecoderKind { Fast, Reference };

ParsedJpeg walk(std::span<const std::uint8_t> bytes, DecoderKind kind) {
  if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != kSOI) fail(ErrorCode::NotAJpeg, "missing SOI", 0);

  ParsedJpeg out;
  HuffmanSet huff;
  std::optional<Geometry> geometry;
  bool luma_decoded = false;
  std::size_t pos = 2;

  auto need = [&](std::size_t n, std::size_t at) {
    if (at + n > bytes.size()) fail(ErrorCode::TruncatedStream, "segment runs past end of file", at);
  };

  while (true) {
    need(2, pos);
    if (bytes[pos] != 0xFF) fail(ErrorCode::MalformedSegment, "expected marker", pos);
    while (pos < bytes.size() && bytes[pos] == 0xFF) ++pos;  // fill bytes
    need(1, pos);
    const std::uint8_t marker = bytes[pos++];
    const std::size_t marker_at = pos - 2;

    if (marker == kEOI) break;
    if (marker == kSOI || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
      fail(ErrorCode::MalformedSegment, "unexpected standalone marker", marker_at);
    }
    need(2, pos);
    const std::size_t len = (static_cast<std::size_t>(bytes[pos]) << 8) | bytes[pos + 1];
    if (len < 2) fail(ErrorCode::MalformedSegment, "segment length below 2", marker_at);
    need(len, pos);
    const auto seg = bytes.subspan(pos + 2, len - 2);
    const std::size_t seg_end = pos + len;

    switch (marker) {
      case kSOF0:
      case kSOF1: {
        if (geometry) fail(ErrorCode::MalformedSegment, "second frame header", marker_at);
        if (seg.size() < 6) fail(ErrorCode::MalformedSegment, "short SOF", marker_at);
        FrameInfo& f = out.info.frame;
        f.precision = seg[0];
        f.height = (seg[1] << 8) | seg[2];
        f.width = (seg[3] << 8) | seg[4];
        const int n = seg[5];
        if (n < 1 || seg.size() != 6 + 3 * static_cast<std::size_t>(n)) fail(ErrorCode::MalformedSegment, "bad SOF length", marker_at);
        for (int i = 0; i < n; ++i) {
          f.components.push_back({seg[6 + 3 * i], seg[7 + 3 * i] >> 4, seg[7 + 3 * i] & 15, seg[8 + 3 * i]});
        }
        validate_frame(f, marker_at);
        geometry = frame_geometry(f);
        break;
      }
      case kDHT: {
        std::size_t p = 0;
        while (p < seg.size()) {
          if (p + 17 > seg.size()) fail(ErrorCode::MalformedSegment, "short DHT", marker_at);
          HuffmanTable t;
          const int tc = seg[p] >> 4, th = seg[p] & 15;
          if (tc > 1 || th > 3) fail(ErrorCode::MalformedSegment, "bad DHT class/id", marker_at);
          t.table_class = tc == 0 ? TableClass::DC : TableClass::AC;
          t.id = th;
          std::size_t total = 0;
          for (int i = 0; i < 16; ++i) total += t.counts[i] = seg[p + 1 + i];
          p += 17;
          if (total > 256 || p + total > seg.size()) fail(ErrorCode::InvalidHuffman, "bad DHT symbol count", marker_at);
          t.symbols.assign(seg.begin() + static_cast<std::ptrdiff_t>(p), seg.begin() + static_cast<std::ptrdiff_t>(p + total));
          p += total;
          try {
            canonical_codes(t);
          } catch (const Error&) {
            fail(ErrorCode::InvalidHuffman, "over-subscribed code lengths", marker_at);
          }
          (tc == 0 ? huff.dc : huff.ac)[th] = t;
          out.info.huffman_tables.push_back(std::move(t));
        }
        break;
      }
      case kDQT: {
        std::size_t p = 0;
        while (p < seg.size()) {
          const int pq = seg[p] >> 4, tq = seg[p] & 15;
          if (pq != 0) fail(ErrorCode::UnsupportedMode, "16-bit quantization table", marker_at);
          if (tq > 3) fail(ErrorCode::MalformedSegment, "bad DQT id", marker_at);
          if (p + 65 > seg.size()) fail(ErrorCode::MalformedSegment, "short DQT", marker_at);
          QuantTable qt;
          for (int k = 0; k < 64; ++k) {
            const std::uint8_t v = seg[p + 1 + k];
            if (v == 0) fail(ErrorCode::UnsupportedMode, "zero quantizer", marker_at);
            qt.entries[kZigZag[k]] = v;
          }
          out.info.quant_tables[tq] = qt;
          p += 65;
        }
        break;
      }
      case kDRI:
        if (seg.size() != 2) fail(ErrorCode::MalformedSegment, "bad DRI length", marker_at);
        out.info.restart_interval = (seg[0] << 8) | seg[1];
        break;
      case kDNL:
        fail(ErrorCode::UnsupportedMode, "DNL marker", marker_at);
      case kSOS: {
        if (!geometry) fail(ErrorCode::MalformedSegment, "scan before frame header", marker_at);
        const FrameInfo& f = out.info.frame;
        if (seg.empty()) fail(ErrorCode::MalformedSegment, "short SOS", marker_at);
        const int ns = seg[0];
        if (ns < 1 || ns > 4 || seg.size() != 1 + 2 * static_cast<std::size_t>(ns) + 3) {
          fail(ErrorCode::MalformedSegment, "bad SOS length", marker_at);
        }
        ScanHeader scan;
        for (int i = 0; i < ns; ++i) {
          const int id = seg[1 + 2 * i];
          const auto it = std::find_if(f.components.begin(), f.components.end(), [&](const auto& c) { return c.id == id; });
          if (it == f.components.end()) fail(ErrorCode::MalformedSegment, "scan names unknown component", marker_at);
          scan.components.push_back({static_cast<int>(it - f.components.begin()), seg[2 + 2 * i] >> 4, seg[2 + 2 * i] & 15});
        }
        const auto* tail = seg.data() + 1 + 2 * ns;
        if (tail[0] != 0 || tail[1] != 63 || tail[2] != 0) fail(ErrorCode::UnsupportedMode, "non-sequential scan parameters", marker_at);

        const bool has_luma = std::any_of(scan.components.begin(), scan.components.end(),
                                          [](const auto& c) { return c.frame_index == 0; });
        if (has_luma) {
          const int qid = f.components[0].quant_id;
          if (!out.info.quant_tables[qid]) fail(ErrorCode::MissingTable, "luminance DQT undefined", marker_at);
          if (!luma_decoded) {
            out.luma = CoefficientPlane(geometry->luma_block_rows, geometry->luma_block_cols, *out.info.quant_tables[qid]);
          }
        }
        try {
          resolve_tables(huff, scan);
        } catch (const Error&) {
          fail(ErrorCode::MissingTable, "scan references undefined Huffman table", marker_at);
        }

        // Every block costs at least two bits, which bounds how many a buffer can hold.
        long blocks = 0;
        for (const auto& sc : scan.components) {
          const auto& fc = f.components[sc.frame_index];
          blocks += scan.components.size() > 1
                        ? static_cast<long>(geometry->mcu_cols) * geometry->mcu_rows * fc.h_sampling * fc.v_sampling
                        : static_cast<long>(geometry->comp_block_cols[sc.frame_index]) * geometry->comp_block_rows[sc.frame_index];
        }
        const auto data = bytes.subspan(seg_end);
        if (blocks > 4 * static_cast<long>(data.size()) + 4) fail(ErrorCode::TruncatedStream, "scan data too short for frame", seg_end);

        CoefficientPlane scratch;
        CoefficientPlane& target = has_luma ? out.luma : scratch;
        ScanResult r;
        try {
          r = kind == DecoderKind::Fast
                  ? decode_scan_fast(data, huff, f, *geometry, scan, out.info.restart_interval, target)
                  : decode_scan_reference(data, huff, f, *geometry, scan, out.info.restart_interval, target);
        } catch (const Error& e) {
          // Decoder offsets are relative to the scan start.
          throw Error(e.code(), std::string(e.what()) + " (scan data begins at offset " + std::to_string(seg_end) + ")");
        }
        luma_decoded = luma_decoded || has_luma;
        ++out.info.scan_count;
        pos = seg_end + r.end;
        continue;
      }
      default:
        if ((marker >= 0xE0 && marker <= 0xEF) || marker == kCOM) break;  // APPn / COM skipped
        if (marker >= 0xC2 && marker <= 0xCF) fail(ErrorCode::UnsupportedMode, "non-baseline frame type", marker_at);
        fail(ErrorCode::MalformedSegment, "unsupported marker", marker_at);
    }
    pos = seg_end;
  }

  if (!luma_decoded) fail(ErrorCode::TruncatedStream, "no luminance scan before EOI", bytes.size());
  return out;
}

// ---------------------------------------------------------------------------------------------
// Writer.

HuffmanTable make_table(TableClass cls, std::array<std::uint8_t, 16> counts, std::vector<std::uint8_t> symbols) {
  HuffmanTable t;
  t.table_class = cls;
  t.id = 0;
  t.counts = counts;
  t.symbols = std::move(symbols);
  return t;
}

struct EncodeTable {
  std::array<std::uint16_t, 256> code{};
  std::array<std::uint8_t, 256> length{};
};

EncodeTable encode_table(const HuffmanTable& t) {
  const auto cc = canonical_codes(t);
  EncodeTable e;
  for (std::size_t k = 0; k < cc.codes.size(); ++k) {
    e.code[t.symbols[k]] = cc.codes[k];
    e.length[t.symbols[k]] = cc.lengths[k];
  }
  return e;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t value, int bits) {
    for (int b = bits - 1; b >= 0; --b) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((value >> b) & 1));
      if (++filled_ == 8) emit();
    }
  }

  void flush() {
    while (filled_ != 0) put(1, 1);
  }

 private:
  void emit() {
    out_.push_back(acc_);
    if (acc_ == 0xFF) out_.push_back(0x00);
    acc_ = 0;
    filled_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint8_t acc_ = 0;
  int filled_ = 0;
};

int magnitude_category(int v) {
  int a = std::abs(v), s = 0;
  while (a) {
    ++s;
    a >>= 1;
  }
  return s;
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t m) {
  out.push_back(0xFF);
  out.push_back(m);
}

void put_u16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_dht(std::vector<std::uint8_t>& out, const HuffmanTable& t, int tc) {
  out.push_back(static_cast<std::uint8_t>((tc << 4) | t.id));
  out.insert(out.end(), t.counts.begin(), t.counts.end());
  out.insert(out.end(), t.symbols.begin(), t.symbols.end());
}

}  // namespace

const HuffmanTable& standard_luma_dc_table() {
  static const HuffmanTable t = make_table(TableClass::DC, {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                                           {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  return t;
}

const HuffmanTable& standard_luma_ac_table() {
  static const HuffmanTable t = make_table(
      TableClass::AC, {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
      {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71,
       0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72,
       0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37,
       0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
       0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83,
       0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
       0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
       0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
       0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa});
  return t;
}

CoefficientPlane parse_baseline(std::span<const std::uint8_t> bytes) { return walk(bytes, DecoderKind::Fast).luma; }

CoefficientPlane parse_baseline_slow(std::span<const std::uint8_t> bytes) {
  return walk(bytes, DecoderKind::Reference).luma;
}

ParsedJpeg inspect_baseline(std::span<const std::uint8_t> bytes) { return walk(bytes, DecoderKind::Fast); }

CoefficientPlane decode_scan_slow(std::span<const std::uint8_t> scan_bytes, const HuffmanSet& tables,
                                  const FrameInfo& frame, const ScanHeader& scan, int restart_interval,
                                  const QuantTable& luma_table) {
  validate_frame(frame, 0);
  if (scan.components.empty()) fail(ErrorCode::MalformedSegment, "empty scan", 0);
  const Geometry g = frame_geometry(frame);
  CoefficientPlane luma(g.luma_block_rows, g.luma_block_cols, luma_table);
  decode_scan_reference(scan_bytes, tables, frame, g, scan, restart_interval, luma);
  return luma;
}

std::vector<std::uint8_t> write_baseline(const CoefficientPlane& plane) {
  if (plane.block_rows <= 0 || plane.block_cols <= 0 || plane.rows() > 65535 || plane.cols() > 65535) {
    throw Error(ErrorCode::CoefficientOutOfRange, "plane dimensions outside the encodable range");
  }
  const auto& dc_table = standard_luma_dc_table();
  const auto& ac_table = standard_luma_ac_table();
  const EncodeTable dc = encode_table(dc_table);
  const EncodeTable ac = encode_table(ac_table);

  std::vector<std::uint8_t> out;
  put_marker(out, kSOI);

  put_marker(out, kDQT);
  put_u16(out, 2 + 65);
  out.push_back(0x00);
  for (int k = 0; k < 64; ++k) out.push_back(static_cast<std::uint8_t>(plane.table.entries[kZigZag[k]]));

  put_marker(out, kSOF0);
  put_u16(out, 2 + 6 + 3);
  out.push_back(8);
  put_u16(out, plane.rows());
  put_u16(out, plane.cols());
  out.push_back(1);
  out.insert(out.end(), {1, 0x11, 0});

  put_marker(out, kDHT);
  put_u16(out, static_cast<int>(2 + 17 + dc_table.symbols.size() + 17 + ac_table.symbols.size()));
  put_dht(out, dc_table, 0);
  put_dht(out, ac_table, 1);

  put_marker(out, kSOS);
  put_u16(out, 2 + 1 + 2 + 3);
  out.insert(out.end(), {1, 1, 0x00, 0, 63, 0});

  BitWriter bits(out);
  int pred = 0;
  for (int br = 0; br < plane.block_rows; ++br)
    for (int bc = 0; bc < plane.block_cols; ++bc) {
      const IntBlock blk = plane.block(br, bc);
      const int diff = blk[0] - pred;
      if (std::abs(diff) > 2047) {
        throw Error(ErrorCode::CoefficientOutOfRange, "DC difference " + std::to_string(diff) + " in block (" +
                                                          std::to_string(br) + "," + std::to_string(bc) + ")");
      }
      pred = blk[0];
      int s = magnitude_category(diff);
      bits.put(dc.code[s], dc.length[s]);
      if (s) bits.put(static_cast<std::uint32_t>(diff < 0 ? diff + (1 << s) - 1 : diff), s);

      int run = 0;
      for (int k = 1; k < 64; ++k) {
        const int v = blk[kZigZag[k]];
        if (v == 0) {
          ++run;
          continue;
        }
        if (std::abs(v) > 1023) {
          throw Error(ErrorCode::CoefficientOutOfRange, "AC coefficient " + std::to_string(v) + " in block (" +
                                                            std::to_string(br) + "," + std::to_string(bc) + ")");
        }
        for (; run >= 16; run -= 16) bits.put(ac.code[0xF0], ac.length[0xF0]);
        s = magnitude_category(v);
        const int rs = (run << 4) | s;
        bits.put(ac.code[rs], ac.length[rs]);
        bits.put(static_cast<std::uint32_t>(v < 0 ? v + (1 << s) - 1 : v), s);
        run = 0;
      }
      if (run > 0) bits.put(ac.code[0x00], ac.length[0x00]);
    }
  bits.flush();
  put_marker(out, kEOI);
  return out;
}

}  // namespace djd
