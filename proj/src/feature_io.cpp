#include "djd/feature_io.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "djd/error.hpp"
#include "djd/io_util.hpp"

namespace djd {

namespace {

constexpr std::uint8_t kVersion = 1;

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::BadFeatureFile, why); }

void expect_magic(ByteReader& in, const char* magic) {
  const auto m = in.raw(4);
  if (!in.ok() || std::memcmp(m.data(), magic, 4) != 0) bad(std::string("missing ") + magic + " magic");
}

std::uint32_t expected_cols(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Global: return kGlobalDim;
    case FeatureKind::Unit: return kUnitDim;
    case FeatureKind::Combined: return kCombinedDim;
    case FeatureKind::Projected: return 0;
  }
  return 0;
}

}  // namespace

void FeatureMatrix::append(const FeatureVector& fv) {
  if (rows == 0 && values.empty()) {
    kind = fv.kind;
    cols = static_cast<std::uint32_t>(fv.values.size());
  }
  if (fv.kind != kind || fv.values.size() != cols) {
    throw Error(ErrorCode::DimensionMismatch, "feature row does not match matrix layout");
  }
  for (double v : fv.values) values.push_back(static_cast<float>(v));
  ++rows;
}

std::vector<std::uint8_t> encode_djfm(const FeatureMatrix& m) {
  if (m.values.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    throw Error(ErrorCode::DimensionMismatch, "feature matrix storage does not match rows x cols");
  }
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>("DJFM"), 4));
  w.u8(kVersion);
  w.u32(m.rows);
  w.u32(m.cols);
  w.u8(static_cast<std::uint8_t>(m.kind));
  for (float v : m.values) w.f32(v);
  return w.take();
}

FeatureMatrix decode_djfm(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  expect_magic(in, "DJFM");
  if (in.u8() != kVersion) bad("unsupported DJFM version");
  FeatureMatrix m;
  m.rows = in.u32();
  m.cols = in.u32();
  const std::uint8_t kind = in.u8();
  if (!in.ok()) bad("truncated DJFM header");
  if (kind > 3) bad("unknown feature kind tag " + std::to_string(kind));
  m.kind = static_cast<FeatureKind>(kind);
  const auto want = expected_cols(m.kind);
  const bool ablated = m.kind == FeatureKind::Global && m.cols == kFourDirectionDim;
  if (want != 0 && m.cols != want && !ablated) bad("column count " + std::to_string(m.cols) + " does not match kind " + to_string(m.kind));
  const std::uint64_t count = static_cast<std::uint64_t>(m.rows) * m.cols;
  if (in.remaining() != count * 4) bad("payload size does not match rows x cols");
  m.values.resize(count);
  for (auto& v : m.values) v = in.f32();
  return m;
}

std::vector<std::uint8_t> encode_djlb(std::span<const Label> labels) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>("DJLB"), 4));
  w.u8(kVersion);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (auto l : labels) w.u8(static_cast<std::uint8_t>(l));
  return w.take();
}

std::vector<Label> decode_djlb(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  expect_magic(in, "DJLB");
  if (in.u8() != kVersion) bad("unsupported DJLB version");
  const std::uint32_t n = in.u32();
  if (!in.ok() || in.remaining() != n) bad("label payload size does not match count");
  std::vector<Label> out(n);
  for (auto& l : out) {
    const auto b = in.u8();
    if (b > 1) bad("label byte must be 0 or 1");
    l = static_cast<Label>(b);
  }
  return out;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& m) { write_file_atomic(path, encode_djfm(m)); }
FeatureMatrix load_features(const std::filesystem::path& path) { return decode_djfm(read_file(path)); }
void save_labels(const std::filesystem::path& path, std::span<const Label> labels) {
  write_file_atomic(path, encode_djlb(labels));
}
std::vector<Label> load_labels(const std::filesystem::path& path) { return decode_djlb(read_file(path)); }

}  // namespace djd
