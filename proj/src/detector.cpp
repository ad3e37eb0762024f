#include "djd/detector.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <json.hpp>

#include "djd/error.hpp"
#include "djd/io_util.hpp"

namespace djd {

namespace {

constexpr std::uint8_t kVersion = 1;
enum Section : std::uint8_t { kConfig = 1, kPcaMean = 2, kPcaBasis = 3, kScaler = 4, kSvm = 5 };

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void put_vector(ByteWriter& w, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v[i]);
}

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::ChecksumMismatch, why); }

std::vector<double> read_f64s(std::span<const std::uint8_t> payload) {
  if (payload.size() % 8 != 0) corrupt("numeric section length not a multiple of 8");
  ByteReader in(payload);
  std::vector<double> out(payload.size() / 8);
  for (auto& v : out) v = in.f64();
  return out;
}

nlohmann::ordered_json config_object(const DetectorModel& m) {
  nlohmann::ordered_json j;
  j["feature_kind"] = to_string(m.config.feature_kind);
  j["threshold"] = m.config.threshold;
  j["directions"] = m.config.directions == DirectionSet::Twelve ? 12 : 4;
  j["input_dim"] = m.input_dim;
  j["pca_dim"] = m.pca ? m.pca->output_dim : 0;
  j["svm"] = {{"c", m.config.svm.c},
              {"gamma", m.svm.kernel.gamma},
              {"coef0", m.svm.kernel.coef0},
              {"degree", PolyKernel::degree},
              {"seed", m.config.svm.seed},
              {"tolerance", m.config.svm.tolerance}};
  j["labels"] = {{"single", -1}, {"double", 1}};
  return j;
}

FeatureKind kind_from_string(const std::string& s) {
  for (auto k : {FeatureKind::Global, FeatureKind::Unit, FeatureKind::Combined, FeatureKind::Projected}) {
    if (s == to_string(k)) return k;
  }
  corrupt("unknown feature kind '" + s + "'");
}

}  // namespace

int default_pca_dim(std::size_t train_rows) {
  return static_cast<int>(std::min<std::size_t>(1300, train_rows > 0 ? train_rows - 1 : 0));
}

Vector DetectorModel::prepare(const Vector& features) const {
  if (features.size() != input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(input_dim) + " features (" +
                                                  to_string(config.feature_kind) + "), got " +
                                                  std::to_string(features.size()));
  }
  return scaler.apply(pca ? pca_project(*pca, features) : features);
}

Matrix DetectorModel::prepare_rows(const Matrix& features) const {
  if (features.cols() != input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(input_dim) + " features, got " +
                                                  std::to_string(features.cols()));
  }
  return scaler.apply_rows(pca ? pca_project_rows(*pca, features) : features);
}

double DetectorModel::decision(const Vector& features) const { return svm_decision(svm, prepare(features)); }

std::string DetectorModel::config_json() const {
  auto j = config_object(*this);
  j["fingerprint"] = fingerprint();
  return j.dump();
}

std::string DetectorModel::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_object(*this).dump())));
  return buf;
}

DetectorModel fit_detector(const Matrix& features, std::span<const int> labels, const DetectorConfig& config) {
  DetectorModel m;
  m.config = config;
  m.input_dim = static_cast<int>(features.cols());
  Matrix reduced;
  if (config.pca_dim > 0) {
    m.pca = pca_fit(features, config.pca_dim);
    reduced = pca_project_rows(*m.pca, features);
  } else {
    reduced = features;
  }
  m.scaler = Standardizer::fit(reduced);
  m.svm = svm_train(m.scaler.apply_rows(reduced), labels, config.svm);
  return m;
}

std::vector<std::uint8_t> save_model(const DetectorModel& model) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>("DJMD"), 4));
  w.u8(kVersion);
  w.u32(model.pca ? 5 : 3);

  auto section = [&](std::uint8_t tag, const std::vector<std::uint8_t>& payload) {
    w.u8(tag);
    w.u64(payload.size());
    w.raw(payload);
  };

  const std::string cfg = model.config_json();
  section(kConfig, std::vector<std::uint8_t>(cfg.begin(), cfg.end()));
  if (model.pca) {
    ByteWriter mean;
    put_vector(mean, model.pca->mean);
    section(kPcaMean, mean.take());
    ByteWriter basis;
    for (Eigen::Index r = 0; r < model.pca->basis.rows(); ++r)
      for (Eigen::Index c = 0; c < model.pca->basis.cols(); ++c) basis.f64(model.pca->basis(r, c));
    put_vector(basis, model.pca->explained_variance);
    section(kPcaBasis, basis.take());
  }
  ByteWriter scaler;
  put_vector(scaler, model.scaler.mean);
  put_vector(scaler, model.scaler.scale);
  section(kScaler, scaler.take());

  ByteWriter svm;
  const auto& s = model.svm;
  svm.f64(s.bias);
  svm.f64(s.kernel.gamma);
  svm.f64(s.kernel.coef0);
  svm.f64(s.c_param);
  svm.f64(static_cast<double>(s.support_vectors.rows()));
  svm.f64(static_cast<double>(s.support_vectors.cols()));
  put_vector(svm, s.coef);
  for (Eigen::Index r = 0; r < s.support_vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < s.support_vectors.cols(); ++c) svm.f64(s.support_vectors(r, c));
  section(kSvm, svm.take());

  w.u32(crc32_of(w.bytes()));
  return w.take();
}

DetectorModel load_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 13) corrupt("model file too short");
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (tail.u32() != crc32_of(body)) corrupt("CRC32 does not match model contents");

  ByteReader in(body);
  const auto magic = in.raw(4);
  if (std::memcmp(magic.data(), "DJMD", 4) != 0) corrupt("missing DJMD magic");
  const auto version = in.u8();
  if (version != kVersion) throw Error(ErrorCode::VersionMismatch, "model version " + std::to_string(version));
  const std::uint32_t sections = in.u32();

  DetectorModel m;
  nlohmann::json cfg;
  std::vector<double> pca_mean, pca_basis, scaler, svm;
  bool have_cfg = false, have_scaler = false, have_svm = false;
  for (std::uint32_t s = 0; s < sections; ++s) {
    const auto tag = in.u8();
    const auto len = in.u64();
    if (!in.ok() || len > in.remaining()) corrupt("section runs past end of file");
    const auto payload = in.raw(static_cast<std::size_t>(len));
    switch (tag) {
      case kConfig:
        try {
          cfg = nlohmann::json::parse(payload.begin(), payload.end());
        } catch (const nlohmann::json::exception&) {
          corrupt("config section is not valid JSON");
        }
        have_cfg = true;
        break;
      case kPcaMean: pca_mean = read_f64s(payload); break;
      case kPcaBasis: pca_basis = read_f64s(payload); break;
      case kScaler:
        scaler = read_f64s(payload);
        have_scaler = true;
        break;
      case kSvm:
        svm = read_f64s(payload);
        have_svm = true;
        break;
      default: corrupt("unknown section tag " + std::to_string(tag));
    }
  }
  if (!have_cfg || !have_scaler || !have_svm || in.remaining() != 0) corrupt("model sections incomplete");

  try {
    m.config.feature_kind = kind_from_string(cfg.at("feature_kind").get<std::string>());
    m.config.threshold = cfg.at("threshold").get<int>();
    m.config.directions = cfg.at("directions").get<int>() == 4 ? DirectionSet::Four : DirectionSet::Twelve;
    m.input_dim = cfg.at("input_dim").get<int>();
    m.config.pca_dim = cfg.at("pca_dim").get<int>();
    const auto& js = cfg.at("svm");
    m.config.svm.c = js.at("c").get<double>();
    m.config.svm.gamma = js.at("gamma").get<double>();
    m.config.svm.coef0 = js.at("coef0").get<double>();
    m.config.svm.seed = js.at("seed").get<std::uint64_t>();
    m.config.svm.tolerance = js.at("tolerance").get<double>();
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("config section malformed: ") + e.what());
  }

  const auto in_dim = static_cast<std::size_t>(m.input_dim);
  std::size_t reduced_dim = in_dim;
  if (m.config.pca_dim > 0) {
    const auto out_dim = static_cast<std::size_t>(m.config.pca_dim);
    if (pca_mean.size() != in_dim || pca_basis.size() != out_dim * in_dim + out_dim) corrupt("PCA section sizes");
    PcaModel p;
    p.input_dim = m.input_dim;
    p.output_dim = m.config.pca_dim;
    p.mean = Eigen::Map<const Vector>(pca_mean.data(), static_cast<Eigen::Index>(in_dim));
    p.basis = Eigen::Map<const Matrix>(pca_basis.data(), static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
    p.explained_variance = Eigen::Map<const Vector>(pca_basis.data() + out_dim * in_dim, static_cast<Eigen::Index>(out_dim));
    m.pca = std::move(p);
    reduced_dim = out_dim;
  }
  if (scaler.size() != 2 * reduced_dim) corrupt("scaler section size");
  m.scaler.mean = Eigen::Map<const Vector>(scaler.data(), static_cast<Eigen::Index>(reduced_dim));
  m.scaler.scale = Eigen::Map<const Vector>(scaler.data() + reduced_dim, static_cast<Eigen::Index>(reduced_dim));

  if (svm.size() < 6) corrupt("SVM section size");
  const auto nsv = static_cast<std::size_t>(svm[4]);
  const auto dim = static_cast<std::size_t>(svm[5]);
  if (dim != reduced_dim || svm.size() != 6 + nsv + nsv * dim) corrupt("SVM section size");
  m.svm.bias = svm[0];
  m.svm.kernel.gamma = svm[1];
  m.svm.kernel.coef0 = svm[2];
  m.svm.c_param = svm[3];
  m.svm.coef = Eigen::Map<const Vector>(svm.data() + 6, static_cast<Eigen::Index>(nsv));
  m.svm.support_vectors = Eigen::Map<const Matrix>(svm.data() + 6 + nsv, static_cast<Eigen::Index>(nsv),
                                                   static_cast<Eigen::Index>(dim));
  return m;
}

}  // namespace djd
