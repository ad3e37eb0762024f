#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "djd/features.hpp"
#include "djd/learning.hpp"

namespace djd {

struct DetectorConfig {
  FeatureKind feature_kind = FeatureKind::Global;
  int threshold = kDefaultThreshold;
  DirectionSet directions = DirectionSet::Twelve;
  int pca_dim = 0;  // 0 skips PCA
  SvmParams svm;
};

/// PCA cap taken from the combined-feature setting, bounded by what the training set supports.
int default_pca_dim(std::size_t train_rows);

/// Fitted pipeline: optional PCA, standardization, then the polynomial SVM.
struct DetectorModel {
  DetectorConfig config;
  int input_dim = 0;
  std::optional<PcaModel> pca;
  Standardizer scaler;
  SvmModel svm;

  Vector prepare(const Vector& features) const;
  Matrix prepare_rows(const Matrix& features) const;
  double decision(const Vector& features) const;

  /// Canonical JSON description (everything but the numeric payloads).
  std::string config_json() const;
  std::string fingerprint() const;
};

DetectorModel fit_detector(const Matrix& features, std::span<const int> labels, const DetectorConfig& config);

/// DJMD container: header, tagged sections of little-endian f64 payloads, trailing CRC32.
std::vector<std::uint8_t> save_model(const DetectorModel& model);
DetectorModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace djd
