#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace djd {

enum class ErrorCode {
  // jpeg_model
  ImageTooSmall,
  QualityOutOfRange,
  // raw image / generic I/O
  BadImageFile,
  IoError,
  // jpeg_codestream
  NotAJpeg,
  UnsupportedMode,
  TruncatedStream,
  InvalidHuffman,
  MissingTable,
  CoefficientOutOfRange,
  MalformedSegment,
  // features
  MatrixTooSmall,
  ThresholdMismatch,
  BadFeatureFile,
  // learning
  TargetDimTooLarge,
  DegenerateData,
  DimensionMismatch,
  SingleClassData,
  NonFiniteFeature,
  VersionMismatch,
  ChecksumMismatch,
  // harness
  InvalidSpec,
  EqualQualities,
  BadCount,
  BadConfig,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. `code()` is stable; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace djd
