#include "djd/error.hpp"

namespace djd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::QualityOutOfRange: return "QualityOutOfRange";
    case ErrorCode::BadImageFile: return "BadImageFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NotAJpeg: return "NotAJpeg";
    case ErrorCode::UnsupportedMode: return "UnsupportedMode";
    case ErrorCode::TruncatedStream: return "TruncatedStream";
    case ErrorCode::InvalidHuffman: return "InvalidHuffman";
    case ErrorCode::MissingTable: return "MissingTable";
    case ErrorCode::CoefficientOutOfRange: return "CoefficientOutOfRange";
    case ErrorCode::MalformedSegment: return "MalformedSegment";
    case ErrorCode::MatrixTooSmall: return "MatrixTooSmall";
    case ErrorCode::ThresholdMismatch: return "ThresholdMismatch";
    case ErrorCode::BadFeatureFile: return "BadFeatureFile";
    case ErrorCode::TargetDimTooLarge: return "TargetDimTooLarge";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EqualQualities: return "EqualQualities";
    case ErrorCode::BadCount: return "BadCount";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace djd
