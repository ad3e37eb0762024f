#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "djd/jpeg_model.hpp"

namespace djd {

/// Dense row-major integer matrix; holds |I_Q|, mode sub-matrices and truncated differences.
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int32_t> values;

  IntMatrix() = default;
  IntMatrix(int r, int c, std::int32_t fill = 0) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  std::int32_t at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  std::int32_t& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }

  bool operator==(const IntMatrix&) const = default;
};

using MagnitudeMatrix = IntMatrix;

struct Direction {
  int index;  // 1..12
  int dr;
  int dc;
};

/// Neighbor offsets of the twelve high-pass templates, index 1..12 in order.
inline constexpr std::array<Direction, 12> kDirections = {{{1, 0, 1},
                                                           {2, 1, 0},
                                                           {3, 1, 1},
                                                           {4, 1, -1},
                                                           {5, 0, 2},
                                                           {6, 2, 0},
                                                           {7, 1, 2},
                                                           {8, 2, 2},
                                                           {9, 2, 1},
                                                           {10, 2, -1},
                                                           {11, 2, -2},
                                                           {12, 1, -2}}};

inline constexpr int kDefaultThreshold = 4;
inline constexpr int kMergedGroups = 10;
inline constexpr int kFoldedClasses = 41;
inline constexpr int kGlobalDim = kMergedGroups * kFoldedClasses;  // 410
inline constexpr int kFourDirectionDim = 3 * kFoldedClasses;       // 123, directions 1..4 only
inline constexpr int kUnitDim = kMergedGroups * 81;                // 810
inline constexpr int kModeCount = 20;
inline constexpr int kCombinedDim = (kModeCount + 1) * kUnitDim;   // 17010

struct DiffMatrix {
  IntMatrix values;  // entries in [-threshold, threshold]
  int threshold = kDefaultThreshold;
  Direction direction{1, 0, 1};
};

/// P(next = q | current = p), (p,q) in [-T,T]^2, row-major from p = -T.
struct TransitionMatrix {
  int threshold = kDefaultThreshold;
  std::vector<double> probs;

  TransitionMatrix() = default;
  explicit TransitionMatrix(int t) : threshold(t), probs(static_cast<std::size_t>(2 * t + 1) * (2 * t + 1), 0.0) {}

  int side() const { return 2 * threshold + 1; }
  double at(int p, int q) const { return probs[static_cast<std::size_t>(p + threshold) * side() + (q + threshold)]; }
  double& at(int p, int q) { return probs[static_cast<std::size_t>(p + threshold) * side() + (q + threshold)]; }

  bool operator==(const TransitionMatrix&) const = default;
};

enum class FeatureKind : std::uint8_t { Global = 0, Unit = 1, Combined = 2, Projected = 3 };

const char* to_string(FeatureKind kind);

struct FeatureVector {
  FeatureKind kind = FeatureKind::Global;
  std::vector<double> values;
};

/// Which coordinate a raw feature index denotes. `unit` 0 is the full grid, 1..20 the modes;
/// `group` indexes the merged direction groups [1+2, 3, 4, 5+6, 7, 8, 9, 10, 11, 12].
struct CoordinateInfo {
  int unit;
  int group;
  int p;
  int q;
};

CoordinateInfo describe_coordinate(FeatureKind kind, int index);

/// Natural (row-major) position of the k-th AC mode in zig-zag order, k in 1..20.
int mode_position(int k);

MagnitudeMatrix magnitude(const CoefficientPlane& plane);
DiffMatrix diff_matrix(const MagnitudeMatrix& m, const Direction& d, int threshold = kDefaultThreshold);
TransitionMatrix transition_matrix(const DiffMatrix& diff);
std::vector<TransitionMatrix> merge_pairs(const std::vector<TransitionMatrix>& twelve);
std::array<double, kFoldedClasses> sign_fold(const TransitionMatrix& p);

/// Full-direction feature (410 values) or the four-neighbor ablation (directions 1..4, 123 values).
enum class DirectionSet { Twelve, Four };

FeatureVector global_feature(const CoefficientPlane& plane, int threshold = kDefaultThreshold,
                             DirectionSet directions = DirectionSet::Twelve);
MagnitudeMatrix mode_submatrix(const CoefficientPlane& plane, int k);
FeatureVector unit_feature(const MagnitudeMatrix& m, int threshold = kDefaultThreshold);
FeatureVector combined_feature(const CoefficientPlane& plane);

}  // namespace djd
