#include "djd/features.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "djd/error.hpp"

namespace djd {

namespace {

void require_min_grid(int rows, int cols, int min_rows, int min_cols, const char* what) {
  if (rows < min_rows || cols < min_cols) {
    throw Error(ErrorCode::MatrixTooSmall, std::string(what) + " is " + std::to_string(rows) + "x" +
                                               std::to_string(cols) + ", need at least " + std::to_string(min_rows) +
                                               "x" + std::to_string(min_cols));
  }
}

// Pair counts along the diff's own direction; a direction reaching past D leaves everything zero.
TransitionMatrix transition_from_counts(const DiffMatrix& diff) {
  const int t = diff.threshold;
  const int side = 2 * t + 1;
  const auto& d = diff.values;
  const int dr = diff.direction.dr, dc = diff.direction.dc;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(side) * side, 0);
  const int c0 = std::max(0, -dc);
  const int c1 = d.cols - std::max(0, dc);
  for (int r = 0; r + dr < d.rows; ++r)
    for (int c = c0; c < c1; ++c) {
      counts[static_cast<std::size_t>(d.at(r, c) + t) * side + (d.at(r + dr, c + dc) + t)]++;
    }
  TransitionMatrix out(t);
  for (int p = 0; p < side; ++p) {
    std::int64_t row_total = 0;
    for (int q = 0; q < side; ++q) row_total += counts[static_cast<std::size_t>(p) * side + q];
    if (row_total == 0) continue;
    for (int q = 0; q < side; ++q) {
      out.probs[static_cast<std::size_t>(p) * side + q] =
          static_cast<double>(counts[static_cast<std::size_t>(p) * side + q]) / static_cast<double>(row_total);
    }
  }
  return out;
}

std::vector<TransitionMatrix> direction_tpms(const MagnitudeMatrix& m, int threshold, std::size_t count) {
  std::vector<TransitionMatrix> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(transition_from_counts(diff_matrix(m, kDirections[i], threshold)));
  }
  return out;
}

}  // namespace

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Global: return "global";
    case FeatureKind::Unit: return "unit";
    case FeatureKind::Combined: return "combined";
    case FeatureKind::Projected: return "projected";
  }
  return "unknown";
}

CoordinateInfo describe_coordinate(FeatureKind kind, int index) {
  if (kind == FeatureKind::Global) {
    if (index < 0 || index >= kGlobalDim) throw Error(ErrorCode::DimensionMismatch, "global index out of range");
    const int group = index / kFoldedClasses;
    int cls = index % kFoldedClasses;
    // canonical classes: p = 0 with q in [0,4], then p = 1..4 with q in [-4,4]
    if (cls < 5) return {0, group, 0, cls};
    cls -= 5;
    return {0, group, 1 + cls / 9, cls % 9 - 4};
  }
  if (kind == FeatureKind::Unit || kind == FeatureKind::Combined) {
    const int limit = kind == FeatureKind::Unit ? kUnitDim : kCombinedDim;
    if (index < 0 || index >= limit) throw Error(ErrorCode::DimensionMismatch, "feature index out of range");
    const int unit = index / kUnitDim;
    const int within = index % kUnitDim;
    const int entry = within % 81;
    return {unit, within / 81, entry / 9 - 4, entry % 9 - 4};
  }
  throw Error(ErrorCode::DimensionMismatch, "projected coordinates carry no feature layout");
}

int mode_position(int k) {
  if (k < 1 || k > kModeCount) throw Error(ErrorCode::DimensionMismatch, "mode index " + std::to_string(k) + " not in 1..20");
  return kZigZag[k];
}

MagnitudeMatrix magnitude(const CoefficientPlane& plane) {
  MagnitudeMatrix m(plane.rows(), plane.cols());
  std::transform(plane.coeffs.begin(), plane.coeffs.end(), m.values.begin(), [](std::int32_t v) { return std::abs(v); });
  return m;
}

DiffMatrix diff_matrix(const MagnitudeMatrix& m, const Direction& d, int threshold) {
  require_min_grid(m.rows, m.cols, d.dr + 1, std::abs(d.dc) + 1, "magnitude matrix");
  DiffMatrix out;
  out.threshold = threshold;
  out.direction = d;
  out.values = IntMatrix(m.rows - d.dr, m.cols - std::abs(d.dc));
  const int c0 = std::max(0, -d.dc);
  for (int r = 0; r < out.values.rows; ++r)
    for (int c = 0; c < out.values.cols; ++c) {
      const int diff = m.at(r, c + c0) - m.at(r + d.dr, c + c0 + d.dc);
      out.values.at(r, c) = std::clamp(diff, -threshold, threshold);
    }
  return out;
}

TransitionMatrix transition_matrix(const DiffMatrix& diff) {
  const auto& d = diff.direction;
  require_min_grid(diff.values.rows, diff.values.cols, d.dr + 1, std::abs(d.dc) + 1, "difference matrix");
  return transition_from_counts(diff);
}

std::vector<TransitionMatrix> merge_pairs(const std::vector<TransitionMatrix>& twelve) {
  if (twelve.size() != 12) throw Error(ErrorCode::DimensionMismatch, "merge_pairs needs twelve matrices");
  for (const auto& p : twelve) {
    if (p.probs.size() != twelve[0].probs.size()) throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
  }
  auto average = [](const TransitionMatrix& a, const TransitionMatrix& b) {
    TransitionMatrix out(a.threshold);
    for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] = (a.probs[i] + b.probs[i]) / 2.0;
    return out;
  };
  std::vector<TransitionMatrix> out;
  out.reserve(kMergedGroups);
  out.push_back(average(twelve[0], twelve[1]));
  out.push_back(twelve[2]);
  out.push_back(twelve[3]);
  out.push_back(average(twelve[4], twelve[5]));
  for (int i = 6; i < 12; ++i) out.push_back(twelve[i]);
  return out;
}

std::array<double, kFoldedClasses> sign_fold(const TransitionMatrix& p) {
  if (p.threshold != kDefaultThreshold) {
    throw Error(ErrorCode::ThresholdMismatch, "folded layout is defined for T=4 only, got T=" + std::to_string(p.threshold));
  }
  std::array<double, kFoldedClasses> out{};
  std::size_t k = 0;
  const int t = p.threshold;
  for (int a = -t; a <= t; ++a)
    for (int b = -t; b <= t; ++b) {
      if (a > 0 || (a == 0 && b >= 0)) out[k++] = (p.at(a, b) + p.at(-a, -b)) / 2.0;
    }
  return out;
}

FeatureVector global_feature(const CoefficientPlane& plane, int threshold, DirectionSet directions) {
  if (threshold != kDefaultThreshold) {
    throw Error(ErrorCode::ThresholdMismatch, "global feature layout is defined for T=4 only");
  }
  require_min_grid(plane.rows(), plane.cols(), 3, 3, "coefficient grid");
  const auto m = magnitude(plane);
  FeatureVector fv;
  fv.kind = FeatureKind::Global;
  if (directions == DirectionSet::Four) {
    auto tpms = direction_tpms(m, threshold, 4);
    TransitionMatrix first(threshold);
    for (std::size_t i = 0; i < first.probs.size(); ++i) first.probs[i] = (tpms[0].probs[i] + tpms[1].probs[i]) / 2.0;
    for (const auto* g : {&first, &tpms[2], &tpms[3]}) {
      const auto folded = sign_fold(*g);
      fv.values.insert(fv.values.end(), folded.begin(), folded.end());
    }
    return fv;
  }
  fv.values.reserve(kGlobalDim);
  for (const auto& g : merge_pairs(direction_tpms(m, threshold, 12))) {
    const auto folded = sign_fold(g);
    fv.values.insert(fv.values.end(), folded.begin(), folded.end());
  }
  return fv;
}

MagnitudeMatrix mode_submatrix(const CoefficientPlane& plane, int k) {
  require_min_grid(plane.block_rows, plane.block_cols, 1, 1, "block grid");
  const int pos = mode_position(k);
  const int u = pos / 8, v = pos % 8;
  MagnitudeMatrix m(plane.block_rows, plane.block_cols);
  for (int r = 0; r < plane.block_rows; ++r)
    for (int c = 0; c < plane.block_cols; ++c) m.at(r, c) = std::abs(plane.coeff(r, c, u, v));
  return m;
}

FeatureVector unit_feature(const MagnitudeMatrix& m, int threshold) {
  if (threshold != kDefaultThreshold) throw Error(ErrorCode::ThresholdMismatch, "unit feature layout is defined for T=4 only");
  require_min_grid(m.rows, m.cols, 3, 3, "magnitude matrix");
  FeatureVector fv;
  fv.kind = FeatureKind::Unit;
  fv.values.reserve(kUnitDim);
  for (const auto& g : merge_pairs(direction_tpms(m, threshold, 12))) {
    fv.values.insert(fv.values.end(), g.probs.begin(), g.probs.end());
  }
  return fv;
}

FeatureVector combined_feature(const CoefficientPlane& plane) {
  require_min_grid(plane.block_rows, plane.block_cols, 3, 3, "block grid");
  FeatureVector fv;
  fv.kind = FeatureKind::Combined;
  fv.values.reserve(kCombinedDim);
  auto append = [&](const FeatureVector& unit) { fv.values.insert(fv.values.end(), unit.values.begin(), unit.values.end()); };
  append(unit_feature(magnitude(plane)));
  for (int k = 1; k <= kModeCount; ++k) append(unit_feature(mode_submatrix(plane, k)));
  return fv;
}

}  // namespace djd
