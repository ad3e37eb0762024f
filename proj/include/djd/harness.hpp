#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "djd/feature_io.hpp"
#include "djd/features.hpp"
#include "djd/image.hpp"
#include "djd/jpeg_model.hpp"
#include "djd/learning.hpp"

namespace djd {

struct SyntheticSpec {
  int count = 200;
  int width = 128;
  int height = 128;
  std::uint64_t seed = 1;
  double smoothing_radius = 2.0;  // base blur radius in pixels; coarser octaves double it
  double noise_amplitude = 3.0;   // std-dev of per-pixel grain added after range stretching
  double gradient_mix = 0.3;      // weight of the smooth ramp/sinusoid layer
};

void validate(const SyntheticSpec& spec);

/// Seeded pseudo-natural grayscale images: multi-octave low-pass noise over smooth gradients,
/// stretched to the full [0,255] range, plus fine grain.
std::vector<GrayImage> synth_corpus(const SyntheticSpec& spec);
GrayImage synth_image(const SyntheticSpec& spec, std::size_t index);

/// Every P5/P6 file in `dir` (sorted by name), cropped to block alignment.
std::vector<GrayImage> load_raw_dir(const std::filesystem::path& dir);

/// Planes 2i and 2i+1 come from image i: compress_once at q2 (single) and compress_twice q1->q2 (double).
struct PlaneSet {
  std::vector<CoefficientPlane> planes;
  std::vector<Label> labels;
  std::vector<std::size_t> image_index;
};

PlaneSet build_pair_corpus(const std::vector<GrayImage>& images, int q1, int q2);

struct Split {
  std::vector<std::size_t> train;  // image indices, ascending
  std::vector<std::size_t> test;
};

Split split_train_test(std::size_t n, std::size_t train_count, std::uint64_t seed);

struct ExperimentConfig {
  std::optional<std::string> raw_dir;
  SyntheticSpec synthetic;
  std::vector<int> qualities = {50, 70, 90};
  FeatureKind feature_kind = FeatureKind::Global;
  DirectionSet directions = DirectionSet::Twelve;
  std::optional<std::size_t> train_count;
  double train_fraction = 0.75;
  int repetitions = 5;
  std::uint64_t seed = 2024;
  SvmParams svm;
  int pca_dim = -1;  // -1 picks min(1300, train rows - 1); 0 disables
  bool shuffle_labels = false;
  int workers = 1;
};

/// Settings mirroring the full-size protocol: ten qualities, 1338 images with 1138 for training,
/// twenty repetitions.
ExperimentConfig full_scale_config();

void validate(const ExperimentConfig& cfg);
std::size_t resolved_train_count(const ExperimentConfig& cfg, std::size_t corpus_size);

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
std::string config_fingerprint(const ExperimentConfig& cfg);

struct CellResult {
  int q1 = 0;
  int q2 = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> accuracies;

  bool operator==(const CellResult&) const = default;
};

struct AccuracyGrid {
  std::string fingerprint;
  nlohmann::ordered_json config;
  std::vector<CellResult> cells;  // sorted by (q1, q2)

  const CellResult* find(int q1, int q2) const;
  bool operator==(const AccuracyGrid& o) const { return fingerprint == o.fingerprint && cells == o.cells; }
};

/// Feature rows for a set of planes, in plane order.
Matrix extract_features(const std::vector<CoefficientPlane>& planes, FeatureKind kind, DirectionSet directions);

struct RepetitionStats {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  double accuracy = 0.0;
};

/// One (Q1,Q2) cell: features extracted once, then `repetitions` random splits.
CellResult run_cell(const ExperimentConfig& cfg, const std::vector<GrayImage>& images, int q1, int q2,
                    std::vector<RepetitionStats>* stats = nullptr);

struct GridOptions {
  std::optional<std::filesystem::path> checkpoint_dir;  // cells/Q{Q1}_Q{Q2}.json live here
  bool resume = false;
  std::optional<std::size_t> max_new_cells;  // stop after computing this many cells (interrupt simulation)
  std::function<void(const CellResult&)> on_cell;
};

AccuracyGrid run_grid(const ExperimentConfig& cfg, const std::vector<GrayImage>& images, const GridOptions& opts = {});

/// Corpus named by the config: raw_dir if set, else the synthetic generator.
std::vector<GrayImage> load_corpus(const ExperimentConfig& cfg);

std::string emit_csv(const AccuracyGrid& grid);
std::string emit_text(const AccuracyGrid& grid);
std::string emit_json(const AccuracyGrid& grid);
AccuracyGrid grid_from_json(const std::string& text);

/// Writes grid.csv, grid.json and grid.txt into `dir` atomically.
void write_grid_reports(const AccuracyGrid& grid, const std::filesystem::path& dir);

}  // namespace djd
