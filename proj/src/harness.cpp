#include "djd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "djd/detector.hpp"
#include "djd/error.hpp"
#include "djd/io_util.hpp"
#include "djd/rng.hpp"

namespace djd {

namespace {

// Separable clamp-to-edge box blur, applied three times for a near-Gaussian kernel.
void blur(std::vector<double>& field, int w, int h, int radius) {
  if (radius <= 0) return;
  std::vector<double> tmp(field.size());
  const double norm = 1.0 / (2 * radius + 1);
  for (int pass = 0; pass < 3; ++pass) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += field[static_cast<std::size_t>(y) * w + std::clamp(x + k, 0, w - 1)];
        tmp[static_cast<std::size_t>(y) * w + x] = acc * norm;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
        field[static_cast<std::size_t>(y) * w + x] = acc * norm;
      }
  }
}

void normalize_unit(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(v.size()));
  for (double& x : v) x = sd > 0 ? (x - mean) / sd : 0.0;
}

double variance(const GrayImage& img) {
  double mean = 0.0;
  for (auto s : img.samples) mean += s;
  mean /= static_cast<double>(img.samples.size());
  double var = 0.0;
  for (auto s : img.samples) var += (s - mean) * (s - mean);
  return var / static_cast<double>(img.samples.size());
}

GrayImage generate(const SyntheticSpec& spec, std::uint64_t seed) {
  const int w = spec.width, h = spec.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  Rng rng(seed);
  std::vector<double> texture(n, 0.0);
  constexpr int kOctaves = 4;
  for (int o = 0; o < kOctaves; ++o) {
    std::vector<double> layer(n);
    for (auto& v : layer) v = rng.normal();
    blur(layer, w, h, static_cast<int>(std::lround(spec.smoothing_radius * (1 << o))));
    normalize_unit(layer);
    const double weight = rng.uniform(0.5, 1.5) / (o + 1);
    for (std::size_t i = 0; i < n; ++i) texture[i] += weight * layer[i];
  }
  normalize_unit(texture);

  std::vector<double> smooth(n);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double freq = rng.uniform(0.5, 2.5) * 2.0 * std::numbers::pi / std::max(w, h);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ramp_x = std::cos(angle), ramp_y = std::sin(angle);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = (x * ramp_x + y * ramp_y) / std::max(w, h);
      smooth[static_cast<std::size_t>(y) * w + x] = u + 0.5 * std::sin(freq * (x * ramp_y - y * ramp_x) + phase);
    }
  normalize_unit(smooth);

  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = (1.0 - spec.gradient_mix) * texture[i] + spec.gradient_mix * smooth[i];
  const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
  const double low = *lo, span = std::max(*hi - *lo, 1e-12);

  GrayImage img(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = 255.0 * (field[i] - low) / span + spec.noise_amplitude * rng.normal();
    img.samples[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return img;
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::string cell_name(int q1, int q2) { return "Q" + std::to_string(q1) + "_Q" + std::to_string(q2) + ".json"; }

nlohmann::ordered_json cell_json(const CellResult& c) {
  return {{"q1", c.q1}, {"q2", c.q2}, {"mean", c.mean}, {"std", c.stddev},
          {"n", c.accuracies.size()}, {"accuracies", c.accuracies}};
}

CellResult cell_from_json(const nlohmann::json& j) {
  CellResult c;
  c.q1 = j.at("q1").get<int>();
  c.q2 = j.at("q2").get<int>();
  c.mean = j.at("mean").get<double>();
  c.stddev = j.at("std").get<double>();
  c.accuracies = j.at("accuracies").get<std::vector<double>>();
  return c;
}

FeatureKind kind_from_name(const std::string& s) {
  if (s == "global") return FeatureKind::Global;
  if (s == "combined") return FeatureKind::Combined;
  throw Error(ErrorCode::BadConfig, "feature_kind must be 'global' or 'combined', got '" + s + "'");
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.count < 1) throw Error(ErrorCode::InvalidSpec, "image count must be positive");
  if (spec.width < 24 || spec.height < 24 || spec.width % 8 || spec.height % 8) {
    throw Error(ErrorCode::InvalidSpec, "synthetic images must be multiples of 8 and at least 24x24");
  }
  if (spec.smoothing_radius < 0 || spec.noise_amplitude < 0 || spec.gradient_mix < 0 || spec.gradient_mix > 1) {
    throw Error(ErrorCode::InvalidSpec, "texture parameters out of range");
  }
}

GrayImage synth_image(const SyntheticSpec& spec, std::size_t index) {
  validate(spec);
  // Flat outputs are rejected and redrawn with the next sub-seed.
  for (std::uint64_t attempt = 0;; ++attempt) {
    GrayImage img = generate(spec, stable_hash({spec.seed, index, attempt}));
    if (variance(img) >= 1.0) return img;
  }
}

std::vector<GrayImage> synth_corpus(const SyntheticSpec& spec) {
  validate(spec);
  std::vector<GrayImage> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) out.push_back(synth_image(spec, static_cast<std::size_t>(i)));
  return out;
}

std::vector<GrayImage> load_raw_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<GrayImage> out;
  for (const auto& f : files) {
    const auto bytes = read_file(f);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) continue;
    out.push_back(crop_to_blocks(decode_pnm(bytes)));
  }
  if (out.empty()) throw Error(ErrorCode::IoError, "no PGM/PPM images in " + dir.string());
  return out;
}

PlaneSet build_pair_corpus(const std::vector<GrayImage>& images, int q1, int q2) {
  if (q1 == q2) throw Error(ErrorCode::EqualQualities, "single/double pairs need Q1 != Q2");
  PlaneSet set;
  set.planes.reserve(images.size() * 2);
  for (std::size_t i = 0; i < images.size(); ++i) {
    set.planes.push_back(compress_once(images[i], q2));
    set.labels.push_back(Label::Single);
    set.image_index.push_back(i);
    set.planes.push_back(compress_twice(images[i], q1, q2));
    set.labels.push_back(Label::Double);
    set.image_index.push_back(i);
  }
  return set;
}

Split split_train_test(std::size_t n, std::size_t train_count, std::uint64_t seed) {
  if (train_count == 0 || train_count >= n) {
    throw Error(ErrorCode::BadCount, "train count " + std::to_string(train_count) + " must lie in (0, " +
                                         std::to_string(n) + ")");
  }
  const auto perm = permutation(n, seed);
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_count));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_count), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

ExperimentConfig full_scale_config() {
  ExperimentConfig cfg;
  cfg.synthetic.count = 1338;
  cfg.synthetic.width = 512;
  cfg.synthetic.height = 384;
  cfg.qualities = {50, 55, 60, 65, 70, 75, 80, 85, 90, 95};
  cfg.train_count = 1138;
  cfg.repetitions = 20;
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.qualities.size() < 2) throw Error(ErrorCode::BadConfig, "need at least two quality values");
  for (int q : cfg.qualities) {
    if (q < 1 || q > 100) throw Error(ErrorCode::QualityOutOfRange, "quality " + std::to_string(q));
  }
  auto sorted = cfg.qualities;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw Error(ErrorCode::BadConfig, "duplicate quality values");
  if (cfg.repetitions < 1) throw Error(ErrorCode::BadConfig, "repetitions must be >= 1");
  if (cfg.feature_kind != FeatureKind::Global && cfg.feature_kind != FeatureKind::Combined) {
    throw Error(ErrorCode::BadConfig, "experiments run on global or combined features");
  }
  if (!cfg.train_count && !(cfg.train_fraction > 0 && cfg.train_fraction < 1)) {
    throw Error(ErrorCode::BadConfig, "train_fraction must lie in (0,1)");
  }
  if (!(cfg.svm.c > 0)) throw Error(ErrorCode::BadConfig, "SVM C must be positive");
  if (cfg.workers < 1) throw Error(ErrorCode::BadConfig, "workers must be >= 1");
  if (!cfg.raw_dir) validate(cfg.synthetic);
}

std::size_t resolved_train_count(const ExperimentConfig& cfg, std::size_t corpus_size) {
  if (cfg.train_count) return *cfg.train_count;
  return static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(corpus_size)));
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["raw_dir"] = cfg.raw_dir ? nlohmann::ordered_json(*cfg.raw_dir) : nlohmann::ordered_json(nullptr);
  j["synthetic"] = {{"count", cfg.synthetic.count},
                    {"width", cfg.synthetic.width},
                    {"height", cfg.synthetic.height},
                    {"seed", cfg.synthetic.seed},
                    {"smoothing_radius", cfg.synthetic.smoothing_radius},
                    {"noise_amplitude", cfg.synthetic.noise_amplitude},
                    {"gradient_mix", cfg.synthetic.gradient_mix}};
  j["qualities"] = cfg.qualities;
  j["feature_kind"] = to_string(cfg.feature_kind);
  j["directions"] = cfg.directions == DirectionSet::Twelve ? 12 : 4;
  j["train_count"] = cfg.train_count ? nlohmann::ordered_json(*cfg.train_count) : nlohmann::ordered_json(nullptr);
  j["train_fraction"] = cfg.train_fraction;
  j["repetitions"] = cfg.repetitions;
  j["seed"] = cfg.seed;
  j["svm"] = {{"c", cfg.svm.c}, {"gamma", cfg.svm.gamma}, {"coef0", cfg.svm.coef0}, {"tolerance", cfg.svm.tolerance}};
  j["pca_dim"] = cfg.pca_dim;
  j["shuffle_labels"] = cfg.shuffle_labels;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig cfg) {
  try {
    if (j.contains("raw_dir")) {
      if (j["raw_dir"].is_null()) cfg.raw_dir.reset();
      else cfg.raw_dir = j["raw_dir"].get<std::string>();
    }
    if (j.contains("synthetic")) {
      const auto& s = j["synthetic"];
      cfg.synthetic.count = s.value("count", cfg.synthetic.count);
      cfg.synthetic.width = s.value("width", cfg.synthetic.width);
      cfg.synthetic.height = s.value("height", cfg.synthetic.height);
      cfg.synthetic.seed = s.value("seed", cfg.synthetic.seed);
      cfg.synthetic.smoothing_radius = s.value("smoothing_radius", cfg.synthetic.smoothing_radius);
      cfg.synthetic.noise_amplitude = s.value("noise_amplitude", cfg.synthetic.noise_amplitude);
      cfg.synthetic.gradient_mix = s.value("gradient_mix", cfg.synthetic.gradient_mix);
    }
    if (j.contains("qualities")) cfg.qualities = j["qualities"].get<std::vector<int>>();
    if (j.contains("feature_kind")) cfg.feature_kind = kind_from_name(j["feature_kind"].get<std::string>());
    if (j.contains("directions")) {
      const int d = j["directions"].get<int>();
      if (d != 12 && d != 4) throw Error(ErrorCode::BadConfig, "directions must be 12 or 4");
      cfg.directions = d == 12 ? DirectionSet::Twelve : DirectionSet::Four;
    }
    if (j.contains("train_count")) {
      if (j["train_count"].is_null()) cfg.train_count.reset();
      else cfg.train_count = j["train_count"].get<std::size_t>();
    }
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("svm")) {
      const auto& s = j["svm"];
      cfg.svm.c = s.value("c", cfg.svm.c);
      cfg.svm.gamma = s.value("gamma", cfg.svm.gamma);
      cfg.svm.coef0 = s.value("coef0", cfg.svm.coef0);
      cfg.svm.tolerance = s.value("tolerance", cfg.svm.tolerance);
    }
    cfg.pca_dim = j.value("pca_dim", cfg.pca_dim);
    cfg.shuffle_labels = j.value("shuffle_labels", cfg.shuffle_labels);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }
  return cfg;
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  auto j = to_json(cfg);
  j.erase("workers");  // scheduling only; results do not depend on it
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const CellResult* AccuracyGrid::find(int q1, int q2) const {
  for (const auto& c : cells)
    if (c.q1 == q1 && c.q2 == q2) return &c;
  return nullptr;
}

Matrix extract_features(const std::vector<CoefficientPlane>& planes, FeatureKind kind, DirectionSet directions) {
  Matrix out;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const FeatureVector fv = kind == FeatureKind::Combined ? combined_feature(planes[i])
                                                           : global_feature(planes[i], kDefaultThreshold, directions);
    if (i == 0) out.resize(static_cast<Eigen::Index>(planes.size()), static_cast<Eigen::Index>(fv.values.size()));
    out.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Vector>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size()));
  }
  return out;
}

CellResult run_cell(const ExperimentConfig& cfg, const std::vector<GrayImage>& images, int q1, int q2,
                    std::vector<RepetitionStats>* stats) {
  const PlaneSet set = build_pair_corpus(images, q1, q2);
  const Matrix features = extract_features(set.planes, cfg.feature_kind, cfg.directions);
  const std::size_t train_images = resolved_train_count(cfg, images.size());

  CellResult cell;
  cell.q1 = q1;
  cell.q2 = q2;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t rep_seed = stable_hash({cfg.seed, static_cast<std::uint64_t>(q1), static_cast<std::uint64_t>(q2),
                                                static_cast<std::uint64_t>(rep)});
    const Split split = split_train_test(images.size(), train_images, rep_seed);

    auto gather = [&](const std::vector<std::size_t>& imgs, Matrix& x, std::vector<int>& y) {
      x.resize(static_cast<Eigen::Index>(imgs.size() * 2), features.cols());
      y.clear();
      Eigen::Index r = 0;
      for (std::size_t img : imgs) {
        for (std::size_t row = 2 * img; row < 2 * img + 2; ++row) {
          x.row(r++) = features.row(static_cast<Eigen::Index>(row));
          y.push_back(set.labels[row] == Label::Double ? 1 : -1);
        }
      }
    };
    Matrix xtrain, xtest;
    std::vector<int> ytrain, ytest;
    gather(split.train, xtrain, ytrain);
    gather(split.test, xtest, ytest);
    if (cfg.shuffle_labels) {
      // Random labels balanced inside each true class, so they carry no class information even
      // in-sample; a plain permutation leaves a chance correlation the SVM can latch onto.
      Rng shuffle_rng(stable_hash({rep_seed, 0x5348554646ULL}));
      const std::vector<int> truth = ytrain;
      for (int cls : {-1, 1}) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < truth.size(); ++i)
          if (truth[i] == cls) rows.push_back(i);
        const auto perm = permutation(rows.size(), shuffle_rng.next());
        for (std::size_t k = 0; k < rows.size(); ++k) ytrain[rows[perm[k]]] = k < rows.size() / 2 ? -1 : 1;
      }
    }

    DetectorConfig dc;
    dc.feature_kind = cfg.feature_kind;
    dc.directions = cfg.directions;
    dc.svm = cfg.svm;
    dc.svm.seed = rep_seed;
    if (cfg.pca_dim >= 0) {
      dc.pca_dim = cfg.pca_dim;
    } else {
      dc.pca_dim = cfg.feature_kind == FeatureKind::Combined ? default_pca_dim(ytrain.size()) : 0;
    }
    const DetectorModel model = fit_detector(xtrain, ytrain, dc);
    const Matrix prepared = model.prepare_rows(xtest);
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < prepared.rows(); ++r) {
      const bool is_double = svm_decision(model.svm, prepared.row(r).transpose()) > 0;
      if (is_double == (ytest[static_cast<std::size_t>(r)] == 1)) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(ytest.size());
    cell.accuracies.push_back(acc);
    if (stats) stats->push_back({ytrain.size(), ytest.size(), acc});
  }
  cell.mean = std::accumulate(cell.accuracies.begin(), cell.accuracies.end(), 0.0) / static_cast<double>(cell.accuracies.size());
  cell.stddev = sample_stddev(cell.accuracies);
  return cell;
}

AccuracyGrid run_grid(const ExperimentConfig& cfg, const std::vector<GrayImage>& images, const GridOptions& opts) {
  validate(cfg);
  AccuracyGrid grid;
  grid.fingerprint = config_fingerprint(cfg);
  grid.config = to_json(cfg);
  grid.config.erase("workers");

  std::vector<std::pair<int, int>> keys;
  for (int q1 : cfg.qualities)
    for (int q2 : cfg.qualities)
      if (q1 != q2) keys.emplace_back(q1, q2);
  std::sort(keys.begin(), keys.end());

  std::vector<std::optional<CellResult>> results(keys.size());
  if (opts.checkpoint_dir) std::filesystem::create_directories(*opts.checkpoint_dir);
  if (opts.resume && opts.checkpoint_dir) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto path = *opts.checkpoint_dir / cell_name(keys[i].first, keys[i].second);
      if (!std::filesystem::exists(path)) continue;
      try {
        const auto bytes = read_file(path);
        const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
        if (j.at("fingerprint").get<std::string>() == grid.fingerprint) results[i] = cell_from_json(j.at("cell"));
      } catch (const std::exception&) {
        // unreadable checkpoint: recompute the cell
      }
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (!results[i]) pending.push_back(i);
  if (opts.max_new_cells && pending.size() > *opts.max_new_cells) pending.resize(*opts.max_new_cells);

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t i = pending[slot];
      try {
        CellResult cell = run_cell(cfg, images, keys[i].first, keys[i].second);
        if (opts.checkpoint_dir) {
          nlohmann::ordered_json j = {{"fingerprint", grid.fingerprint}, {"cell", cell_json(cell)}};
          write_file_atomic(*opts.checkpoint_dir / cell_name(cell.q1, cell.q2), j.dump(2) + "\n");
        }
        std::lock_guard lock(report_mutex);
        results[i] = cell;
        if (opts.on_cell) opts.on_cell(cell);
      } catch (const Error& e) {
        std::lock_guard lock(report_mutex);
        if (!failure) {
          const std::string where = "cell Q1=" + std::to_string(keys[i].first) + " Q2=" + std::to_string(keys[i].second);
          failure = std::make_exception_ptr(Error(e.code(), where + ": " + e.detail()));
        }
        next = pending.size();
        return;
      } catch (...) {
        std::lock_guard lock(report_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = pending.size();
        return;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(pending.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& r : results)
    if (r) grid.cells.push_back(*r);
  return grid;
}

std::vector<GrayImage> load_corpus(const ExperimentConfig& cfg) {
  if (cfg.raw_dir) return load_raw_dir(*cfg.raw_dir);
  return synth_corpus(cfg.synthetic);
}

std::string emit_csv(const AccuracyGrid& grid) {
  std::string out = "Q1,Q2,mean,std,n\n";
  char buf[128];
  for (const auto& c : grid.cells) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%zu\n", c.q1, c.q2, c.mean, c.stddev, c.accuracies.size());
    out += buf;
  }
  return out;
}

std::string emit_text(const AccuracyGrid& grid) {
  std::vector<int> qs;
  for (const auto& c : grid.cells) {
    qs.push_back(c.q1);
    qs.push_back(c.q2);
  }
  std::sort(qs.begin(), qs.end());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  char buf[64];
  std::string out = "Q1\\Q2";
  for (int q : qs) {
    std::snprintf(buf, sizeof buf, "%8d", q);
    out += buf;
  }
  out += "\n";
  for (int q1 : qs) {
    std::snprintf(buf, sizeof buf, "%-5d", q1);
    out += buf;
    for (int q2 : qs) {
      const CellResult* c = grid.find(q1, q2);
      if (q1 == q2) {
        out += "       —";
      } else if (c) {
        std::snprintf(buf, sizeof buf, "%8.4f", c->mean);
        out += buf;
      } else {
        out += "       .";
      }
    }
    out += "\n";
  }
  return out;
}

std::string emit_json(const AccuracyGrid& grid) {
  nlohmann::ordered_json j;
  j["fingerprint"] = grid.fingerprint;
  j["config"] = grid.config;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : grid.cells) j["cells"].push_back(cell_json(c));
  return j.dump(2) + "\n";
}

AccuracyGrid grid_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    AccuracyGrid g;
    g.fingerprint = j.at("fingerprint").get<std::string>();
    g.config = j.at("config");
    for (const auto& c : j.at("cells")) g.cells.push_back(cell_from_json(c));
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("grid JSON: ") + e.what());
  }
}

void write_grid_reports(const AccuracyGrid& grid, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "grid.csv", emit_csv(grid));
  write_file_atomic(dir / "grid.json", emit_json(grid));
  write_file_atomic(dir / "grid.txt", emit_text(grid));
}

}  // namespace djd
