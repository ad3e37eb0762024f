#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include "djd/codestream.hpp"
#include "djd/detector.hpp"
#include "djd/error.hpp"
#include "djd/feature_io.hpp"
#include "djd/harness.hpp"
#include "djd/image.hpp"
#include "djd/io_util.hpp"

namespace djd::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::BadConfig:
    case ErrorCode::QualityOutOfRange:
    case ErrorCode::EqualQualities:
    case ErrorCode::BadCount:
    case ErrorCode::ThresholdMismatch:
      return static_cast<int>(Exit::Usage);
    default:
      return static_cast<int>(Exit::Input);
  }
}

int parse_int(const std::string& text, const char* what) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw UsageError(std::string(what) + ": not an integer: '" + text + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_int(piece, what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::pair<int, int> parse_pair(const std::string& text, const char* what) {
  const auto v = parse_int_list(text, what);
  if (v.size() != 2) throw UsageError(std::string(what) + " expects Q1,Q2");
  return {v[0], v[1]};
}

// "64" or "64x48"
std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    const int s = parse_int(text, "--size");
    return {s, s};
  }
  return {parse_int(text.substr(0, x), "--size"), parse_int(text.substr(x + 1), "--size")};
}

FeatureKind parse_kind(const std::string& s) {
  if (s == "global") return FeatureKind::Global;
  if (s == "combined") return FeatureKind::Combined;
  throw UsageError("--kind must be 'global' or 'combined'");
}

DirectionSet parse_directions(int n) {
  if (n == 12) return DirectionSet::Twelve;
  if (n == 4) return DirectionSet::Four;
  throw UsageError("--directions must be 12 or 4");
}

enum class FileType { Jpeg, Pnm, Unknown };

FileType sniff(std::span<const std::uint8_t> b) {
  if (b.size() >= 2 && b[0] == 0xFF && b[1] == 0xD8) return FileType::Jpeg;
  if (b.size() >= 2 && b[0] == 'P' && (b[1] == '5' || b[1] == '6')) return FileType::Pnm;
  return FileType::Unknown;
}

// Reads just enough of a file to sniff its type.
FileType sniff_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint8_t head[2] = {0, 0};
  in.read(reinterpret_cast<char*>(head), 2);
  return in.gcount() == 2 ? sniff(head) : FileType::Unknown;
}

// Files named on the command line, directories expanded one level to the JPEG/PNM files they hold, sorted by path.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && sniff_file(e.path()) != FileType::Unknown) files.push_back(e.path());
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the lowest-index failure is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (threads == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Prefixes library errors with the file that caused them.
template <typename Fn>
auto with_file(const fs::path& file, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), file.string() + ": " + e.detail());
  }
}

FeatureVector features_for(const CoefficientPlane& plane, FeatureKind kind, DirectionSet dirs, int threshold) {
  if (kind == FeatureKind::Combined) {
    if (threshold != kDefaultThreshold) throw Error(ErrorCode::ThresholdMismatch, "combined layout is defined for T=4 only");
    return combined_feature(plane);
  }
  return global_feature(plane, threshold, dirs);
}

Label parse_label(const std::string& s) {
  if (s == "single") return Label::Single;
  if (s == "double") return Label::Double;
  throw UsageError("--label must be 'single' or 'double'");
}

// ---------------------------------------------------------------------------------------------

struct GenOptions {
  std::string out;
  int count = 200;
  std::string size = "128";
  std::uint64_t seed = 1;
  double smoothing = SyntheticSpec{}.smoothing_radius;
  double noise = SyntheticSpec{}.noise_amplitude;
  double gradient_mix = SyntheticSpec{}.gradient_mix;
};

int cmd_gen(const GenOptions& o, std::ostream& out) {
  SyntheticSpec spec;
  spec.count = o.count;
  std::tie(spec.width, spec.height) = parse_size(o.size);
  spec.seed = o.seed;
  spec.smoothing_radius = o.smoothing;
  spec.noise_amplitude = o.noise;
  spec.gradient_mix = o.gradient_mix;
  validate(spec);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  json files = json::array();
  for (int i = 0; i < spec.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04d.pgm", i);
    const auto img = synth_image(spec, static_cast<std::size_t>(i));
    write_file_atomic(dir / name, std::span<const std::uint8_t>(encode_pgm(img)));
    files.push_back(name);
  }
  json manifest = {{"seed", spec.seed},
                   {"count", spec.count},
                   {"width", spec.width},
                   {"height", spec.height},
                   {"smoothing_radius", spec.smoothing_radius},
                   {"noise_amplitude", spec.noise_amplitude},
                   {"gradient_mix", spec.gradient_mix},
                   {"files", files}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  out << json{{"out", dir.string()}, {"count", spec.count}, {"width", spec.width}, {"height", spec.height}}.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------------------------

struct ExtractOptions {
  std::vector<std::string> inputs;
  std::optional<int> single_q;
  std::string double_q;
  std::string pair;
  std::string kind = "global";
  int directions = 12;
  int threshold = kDefaultThreshold;
  std::string label;
  std::string out;
  std::string labels_out;
  int workers = 1;
};

int cmd_extract(const ExtractOptions& o, std::ostream& out) {
  const FeatureKind kind = parse_kind(o.kind);
  const DirectionSet dirs = parse_directions(o.directions);
  if (kind == FeatureKind::Combined && dirs != DirectionSet::Twelve) throw UsageError("--directions 4 applies to global features only");
  const int modes = int(o.single_q.has_value()) + int(!o.double_q.empty()) + int(!o.pair.empty());
  if (modes > 1) throw UsageError("use only one of --single-q, --double-q, --pair");
  std::optional<std::pair<int, int>> dq, pq;
  if (!o.double_q.empty()) dq = parse_pair(o.double_q, "--double-q");
  if (!o.pair.empty()) pq = parse_pair(o.pair, "--pair");
  if (pq && pq->first == pq->second) throw Error(ErrorCode::EqualQualities, "--pair needs Q1 != Q2");
  std::optional<Label> jpeg_label;
  if (!o.label.empty()) jpeg_label = parse_label(o.label);

  const auto files = expand_inputs(o.inputs);
  if (files.empty()) throw UsageError("no input files");

  struct Row {
    FeatureVector fv;
    std::optional<Label> label;
  };
  std::vector<std::vector<Row>> per_file(files.size());
  parallel_for(files.size(), o.workers, [&](std::size_t i) {
    with_file(files[i], [&] {
      const auto bytes = read_file(files[i]);
      auto& rows = per_file[i];
      switch (sniff(bytes)) {
        case FileType::Jpeg: {
          if (modes > 0) throw UsageError(files[i].string() + ": quality flags apply to raw PGM/PPM inputs only");
          rows.push_back({features_for(parse_baseline(bytes), kind, dirs, o.threshold), jpeg_label});
          break;
        }
        case FileType::Pnm: {
          if (modes == 0) throw UsageError(files[i].string() + ": raw input needs --single-q, --double-q or --pair");
          const auto img = crop_to_blocks(decode_pnm(bytes));
          auto emit = [&](const CoefficientPlane& p, Label l) { rows.push_back({features_for(p, kind, dirs, o.threshold), l}); };
          if (o.single_q) emit(compress_once(img, *o.single_q), Label::Single);
          if (dq) emit(compress_twice(img, dq->first, dq->second), Label::Double);
          if (pq) {
            emit(compress_once(img, pq->second), Label::Single);
            emit(compress_twice(img, pq->first, pq->second), Label::Double);
          }
          break;
        }
        case FileType::Unknown:
          throw Error(ErrorCode::BadImageFile, "neither JPEG nor binary PGM/PPM");
      }
    });
  });

  FeatureMatrix fm;
  std::vector<Label> labels;
  bool all_labeled = true;
  for (const auto& rows : per_file)
    for (const auto& r : rows) {
      fm.append(r.fv);
      all_labeled = all_labeled && r.label.has_value();
      if (r.label) labels.push_back(*r.label);
    }
  if (!o.labels_out.empty() && !all_labeled) throw UsageError("--labels-out needs a class for every row (--label for JPEG inputs)");

  save_features(o.out, fm);
  if (!o.labels_out.empty()) save_labels(o.labels_out, labels);
  json summary = {{"out", o.out}, {"rows", fm.rows}, {"cols", fm.cols}, {"kind", to_string(fm.kind)}};
  if (!o.labels_out.empty()) summary["labels"] = o.labels_out;
  out << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------------------------

Matrix to_matrix(const FeatureMatrix& fm) {
  Matrix x(fm.rows, fm.cols);
  for (std::uint32_t r = 0; r < fm.rows; ++r)
    for (std::uint32_t c = 0; c < fm.cols; ++c) x(r, c) = fm.values[static_cast<std::size_t>(r) * fm.cols + c];
  return x;
}

struct TrainOptions {
  std::string features;
  std::string labels;
  std::string out;
  double c = 1.0;
  double gamma = 0.0;
  double coef0 = 1.0;
  int pca_dim = -1;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  const auto fm = with_file(o.features, [&] { return load_features(o.features); });
  const auto labels = with_file(o.labels, [&] { return load_labels(o.labels); });
  if (labels.size() != fm.rows) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(fm.rows) + " feature rows but " + std::to_string(labels.size()) + " labels");
  }
  if (fm.kind != FeatureKind::Global && fm.kind != FeatureKind::Combined) {
    throw Error(ErrorCode::BadFeatureFile, "training needs global or combined features");
  }
  std::vector<int> y;
  for (auto l : labels) y.push_back(l == Label::Double ? 1 : -1);

  DetectorConfig cfg;
  cfg.feature_kind = fm.kind;
  cfg.directions = fm.cols == static_cast<std::uint32_t>(kFourDirectionDim) ? DirectionSet::Four : DirectionSet::Twelve;
  cfg.svm.c = o.c;
  cfg.svm.gamma = o.gamma;
  cfg.svm.coef0 = o.coef0;
  cfg.svm.seed = o.seed;
  if (!(o.c > 0)) throw Error(ErrorCode::BadConfig, "--c must be positive");
  cfg.pca_dim = o.pca_dim >= 0 ? o.pca_dim : (fm.kind == FeatureKind::Combined ? default_pca_dim(fm.rows) : 0);

  const Matrix x = to_matrix(fm);
  const DetectorModel model = fit_detector(x, y, cfg);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) correct += (model.decision(x.row(r).transpose()) > 0) == (y[r] > 0);
  const auto bytes = save_model(model);
  write_file_atomic(o.out, std::span<const std::uint8_t>(bytes));

  out << json{{"model", o.out},
              {"rows", fm.rows},
              {"input_dim", model.input_dim},
              {"pca_dim", model.pca ? model.pca->output_dim : 0},
              {"support_vectors", model.svm.support_vectors.rows()},
              {"training_accuracy", static_cast<double>(correct) / static_cast<double>(x.rows())},
              {"fingerprint", model.fingerprint()}}
             .dump()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------------------------

struct DetectOptions {
  std::string model;
  std::vector<std::string> inputs;
  std::string features;
  double threshold = 0.0;
  bool strict_exit = false;
};

int cmd_detect(const DetectOptions& o, std::ostream& out) {
  if (o.inputs.empty() && o.features.empty()) throw UsageError("detect needs JPEG inputs or --features");
  const auto model = with_file(o.model, [&] { return load_model(read_file(o.model)); });
  bool any_single = false;
  auto report = [&](json line, double d) {
    const bool is_double = d > o.threshold;
    any_single = any_single || !is_double;
    line["decision_value"] = d;
    line["verdict"] = is_double ? "double" : "single";
    out << line.dump() << "\n";
  };

  if (!o.features.empty()) {
    const auto fm = with_file(o.features, [&] { return load_features(o.features); });
    if (fm.kind != model.config.feature_kind || static_cast<int>(fm.cols) != model.input_dim) {
      throw Error(ErrorCode::DimensionMismatch, o.features + ": " + std::string(to_string(fm.kind)) + " features with " +
                                                    std::to_string(fm.cols) + " columns, model expects " +
                                                    to_string(model.config.feature_kind) + " with " +
                                                    std::to_string(model.input_dim));
    }
    const Matrix x = to_matrix(fm);
    for (Eigen::Index r = 0; r < x.rows(); ++r) report(json{{"row", r}}, model.decision(x.row(r).transpose()));
  }

  for (const auto& file : expand_inputs(o.inputs)) {
    const double d = with_file(file, [&] {
      const auto bytes = read_file(file);
      if (sniff(bytes) != FileType::Jpeg) throw Error(ErrorCode::NotAJpeg, "not a JPEG file");
      const auto plane = parse_baseline(bytes);
      const auto fv = features_for(plane, model.config.feature_kind, model.config.directions, model.config.threshold);
      return model.decision(Eigen::Map<const Vector>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size())));
    });
    report(json{{"file", file.string()}}, d);
  }
  return o.strict_exit && any_single ? static_cast<int>(Exit::Negative) : 0;
}

// ---------------------------------------------------------------------------------------------

struct BenchOptions {
  std::string config;
  bool full_scale = false;
  std::string qualities;
  std::optional<int> reps;
  std::optional<int> count;
  std::string size;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> corpus_seed;
  std::string kind;
  std::optional<int> directions;
  std::optional<std::size_t> train_count;
  std::optional<double> train_fraction;
  std::optional<double> c;
  std::optional<int> pca_dim;
  std::string raw_dir;
  std::string out = "bench_out";
  bool resume = false;
  bool shuffle_labels = false;
  std::optional<int> workers;
  bool quiet = false;
};

ExperimentConfig bench_config(const BenchOptions& o) {
  ExperimentConfig cfg = o.full_scale ? full_scale_config() : ExperimentConfig{};
  if (!o.config.empty()) {
    const auto bytes = with_file(o.config, [&] { return read_file(o.config); });
    try {
      cfg = config_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()), cfg);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadConfig, o.config + ": " + e.what());
    }
  }
  if (!o.qualities.empty()) cfg.qualities = parse_int_list(o.qualities, "--qualities");
  if (o.reps) cfg.repetitions = *o.reps;
  if (o.count) cfg.synthetic.count = *o.count;
  if (!o.size.empty()) std::tie(cfg.synthetic.width, cfg.synthetic.height) = parse_size(o.size);
  if (o.seed) cfg.seed = *o.seed;
  if (o.corpus_seed) cfg.synthetic.seed = *o.corpus_seed;
  if (!o.kind.empty()) cfg.feature_kind = parse_kind(o.kind);
  if (o.directions) cfg.directions = parse_directions(*o.directions);
  if (o.train_count) cfg.train_count = *o.train_count;
  if (o.train_fraction) {
    cfg.train_fraction = *o.train_fraction;
    cfg.train_count.reset();
  }
  if (o.c) cfg.svm.c = *o.c;
  if (o.pca_dim) cfg.pca_dim = *o.pca_dim;
  if (!o.raw_dir.empty()) cfg.raw_dir = o.raw_dir;
  if (o.shuffle_labels) cfg.shuffle_labels = true;
  if (o.workers) cfg.workers = *o.workers;
  validate(cfg);
  return cfg;
}

int cmd_bench(const BenchOptions& o, bool json_only, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = bench_config(o);
  const auto images = load_corpus(cfg);
  const auto train = resolved_train_count(cfg, images.size());
  if (train == 0 || train >= images.size()) {
    throw Error(ErrorCode::BadCount, "train count " + std::to_string(train) + " must lie in (0, " + std::to_string(images.size()) + ")");
  }

  const fs::path dir(o.out);
  GridOptions opts;
  opts.checkpoint_dir = dir / "cells";
  opts.resume = o.resume;
  if (!o.quiet) {
    opts.on_cell = [&](const CellResult& c) {
      err << "cell Q1=" << c.q1 << " Q2=" << c.q2 << " mean=" << c.mean << " std=" << c.stddev << "\n";
    };
  }
  const AccuracyGrid grid = run_grid(cfg, images, opts);
  write_grid_reports(grid, dir);

  double total = 0.0;
  const CellResult* worst = nullptr;
  for (const auto& c : grid.cells) {
    total += c.mean;
    if (!worst || c.mean < worst->mean) worst = &c;
  }
  if (!json_only) out << emit_text(grid);
  json summary = {{"out", dir.string()},
                  {"fingerprint", grid.fingerprint},
                  {"cells", grid.cells.size()},
                  {"mean", grid.cells.empty() ? 0.0 : total / static_cast<double>(grid.cells.size())}};
  if (worst) summary["worst"] = {{"q1", worst->q1}, {"q2", worst->q2}, {"mean", worst->mean}};
  out << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------------------------

struct InspectOptions {
  std::string file;
  bool feature = false;
};

json table_json(int id, const QuantTable& t) {
  std::optional<int> quality;
  for (int q = 1; q <= 100 && !quality; ++q)
    if (quant_table_for_quality(q) == t) quality = q;
  return {{"id", id},
          {"entries", t.entries},
          {"quality", quality ? json(*quality) : json(nullptr)}};
}

int cmd_inspect(const InspectOptions& o, std::ostream& out) {
  const fs::path file(o.file);
  const auto parsed = with_file(file, [&] {
    const auto bytes = read_file(file);
    if (sniff(bytes) != FileType::Jpeg) throw Error(ErrorCode::NotAJpeg, "not a JPEG file");
    return inspect_baseline(bytes);
  });
  const auto& info = parsed.info;
  const auto& plane = parsed.luma;

  json comps = json::array();
  for (const auto& c : info.frame.components) {
    comps.push_back({{"id", c.id}, {"h", c.h_sampling}, {"v", c.v_sampling}, {"quant_id", c.quant_id}});
  }
  json tables = json::array();
  for (int i = 0; i < 4; ++i)
    if (info.quant_tables[i]) tables.push_back(table_json(i, *info.quant_tables[i]));
  json huff = json::array();
  for (const auto& h : info.huffman_tables) {
    huff.push_back({{"class", h.table_class == TableClass::DC ? "dc" : "ac"}, {"id", h.id}, {"counts", h.counts}});
  }

  json modes = json::array();
  for (int k = 0; k <= kModeCount; ++k) {
    const int pos = k == 0 ? 0 : mode_position(k);
    std::map<int, long> hist;
    for (int br = 0; br < plane.block_rows; ++br)
      for (int bc = 0; bc < plane.block_cols; ++bc) hist[plane.coeff(br, bc, pos / 8, pos % 8)]++;
    json values = json::array(), counts = json::array();
    for (const auto& [v, n] : hist) {
      values.push_back(v);
      counts.push_back(n);
    }
    modes.push_back({{"mode", k}, {"u", pos / 8}, {"v", pos % 8}, {"values", values}, {"counts", counts}});
  }

  json report = {{"file", file.string()},
                 {"frame",
                  {{"width", info.frame.width},
                   {"height", info.frame.height},
                   {"precision", info.frame.precision},
                   {"components", comps}}},
                 {"restart_interval", info.restart_interval},
                 {"scan_count", info.scan_count},
                 {"quant_tables", tables},
                 {"luma_table", table_json(info.frame.components[0].quant_id, plane.table)},
                 {"huffman_tables", huff},
                 {"luma_blocks", {{"rows", plane.block_rows}, {"cols", plane.block_cols}}},
                 {"mode_histograms", modes}};
  if (o.feature) report["global_feature"] = global_feature(plane).values;
  out << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Double JPEG compression detection toolkit"};
  app.name("djd");
  app.require_subcommand(1);
  bool json_only = false;
  app.add_flag("--json", json_only, "Machine-readable stdout only (no text tables)");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic PGM corpus and manifest");
  g->add_option("-o,--out", gen.out, "Output directory")->required();
  g->add_option("-n,--count", gen.count, "Number of images")->capture_default_str();
  g->add_option("--size", gen.size, "Image size N or WxH (multiples of 8, >= 24)")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--smoothing", gen.smoothing, "Base blur radius")->capture_default_str();
  g->add_option("--noise", gen.noise, "Grain standard deviation")->capture_default_str();
  g->add_option("--gradient-mix", gen.gradient_mix, "Weight of the smooth layer in [0,1]")->capture_default_str();

  ExtractOptions ex;
  auto* e = app.add_subcommand("extract", "Compute feature vectors into a DJFM file");
  e->add_option("inputs", ex.inputs, "JPEG, PGM/PPM files or directories")->required();
  e->add_option("--single-q", ex.single_q, "Raw inputs: compress once at Q");
  e->add_option("--double-q", ex.double_q, "Raw inputs: compress at Q1 then Q2 (Q1,Q2)");
  e->add_option("--pair", ex.pair, "Raw inputs: emit single (Q2) and double (Q1,Q2) rows");
  e->add_option("--kind", ex.kind, "global | combined")->capture_default_str();
  e->add_option("--directions", ex.directions, "12, or 4 for the ablated global feature")->capture_default_str();
  e->add_option("-T,--threshold", ex.threshold, "Truncation threshold")->capture_default_str();
  e->add_option("--label", ex.label, "Class of JPEG inputs: single | double");
  e->add_option("-o,--out", ex.out, "Output DJFM path")->required();
  e->add_option("--labels-out", ex.labels_out, "Output DJLB path");
  e->add_option("--workers", ex.workers, "Extraction threads")->capture_default_str()->check(CLI::PositiveNumber);

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Fit PCA (combined), scaler and SVM into a DJMD model");
  t->add_option("--features", tr.features, "DJFM file")->required();
  t->add_option("--labels", tr.labels, "DJLB file")->required();
  t->add_option("-o,--out", tr.out, "Output model path")->required();
  t->add_option("--c", tr.c, "SVM C")->capture_default_str();
  t->add_option("--gamma", tr.gamma, "Kernel gamma (0 = 1/dim)")->capture_default_str();
  t->add_option("--coef0", tr.coef0, "Kernel coef0")->capture_default_str();
  t->add_option("--pca-dim", tr.pca_dim, "PCA components (-1 auto, 0 off)")->capture_default_str();
  t->add_option("--seed", tr.seed, "SMO tie-break seed")->capture_default_str();

  DetectOptions dt;
  auto* d = app.add_subcommand("detect", "Classify JPEG files (JSON lines)");
  d->add_option("--model", dt.model, "DJMD model")->required();
  d->add_option("inputs", dt.inputs, "JPEG files or directories");
  d->add_option("--features", dt.features, "Classify rows of a DJFM file instead");
  d->add_option("--threshold", dt.threshold, "Decision threshold")->capture_default_str();
  d->add_flag("--strict-exit", dt.strict_exit, "Exit 1 when any verdict is single");

  BenchOptions bo;
  auto* b = app.add_subcommand("bench", "Run the (Q1,Q2) accuracy grid");
  b->add_option("--config", bo.config, "JSON experiment config");
  b->add_flag("--full-scale", bo.full_scale, "Start from the full-size protocol settings");
  b->add_option("--qualities", bo.qualities, "Comma-separated quality list");
  b->add_option("--reps", bo.reps, "Repetitions per cell");
  b->add_option("--count", bo.count, "Synthetic image count");
  b->add_option("--size", bo.size, "Synthetic image size N or WxH");
  b->add_option("--seed", bo.seed, "Experiment seed");
  b->add_option("--corpus-seed", bo.corpus_seed, "Synthetic corpus seed");
  b->add_option("--kind", bo.kind, "global | combined");
  b->add_option("--directions", bo.directions, "12 or 4");
  b->add_option("--train-count", bo.train_count, "Training images per repetition");
  b->add_option("--train-fraction", bo.train_fraction, "Training fraction when no count is given");
  b->add_option("--c", bo.c, "SVM C");
  b->add_option("--pca-dim", bo.pca_dim, "PCA components (-1 auto, 0 off)");
  b->add_option("--raw-dir", bo.raw_dir, "Directory of PGM/PPM images instead of the synthetic corpus");
  b->add_option("-o,--out", bo.out, "Output directory")->capture_default_str();
  b->add_flag("--resume", bo.resume, "Reuse matching cell checkpoints");
  b->add_flag("--shuffle-labels", bo.shuffle_labels, "Chance-level control: randomize training labels");
  b->add_option("--workers", bo.workers, "Concurrent cells")->check(CLI::PositiveNumber);
  b->add_flag("-q,--quiet", bo.quiet, "No per-cell progress on stderr");

  InspectOptions in;
  auto* i = app.add_subcommand("inspect", "Describe a JPEG file as JSON");
  i->add_option("file", in.file, "JPEG file")->required();
  i->add_flag("--feature", in.feature, "Append the global feature vector");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? 0 : static_cast<int>(Exit::Usage);
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*e) return cmd_extract(ex, out);
    if (*t) return cmd_train(tr, out);
    if (*d) return cmd_detect(dt, out);
    if (*b) return cmd_bench(bo, json_only, out, err);
    if (*i) return cmd_inspect(in, out);
  } catch (const UsageError& ue) {
    err << "usage error: " << ue.what() << "\n";
    return static_cast<int>(Exit::Usage);
  } catch (const Error& le) {
    err << "error: " << le.what() << "\n";
    return exit_code_for(le.code());
  } catch (const fs::filesystem_error& fe) {
    err << "error: " << fe.what() << "\n";
    return static_cast<int>(Exit::Input);
  } catch (const std::exception& ie) {
    err << "internal error: " << ie.what() << "\n";
    return static_cast<int>(Exit::Internal);
  }
  return static_cast<int>(Exit::Internal);
}

}  // namespace djd::cli
