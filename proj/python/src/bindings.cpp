#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "djd/codestream.hpp"
#include "djd/detector.hpp"
#include "djd/error.hpp"
#include "djd/features.hpp"
#include "djd/harness.hpp"
#include "djd/jpeg_model.hpp"

namespace py = pybind11;
using namespace djd;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage image_from(const U8Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D uint8 array (height, width)");
  GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy_n(a.data(), img.samples.size(), img.samples.begin());
  return img;
}

py::array_t<std::uint8_t> image_to(const GrayImage& img) {
  py::array_t<std::uint8_t> out({img.height, img.width});
  std::copy(img.samples.begin(), img.samples.end(), out.mutable_data());
  return out;
}

py::array_t<double> vector_to(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

DirectionSet directions_from(int n) {
  if (n == 12) return DirectionSet::Twelve;
  if (n == 4) return DirectionSet::Four;
  throw py::value_error("directions must be 12 or 4");
}

FeatureKind kind_from(const std::string& s) {
  if (s == "global") return FeatureKind::Global;
  if (s == "combined") return FeatureKind::Combined;
  throw py::value_error("kind must be 'global' or 'combined'");
}

Matrix matrix_from(const F64Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D feature array (rows, dims)");
  Matrix m(a.shape(0), a.shape(1));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = r(i, j);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Double JPEG compression detection core";

  // Raised with a `code` attribute holding the stable error name.
  static PyObject* error_type = py::exception<Error>(m, "DjdError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.attr("GLOBAL_DIM") = kGlobalDim;
  m.attr("COMBINED_DIM") = kCombinedDim;

  m.def("quant_table", [](int q) {
    const auto t = quant_table_for_quality(q);
    return std::vector<int>(t.entries.begin(), t.entries.end());
  }, py::arg("quality"), "Luminance table for an IJG quality, natural order");

  py::class_<CoefficientPlane>(m, "CoefficientPlane")
      .def_readonly("block_rows", &CoefficientPlane::block_rows)
      .def_readonly("block_cols", &CoefficientPlane::block_cols)
      .def_property_readonly("quant_table", [](const CoefficientPlane& p) {
        return std::vector<int>(p.table.entries.begin(), p.table.entries.end());
      })
      .def_property_readonly("coefficients", [](const CoefficientPlane& p) {
        py::array_t<std::int32_t> out({p.rows(), p.cols()});
        std::copy(p.coeffs.begin(), p.coeffs.end(), out.mutable_data());
        return out;
      }, "Quantized coefficients on the pixel grid: [8r+u, 8c+v] is mode (u,v) of block (r,c)")
      .def("__eq__", [](const CoefficientPlane& a, const CoefficientPlane& b) { return a == b; })
      .def("__repr__", [](const CoefficientPlane& p) {
        return "<CoefficientPlane " + std::to_string(p.block_rows) + "x" + std::to_string(p.block_cols) + " blocks>";
      });

  m.def("synth_image", [](int width, int height, std::uint64_t seed, std::size_t index) {
    SyntheticSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = seed;
    spec.count = static_cast<int>(index) + 1;
    validate(spec);
    return image_to(synth_image(spec, index));
  }, py::arg("width") = 128, py::arg("height") = 128, py::arg("seed") = 1, py::arg("index") = 0);

  m.def("compress_once", [](const U8Array& img, int q) { return compress_once(crop_to_blocks(image_from(img)), q); },
        py::arg("image"), py::arg("quality"));
  m.def("compress_twice",
        [](const U8Array& img, int q1, int q2) { return compress_twice(crop_to_blocks(image_from(img)), q1, q2); },
        py::arg("image"), py::arg("q1"), py::arg("q2"));
  m.def("decompress", [](const CoefficientPlane& p) { return image_to(decompress(p)); }, py::arg("plane"));

  m.def("parse_jpeg", [](const py::bytes& data) {
    const std::string s = data;
    return parse_baseline(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }, py::arg("data"), "Luminance coefficients of a baseline JPEG");
  m.def("write_jpeg", [](const CoefficientPlane& p) {
    const auto bytes = write_baseline(p);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }, py::arg("plane"));

  m.def("global_feature", [](const CoefficientPlane& p, int threshold, int directions) {
    return vector_to(global_feature(p, threshold, directions_from(directions)).values);
  }, py::arg("plane"), py::arg("threshold") = kDefaultThreshold, py::arg("directions") = 12);
  m.def("combined_feature", [](const CoefficientPlane& p) { return vector_to(combined_feature(p).values); },
        py::arg("plane"));

  py::class_<DetectorModel>(m, "Detector")
      .def_static("train", [](const F64Array& x, const std::vector<int>& labels, const std::string& kind, int pca_dim,
                              double c, double gamma, double coef0, std::uint64_t seed) {
        DetectorConfig cfg;
        cfg.feature_kind = kind_from(kind);
        if (x.ndim() == 2 && x.shape(1) == kFourDirectionDim) cfg.directions = DirectionSet::Four;
        cfg.pca_dim = pca_dim >= 0 ? pca_dim
                                   : (cfg.feature_kind == FeatureKind::Combined ? default_pca_dim(labels.size()) : 0);
        cfg.svm.c = c;
        cfg.svm.gamma = gamma;
        cfg.svm.coef0 = coef0;
        cfg.svm.seed = seed;
        return fit_detector(matrix_from(x), labels, cfg);
      }, py::arg("features"), py::arg("labels"), py::arg("kind") = "global", py::arg("pca_dim") = -1,
         py::arg("c") = 1.0, py::arg("gamma") = 0.0, py::arg("coef0") = 1.0, py::arg("seed") = 0,
         "Labels are -1 (single) / +1 (double)")
      .def_static("load", [](const py::bytes& data) {
        const std::string s = data;
        return load_model(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      })
      .def("save", [](const DetectorModel& d) {
        const auto bytes = save_model(d);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def("decision", [](const DetectorModel& d, const F64Array& x) {
        if (x.ndim() == 1) {
          Vector v(x.shape(0));
          std::copy_n(x.data(), x.shape(0), v.data());
          return py::cast(d.decision(v));
        }
        const Matrix rows = matrix_from(x);
        std::vector<double> out;
        for (Eigen::Index i = 0; i < rows.rows(); ++i) out.push_back(d.decision(rows.row(i).transpose()));
        return py::object(vector_to(out));
      }, py::arg("features"))
      .def("detect_plane", [](const DetectorModel& d, const CoefficientPlane& p) {
        const auto fv = d.config.feature_kind == FeatureKind::Combined
                            ? combined_feature(p)
                            : global_feature(p, d.config.threshold, d.config.directions);
        return d.decision(Eigen::Map<const Vector>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size())));
      }, py::arg("plane"))
      .def_readonly("input_dim", &DetectorModel::input_dim)
      .def_property_readonly("kind", [](const DetectorModel& d) { return std::string(to_string(d.config.feature_kind)); })
      .def_property_readonly("pca_dim", [](const DetectorModel& d) { return d.pca ? d.pca->output_dim : 0; })
      .def_property_readonly("support_vectors", [](const DetectorModel& d) { return d.svm.support_vectors.rows(); })
      .def("fingerprint", &DetectorModel::fingerprint);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run a djd subcommand in process; returns (exit code, stdout, stderr)");
}
