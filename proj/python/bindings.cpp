#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "eyevis/codec.hpp"
#include "eyevis/color.hpp"
#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"
#include "eyevis/residue.hpp"

namespace py = pybind11;
using namespace eyevis;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage to_raster(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error(ErrorCode::kInvalidArgument, "expected an (H, W, 3) uint8 array");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  if (w <= 0 || h <= 0) throw Error(ErrorCode::kInvalidArgument, "image must not be empty");
  RasterImage img(w, h);
  const auto px = a.unchecked<3>();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.at(x, y) = {px(y, x, 0), px(y, x, 1), px(y, x, 2)};
  }
  return img;
}

U8Array from_raster(const RasterImage& img) {
  U8Array out({img.height(), img.width(), 3});
  auto px = out.mutable_unchecked<3>();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb p = img.at(x, y);
      px(y, x, 0) = p.r;
      px(y, x, 1) = p.g;
      px(y, x, 2) = p.b;
    }
  }
  return out;
}

py::array_t<bool> from_mask(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  auto px = out.mutable_unchecked<2>();
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) px(y, x) = m.test(x, y);
  }
  return out;
}

BinaryMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kInvalidArgument, "expected an (H, W) mask");
  BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const auto px = a.unchecked<2>();
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) m.set(x, y, px(y, x));
  }
  return m;
}

HsvRange to_range(const py::tuple& t) {
  if (t.size() != 6) throw Error(ErrorCode::kInvalidArgument, "range is (h_lo, h_hi, s_lo, s_hi, v_lo, v_hi)");
  HsvRange r{t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>(),
             t[3].cast<double>(), t[4].cast<double>(), t[5].cast<double>()};
  r.validate();
  return r;
}

py::tuple from_range(const HsvRange& r) { return py::make_tuple(r.h_lo, r.h_hi, r.s_lo, r.s_hi, r.v_lo, r.v_hi); }

}  // namespace

PYBIND11_MODULE(_eyevis, m) {
  m.doc() = "Residue imaging, overlap metrics and evaluation";
  m.attr("__version__") = EYEVIS_VERSION;

  static py::exception<Error> error_type(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  const ResidueConfig defaults;
  m.attr("BLACK_RANGE") = from_range(defaults.black_range);
  m.attr("PINK_RANGE") = from_range(defaults.pink_range);
  m.attr("BLUE_FACTOR") = defaults.blue_factor;

  m.def("rgb_to_hsv", [](int r, int g, int b) {
    if (std::min({r, g, b}) < 0 || std::max({r, g, b}) > 255) throw Error(ErrorCode::kInvalidArgument, "channels are 0..255");
    const HsvPixel p = rgb_to_hsv(Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
    return py::make_tuple(p.h, p.s, p.v);
  }, py::arg("r"), py::arg("g"), py::arg("b"));
  m.def("hsv_to_rgb", [](double h, double s, double v) {
    const Rgb p = hsv_to_rgb({h, s, v});
    return py::make_tuple(p.r, p.g, p.b);
  }, py::arg("h"), py::arg("s"), py::arg("v"));

  m.def("read_image", [](const std::filesystem::path& p) { return from_raster(read_image(p)); }, py::arg("path"));
  m.def("write_image", [](const std::filesystem::path& p, const U8Array& a) { write_image(p, to_raster(a)); },
        py::arg("path"), py::arg("image"));

  m.def("segment_paint", [](const U8Array& a, const py::tuple& range, double blue_factor) {
    return from_mask(segment_paint(to_raster(a), to_range(range), blue_factor));
  }, py::arg("image"), py::arg("range"), py::arg("blue_factor") = defaults.blue_factor);
  m.def("residue_ratio", [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& mask) {
    return residue_ratio(to_mask(mask));
  }, py::arg("mask"));
  m.def("analyze", [](const U8Array& a) {
    const ImageAnalysis r = analyze_image(to_raster(a), ResidueConfig{});
    py::dict out;
    out["black_ratio"] = r.black.ratio;
    out["pink_ratio"] = r.pink.ratio;
    out["black_mask"] = from_mask(r.black.mask);
    out["pink_mask"] = from_mask(r.pink.mask);
    out["combined"] = from_raster(r.vis.combined);
    out["binary"] = from_raster(r.vis.contour_vis);
    return out;
  }, py::arg("image"));

  m.def("hsv_distance", [](const U8Array& a, const U8Array& b) {
    const IlluminationReport r = hsv_distance(to_raster(a), to_raster(b));
    py::dict out;
    out["d"] = r.d;
    out["d_h"] = r.d_h;
    out["d_s"] = r.d_s;
    out["d_v"] = r.d_v;
    return out;
  }, py::arg("a"), py::arg("b"));

  m.def("rasterize_polygon", [](const std::vector<std::pair<double, double>>& pts, int w, int h) {
    std::vector<Point2> poly;
    for (const auto& [x, y] : pts) poly.push_back({x, y});
    return from_mask(rasterize_polygon(poly, w, h));
  }, py::arg("points"), py::arg("width"), py::arg("height"));
  m.def("overlap", [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& algorithm,
                      const py::array_t<bool, py::array::c_style | py::array::forcecast>& reference) {
    const OverlapCount c = overlap_of(to_mask(algorithm), to_mask(reference));
    return py::make_tuple(c.numerator, c.denominator, c.rate);
  }, py::arg("algorithm"), py::arg("reference"));

  m.def("aggregate_ratios", [](const std::vector<double>& v) {
    const AggregateStats s = aggregate_ratios(v);
    return py::make_tuple(s.avg, s.std);
  }, py::arg("values"));
  m.def("participant_stats", [](const std::filesystem::path& csv) {
    const auto rows = load_participant_table(csv);
    py::dict out;
    for (const ColumnStats& c : participant_column_stats(rows)) out[py::str(c.column)] = py::make_tuple(c.stats.avg, c.stats.std);
    return out;
  }, py::arg("path"));

  m.def("evaluate_corpus", [](const std::filesystem::path& corpus, const std::filesystem::path& landmarks, int workers) {
    const FixtureProvider provider = FixtureProvider::from_directory(landmarks);
    py::gil_scoped_release release;
    return corpus_report_to_json(run_corpus_eval(corpus, provider, VisionConfig{}, workers));
  }, py::arg("corpus"), py::arg("landmarks"), py::arg("workers") = 1);
}
