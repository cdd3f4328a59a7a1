#include <algorithm>
#include <atomic>
#include <thread>

#include "eyevis/codec.hpp"
#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"
#include "json.hpp"

namespace eyevis {

using nlohmann::json;

namespace {

// Computes one rate; a missing label leaves the rate empty and adds a note.
template <typename Fn>
void try_rate(OverlapReport& report, const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMissingAnnotation) throw;
    report.notes.push_back(std::string(name) + ": " + e.what());
  }
}

std::optional<std::filesystem::path> find_face_reference(const std::filesystem::path& dir) {
  for (const char* name : {"face.png", "face.jpg", "face.jpeg"}) {
    if (std::filesystem::exists(dir / name)) return dir / name;
  }
  return std::nullopt;
}

std::optional<double> mean_of(const std::vector<CorpusItemResult>& items,
                              std::optional<double> OverlapReport::*rate) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const CorpusItemResult& item : items) {
    if (item.ok && (item.overlap.*rate)) {
      sum += *(item.overlap.*rate);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

json rate_json(const std::optional<double>& r) { return r ? json(*r) : json(nullptr); }

}  // namespace

std::size_t CorpusReport::failed() const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const CorpusItemResult& i) { return !i.ok; }));
}

OverlapReport evaluate_item(const LandmarkProvider& provider, const RasterImage& face_img,
                            const RasterImage& eye_img, const AnnotationSet& ann,
                            const VisionConfig& cfg) {
  const int w = eye_img.width();
  const int h = eye_img.height();
  ann.validate_bounds(w, h);

  OverlapReport report;
  try_rate(report, "r_eye", [&] {
    const EyeLocalization loc = localize_eye_features(provider, face_img, eye_img, cfg.localization);
    const OverlapCount c = overlap_rate_eye(loc.contour, ann, w, h);
    report.a1 = c.numerator;
    report.a2 = c.denominator;
    report.r_eye = c.rate;
  });

  const HsvUvResult uv = hsv_uv_simulate(eye_img, cfg.residue);
  try_rate(report, "r_pink", [&] {
    const OverlapCount c = overlap_rate_paint(uv.pink, ann, PaintClass::kPink);
    report.a3 = c.numerator;
    report.a4 = c.denominator;
    report.r_pink = c.rate;
  });
  try_rate(report, "r_black", [&] {
    const OverlapCount c = overlap_rate_paint(uv.black, ann, PaintClass::kBlack);
    report.a5 = c.numerator;
    report.a6 = c.denominator;
    report.r_black = c.rate;
  });
  try_rate(report, "r_bin", [&] {
    const BinaryMask inside = threshold_mask(eye_img, cfg.residue.threshold_lo, cfg.residue.threshold_hi);
    const OverlapCount c = binary_success_rate(inside, ann);
    report.n1 = c.numerator;
    report.n2 = c.denominator;
    report.r_bin = c.rate;
    if (!c.rate) report.notes.push_back("r_bin: undefined, no threshold pixels outside the eye area");
  });
  return report;
}

CorpusReport run_corpus_eval(const std::filesystem::path& corpus_dir, const LandmarkProvider& provider,
                             const VisionConfig& cfg, int workers) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(corpus_dir)) {
    throw Error(ErrorCode::kIo, "corpus directory not found: " + corpus_dir.string());
  }

  std::vector<fs::path> annotation_files;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      annotation_files.push_back(entry.path());
    }
  }
  std::sort(annotation_files.begin(), annotation_files.end());

  CorpusReport report;
  if (annotation_files.empty()) {
    report.warnings.push_back("corpus contains no annotation files");
    return report;
  }

  std::optional<RasterImage> face;
  std::string face_error;
  if (auto face_path = find_face_reference(corpus_dir)) {
    try {
      face = read_image(*face_path);
    } catch (const Error& e) {
      face_error = e.what();
    }
  } else {
    face_error = "corpus has no face.png/face.jpg whole-face reference";
  }
  if (!face) report.warnings.push_back(face_error);

  report.items.resize(annotation_files.size());
  auto run_one = [&](std::size_t i) {
    CorpusItemResult& item = report.items[i];
    item.name = annotation_files[i].filename().string();
    try {
      const AnnotationSet ann = load_annotation_set(annotation_files[i]);
      if (!ann.image.empty()) item.name = ann.image;
      if (ann.image.empty()) throw Error(ErrorCode::kInvalidArgument, "annotation does not name its image");
      const RasterImage eye = read_image(corpus_dir / ann.image);
      if (!face) throw Error(ErrorCode::kIo, face_error);
      item.overlap = evaluate_item(provider, *face, eye, ann, cfg);
      item.ok = true;
    } catch (const Error& e) {
      item.error_code = std::string(error_code_name(e.code()));
      item.error_message = e.what();
    } catch (const std::exception& e) {
      item.error_code = "internal";
      item.error_message = e.what();
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, annotation_files.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < annotation_files.size(); i = next++) run_one(i);
      });
    }
  }

  report.avg_r_eye = mean_of(report.items, &OverlapReport::r_eye);
  report.avg_r_pink = mean_of(report.items, &OverlapReport::r_pink);
  report.avg_r_black = mean_of(report.items, &OverlapReport::r_black);
  report.avg_r_bin = mean_of(report.items, &OverlapReport::r_bin);
  if (const std::size_t failed = report.failed(); failed > 0) {
    report.warnings.push_back(std::to_string(failed) + " of " + std::to_string(report.items.size()) +
                              " items failed");
  }
  return report;
}

std::string corpus_report_to_json(const CorpusReport& report) {
  json items = json::array();
  for (const CorpusItemResult& item : report.items) {
    json j = {{"image", item.name}, {"status", item.ok ? "ok" : "failed"}};
    if (item.ok) {
      const OverlapReport& o = item.overlap;
      j["a1"] = o.a1;
      j["a2"] = o.a2;
      j["a3"] = o.a3;
      j["a4"] = o.a4;
      j["a5"] = o.a5;
      j["a6"] = o.a6;
      j["n1"] = o.n1;
      j["n2"] = o.n2;
      j["r_eye"] = rate_json(o.r_eye);
      j["r_pink"] = rate_json(o.r_pink);
      j["r_black"] = rate_json(o.r_black);
      j["r_bin"] = rate_json(o.r_bin);
      j["r_bin_defined"] = o.r_bin.has_value();
      if (!o.notes.empty()) j["notes"] = o.notes;
    } else {
      j["error"] = {{"code", item.error_code}, {"message", item.error_message}};
    }
    items.push_back(std::move(j));
  }
  const json doc = {
      {"items", std::move(items)},
      {"averages",
       {{"r_eye", rate_json(report.avg_r_eye)},
        {"r_pink", rate_json(report.avg_r_pink)},
        {"r_black", rate_json(report.avg_r_black)},
        {"r_bin", rate_json(report.avg_r_bin)}}},
      {"counts",
       {{"total", report.items.size()},
        {"ok", report.items.size() - report.failed()},
        {"failed", report.failed()}}},
      {"warnings", report.warnings},
  };
  return doc.dump(2);
}

}  // namespace eyevis
