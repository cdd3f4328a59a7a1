#include "eyevis/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eyevis/error.hpp"
#include "eyevis/transform.hpp"

namespace eyevis {
namespace {

EyeContour ring_points(const FaceLandmarks& lm, const EyeIndexRing& ring, int width, int height) {
  EyeContour out{};
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2& p = lm[ring[i]];
    out[i] = {p.x * width, p.y * height};
  }
  return out;
}

struct Extent {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const Point2& p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
};

int round_edge(double v) { return static_cast<int>(std::round(v)); }

Error with_stage(const Error& e, const char* stage) {
  return Error(e.code(), std::string(stage) + ": " + e.what(), stage);
}

}  // namespace

EyePair eye_points(const FaceLandmarks& lm, const EyeContourIndices& indices, int width,
                   int height) {
  return {ring_points(lm, indices.left, width, height),
          ring_points(lm, indices.right, width, height)};
}

Rect eye_bounding_box(const FaceLandmarks& lm, const EyeContourIndices& indices, int width,
                      int height, double pad_frac) {
  if (!(pad_frac >= 0.0) || !std::isfinite(pad_frac)) {
    throw Error(ErrorCode::kInvalidArgument, "pad_frac must be finite and non-negative");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  const EyePair eyes = eye_points(lm, indices, width, height);
  Extent ext;
  for (const Point2& p : eyes.left) ext.add(p);
  for (const Point2& p : eyes.right) ext.add(p);

  const double box_w = ext.max_x - ext.min_x;
  const double box_h = ext.max_y - ext.min_y;
  if (!(box_w > 0.0) || !(box_h > 0.0)) {
    throw Error(ErrorCode::kDegenerateGeometry, "eye landmarks span zero area");
  }
  const double pad_x = box_w * pad_frac;
  const double pad_y = box_h * pad_frac;
  Rect box{
      std::clamp(round_edge(ext.min_x - pad_x), 0, width),
      std::clamp(round_edge(ext.min_y - pad_y), 0, height),
      std::clamp(round_edge(ext.max_x + pad_x), 0, width),
      std::clamp(round_edge(ext.max_y + pad_y), 0, height),
  };
  if (box.empty()) throw Error(ErrorCode::kDegenerateGeometry, "eye bounding box rounds to zero area");
  return box;
}

Point2 eye_to_composite(const Point2& p, const Rect& box, int eye_width, int eye_height) {
  return {box.x0 + p.x * box.width() / eye_width, box.y0 + p.y * box.height() / eye_height};
}

Point2 composite_to_eye(const Point2& p, const Rect& box, int eye_width, int eye_height) {
  const double sx = static_cast<double>(eye_width) / box.width();
  const double sy = static_cast<double>(eye_height) / box.height();
  return {(p.x - box.x0) * sx, (p.y - box.y0) * sy};
}

EyeLocalization localize_eye_features(const LandmarkProvider& provider,
                                      const RasterImage& face_img, const RasterImage& eye_img,
                                      const LocalizationConfig& cfg) {
  cfg.indices.validate();

  FaceLandmarks first = [&] {
    try {
      return provider.detect(face_img);
    } catch (const Error& e) {
      throw with_stage(e, "first-pass");
    }
  }();

  EyeLocalization out;
  out.box = eye_bounding_box(first, cfg.indices, face_img.width(), face_img.height(), cfg.pad_frac);

  const RasterImage composite =
      paste(face_img, out.box, resize(eye_img, out.box.width(), out.box.height()));

  FaceLandmarks second = [&] {
    try {
      return provider.detect(composite);
    } catch (const Error& e) {
      throw with_stage(e, "second-pass");
    }
  }();

  const EyePair on_composite = eye_points(second, cfg.indices, composite.width(), composite.height());
  auto map_back = [&](const EyeContour& ring) {
    EyeContour mapped{};
    for (std::size_t i = 0; i < ring.size(); ++i) {
      Point2 q = composite_to_eye(ring[i], out.box, eye_img.width(), eye_img.height());
      q.x = std::clamp(q.x, 0.0, static_cast<double>(eye_img.width()));
      q.y = std::clamp(q.y, 0.0, static_cast<double>(eye_img.height()));
      mapped[i] = q;
    }
    return mapped;
  };
  out.contour = {map_back(on_composite.left), map_back(on_composite.right)};

  // A fully closed or off-box eye can collapse horizontally after clamping.
  auto safe_openness = [](const EyeContour& c) {
    try {
      return contour_openness(c);
    } catch (const Error&) {
      return 0.0;
    }
  };
  out.openness_left = safe_openness(out.contour.left);
  out.openness_right = safe_openness(out.contour.right);
  return out;
}

double contour_openness(const EyeContour& contour) {
  Extent ext;
  for (const Point2& p : contour) ext.add(p);
  const double w = ext.max_x - ext.min_x;
  if (!(w > 0.0)) throw Error(ErrorCode::kDegenerateGeometry, "eye contour has zero horizontal extent");
  return (ext.max_y - ext.min_y) / w;
}

double eye_openness(const EyePair& contour) {
  return 0.5 * (contour_openness(contour.left) + contour_openness(contour.right));
}

EyeState classify_eye(double openness, double threshold) {
  return {openness >= threshold ? EyeClass::kOpen : EyeClass::kClosed, openness};
}

const BaselineRef& match_baseline(const EyeState& state, const BaselineSet& baselines) {
  if (!baselines.open || !baselines.closed) {
    throw Error(ErrorCode::kMissingBaseline,
                "baseline captures missing: take the whole-face, eyes-open and eyes-closed photos first");
  }
  return state.classification == EyeClass::kOpen ? *baselines.open : *baselines.closed;
}

std::string_view eye_class_name(EyeClass c) { return c == EyeClass::kOpen ? "open" : "closed"; }

}  // namespace eyevis
