#pragma once

#include <array>
#include <optional>
#include <string>

#include "eyevis/image.hpp"
#include "eyevis/landmarks.hpp"

namespace eyevis {

using EyeContour = std::array<Point2, kEyeContourSize>;

// Both eye contours in one image's pixel coordinates.
struct EyePair {
  EyeContour left{};
  EyeContour right{};
};

struct LocalizationConfig {
  EyeContourIndices indices = EyeContourIndices::face_mesh_default();
  double pad_frac = 0.25;
  double openness_threshold = 0.18;
};

struct EyeLocalization {
  // Eye bounding box in whole-face pixels, after padding.
  Rect box;
  // Contours in close-up (eye image) pixel coordinates.
  EyePair contour;
  // Vertical/horizontal extent ratio per eye.
  double openness_left = 0.0;
  double openness_right = 0.0;
};

enum class EyeClass { kOpen, kClosed };

struct EyeState {
  EyeClass classification = EyeClass::kOpen;
  double openness = 0.0;
};

// Denormalizes the two rings of `lm` into pixels of an image of `width` x `height`.
EyePair eye_points(const FaceLandmarks& lm, const EyeContourIndices& indices, int width,
                   int height);

// Box around both rings, grown by pad_frac of its width/height per side,
// edges rounded half away from zero, clamped to the image.
// Throws kDegenerateGeometry when the points span zero width or height.
Rect eye_bounding_box(const FaceLandmarks& lm, const EyeContourIndices& indices, int width,
                      int height, double pad_frac);

// Coordinate maps between the close-up eye image and the composite, where the
// close-up occupies `box` after resizing.
Point2 eye_to_composite(const Point2& p, const Rect& box, int eye_width, int eye_height);
Point2 composite_to_eye(const Point2& p, const Rect& box, int eye_width, int eye_height);

// Two-pass localization. Detection failures are rethrown with stage
// "first-pass" or "second-pass".
EyeLocalization localize_eye_features(const LandmarkProvider& provider,
                                      const RasterImage& face_img, const RasterImage& eye_img,
                                      const LocalizationConfig& cfg);

// (max_y - min_y) / (max_x - min_x) of one contour.
double contour_openness(const EyeContour& contour);
// Mean of both eyes' ratios.
double eye_openness(const EyePair& contour);

EyeState classify_eye(double openness, double threshold);

// Reference to a stored baseline capture.
struct BaselineRef {
  std::string capture_id;
  EyeClass classification = EyeClass::kOpen;
};

struct BaselineSet {
  std::optional<BaselineRef> open;
  std::optional<BaselineRef> closed;
};

// Picks the baseline whose classification equals the capture's. Throws
// kMissingBaseline unless both baselines are present.
const BaselineRef& match_baseline(const EyeState& state, const BaselineSet& baselines);

std::string_view eye_class_name(EyeClass c);

}  // namespace eyevis
