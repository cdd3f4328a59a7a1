#pragma once

#include <optional>
#include <string>

#include "eyevis/color.hpp"
#include "eyevis/image.hpp"
#include "eyevis/landmarks.hpp"
#include "eyevis/localization.hpp"

namespace eyevis {

// Inclusive HSV box. When h_lo > h_hi the hue interval wraps through 0.
struct HsvRange {
  double h_lo = 0.0;
  double h_hi = 360.0;
  double s_lo = 0.0;
  double s_hi = 255.0;
  double v_lo = 0.0;
  double v_hi = 255.0;

  // Throws kInvalidArgument on out-of-range or inverted s/v bounds.
  void validate() const;
  bool contains(const HsvPixel& p) const noexcept;
};

enum class PaintClass { kBlack, kPink };
std::string_view paint_class_name(PaintClass c);

struct ResidueMask {
  PaintClass paint = PaintClass::kBlack;
  BinaryMask mask;
  double ratio = 0.0;
};

struct ResidueConfig {
  HsvRange black_range{0.0, 360.0, 0.0, 255.0, 0.0, 60.0};
  HsvRange pink_range{300.0, 15.0, 80.0, 255.0, 60.0, 255.0};
  double blue_factor = 1.2;
  int threshold_lo = 0;
  int threshold_hi = 100;
  std::string colormap = "viridis";
  Rgb edge_color{255, 255, 255};
};

// Renderings for the HSV-UV simulation.
inline constexpr Rgb kBackground{255, 255, 255};
inline constexpr Rgb kBlackPaintColor{0, 0, 255};
inline constexpr Rgb kPinkPaintColor{255, 0, 0};
inline constexpr Rgb kBothPaintColor{255, 105, 180};

struct VisualizationSet {
  RasterImage original;
  RasterImage black_vis;
  RasterImage pink_vis;
  RasterImage combined;
  RasterImage contour_vis;
};

// Pixel set iff its HSV after blue enhancement lies inside `range`.
BinaryMask segment_paint(const RasterImage& img, const HsvRange& range, double blue_factor);

double residue_ratio(const BinaryMask& mask);

struct HsvUvResult {
  ResidueMask black;
  ResidueMask pink;
  RasterImage black_vis;
  RasterImage pink_vis;
  RasterImage combined;
};

HsvUvResult hsv_uv_simulate(const RasterImage& img, const ResidueConfig& cfg);

// Pixels whose luma lies in [lo, hi].
BinaryMask threshold_mask(const RasterImage& img, int lo, int hi);
// Out-of-bound pixels with at least one in-bound 4-neighbour.
BinaryMask threshold_edges(const BinaryMask& in_bound);

// In-bound pixels black, edges in cfg.edge_color, the rest colormapped by luma.
// Throws kInvalidArgument unless 0 <= lo <= hi <= 255.
RasterImage binary_threshold_vis(const RasterImage& img, int lo, int hi, const ResidueConfig& cfg);

struct ImageAnalysis {
  VisualizationSet vis;
  ResidueMask black;
  ResidueMask pink;
};

ImageAnalysis analyze_image(const RasterImage& img, const ResidueConfig& cfg);

struct BaselineImage {
  BaselineRef ref;
  RasterImage image;
};

struct BaselineImages {
  std::optional<BaselineImage> open;
  std::optional<BaselineImage> closed;

  BaselineSet refs() const;
};

struct RemovalCheckResult {
  EyeLocalization localization;
  EyeState state;
  BaselineRef baseline;
  ImageAnalysis capture;
  ImageAnalysis baseline_analysis;
};

struct VisionConfig {
  LocalizationConfig localization;
  ResidueConfig residue;
};

// Localizes the eyes in `eye_img`, picks the baseline matching the eye
// state and analyzes both images.
RemovalCheckResult removal_check(const LandmarkProvider& provider, const RasterImage& face_img,
                                 const RasterImage& eye_img, const BaselineImages& baselines,
                                 const VisionConfig& cfg);

}  // namespace eyevis
