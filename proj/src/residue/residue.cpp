#include "eyevis/residue.hpp"

#include <cmath>

#include "eyevis/colormap.hpp"
#include "eyevis/error.hpp"

namespace eyevis {
namespace {

bool in_closed(double v, double lo, double hi) { return v >= lo && v <= hi; }

RasterImage render_mask(const BinaryMask& mask, Rgb on) {
  RasterImage out(mask.width(), mask.height(), kBackground);
  auto src = mask.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i]) dst[i] = on;
  }
  return out;
}

ResidueMask make_residue(PaintClass paint, BinaryMask mask) {
  const double ratio = residue_ratio(mask);
  return {paint, std::move(mask), ratio};
}

}  // namespace

void HsvRange::validate() const {
  auto check = [](double lo, double hi, double max, const char* what, bool ordered) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || hi < 0.0 || lo > max || hi > max) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + " bounds out of range");
    }
    if (ordered && lo > hi) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " lower bound exceeds upper");
  };
  check(h_lo, h_hi, 360.0, "hue", false);
  check(s_lo, s_hi, 255.0, "saturation", true);
  check(v_lo, v_hi, 255.0, "value", true);
}

bool HsvRange::contains(const HsvPixel& p) const noexcept {
  const bool hue_ok = h_lo <= h_hi ? in_closed(p.h, h_lo, h_hi) : (p.h >= h_lo || p.h <= h_hi);
  return hue_ok && in_closed(p.s, s_lo, s_hi) && in_closed(p.v, v_lo, v_hi);
}

std::string_view paint_class_name(PaintClass c) { return c == PaintClass::kBlack ? "black" : "pink"; }

BinaryMask segment_paint(const RasterImage& img, const HsvRange& range, double blue_factor) {
  range.validate();
  const RasterImage boosted = enhance_blue(img, blue_factor);
  BinaryMask mask(img.width(), img.height());
  auto src = boosted.values();
  auto dst = mask.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = range.contains(rgb_to_hsv(src[i])) ? 1 : 0;
  return mask;
}

double residue_ratio(const BinaryMask& mask) {
  if (mask.empty()) throw Error(ErrorCode::kInvalidArgument, "residue ratio of an empty grid");
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

HsvUvResult hsv_uv_simulate(const RasterImage& img, const ResidueConfig& cfg) {
  BinaryMask black = segment_paint(img, cfg.black_range, cfg.blue_factor);
  BinaryMask pink = segment_paint(img, cfg.pink_range, cfg.blue_factor);

  HsvUvResult out{
      .black = {},
      .pink = {},
      .black_vis = render_mask(black, kBlackPaintColor),
      .pink_vis = render_mask(pink, kPinkPaintColor),
      .combined = RasterImage(img.width(), img.height(), kBackground),
  };
  auto in_black = black.values();
  auto in_pink = pink.values();
  auto dst = out.combined.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (in_black[i] && in_pink[i]) {
      dst[i] = kBothPaintColor;
    } else if (in_black[i]) {
      dst[i] = kBlackPaintColor;
    } else if (in_pink[i]) {
      dst[i] = kPinkPaintColor;
    }
  }
  out.black = make_residue(PaintClass::kBlack, std::move(black));
  out.pink = make_residue(PaintClass::kPink, std::move(pink));
  return out;
}

BinaryMask threshold_mask(const RasterImage& img, int lo, int hi) {
  if (lo < 0 || hi > 255 || lo > hi) {
    throw Error(ErrorCode::kInvalidArgument, "threshold bounds must satisfy 0 <= lo <= hi <= 255");
  }
  BinaryMask mask(img.width(), img.height());
  auto src = img.values();
  auto dst = mask.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const int y = luma(src[i]);
    dst[i] = (y >= lo && y <= hi) ? 1 : 0;
  }
  return mask;
}

BinaryMask threshold_edges(const BinaryMask& in_bound) {
  BinaryMask edges(in_bound.width(), in_bound.height());
  for (int y = 0; y < in_bound.height(); ++y) {
    for (int x = 0; x < in_bound.width(); ++x) {
      if (in_bound.test(x, y)) continue;
      const bool touches = (x > 0 && in_bound.test(x - 1, y)) ||
                           (x + 1 < in_bound.width() && in_bound.test(x + 1, y)) ||
                           (y > 0 && in_bound.test(x, y - 1)) ||
                           (y + 1 < in_bound.height() && in_bound.test(x, y + 1));
      if (touches) edges.set(x, y);
    }
  }
  return edges;
}

RasterImage binary_threshold_vis(const RasterImage& img, int lo, int hi, const ResidueConfig& cfg) {
  const Colormap& cmap = colormap_by_name(cfg.colormap);
  const BinaryMask inside = threshold_mask(img, lo, hi);
  const BinaryMask edges = threshold_edges(inside);

  RasterImage out(img.width(), img.height());
  auto src = img.values();
  auto in = inside.values();
  auto edge = edges.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (in[i]) {
      dst[i] = {0, 0, 0};
    } else if (edge[i]) {
      dst[i] = cfg.edge_color;
    } else {
      dst[i] = cmap(luma(src[i]));
    }
  }
  return out;
}

ImageAnalysis analyze_image(const RasterImage& img, const ResidueConfig& cfg) {
  HsvUvResult uv = hsv_uv_simulate(img, cfg);
  ImageAnalysis out;
  out.vis.original = img;
  out.vis.black_vis = std::move(uv.black_vis);
  out.vis.pink_vis = std::move(uv.pink_vis);
  out.vis.combined = std::move(uv.combined);
  out.vis.contour_vis = binary_threshold_vis(img, cfg.threshold_lo, cfg.threshold_hi, cfg);
  out.black = std::move(uv.black);
  out.pink = std::move(uv.pink);
  return out;
}

BaselineSet BaselineImages::refs() const {
  BaselineSet set;
  if (open) set.open = open->ref;
  if (closed) set.closed = closed->ref;
  return set;
}

RemovalCheckResult removal_check(const LandmarkProvider& provider, const RasterImage& face_img,
                                 const RasterImage& eye_img, const BaselineImages& baselines,
                                 const VisionConfig& cfg) {
  const BaselineSet refs = baselines.refs();
  if (!refs.open || !refs.closed) {
    // Same error match_baseline raises; surfaced before any detection work.
    match_baseline(EyeState{}, refs);
  }

  RemovalCheckResult out;
  out.localization = localize_eye_features(provider, face_img, eye_img, cfg.localization);
  out.state = classify_eye(0.5 * (out.localization.openness_left + out.localization.openness_right),
                           cfg.localization.openness_threshold);
  out.baseline = match_baseline(out.state, refs);

  const BaselineImage& chosen =
      out.state.classification == EyeClass::kOpen ? *baselines.open : *baselines.closed;
  out.capture = analyze_image(eye_img, cfg.residue);
  out.baseline_analysis = analyze_image(chosen.image, cfg.residue);
  return out;
}

}  // namespace eyevis
