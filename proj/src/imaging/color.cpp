#include "eyevis/color.hpp"

#include <algorithm>
#include <cmath>

#include "eyevis/error.hpp"

namespace eyevis {

std::uint8_t to_channel(double value) noexcept {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  const double r = std::round(value);
  return r >= 255.0 ? 255 : static_cast<std::uint8_t>(r);
}

HsvPixel rgb_to_hsv(Rgb p) noexcept {
  const int r = p.r;
  const int g = p.g;
  const int b = p.b;
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int delta = mx - mn;

  HsvPixel out;
  out.v = mx;
  if (mx == 0 || delta == 0) return out;  // achromatic: h = s = 0

  out.s = 255.0 * delta / mx;
  double h;
  if (mx == r) {
    h = 60.0 * static_cast<double>(g - b) / delta;
  } else if (mx == g) {
    h = 120.0 + 60.0 * static_cast<double>(b - r) / delta;
  } else {
    h = 240.0 + 60.0 * static_cast<double>(r - g) / delta;
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Rgb hsv_to_rgb(const HsvPixel& p) noexcept {
  const double v = p.v;
  const double s = p.s / 255.0;
  double h = std::fmod(p.h, 360.0);
  if (h < 0.0) h += 360.0;

  const double chroma = v * s;
  const double sector = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(sector, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = v - chroma;
  return {to_channel(r + m), to_channel(g + m), to_channel(b + m)};
}

HsvImage rgb_to_hsv(const RasterImage& img) {
  HsvImage out(img.width(), img.height());
  auto src = img.values();
  auto dst = out.values();
  std::transform(src.begin(), src.end(), dst.begin(), [](Rgb p) { return rgb_to_hsv(p); });
  return out;
}

std::uint8_t luma(Rgb p) noexcept {
  return to_channel(0.299 * p.r + 0.587 * p.g + 0.114 * p.b);
}

GrayImage rgb_to_gray(const RasterImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.values();
  auto dst = out.values();
  std::transform(src.begin(), src.end(), dst.begin(), [](Rgb p) { return luma(p); });
  return out;
}

RasterImage enhance_blue(const RasterImage& img, double factor) {
  if (!std::isfinite(factor) || factor < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "blue factor must be finite and non-negative");
  }
  RasterImage out = img;
  for (Rgb& p : out.values()) p.b = to_channel(p.b * factor);
  return out;
}

}  // namespace eyevis
