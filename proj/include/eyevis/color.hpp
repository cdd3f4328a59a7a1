#pragma once

#include "eyevis/image.hpp"

namespace eyevis {

// Cylindrical HSV. Hue in degrees [0, 360); saturation and value on the
// 0..255 scale. Achromatic pixels carry h = 0.
struct HsvPixel {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

using HsvImage = Grid<HsvPixel>;

HsvPixel rgb_to_hsv(Rgb p) noexcept;
// Inverse of rgb_to_hsv, rounded half away from zero.
Rgb hsv_to_rgb(const HsvPixel& p) noexcept;
HsvImage rgb_to_hsv(const RasterImage& img);

// luma = round(0.299 R + 0.587 G + 0.114 B)
std::uint8_t luma(Rgb p) noexcept;
GrayImage rgb_to_gray(const RasterImage& img);

// Scales the blue channel, clamping to 255. Throws kInvalidArgument for a
// negative or non-finite factor.
RasterImage enhance_blue(const RasterImage& img, double factor);

// Rounds half away from zero, then clamps into [0, 255].
std::uint8_t to_channel(double value) noexcept;

}  // namespace eyevis
