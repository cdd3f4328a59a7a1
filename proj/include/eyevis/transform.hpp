#pragma once

#include "eyevis/image.hpp"

namespace eyevis {

// Bilinear resize using pixel-center alignment; edges are clamped.
RasterImage resize(const RasterImage& img, int width, int height);

// Copy of `base` with `region` replaced by `patch`. Patch dimensions must match
// the region and the region must lie inside `base`.
RasterImage paste(const RasterImage& base, const Rect& region, const RasterImage& patch);

RasterImage crop(const RasterImage& img, const Rect& region);

}  // namespace eyevis
