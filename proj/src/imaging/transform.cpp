#include "eyevis/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eyevis/color.hpp"
#include "eyevis/error.hpp"

namespace eyevis {
namespace {

struct Tap {
  int lo;
  int hi;
  double frac;  // weight of `hi`
};

// Source sample positions for one axis: center-aligned, clamped to the edge.
std::vector<Tap> axis_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double pos = (i + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, src - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, pos - lo};
  }
  return taps;
}

void check_region(const RasterImage& img, const Rect& region) {
  if (region.empty() || region.x0 < 0 || region.y0 < 0 || region.x1 > img.width() ||
      region.y1 > img.height()) {
    throw Error(ErrorCode::kInvalidArgument,
                "region (" + std::to_string(region.x0) + "," + std::to_string(region.y0) + ")-(" +
                    std::to_string(region.x1) + "," + std::to_string(region.y1) +
                    ") outside image bounds");
  }
}

}  // namespace

RasterImage resize(const RasterImage& img, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be positive");
  }
  if (width == img.width() && height == img.height()) return img;

  const auto xs = axis_taps(img.width(), width);
  const auto ys = axis_taps(img.height(), height);
  RasterImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const Rgb& a = img.at(tx.lo, ty.lo);
      const Rgb& b = img.at(tx.hi, ty.lo);
      const Rgb& c = img.at(tx.lo, ty.hi);
      const Rgb& d = img.at(tx.hi, ty.hi);
      auto blend = [&](auto channel) {
        const double top = channel(a) + (channel(b) - channel(a)) * tx.frac;
        const double bottom = channel(c) + (channel(d) - channel(c)) * tx.frac;
        return to_channel(top + (bottom - top) * ty.frac);
      };
      out.at(x, y) = {blend([](const Rgb& p) { return static_cast<double>(p.r); }),
                      blend([](const Rgb& p) { return static_cast<double>(p.g); }),
                      blend([](const Rgb& p) { return static_cast<double>(p.b); })};
    }
  }
  return out;
}

RasterImage paste(const RasterImage& base, const Rect& region, const RasterImage& patch) {
  check_region(base, region);
  if (patch.width() != region.width() || patch.height() != region.height()) {
    throw Error(ErrorCode::kInvalidArgument, "patch dimensions do not match region");
  }
  RasterImage out = base;
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) {
      out.at(region.x0 + x, region.y0 + y) = patch.at(x, y);
    }
  }
  return out;
}

RasterImage crop(const RasterImage& img, const Rect& region) {
  check_region(img, region);
  RasterImage out(region.width(), region.height());
  for (int y = 0; y < region.height(); ++y) {
    for (int x = 0; x < region.width(); ++x) {
      out.at(x, y) = img.at(region.x0 + x, region.y0 + y);
    }
  }
  return out;
}

}  // namespace eyevis
