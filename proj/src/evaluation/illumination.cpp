#include <algorithm>
#include <cmath>

#include "eyevis/codec.hpp"
#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"

namespace eyevis {

PixelDistance hsv_pixel_distance(const HsvPixel& a, const HsvPixel& b) noexcept {
  // Reduce the hue gap mod 360 so h and h + 360k compare equal.
  double gap = std::fmod(std::fabs(b.h - a.h), 360.0);
  PixelDistance out;
  out.d_h = std::min(gap, 360.0 - gap) / 180.0;
  out.d_s = std::fabs(b.s - a.s);
  out.d_v = std::fabs(b.v - a.v) / 255.0;
  out.d = std::sqrt(out.d_h * out.d_h + out.d_s * out.d_s + out.d_v * out.d_v);
  return out;
}

IlluminationReport hsv_distance(const HsvImage& img0, const HsvImage& img1) {
  if (img0.width() != img1.width() || img0.height() != img1.height()) {
    throw Error(ErrorCode::kInvalidArgument, "illumination comparison needs images of equal size");
  }
  IlluminationReport out;
  auto a = img0.values();
  auto b = img1.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const PixelDistance px = hsv_pixel_distance(a[i], b[i]);
    out.d += px.d;
    out.d_h += px.d_h;
    out.d_s += px.d_s;
    out.d_v += px.d_v;
  }
  const double n = static_cast<double>(a.size());
  out.d /= n;
  out.d_h /= n;
  out.d_s /= n;
  out.d_v /= n;
  out.pixels = a.size();
  return out;
}

IlluminationReport hsv_distance(const RasterImage& img0, const RasterImage& img1) {
  if (img0.width() != img1.width() || img0.height() != img1.height()) {
    throw Error(ErrorCode::kInvalidArgument, "illumination comparison needs images of equal size");
  }
  return hsv_distance(rgb_to_hsv(img0), rgb_to_hsv(img1));
}

std::vector<IlluminationRow> illumination_table(std::span<const std::filesystem::path> group_dirs) {
  namespace fs = std::filesystem;
  std::vector<IlluminationRow> rows;
  for (const fs::path& dir : group_dirs) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir)) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (entry.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) {
        images.push_back(entry.path());
      }
    }
    if (images.size() != 3) {
      throw Error(ErrorCode::kInvalidArgument, "group " + dir.string() + " must hold exactly 3 images, found " +
                                                   std::to_string(images.size()));
    }
    std::sort(images.begin(), images.end());
    const HsvImage a = rgb_to_hsv(read_image(images[0]));
    const HsvImage b = rgb_to_hsv(read_image(images[1]));
    const HsvImage c = rgb_to_hsv(read_image(images[2]));
    rows.push_back({dir.filename().string(), hsv_distance(a, b).d, hsv_distance(a, c).d, hsv_distance(b, c).d});
  }
  return rows;
}

}  // namespace eyevis
