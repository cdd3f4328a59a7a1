#pragma once

// Helpers shared by the unit tests and the acceptance runner. Every oracle
// here is written independently of the library code it checks.

#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "eyevis/codec.hpp"
#include "eyevis/color.hpp"
#include "eyevis/evaluation.hpp"
#include "eyevis/image.hpp"
#include "eyevis/landmarks.hpp"
#include "eyevis/residue.hpp"

namespace eyevis::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("eyevis-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline RasterImage solid(int w, int h, Rgb c) { return RasterImage(w, h, c); }

inline RasterImage random_image(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> d(0, 255);
  RasterImage img(w, h);
  for (Rgb& p : img.values()) {
    p = Rgb{static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)),
            static_cast<std::uint8_t>(d(rng))};
  }
  return img;
}

inline void fill_rect(RasterImage& img, int x0, int y0, int x1, int y1, Rgb c) {
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) img.at(x, y) = c;
  }
}

// Textbook hexcone HSV in degrees and 0..255, kept separate from the library
// conversion.
inline HsvPixel oracle_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double c = mx - mn;
  double h = 0.0;
  if (c > 0.0) {
    if (mx == r) {
      h = 60.0 * (g - b) / c;
    } else if (mx == g) {
      h = 120.0 + 60.0 * (b - r) / c;
    } else {
      h = 240.0 + 60.0 * (r - g) / c;
    }
    if (h < 0.0) h += 360.0;
  }
  const double s = mx == 0.0 ? 0.0 : 255.0 * c / mx;
  return {h, s, mx};
}

// Direct per-pixel bound check: blue boost, HSV, then the three intervals.
inline BinaryMask oracle_segment(const RasterImage& img, const HsvRange& r, double blue_factor) {
  BinaryMask m(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb p = img.at(x, y);
      const double boosted = std::min(255.0, std::round(p.b * blue_factor));
      const HsvPixel q = oracle_hsv(p.r, p.g, boosted);
      const bool hue_ok = r.h_lo <= r.h_hi ? (q.h >= r.h_lo && q.h <= r.h_hi)
                                           : (q.h >= r.h_lo || q.h <= r.h_hi);
      const bool in = hue_ok && q.s >= r.s_lo && q.s <= r.s_hi && q.v >= r.v_lo && q.v <= r.v_hi;
      m.set(x, y, in);
    }
  }
  return m;
}

// W. Randolph Franklin's PNPOLY crossing test.
inline bool pnpoly(const std::vector<Point2>& poly, double x, double y) {
  bool c = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) c = !c;
  }
  return c;
}

inline BinaryMask oracle_rasterize(const std::vector<Point2>& poly, int w, int h) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, pnpoly(poly, x + 0.5, y + 0.5));
  }
  return m;
}

// Star-shaped simple polygon around (cx, cy): sorted angles, random radii.
inline std::vector<Point2> random_simple_polygon(std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 3 + static_cast<int>(u(rng) * 10);
  const double cx = w * (0.3 + 0.4 * u(rng));
  const double cy = h * (0.3 + 0.4 * u(rng));
  const double rmax = std::min({cx, cy, w - cx, h - cy});
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& a : angles) a = u(rng) * 2.0 * std::numbers::pi;
  std::sort(angles.begin(), angles.end());
  std::vector<Point2> poly;
  for (double a : angles) {
    const double r = rmax * (0.2 + 0.8 * u(rng));
    poly.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return poly;
}

inline BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
  std::bernoulli_distribution d(density);
  BinaryMask m(w, h);
  for (auto& v : m.values()) v = d(rng) ? 1 : 0;
  return m;
}

// 16 points on an axis-aligned ellipse; angle steps of 22.5 degrees hit the
// four extremes, so the extent is exactly 2rx by 2ry.
inline std::array<Point2, kEyeContourSize> ellipse_ring(double cx, double cy, double rx, double ry) {
  std::array<Point2, kEyeContourSize> ring{};
  for (int k = 0; k < kEyeContourSize; ++k) {
    const double a = 2.0 * std::numbers::pi * k / kEyeContourSize;
    double c = std::cos(a);
    double s = std::sin(a);
    if (k % 4 == 0) {
      constexpr double kc[] = {1, 0, -1, 0};
      constexpr double ks[] = {0, 1, 0, -1};
      c = kc[k / 4];
      s = ks[k / 4];
    }
    ring[static_cast<std::size_t>(k)] = {cx + rx * c, cy + ry * s};
  }
  return ring;
}

struct EyeSpec {
  double cx, cy, rx, ry;
};

// Face-mesh landmark set with all non-eye points at the center and both eye
// rings on ellipses (normalized coordinates).
inline FaceLandmarks synthetic_landmarks(EyeSpec left, EyeSpec right,
                                         const EyeContourIndices& idx = EyeContourIndices::face_mesh_default()) {
  std::vector<Point2> pts(kFaceMeshPointCount, Point2{0.5, 0.5});
  const auto l = ellipse_ring(left.cx, left.cy, left.rx, left.ry);
  const auto r = ellipse_ring(right.cx, right.cy, right.rx, right.ry);
  for (int k = 0; k < kEyeContourSize; ++k) {
    pts[static_cast<std::size_t>(idx.left[static_cast<std::size_t>(k)])] = l[static_cast<std::size_t>(k)];
    pts[static_cast<std::size_t>(idx.right[static_cast<std::size_t>(k)])] = r[static_cast<std::size_t>(k)];
  }
  return FaceLandmarks(std::move(pts));
}

// Two side-by-side eyes spanning exactly [x0,x1] x [y0,y1]. Ring extremes are
// snapped so the span carries no floating-point residue.
inline FaceLandmarks spanning_landmarks(double x0, double x1, double y0, double y1,
                                        const EyeContourIndices& idx = EyeContourIndices::face_mesh_default()) {
  const double q = (x1 - x0) / 4.0, cy = (y0 + y1) / 2.0, ry = (y1 - y0) / 2.0;
  auto snap = [](double v, double a, double b) {
    if (std::abs(v - a) < 1e-12) return a;
    if (std::abs(v - b) < 1e-12) return b;
    return v;
  };
  std::vector<Point2> pts(kFaceMeshPointCount, Point2{0.5, 0.5});
  const auto l = ellipse_ring(x0 + q, cy, q, ry);
  const auto r = ellipse_ring(x1 - q, cy, q, ry);
  for (std::size_t k = 0; k < kEyeContourSize; ++k) {
    pts[static_cast<std::size_t>(idx.left[k])] = {snap(l[k].x, x0, x1), snap(l[k].y, y0, y1)};
    pts[static_cast<std::size_t>(idx.right[k])] = {snap(r[k].x, x0, x1), snap(r[k].y, y0, y1)};
  }
  return FaceLandmarks(std::move(pts));
}

// Open eyes whose padded box (pad 0.25) clamps to the whole image.
inline FaceLandmarks whole_frame_open_eyes() {
  return synthetic_landmarks({0.3, 0.5, 0.15, 0.35}, {0.7, 0.5, 0.15, 0.35});
}

// Nearly closed eyes (openness 0.02 on a square image). The eyes sit at
// different heights so the box around both keeps a usable height.
inline FaceLandmarks closed_eyes() {
  return synthetic_landmarks({0.35, 0.40, 0.1, 0.002}, {0.65, 0.50, 0.1, 0.002});
}

// Colors for synthetic residue scenes.
inline constexpr Rgb kSkin{230, 190, 160};
inline constexpr Rgb kPinkPaint{240, 110, 170};
inline constexpr Rgb kBlackPaint{20, 20, 20};

// Annotated corpus whose ground truth is constructed to agree exactly with the
// pipeline: face.png, eye_<k>.png plus eye_<k>.json, and landmarks/default.json.
// Eye images have the face's size and the eyes fill the frame, so the two
// passes compose to the identity and the eye polygons equal the contours.
inline void write_synthetic_corpus(const std::filesystem::path& dir, int items) {
  constexpr int kW = 160, kH = 120;
  std::filesystem::create_directories(dir / "landmarks");
  const FaceLandmarks lm = whole_frame_open_eyes();
  std::ofstream(dir / "landmarks" / "default.json") << format_landmark_file(lm);
  write_image(dir / "face.png", solid(kW, kH, kSkin));

  const EyePair eyes = eye_points(lm, EyeContourIndices::face_mesh_default(), kW, kH);
  auto rect = [](double x0, double y0, double x1, double y1) {
    return std::vector<Point2>{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  };
  for (int k = 0; k < items; ++k) {
    // Patches live in the eye-free column between the two rings.
    const int py0 = 4 + 4 * k, py1 = py0 + 20 + 2 * k;
    const int by0 = 70 - 2 * k, by1 = by0 + 10 + 3 * k;
    RasterImage img = solid(kW, kH, kSkin);
    fill_rect(img, 74, py0, 86, py1, kPinkPaint);
    fill_rect(img, 73 + (k % 2), by0, 87, by1, kBlackPaint);
    const std::string name = "eye_" + std::to_string(k);
    write_image(dir / (name + ".png"), img);

    AnnotationSet ann;
    ann.image = name + ".png";
    ann.annotations.push_back({AnnotationLabel::kEye, {eyes.left.begin(), eyes.left.end()}});
    ann.annotations.push_back({AnnotationLabel::kEye, {eyes.right.begin(), eyes.right.end()}});
    ann.annotations.push_back({AnnotationLabel::kPink, rect(74, py0, 86, py1)});
    ann.annotations.push_back({AnnotationLabel::kBlack, rect(73 + (k % 2), by0, 87, by1)});
    std::ofstream(dir / (name + ".json")) << format_annotation_set(ann);
  }
}

inline std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace eyevis::testing
