#include <set>

#include "doctest.h"
#include "eyevis/colormap.hpp"
#include "eyevis/error.hpp"
#include "eyevis/residue.hpp"
#include "support.hpp"

using namespace eyevis;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an eyevis::Error");
  return ErrorCode::kIo;
}

HsvRange random_range(std::mt19937& rng) {
  std::uniform_real_distribution<double> h(0.0, 360.0), c(0.0, 255.0);
  HsvRange r;
  r.h_lo = h(rng);
  r.h_hi = h(rng);
  r.s_lo = c(rng);
  r.s_hi = c(rng);
  r.v_lo = c(rng);
  r.v_hi = c(rng);
  if (r.s_lo > r.s_hi) std::swap(r.s_lo, r.s_hi);
  if (r.v_lo > r.v_hi) std::swap(r.v_lo, r.v_hi);
  return r;
}

// 40x40 white image with the top-left 20x20 quarter painted HSV(330,200,200).
RasterImage quarter_patch() {
  RasterImage img = testing::solid(40, 40, {255, 255, 255});
  testing::fill_rect(img, 0, 0, 20, 20, hsv_to_rgb({330.0, 200.0, 200.0}));
  return img;
}

}  // namespace

TEST_CASE("segment_paint trivial images") {
  const ResidueConfig cfg;
  const RasterImage black = testing::solid(8, 8, {0, 0, 0});
  const RasterImage white = testing::solid(8, 8, {255, 255, 255});
  CHECK(segment_paint(black, cfg.black_range, cfg.blue_factor).count() == 64);
  CHECK(segment_paint(white, cfg.black_range, cfg.blue_factor).count() == 0);
  CHECK(segment_paint(white, cfg.pink_range, cfg.blue_factor).count() == 0);
}

TEST_CASE("quarter pink patch gives ratio one quarter") {
  const ResidueConfig cfg;
  const RasterImage img = quarter_patch();
  const BinaryMask m = segment_paint(img, cfg.pink_range, cfg.blue_factor);
  CHECK(m == testing::oracle_segment(img, cfg.pink_range, cfg.blue_factor));
  CHECK(residue_ratio(m) == 0.25);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) REQUIRE(m.test(x, y) == (x < 20 && y < 20));
  }
}

TEST_CASE("segment_paint matches the per-pixel oracle") {
  std::mt19937 rng(77);
  for (int i = 0; i < 40; ++i) {
    const RasterImage img = testing::random_image(rng, 24, 17);
    const HsvRange r = random_range(rng);
    const double factor = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    REQUIRE(segment_paint(img, r, factor) == testing::oracle_segment(img, r, factor));
  }
}

TEST_CASE("widening any bound never unsets a pixel") {
  std::mt19937 rng(78);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const RasterImage img = testing::random_image(rng, 20, 20);
    HsvRange r = random_range(rng);
    r.h_lo = std::min(r.h_lo, r.h_hi);
    r.h_hi = std::max(r.h_lo, r.h_hi);
    HsvRange wide = r;
    wide.h_lo *= u(rng);
    wide.h_hi += (360.0 - wide.h_hi) * u(rng);
    wide.s_lo *= u(rng);
    wide.s_hi += (255.0 - wide.s_hi) * u(rng);
    wide.v_lo *= u(rng);
    wide.v_hi += (255.0 - wide.v_hi) * u(rng);
    const BinaryMask narrow_m = segment_paint(img, r, 1.2);
    const BinaryMask wide_m = segment_paint(img, wide, 1.2);
    REQUIRE(mask_and(narrow_m, wide_m) == narrow_m);
    REQUIRE(residue_ratio(wide_m) >= residue_ratio(narrow_m));
  }
}

TEST_CASE("hue range wraps through zero") {
  const HsvRange pink = ResidueConfig{}.pink_range;
  CHECK(pink.contains({350.0, 100.0, 100.0}));
  CHECK(pink.contains({0.0, 100.0, 100.0}));
  CHECK(pink.contains({15.0, 100.0, 100.0}));
  CHECK_FALSE(pink.contains({16.0, 100.0, 100.0}));
  CHECK_FALSE(pink.contains({299.0, 100.0, 100.0}));
  CHECK_FALSE(pink.contains({330.0, 79.0, 100.0}));
}

TEST_CASE("range validation") {
  HsvRange r;
  r.s_lo = 200;
  r.s_hi = 100;
  CHECK(code_of([&] { r.validate(); }) == ErrorCode::kInvalidArgument);
  HsvRange v;
  v.v_hi = 300;
  CHECK(code_of([&] { v.validate(); }) == ErrorCode::kInvalidArgument);
  HsvRange h;
  h.h_lo = -5;
  CHECK(code_of([&] { h.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("residue_ratio") {
  CHECK(residue_ratio(BinaryMask(10, 10)) == 0.0);
  CHECK(residue_ratio(BinaryMask(10, 10, 1)) == 1.0);
  BinaryMask m(10, 10);
  for (int i = 0; i < 25; ++i) m.set(i % 10, i / 10);
  CHECK(residue_ratio(m) == 0.25);
  CHECK(code_of([] { residue_ratio(BinaryMask{}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("residue_ratio ignores the content of unset pixels") {
  const ResidueConfig cfg;
  std::mt19937 rng(4);
  RasterImage img = quarter_patch();
  const double base = residue_ratio(segment_paint(img, cfg.pink_range, cfg.blue_factor));
  // Swap non-pink content around outside the patch: greys stay non-pink.
  std::uniform_int_distribution<int> d(0, 255);
  for (int y = 20; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      const auto g = static_cast<std::uint8_t>(d(rng));
      img.at(x, y) = {g, g, g};
    }
  }
  CHECK(residue_ratio(segment_paint(img, cfg.pink_range, cfg.blue_factor)) == base);
}

TEST_CASE("hsv-uv combined colors") {
  const ResidueConfig cfg;
  RasterImage img = testing::solid(30, 10, {255, 255, 255});
  testing::fill_rect(img, 0, 0, 10, 10, testing::kBlackPaint);
  testing::fill_rect(img, 20, 0, 30, 10, testing::kPinkPaint);
  const HsvUvResult r = hsv_uv_simulate(img, cfg);
  CHECK(r.combined.at(5, 5) == kBlackPaintColor);
  CHECK(r.combined.at(25, 5) == kPinkPaintColor);
  CHECK(r.combined.at(15, 5) == kBackground);
  for (Rgb p : r.combined.values()) REQUIRE_FALSE(p == kBothPaintColor);
  CHECK(r.black_vis.at(5, 5) == kBlackPaintColor);
  CHECK(r.pink_vis.at(25, 5) == kPinkPaintColor);
  CHECK(r.black.ratio == doctest::Approx(1.0 / 3.0));
  CHECK(r.pink.ratio == doctest::Approx(1.0 / 3.0));

  // A dark pink satisfies both ranges once v is allowed below 60.
  ResidueConfig both = cfg;
  both.pink_range.v_lo = 0.0;
  const RasterImage dark = testing::solid(4, 4, {50, 10, 30});
  CHECK(hsv_uv_simulate(dark, both).combined.at(1, 1) == kBothPaintColor);

  const HsvUvResult none = hsv_uv_simulate(testing::solid(5, 5, {255, 255, 255}), cfg);
  CHECK(none.combined == testing::solid(5, 5, kBackground));
}

TEST_CASE("combined color is a function of mask membership") {
  const ResidueConfig cfg;
  std::mt19937 rng(15);
  const RasterImage img = testing::random_image(rng, 64, 64);
  const HsvUvResult r = hsv_uv_simulate(img, cfg);
  std::set<std::tuple<int, int, int>> colors;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const bool b = r.black.mask.test(x, y), p = r.pink.mask.test(x, y);
      const Rgb want = b && p ? kBothPaintColor : b ? kBlackPaintColor : p ? kPinkPaintColor : kBackground;
      REQUIRE(r.combined.at(x, y) == want);
      colors.insert({want.r, want.g, want.b});
    }
  }
  CHECK(colors.size() <= 4);
}

TEST_CASE("binary threshold visualization") {
  const ResidueConfig cfg;
  const Colormap& cmap = colormap_by_name(cfg.colormap);

  const RasterImage g50 = testing::solid(6, 6, {50, 50, 50});
  CHECK(binary_threshold_vis(g50, 0, 100, cfg) == testing::solid(6, 6, {0, 0, 0}));

  const RasterImage g200 = testing::solid(6, 6, {200, 200, 200});
  CHECK(binary_threshold_vis(g200, 0, 100, cfg) == testing::solid(6, 6, cmap(200)));

  CHECK(code_of([&] { binary_threshold_vis(g50, 120, 100, cfg); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { binary_threshold_vis(g50, -1, 100, cfg); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("half black half white gives one edge column") {
  const ResidueConfig cfg;
  const Colormap& cmap = colormap_by_name(cfg.colormap);
  RasterImage img = testing::solid(10, 6, {255, 255, 255});
  testing::fill_rect(img, 0, 0, 5, 6, {0, 0, 0});
  const RasterImage out = binary_threshold_vis(img, 0, 100, cfg);

  // Oracle: out-of-bound pixels whose 4-neighbourhood holds an in-bound pixel.
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 10; ++x) {
      const bool in = x < 5;
      const bool edge = !in && x == 5;
      const Rgb want = in ? Rgb{0, 0, 0} : edge ? cfg.edge_color : cmap(255);
      REQUIRE(out.at(x, y) == want);
    }
  }
}

TEST_CASE("in-bound pixels are always black") {
  const ResidueConfig cfg;
  std::mt19937 rng(19);
  for (int i = 0; i < 20; ++i) {
    const RasterImage img = testing::random_image(rng, 20, 20);
    const int lo = std::uniform_int_distribution<int>(0, 128)(rng);
    const int hi = std::uniform_int_distribution<int>(lo, 255)(rng);
    const RasterImage out = binary_threshold_vis(img, lo, hi, cfg);
    for (std::size_t k = 0; k < img.size(); ++k) {
      const int y = luma(img.values()[k]);
      if (y >= lo && y <= hi) REQUIRE(out.values()[k] == Rgb{0, 0, 0});
    }
  }
}

TEST_CASE("colormaps") {
  CHECK(colormap_by_name("viridis")(0) == Rgb{68, 1, 84});
  CHECK(colormap_by_name("inferno")(0) == Rgb{0, 0, 4});
  CHECK(colormap_names().size() == 2);
  CHECK(code_of([] { colormap_by_name("jet"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("analysis renders five images of the original size") {
  std::mt19937 rng(5);
  const RasterImage img = testing::random_image(rng, 31, 17);
  const ImageAnalysis a = analyze_image(img, ResidueConfig{});
  for (const RasterImage* r : {&a.vis.original, &a.vis.black_vis, &a.vis.pink_vis, &a.vis.combined, &a.vis.contour_vis}) {
    CHECK(r->width() == 31);
    CHECK(r->height() == 17);
  }
  CHECK(a.vis.original == img);
}

TEST_CASE("removal check against baselines") {
  FixtureProvider provider;
  provider.set_fallback(testing::whole_frame_open_eyes());
  const RasterImage face = testing::solid(60, 40, testing::kSkin);
  RasterImage base_open = testing::solid(60, 40, testing::kSkin);
  testing::fill_rect(base_open, 5, 5, 10, 10, testing::kPinkPaint);
  const RasterImage base_closed = testing::solid(60, 40, {120, 120, 120});
  BaselineImages baselines{BaselineImage{{"open", EyeClass::kOpen}, base_open},
                           BaselineImage{{"closed", EyeClass::kClosed}, base_closed}};

  const RemovalCheckResult same = removal_check(provider, face, base_open, baselines, VisionConfig{});
  CHECK(same.state.classification == EyeClass::kOpen);
  CHECK(same.baseline.capture_id == "open");
  CHECK(same.capture.pink.ratio == same.baseline_analysis.pink.ratio);
  CHECK(same.capture.black.ratio == same.baseline_analysis.black.ratio);

  RasterImage painted = base_open;
  testing::fill_rect(painted, 20, 10, 40, 30, testing::kPinkPaint);
  const RemovalCheckResult more = removal_check(provider, face, painted, baselines, VisionConfig{});
  CHECK(more.capture.pink.ratio > more.baseline_analysis.pink.ratio);

  FixtureProvider closed_provider;
  closed_provider.set_fallback(testing::closed_eyes());
  const RemovalCheckResult closed = removal_check(closed_provider, face, painted, baselines, VisionConfig{});
  CHECK(closed.state.classification == EyeClass::kClosed);
  CHECK(closed.baseline.capture_id == "closed");

  CHECK(code_of([&] { removal_check(provider, face, painted, BaselineImages{}, VisionConfig{}); }) ==
        ErrorCode::kMissingBaseline);
}
