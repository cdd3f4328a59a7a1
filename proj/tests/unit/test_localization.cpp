#include <fstream>

#include "doctest.h"
#include "eyevis/codec.hpp"
#include "eyevis/error.hpp"
#include "eyevis/localization.hpp"
#include "support.hpp"

using namespace eyevis;
using eyevis::testing::TempDir;

namespace {

Error error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an eyevis::Error");
  return Error(ErrorCode::kIo, "");
}

// Eye rings whose union spans x in [x0, x1] and y in [y0, y1] (normalized).
FaceLandmarks spanning(double x0, double x1, double y0, double y1) {
  return testing::spanning_landmarks(x0, x1, y0, y1);
}

EyeContour square_ring(double side) {
  return testing::ellipse_ring(side, side, side / 2.0, side / 2.0);
}

}  // namespace

TEST_CASE("default eye indices are valid face-mesh rings") {
  const auto idx = EyeContourIndices::face_mesh_default();
  CHECK_NOTHROW(idx.validate());
  CHECK(idx.right[0] == 33);
  CHECK(idx.left[0] == 263);

  auto dup = idx;
  dup.left[3] = dup.left[4];
  CHECK(error_of([&] { dup.validate(); }).code() == ErrorCode::kInvalidArgument);
  auto shared = idx;
  shared.left[0] = shared.right[0];
  CHECK(error_of([&] { shared.validate(); }).code() == ErrorCode::kInvalidArgument);
  auto range = idx;
  range.right[5] = 468;
  CHECK(error_of([&] { range.validate(); }).code() == ErrorCode::kInvalidArgument);
}

TEST_CASE("face landmarks must be 468 normalized points") {
  CHECK(error_of([] { FaceLandmarks(std::vector<Point2>(467)); }).code() == ErrorCode::kInvalidArgument);
  std::vector<Point2> pts(468, Point2{0.5, 0.5});
  pts[10] = {1.2, 0.5};
  CHECK(error_of([&] { FaceLandmarks{pts}; }).code() == ErrorCode::kInvalidArgument);
}

TEST_CASE("landmark files parse both layouts and drop z") {
  const FaceLandmarks lm = testing::whole_frame_open_eyes();
  const LandmarkFile f = parse_landmark_file(format_landmark_file(lm, "face.png"));
  CHECK(f.image == std::optional<std::string>("face.png"));
  CHECK(f.landmarks == lm);

  std::string bare = "[";
  for (int i = 0; i < 468; ++i) bare += std::string(i ? "," : "") + "[0.25,0.75,-0.1]";
  bare += "]";
  const LandmarkFile g = parse_landmark_file(bare);
  CHECK_FALSE(g.image.has_value());
  CHECK(g.landmarks[467] == Point2{0.25, 0.75});

  CHECK(error_of([] { parse_landmark_file("{\"landmarks\": [[0.1, 0.2]]}"); }).code() ==
        ErrorCode::kInvalidArgument);
  CHECK(error_of([] { parse_landmark_file("not json"); }).code() == ErrorCode::kInvalidArgument);
}

TEST_CASE("fixture provider passthrough and determinism") {
  TempDir dir("lm");
  const FaceLandmarks lm = testing::whole_frame_open_eyes();
  std::ofstream(dir / "l.json") << format_landmark_file(lm);
  const FixtureProvider bound = FixtureProvider::bound_to(dir / "l.json");
  std::mt19937 rng(2);
  const RasterImage img = testing::random_image(rng, 20, 20);
  CHECK(bound.detect(img) == lm);
  CHECK(bound.detect(img) == bound.detect(img));

  const FixtureProvider empty;
  CHECK(error_of([&] { empty.detect(img); }).code() == ErrorCode::kDetectionFailure);
}

TEST_CASE("fixture directory indexes images by raster content") {
  TempDir dir("lm");
  std::mt19937 rng(4);
  const RasterImage a = testing::random_image(rng, 12, 10);
  const RasterImage b = testing::random_image(rng, 12, 10);
  write_image(dir / "a.png", a);
  write_image(dir / "b.png", b);
  const FaceLandmarks la = testing::whole_frame_open_eyes();
  const FaceLandmarks lb = testing::closed_eyes();
  std::ofstream(dir / "a.json") << format_landmark_file(la, "a.png");
  std::ofstream(dir / "b.json") << format_landmark_file(lb, "b.png");

  FixtureProvider p = FixtureProvider::from_directory(dir.path());
  CHECK(p.size() == 2);
  CHECK(p.detect(a) == la);
  CHECK(p.detect(b) == lb);
  CHECK(error_of([&] { p.detect(testing::random_image(rng, 12, 10)); }).code() == ErrorCode::kDetectionFailure);

  std::ofstream(dir / "default.json") << format_landmark_file(lb);
  const FixtureProvider q = FixtureProvider::from_directory(dir.path());
  CHECK(q.detect(testing::random_image(rng, 5, 5)) == lb);
}

TEST_CASE("eye bounding box worked examples") {
  const auto idx = EyeContourIndices::face_mesh_default();
  const FaceLandmarks lm = spanning(0.4, 0.5, 0.45, 0.5);
  CHECK(eye_bounding_box(lm, idx, 1000, 1000, 0.0) == Rect{400, 450, 500, 500});
  CHECK(eye_bounding_box(lm, idx, 1000, 1000, 0.25) == Rect{375, 438, 525, 513});

  const FaceLandmarks full = spanning(0.0, 1.0, 0.0, 1.0);
  CHECK(eye_bounding_box(full, idx, 640, 480, 0.0) == Rect{0, 0, 640, 480});
  CHECK(eye_bounding_box(full, idx, 640, 480, 0.7) == Rect{0, 0, 640, 480});

  std::vector<Point2> flat(468, Point2{0.5, 0.5});
  CHECK(error_of([&] { eye_bounding_box(FaceLandmarks(flat), idx, 100, 100, 0.25); }).code() ==
        ErrorCode::kDegenerateGeometry);
  CHECK(error_of([&] { eye_bounding_box(lm, idx, 100, 100, -0.1); }).code() == ErrorCode::kInvalidArgument);
}

TEST_CASE("bounding box contains every contour point when unclamped") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto idx = EyeContourIndices::face_mesh_default();
  for (int i = 0; i < 300; ++i) {
    const double x0 = 0.2 + 0.2 * u(rng), x1 = x0 + 0.05 + 0.2 * u(rng);
    const double y0 = 0.2 + 0.2 * u(rng), y1 = y0 + 0.02 + 0.2 * u(rng);
    const FaceLandmarks lm = spanning(x0, x1, y0, y1);
    const int w = 100 + static_cast<int>(u(rng) * 900), h = 100 + static_cast<int>(u(rng) * 900);
    const double pad = 0.5 * u(rng);
    const Rect box = eye_bounding_box(lm, idx, w, h, pad);
    const EyePair eyes = eye_points(lm, idx, w, h);
    for (const auto* ring : {&eyes.left, &eyes.right}) {
      for (const Point2& p : *ring) {
        REQUIRE(p.x >= box.x0 - 0.5);
        REQUIRE(p.x <= box.x1 + 0.5);
        REQUIRE(p.y >= box.y0 - 0.5);
        REQUIRE(p.y <= box.y1 + 0.5);
      }
    }
  }
}

TEST_CASE("two-pass localization, identity composite") {
  const FaceLandmarks lm = testing::whole_frame_open_eyes();
  FixtureProvider p;
  p.set_fallback(lm);
  std::mt19937 rng(6);
  const RasterImage face = testing::random_image(rng, 120, 80);
  const RasterImage eye = testing::random_image(rng, 120, 80);
  const EyeLocalization loc = localize_eye_features(p, face, eye, {});
  CHECK(loc.box == Rect{0, 0, 120, 80});
  const EyePair first = eye_points(lm, EyeContourIndices::face_mesh_default(), 120, 80);
  for (int k = 0; k < kEyeContourSize; ++k) {
    CHECK(loc.contour.left[static_cast<std::size_t>(k)] == first.left[static_cast<std::size_t>(k)]);
    CHECK(loc.contour.right[static_cast<std::size_t>(k)] == first.right[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("two-pass localization, worked affine example") {
  // First pass puts the box at (100,100)-(300,200) in a 1000x1000 face.
  const FaceLandmarks first = spanning(0.1, 0.3, 0.1, 0.2);
  const FaceLandmarks second = testing::synthetic_landmarks({0.15, 0.15, 0.03, 0.02}, {0.24, 0.16, 0.04, 0.01});
  std::mt19937 rng(7);
  const RasterImage face = testing::solid(1000, 1000, {90, 90, 90});
  const RasterImage eye = testing::random_image(rng, 400, 200);
  FixtureProvider p;
  p.add(face, first);
  p.set_fallback(second);

  LocalizationConfig cfg;
  cfg.pad_frac = 0.0;
  const EyeLocalization loc = localize_eye_features(p, face, eye, cfg);
  REQUIRE(loc.box == Rect{100, 100, 300, 200});
  const EyePair on_composite = eye_points(second, cfg.indices, 1000, 1000);
  for (int k = 0; k < kEyeContourSize; ++k) {
    const auto i = static_cast<std::size_t>(k);
    CHECK(loc.contour.left[i].x == (on_composite.left[i].x - 100) * 2);
    CHECK(loc.contour.left[i].y == (on_composite.left[i].y - 100) * 2);
    CHECK(loc.contour.right[i].x == (on_composite.right[i].x - 100) * 2);
    CHECK(loc.contour.right[i].y == (on_composite.right[i].y - 100) * 2);
  }
}

TEST_CASE("localization failures carry the pass") {
  std::mt19937 rng(3);
  const RasterImage face = testing::random_image(rng, 50, 50);
  const RasterImage eye = testing::random_image(rng, 30, 20);

  const FixtureProvider none;
  const Error e1 = error_of([&] { localize_eye_features(none, face, eye, {}); });
  CHECK(e1.code() == ErrorCode::kDetectionFailure);
  CHECK(e1.stage() == "first-pass");

  FixtureProvider face_only;
  face_only.add(face, testing::whole_frame_open_eyes());
  const Error e2 = error_of([&] { localize_eye_features(face_only, face, eye, {}); });
  CHECK(e2.code() == ErrorCode::kDetectionFailure);
  CHECK(e2.stage() == "second-pass");
}

TEST_CASE("coordinate maps are inverse") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const int x0 = static_cast<int>(u(rng) * 500), y0 = static_cast<int>(u(rng) * 500);
    const Rect box{x0, y0, x0 + 1 + static_cast<int>(u(rng) * 400), y0 + 1 + static_cast<int>(u(rng) * 400)};
    const int ew = 1 + static_cast<int>(u(rng) * 1000), eh = 1 + static_cast<int>(u(rng) * 1000);
    const Point2 p{u(rng) * ew, u(rng) * eh};
    const Point2 q = composite_to_eye(eye_to_composite(p, box, ew, eh), box, ew, eh);
    REQUIRE(std::abs(q.x - p.x) < 1e-6);
    REQUIRE(std::abs(q.y - p.y) < 1e-6);
  }
}

TEST_CASE("eye openness") {
  EyeContour line{};
  for (int k = 0; k < kEyeContourSize; ++k) line[static_cast<std::size_t>(k)] = {10.0 + k, 50.0};
  CHECK(contour_openness(line) == 0.0);
  CHECK(eye_openness({line, line}) == 0.0);

  const EyeContour sq = square_ring(40.0);
  CHECK(contour_openness(sq) == doctest::Approx(1.0).epsilon(1e-12));

  const EyeContour wide = testing::ellipse_ring(200, 100, 50, 10);
  CHECK(eye_openness({wide, wide}) == doctest::Approx(0.2).epsilon(1e-12));

  EyeContour vertical{};
  for (int k = 0; k < kEyeContourSize; ++k) vertical[static_cast<std::size_t>(k)] = {5.0, 1.0 * k};
  CHECK(error_of([&] { contour_openness(vertical); }).code() == ErrorCode::kDegenerateGeometry);
}

TEST_CASE("openness is invariant under uniform scaling and translation") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    EyeContour c{};
    for (Point2& p : c) p = {u(rng) * 100, u(rng) * 100};
    const double s = 0.1 + 10 * u(rng), tx = 200 * u(rng) - 100, ty = 200 * u(rng) - 100;
    EyeContour d = c;
    for (Point2& p : d) p = {p.x * s + tx, p.y * s + ty};
    REQUIRE(contour_openness(d) == doctest::Approx(contour_openness(c)).epsilon(1e-9));
  }
}

TEST_CASE("classification and baseline matching") {
  const BaselineSet both{BaselineRef{"open-id", EyeClass::kOpen}, BaselineRef{"closed-id", EyeClass::kClosed}};
  CHECK(match_baseline(classify_eye(0.30, 0.18), both).capture_id == "open-id");
  CHECK(match_baseline(classify_eye(0.05, 0.18), both).capture_id == "closed-id");
  CHECK(classify_eye(0.18, 0.18).classification == EyeClass::kOpen);
  CHECK(match_baseline(classify_eye(0.18, 0.18), both).capture_id == "open-id");

  for (double o = 0.0; o < 1.0; o += 0.01) {
    const EyeState s = classify_eye(o, 0.18);
    REQUIRE(match_baseline(s, both).classification == s.classification);
  }

  const BaselineSet open_only{BaselineRef{"open-id", EyeClass::kOpen}, std::nullopt};
  CHECK(error_of([&] { match_baseline(classify_eye(0.3, 0.18), open_only); }).code() ==
        ErrorCode::kMissingBaseline);
  CHECK(error_of([&] { match_baseline(classify_eye(0.3, 0.18), BaselineSet{}); }).code() ==
        ErrorCode::kMissingBaseline);
}

TEST_CASE("synthetic landmark helpers produce the intended openness") {
  const auto idx = EyeContourIndices::face_mesh_default();
  CHECK(eye_openness(eye_points(testing::closed_eyes(), idx, 100, 100)) == doctest::Approx(0.02));
  CHECK(eye_openness(eye_points(testing::whole_frame_open_eyes(), idx, 100, 100)) > 0.18);
}
