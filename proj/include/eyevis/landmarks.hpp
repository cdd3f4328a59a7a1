#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eyevis/image.hpp"

namespace eyevis {

inline constexpr int kFaceMeshPointCount = 468;
inline constexpr int kEyeContourSize = 16;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// 468 face-mesh points, normalized to [0,1] relative to the analyzed image.
class FaceLandmarks {
 public:
  // Throws kInvalidArgument unless there are exactly 468 points in [0,1]^2.
  explicit FaceLandmarks(std::vector<Point2> points);

  const std::vector<Point2>& points() const noexcept { return points_; }
  const Point2& operator[](int index) const { return points_.at(static_cast<std::size_t>(index)); }

  friend bool operator==(const FaceLandmarks&, const FaceLandmarks&) = default;

 private:
  std::vector<Point2> points_;
};

using EyeIndexRing = std::array<int, kEyeContourSize>;

// Two 16-point rings into the face-mesh topology.
struct EyeContourIndices {
  EyeIndexRing left{};
  EyeIndexRing right{};

  // Throws kInvalidArgument when indices repeat, overlap or leave [0, 467].
  void validate() const;
  // The upper/lower lid rings used by the face-mesh reference tooling.
  static EyeContourIndices face_mesh_default();
};

// Landmark file: {"image": "<name>", "landmarks": [[x, y], ...]} or a bare
// array of pairs. A third coordinate per point is accepted and dropped.
struct LandmarkFile {
  std::optional<std::string> image;
  FaceLandmarks landmarks;
};

LandmarkFile parse_landmark_file(const std::string& text);
LandmarkFile load_landmark_file(const std::filesystem::path& path);
std::string format_landmark_file(const FaceLandmarks& landmarks,
                                 const std::optional<std::string>& image = std::nullopt);

// Hex SHA-256 over the dimensions and RGB bytes of a decoded image; the
// key fixture lookups use, independent of the container encoding.
std::string raster_digest(const RasterImage& img);

// Face-mesh detector contract: deterministic for identical inputs. Failure to
// find a face is reported as Error{kDetectionFailure}.
class LandmarkProvider {
 public:
  virtual ~LandmarkProvider() = default;
  virtual FaceLandmarks detect(const RasterImage& img) const = 0;
};

// Serves recorded landmark files.
//
// Lookup order: an exact raster match registered via add() or discovered in a
// fixture directory (landmark file whose "image" names a sibling image), then
// the bound fallback file, if any. Without a match detection fails.
class FixtureProvider : public LandmarkProvider {
 public:
  FixtureProvider() = default;
  // Bound to a single file: every detect() returns its points.
  static FixtureProvider bound_to(const std::filesystem::path& landmark_file);
  // Indexes every *.json landmark file in `dir`; a file named default.json
  // becomes the fallback.
  static FixtureProvider from_directory(const std::filesystem::path& dir);

  void add(const RasterImage& img, FaceLandmarks landmarks);
  void set_fallback(FaceLandmarks landmarks);
  std::size_t size() const noexcept { return by_digest_.size(); }

  FaceLandmarks detect(const RasterImage& img) const override;

 private:
  std::map<std::string, FaceLandmarks> by_digest_;
  std::optional<FaceLandmarks> fallback_;
};

// Runs an external detector: `<command> <png-path>`; stdout must be a landmark
// file. A non-zero exit status means no face was found. Results are cached by
// raster digest in `cache_dir` when one is given.
class ExternalProcessProvider : public LandmarkProvider {
 public:
  explicit ExternalProcessProvider(std::string command,
                                   std::optional<std::filesystem::path> cache_dir = std::nullopt);

  FaceLandmarks detect(const RasterImage& img) const override;

 private:
  std::string command_;
  std::optional<std::filesystem::path> cache_dir_;
  mutable std::mutex mutex_;
};

}  // namespace eyevis
