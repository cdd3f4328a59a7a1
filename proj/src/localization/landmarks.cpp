#include "eyevis/landmarks.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "eyevis/codec.hpp"
#include "eyevis/digest.hpp"
#include "eyevis/error.hpp"
#include "json.hpp"

namespace eyevis {

using nlohmann::json;

FaceLandmarks::FaceLandmarks(std::vector<Point2> points) : points_(std::move(points)) {
  if (points_.size() != static_cast<std::size_t>(kFaceMeshPointCount)) {
    throw Error(ErrorCode::kInvalidArgument, "expected 468 landmarks, got " +
                                                 std::to_string(points_.size()));
  }
  for (const Point2& p : points_) {
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "landmark coordinate outside [0,1]");
    }
  }
}

void EyeContourIndices::validate() const {
  std::set<int> seen;
  for (const EyeIndexRing* ring : {&left, &right}) {
    std::set<int> own;
    for (int idx : *ring) {
      if (idx < 0 || idx >= kFaceMeshPointCount) {
        throw Error(ErrorCode::kInvalidArgument, "eye index out of range: " + std::to_string(idx));
      }
      if (!own.insert(idx).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate eye index: " + std::to_string(idx));
      }
      if (!seen.insert(idx).second) {
        throw Error(ErrorCode::kInvalidArgument, "left and right eye rings overlap at " +
                                                     std::to_string(idx));
      }
    }
  }
}

EyeContourIndices EyeContourIndices::face_mesh_default() {
  // Subject's left eye, outer corner 263, inner corner 362; right eye, outer
  // corner 33, inner corner 133. Each ring runs lower lid then upper lid.
  return {
      {263, 249, 390, 373, 374, 380, 381, 382, 362, 398, 384, 385, 386, 387, 388, 466},
      {33, 7, 163, 144, 145, 153, 154, 155, 133, 173, 157, 158, 159, 160, 161, 246},
  };
}

LandmarkFile parse_landmark_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("landmark file is not JSON: ") + e.what());
  }

  std::optional<std::string> image;
  const json* pairs = &doc;
  if (doc.is_object()) {
    if (doc.contains("image") && doc["image"].is_string()) image = doc["image"].get<std::string>();
    if (!doc.contains("landmarks")) {
      throw Error(ErrorCode::kInvalidArgument, "landmark file lacks \"landmarks\"");
    }
    pairs = &doc["landmarks"];
  }
  if (!pairs->is_array()) throw Error(ErrorCode::kInvalidArgument, "landmarks must be an array");

  std::vector<Point2> points;
  points.reserve(pairs->size());
  for (const json& entry : *pairs) {
    if (!entry.is_array() || entry.size() < 2 || entry.size() > 3 || !entry[0].is_number() ||
        !entry[1].is_number()) {
      throw Error(ErrorCode::kInvalidArgument, "landmark entries must be [x, y] or [x, y, z]");
    }
    points.push_back({entry[0].get<double>(), entry[1].get<double>()});
  }
  return {std::move(image), FaceLandmarks(std::move(points))};
}

LandmarkFile load_landmark_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open landmark file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_landmark_file(buf.str());
}

std::string format_landmark_file(const FaceLandmarks& landmarks,
                                 const std::optional<std::string>& image) {
  json doc = json::object();
  if (image) doc["image"] = *image;
  json pairs = json::array();
  for (const Point2& p : landmarks.points()) pairs.push_back({p.x, p.y});
  doc["landmarks"] = std::move(pairs);
  return doc.dump();
}

std::string raster_digest(const RasterImage& img) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + img.size() * 3);
  for (int dim : {img.width(), img.height()}) {
    for (int shift = 0; shift < 32; shift += 8) {
      bytes.push_back(static_cast<std::uint8_t>((static_cast<unsigned>(dim) >> shift) & 0xFF));
    }
  }
  for (const Rgb& p : img.values()) {
    bytes.push_back(p.r);
    bytes.push_back(p.g);
    bytes.push_back(p.b);
  }
  return sha256_hex(bytes);
}

// --- FixtureProvider -------------------------------------------------------

FixtureProvider FixtureProvider::bound_to(const std::filesystem::path& landmark_file) {
  FixtureProvider provider;
  provider.set_fallback(load_landmark_file(landmark_file).landmarks);
  return provider;
}

FixtureProvider FixtureProvider::from_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "landmark fixture directory not found: " + dir.string());
  }
  FixtureProvider provider;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    LandmarkFile file = load_landmark_file(entry.path());
    if (entry.path().filename() == "default.json") {
      provider.set_fallback(file.landmarks);
      continue;
    }
    if (!file.image) continue;
    const fs::path image_path = dir / *file.image;
    if (!fs::exists(image_path)) continue;
    provider.add(read_image(image_path), std::move(file.landmarks));
  }
  return provider;
}

void FixtureProvider::add(const RasterImage& img, FaceLandmarks landmarks) {
  by_digest_.insert_or_assign(raster_digest(img), std::move(landmarks));
}

void FixtureProvider::set_fallback(FaceLandmarks landmarks) { fallback_ = std::move(landmarks); }

FaceLandmarks FixtureProvider::detect(const RasterImage& img) const {
  if (!by_digest_.empty()) {
    if (auto it = by_digest_.find(raster_digest(img)); it != by_digest_.end()) return it->second;
  }
  if (fallback_) return *fallback_;
  throw Error(ErrorCode::kDetectionFailure, "no face found (no landmark fixture for image)");
}

// --- ExternalProcessProvider ----------------------------------------------

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Clamps tiny excursions some detectors emit at image borders.
FaceLandmarks clamp_landmarks(const std::string& text) {
  json doc = json::parse(text);
  json& pairs = doc.is_object() ? doc["landmarks"] : doc;
  if (pairs.is_array()) {
    for (json& entry : pairs) {
      if (!entry.is_array()) continue;
      for (std::size_t i = 0; i < std::min<std::size_t>(2, entry.size()); ++i) {
        if (entry[i].is_number()) entry[i] = std::clamp(entry[i].get<double>(), 0.0, 1.0);
      }
    }
  }
  return parse_landmark_file(doc.dump()).landmarks;
}

}  // namespace

ExternalProcessProvider::ExternalProcessProvider(std::string command,
                                                 std::optional<std::filesystem::path> cache_dir)
    : command_(std::move(command)), cache_dir_(std::move(cache_dir)) {
  if (command_.empty()) throw Error(ErrorCode::kInvalidArgument, "external provider needs a command");
}

FaceLandmarks ExternalProcessProvider::detect(const RasterImage& img) const {
  namespace fs = std::filesystem;
  const std::string digest = raster_digest(img);
  std::lock_guard lock(mutex_);

  if (cache_dir_) {
    const fs::path cached = *cache_dir_ / (digest + ".json");
    if (fs::exists(cached)) return load_landmark_file(cached).landmarks;
  }

  const fs::path input = fs::temp_directory_path() /
                         ("eyevis-" + std::to_string(::getpid()) + "-" + digest.substr(0, 16) + ".png");
  write_image(input, img);

  std::string output;
  int status = -1;
  if (FILE* pipe = ::popen((command_ + " " + shell_quote(input.string())).c_str(), "r")) {
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    status = ::pclose(pipe);
  }
  std::error_code ec;
  fs::remove(input, ec);

  if (status != 0) {
    throw Error(ErrorCode::kDetectionFailure, "landmark detector found no face (exit status " +
                                                  std::to_string(WEXITSTATUS(status)) + ")");
  }
  FaceLandmarks landmarks = [&] {
    try {
      return clamp_landmarks(output);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kDetectionFailure,
                  std::string("landmark detector produced unusable output: ") + e.what());
    }
  }();

  if (cache_dir_) {
    fs::create_directories(*cache_dir_);
    std::ofstream(*cache_dir_ / (digest + ".json")) << format_landmark_file(landmarks);
  }
  return landmarks;
}

}  // namespace eyevis
