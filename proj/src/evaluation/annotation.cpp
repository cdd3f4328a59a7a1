#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"
#include "json.hpp"

namespace eyevis {

using nlohmann::json;

std::string_view annotation_label_name(AnnotationLabel label) {
  switch (label) {
    case AnnotationLabel::kEye: return "eye";
    case AnnotationLabel::kPink: return "pink";
    case AnnotationLabel::kBlack: return "black";
  }
  return "eye";
}

AnnotationLabel paint_label(PaintClass paint) {
  return paint == PaintClass::kPink ? AnnotationLabel::kPink : AnnotationLabel::kBlack;
}

namespace {

AnnotationLabel parse_label(const std::string& name) {
  if (name == "eye") return AnnotationLabel::kEye;
  if (name == "pink") return AnnotationLabel::kPink;
  if (name == "black") return AnnotationLabel::kBlack;
  throw Error(ErrorCode::kInvalidArgument, "unknown annotation label: " + name);
}

}  // namespace

bool AnnotationSet::has(AnnotationLabel label) const {
  return std::any_of(annotations.begin(), annotations.end(),
                     [label](const PolygonAnnotation& a) { return a.label == label; });
}

void AnnotationSet::validate_bounds(int width, int height) const {
  for (const PolygonAnnotation& a : annotations) {
    for (const Point2& p : a.points) {
      if (p.x < 0.0 || p.y < 0.0 || p.x > width || p.y > height) {
        throw Error(ErrorCode::kInvalidArgument, "annotation vertex outside image bounds in " + image);
      }
    }
  }
}

AnnotationSet parse_annotation_set(const std::string& text) {
  AnnotationSet out;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object() || !doc.contains("shapes") || !doc["shapes"].is_array()) {
      throw Error(ErrorCode::kInvalidArgument, "annotation needs a \"shapes\" array");
    }
    out.image = doc.value("image", "");
    for (const json& shape : doc["shapes"]) {
      PolygonAnnotation poly;
      poly.label = parse_label(shape.at("label").get<std::string>());
      for (const json& pt : shape.at("points")) {
        if (!pt.is_array() || pt.size() != 2) {
          throw Error(ErrorCode::kInvalidArgument, "annotation points must be [x, y]");
        }
        poly.points.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      if (poly.points.size() < 3) {
        throw Error(ErrorCode::kInvalidArgument, "annotation polygon needs at least 3 vertices");
      }
      out.annotations.push_back(std::move(poly));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed annotation: ") + e.what());
  }
  return out;
}

AnnotationSet load_annotation_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open annotation " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_annotation_set(buf.str());
}

std::string format_annotation_set(const AnnotationSet& set) {
  json shapes = json::array();
  for (const PolygonAnnotation& a : set.annotations) {
    json pts = json::array();
    for (const Point2& p : a.points) pts.push_back({p.x, p.y});
    shapes.push_back({{"label", std::string(annotation_label_name(a.label))}, {"points", std::move(pts)}});
  }
  return json{{"image", set.image}, {"shapes", std::move(shapes)}}.dump(2);
}

BinaryMask rasterize_polygon(std::span<const Point2> points, int width, int height) {
  if (points.size() < 3) throw Error(ErrorCode::kInvalidArgument, "polygon needs at least 3 vertices");
  BinaryMask mask(width, height);

  double min_y = points[0].y;
  double max_y = points[0].y;
  for (const Point2& p : points) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int row_begin = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int row_end = std::min(height, static_cast<int>(std::ceil(max_y + 0.5)));

  std::vector<double> crossings;
  for (int y = row_begin; y < row_end; ++y) {
    const double yc = y + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = points.size() - 1; i < points.size(); j = i++) {
      const Point2& a = points[i];
      const Point2& b = points[j];
      if ((a.y > yc) != (b.y > yc)) crossings.push_back((b.x - a.x) * (yc - a.y) / (b.y - a.y) + a.x);
    }
    if (crossings.empty()) continue;
    std::sort(crossings.begin(), crossings.end());
    // A center is inside iff an odd number of crossings lie strictly right of it.
    std::size_t passed = 0;
    for (int x = 0; x < width; ++x) {
      const double xc = x + 0.5;
      while (passed < crossings.size() && crossings[passed] <= xc) ++passed;
      if ((crossings.size() - passed) % 2 == 1) mask.set(x, y);
    }
  }
  return mask;
}

BinaryMask rasterize_label(const AnnotationSet& set, AnnotationLabel label, int width, int height) {
  BinaryMask out(width, height);
  bool found = false;
  for (const PolygonAnnotation& a : set.annotations) {
    if (a.label != label) continue;
    found = true;
    out = mask_or(out, rasterize_polygon(a.points, width, height));
  }
  if (!found) {
    throw Error(ErrorCode::kMissingAnnotation,
                "annotation lacks a \"" + std::string(annotation_label_name(label)) + "\" polygon");
  }
  return out;
}

}  // namespace eyevis
