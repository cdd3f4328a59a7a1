#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eyevis/color.hpp"
#include "eyevis/image.hpp"
#include "eyevis/landmarks.hpp"
#include "eyevis/localization.hpp"
#include "eyevis/residue.hpp"

namespace eyevis {

// ---------------------------------------------------------------------------
// Illumination stability
// ---------------------------------------------------------------------------

// Per-pixel distance terms. d_h is the wrapped hue gap over 180, d_s the raw
// saturation gap on the 0..255 scale, d_v the value gap over 255.
struct PixelDistance {
  double d_h = 0.0;
  double d_s = 0.0;
  double d_v = 0.0;
  double d = 0.0;
};

PixelDistance hsv_pixel_distance(const HsvPixel& a, const HsvPixel& b) noexcept;

// Means over all pixels of one image pair.
struct IlluminationReport {
  double d = 0.0;
  double d_h = 0.0;
  double d_s = 0.0;
  double d_v = 0.0;
  std::size_t pixels = 0;
};

// Throws kInvalidArgument on a dimension mismatch.
IlluminationReport hsv_distance(const HsvImage& img0, const HsvImage& img1);
IlluminationReport hsv_distance(const RasterImage& img0, const RasterImage& img1);

// One lighting group: images a, b, c taken under three conditions.
struct IlluminationRow {
  std::string group;
  double d_ab = 0.0;
  double d_ac = 0.0;
  double d_bc = 0.0;
};

// Each directory must hold exactly three PNG/JPEG images, taken in filename
// order as a, b, c.
std::vector<IlluminationRow> illumination_table(std::span<const std::filesystem::path> group_dirs);

// ---------------------------------------------------------------------------
// Annotations and rasterization
// ---------------------------------------------------------------------------

enum class AnnotationLabel { kEye, kPink, kBlack };

std::string_view annotation_label_name(AnnotationLabel label);
AnnotationLabel paint_label(PaintClass paint);

struct PolygonAnnotation {
  AnnotationLabel label = AnnotationLabel::kEye;
  std::vector<Point2> points;
};

// {"image": name, "shapes": [{"label": "eye"|"pink"|"black", "points": [[x, y], ...]}]}
struct AnnotationSet {
  std::string image;
  std::vector<PolygonAnnotation> annotations;

  bool has(AnnotationLabel label) const;
  // Throws kInvalidArgument when a vertex lies outside [0,width] x [0,height].
  void validate_bounds(int width, int height) const;
};

AnnotationSet parse_annotation_set(const std::string& text);
AnnotationSet load_annotation_set(const std::filesystem::path& path);
std::string format_annotation_set(const AnnotationSet& set);

// Even-odd fill; a pixel is set iff its center lies inside. Throws
// kInvalidArgument for fewer than three vertices.
BinaryMask rasterize_polygon(std::span<const Point2> points, int width, int height);

// Union of every polygon carrying `label`. Throws kMissingAnnotation when none.
BinaryMask rasterize_label(const AnnotationSet& set, AnnotationLabel label, int width, int height);

// ---------------------------------------------------------------------------
// Overlap metrics
// ---------------------------------------------------------------------------

// numerator / denominator, with the rate absent when the denominator is 0.
struct OverlapCount {
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  std::optional<double> rate;
};

OverlapCount overlap_of(const BinaryMask& algorithm, const BinaryMask& reference);

// a1 / a2: rasterized algorithm contours inside the manual eye area.
OverlapCount overlap_rate_eye(const EyePair& contour, const AnnotationSet& ann, int width, int height);
// a3 / a4 (pink) or a5 / a6 (black).
OverlapCount overlap_rate_paint(const ResidueMask& mask, const AnnotationSet& ann, PaintClass paint);
// n1 / n2 over threshold pixels outside the manual eye area; rate is absent
// (undefined) when n2 = 0.
OverlapCount binary_success_rate(const BinaryMask& threshold_mask, const AnnotationSet& ann);

struct OverlapReport {
  std::size_t a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0;
  std::size_t n1 = 0, n2 = 0;
  std::optional<double> r_eye, r_pink, r_black, r_bin;
  // Rates that could not be computed, with the reason.
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Residue-ratio statistics
// ---------------------------------------------------------------------------

struct AggregateStats {
  double avg = 0.0;
  // Sample standard deviation (n - 1 denominator).
  double std = 0.0;
};

// Throws kInvalidArgument for fewer than two values.
AggregateStats aggregate_ratios(std::span<const double> values);

inline constexpr int kTrialsPerParticipant = 5;

// Ratios in percent, as tabulated.
struct ParticipantRatios {
  std::string participant;
  double r_p_baseline = 0.0;
  double r_b_baseline = 0.0;
  double r_p_eyevis_mean = 0.0;
  double r_b_eyevis_mean = 0.0;
  std::optional<std::array<double, kTrialsPerParticipant>> r_p_trials;
  std::optional<std::array<double, kTrialsPerParticipant>> r_b_trials;
};

// Means are the arithmetic mean of the five trials.
ParticipantRatios participant_from_trials(std::string participant, double r_p_baseline,
                                          double r_b_baseline,
                                          const std::array<double, kTrialsPerParticipant>& r_p_trials,
                                          const std::array<double, kTrialsPerParticipant>& r_b_trials);

// CSV: participant,r_p_baseline,r_p_EyeVis_mean,r_b_baseline,r_b_EyeVis_mean
std::vector<ParticipantRatios> parse_participant_table(const std::string& csv);
std::vector<ParticipantRatios> load_participant_table(const std::filesystem::path& path);

struct ColumnStats {
  std::string column;
  AggregateStats stats;
};

// One entry per table column, in table order.
std::vector<ColumnStats> participant_column_stats(std::span<const ParticipantRatios> rows);
std::string format_column_stats(std::span<const ColumnStats> stats);

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct CorpusItemResult {
  std::string name;
  bool ok = false;
  std::string error_code;
  std::string error_message;
  OverlapReport overlap;
};

struct CorpusReport {
  std::vector<CorpusItemResult> items;
  std::optional<double> avg_r_eye, avg_r_pink, avg_r_black, avg_r_bin;
  std::vector<std::string> warnings;

  std::size_t failed() const;
};

// Evaluates one annotated eye image against a whole-face reference.
OverlapReport evaluate_item(const LandmarkProvider& provider, const RasterImage& face_img,
                            const RasterImage& eye_img, const AnnotationSet& ann,
                            const VisionConfig& cfg);

// Corpus layout: face.png|jpg (whole-face reference) and one annotation
// file per eye image (*.json at top level; "image" is relative to the
// corpus). Failing items are reported without aborting the run.
CorpusReport run_corpus_eval(const std::filesystem::path& corpus_dir, const LandmarkProvider& provider,
                             const VisionConfig& cfg, int workers = 1);

std::string corpus_report_to_json(const CorpusReport& report);

}  // namespace eyevis
