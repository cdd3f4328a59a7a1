#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"

namespace eyevis {

OverlapCount overlap_of(const BinaryMask& algorithm, const BinaryMask& reference) {
  const BinaryMask inside = mask_and(algorithm, reference);
  OverlapCount out{inside.count(), reference.count(), std::nullopt};
  if (out.denominator > 0) out.rate = static_cast<double>(out.numerator) / static_cast<double>(out.denominator);
  return out;
}

OverlapCount overlap_rate_eye(const EyePair& contour, const AnnotationSet& ann, int width, int height) {
  const BinaryMask manual = rasterize_label(ann, AnnotationLabel::kEye, width, height);
  // Contour points are clamped into the image before they get here, so
  // rasterization alone keeps the algorithm area inside bounds.
  const BinaryMask algorithm = mask_or(rasterize_polygon(contour.left, width, height),
                                       rasterize_polygon(contour.right, width, height));
  return overlap_of(algorithm, manual);
}

OverlapCount overlap_rate_paint(const ResidueMask& mask, const AnnotationSet& ann, PaintClass paint) {
  const BinaryMask manual = rasterize_label(ann, paint_label(paint), mask.mask.width(), mask.mask.height());
  return overlap_of(mask.mask, manual);
}

OverlapCount binary_success_rate(const BinaryMask& threshold_mask, const AnnotationSet& ann) {
  const int w = threshold_mask.width();
  const int h = threshold_mask.height();
  const BinaryMask eye = rasterize_label(ann, AnnotationLabel::kEye, w, h);
  const BinaryMask black = rasterize_label(ann, AnnotationLabel::kBlack, w, h);
  const BinaryMask candidates = mask_and(threshold_mask, mask_not(eye));
  return overlap_of(black, candidates);
}

}  // namespace eyevis
