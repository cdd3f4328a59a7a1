#include "eyevis/image.hpp"

#include <algorithm>
#include <string>

#include "eyevis/error.hpp"

namespace eyevis {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidImage: return "invalid-image";
    case ErrorCode::kDetectionFailure: return "detection-failure";
    case ErrorCode::kMissingBaseline: return "missing-baseline";
    case ErrorCode::kNoOpenSession: return "no-open-session";
    case ErrorCode::kSessionAlreadyOpen: return "session-already-open";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kMissingAnnotation: return "missing-annotation";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

void check_grid_dims(int width, int height, std::size_t value_count) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid dimensions must be positive, got " +
                                                 std::to_string(width) + "x" +
                                                 std::to_string(height));
  }
  if (value_count != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::kInvalidArgument, "value count does not match width x height");
  }
}

std::size_t BinaryMask::count() const noexcept {
  const auto v = values();
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](auto b) { return b != 0; }));
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions differ");
  }
  BinaryMask out(a.width(), a.height());
  auto dst = out.values();
  auto lhs = a.values();
  auto rhs = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = op(lhs[i] != 0, rhs[i] != 0) ? 1 : 0;
  return out;
}

}  // namespace

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; });
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}

BinaryMask mask_not(const BinaryMask& a) {
  BinaryMask out(a.width(), a.height());
  auto dst = out.values();
  auto src = a.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] != 0 ? 0 : 1;
  return out;
}

}  // namespace eyevis
