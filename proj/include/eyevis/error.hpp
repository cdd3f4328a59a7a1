#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eyevis {

// Every failure surfaced by the library carries exactly one of these codes.
// The HTTP layer maps them onto status classes; the CLI prints them.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidImage,
  kDetectionFailure,
  kMissingBaseline,
  kNoOpenSession,
  kSessionAlreadyOpen,
  kNotFound,
  kMissingAnnotation,
  kDegenerateGeometry,
  kIo,
};

// Wire name, e.g. "missing-baseline".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  // Pipeline stage that failed ("first-pass", "second-pass", ...), may be empty.
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace eyevis
