#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "eyevis/image.hpp"
#include "eyevis/localization.hpp"

namespace eyevis {

// UTC epoch seconds.
using Timestamp = std::int64_t;
using Clock = std::function<Timestamp()>;

Clock system_clock();

enum class CaptureKind { kBaselineFace, kBaselineEyeOpen, kBaselineEyeClosed, kRemovalCheck };

std::string_view capture_kind_name(CaptureKind kind);
// Throws kInvalidArgument for unknown names.
CaptureKind parse_capture_kind(std::string_view name);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

// Camera settings recorded with a capture; never enforced.
struct CaptureMetadata {
  std::optional<double> iso;
  std::optional<Rational> shutter_s;
  std::optional<double> focal_length_mm;
  std::optional<double> aperture_f;
  std::optional<double> white_balance_k;

  // Throws kInvalidArgument for non-positive fields.
  void validate() const;
};

struct CaptureRecord {
  std::string id;
  std::string user_id;
  CaptureKind kind = CaptureKind::kRemovalCheck;
  // Content-derived file name under images/, e.g. "<sha256>.png".
  std::string object;
  Timestamp timestamp = 0;
  std::optional<CaptureMetadata> metadata;
  std::optional<std::string> session_id;
};

struct UserProfile {
  std::string user_id;
  Timestamp created_at = 0;
  std::optional<std::string> face_capture;
  std::optional<std::string> baseline_open_capture;
  std::optional<std::string> baseline_closed_capture;

  bool baselines_complete() const {
    return face_capture && baseline_open_capture && baseline_closed_capture;
  }
};

enum class EntryMode { kClock, kManual };

struct WearSession {
  std::string id;
  std::string user_id;
  EntryMode mode = EntryMode::kClock;
  // Clock start, or entry time for manual sessions; orders the history.
  Timestamp start = 0;
  std::optional<Timestamp> end;
  std::optional<double> manual_minutes;
  std::vector<std::string> capture_ids;
  std::vector<std::string> removal_check_ids;
  // Span between the first and last removal-check captures, when >= 2 exist.
  std::optional<std::int64_t> removal_duration_s;
  std::uint64_t seq = 0;

  bool completed() const { return mode == EntryMode::kManual || end.has_value(); }
  // Empty while a clock session is still open.
  std::optional<double> duration_minutes() const;
};

struct ResidueRatios {
  double black = 0.0;
  double pink = 0.0;
};

// Persisted outcome of one removal check. Artifact paths are relative to the
// artifacts/ directory.
struct RemovalCheckRecord {
  std::string id;
  std::string user_id;
  std::optional<std::string> session_id;
  std::string capture_id;
  std::string baseline_capture_id;
  EyeClass eye_state = EyeClass::kOpen;
  double openness = 0.0;
  ResidueRatios capture_ratios;
  ResidueRatios baseline_ratios;
  std::map<std::string, std::string> artifacts;
  Timestamp timestamp = 0;
};

struct TrendPoint {
  std::string session_id;
  double minutes = 0.0;
};

struct SessionDetail {
  WearSession session;
  std::vector<CaptureRecord> captures;
  std::vector<RemovalCheckRecord> removal_checks;
};

// Append-only event log (events.log, one JSON record per line) plus a
// content-addressed images/ directory and an artifacts/ directory.
//
// Single writer: mutations are serialized internally; queries take a shared
// lock and may run concurrently with each other.
class Store {
 public:
  // Replays events.log. A torn final line (no trailing newline) is dropped
  // and cut from the file; any other malformed line is an error.
  explicit Store(std::filesystem::path data_dir, Clock clock = system_clock());
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }
  std::filesystem::path log_path() const { return data_dir_ / "events.log"; }
  std::filesystem::path images_dir() const { return data_dir_ / "images"; }
  std::filesystem::path artifacts_dir() const { return data_dir_ / "artifacts"; }

  // Idempotent; an empty id generates one.
  UserProfile create_user(const std::string& user_id = {});
  UserProfile get_user(const std::string& user_id) const;

  // Throws kInvalidImage when the bytes do not decode.
  CaptureRecord record_capture(const std::string& user_id, CaptureKind kind,
                               std::span<const std::uint8_t> image_bytes,
                               const std::optional<CaptureMetadata>& metadata = std::nullopt);
  CaptureRecord get_capture(const std::string& capture_id) const;
  std::filesystem::path capture_image_path(const CaptureRecord& capture) const;
  RasterImage load_capture_image(const std::string& capture_id) const;

  WearSession start_timer(const std::string& user_id);
  WearSession stop_timer(const std::string& user_id);
  WearSession stop_session(const std::string& session_id);
  WearSession set_manual_duration(const std::string& user_id, double minutes);

  // Writes an artifact image and returns its path relative to artifacts/.
  std::string write_artifact(const std::string& group, const std::string& name, const RasterImage& img);
  // Allocates an id for a removal check whose artifacts are about to be written.
  std::string next_removal_check_id();
  RemovalCheckRecord record_removal_check(RemovalCheckRecord record);

  std::vector<WearSession> list_sessions(const std::string& user_id) const;
  SessionDetail get_session(const std::string& session_id) const;
  std::vector<TrendPoint> trend(const std::string& user_id) const;
  std::optional<WearSession> open_session(const std::string& user_id) const;

  // Deterministic dump of every query answer; equal state <=> equal text.
  std::string snapshot_json() const;
  std::size_t event_count() const;

 private:
  struct State;

  void append_event(const std::string& line);
  void apply(const std::string& line, std::uint64_t seq);
  Timestamp now_for(const std::string& user_id) const;
  const WearSession* current_session_locked(const std::string& user_id) const;
  std::string store_object(std::span<const std::uint8_t> bytes, std::string_view ext);

  std::filesystem::path data_dir_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<State> state_;
  int log_fd_ = -1;
};

}  // namespace eyevis
