#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>

#include "eyevis/config.hpp"
#include "eyevis/error.hpp"
#include "eyevis/landmarks.hpp"
#include "eyevis/store.hpp"

namespace httplib {
class Server;
}

namespace eyevis {

inline constexpr std::string_view kVersion = EYEVIS_VERSION;

// HTTP status class for an error code.
int http_status_for(ErrorCode code);

// Builds the landmark provider selected by `cfg`.
std::unique_ptr<LandmarkProvider> make_provider(const AppConfig& cfg);

// Workflow logic behind the HTTP endpoints, callable without a socket.
class Workflows {
 public:
  Workflows(Store& store, const LandmarkProvider& provider, VisionConfig vision, int workers);

  // Baseline-face uploads must contain a detectable face; the detection
  // failure is reported before anything is stored.
  CaptureRecord upload_capture(const std::string& user_id, CaptureKind kind,
                               std::span<const std::uint8_t> bytes,
                               const std::optional<CaptureMetadata>& metadata);

  // Runs the removal check, persists the capture, the six grid images and
  // the check record.
  RemovalCheckRecord removal_check(const std::string& user_id, std::span<const std::uint8_t> bytes);

 private:
  std::mutex& user_gate(const std::string& user_id);

  Store& store_;
  const LandmarkProvider& provider_;
  VisionConfig vision_;
  std::counting_semaphore<256> vision_slots_;
  std::mutex gates_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> gates_;
};

// Grid cell names, in display order: rows capture/baseline, columns
// original/hsv_uv/binary.
inline constexpr std::array<std::string_view, 6> kGridCells = {
    "capture_original", "capture_hsv_uv", "capture_binary",
    "baseline_original", "baseline_hsv_uv", "baseline_binary",
};

class Service {
 public:
  Service(AppConfig cfg, std::unique_ptr<LandmarkProvider> provider);
  ~Service();

  // Binds the listening socket; port 0 picks a free port. Throws Error{kIo}
  // when the port is unavailable.
  int bind();
  // Serves until stop(); returns after in-flight requests finish.
  void listen();
  void stop();
  void wait_until_ready() const;

  int port() const noexcept { return port_; }
  Store& store() noexcept { return *store_; }

 private:
  void routes();

  AppConfig cfg_;
  std::unique_ptr<LandmarkProvider> provider_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<Workflows> workflows_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
};

}  // namespace eyevis
