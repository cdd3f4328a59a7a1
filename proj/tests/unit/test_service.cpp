#include <thread>

#include "doctest.h"
#include "eyevis/codec.hpp"
#include "eyevis/error.hpp"
#include "eyevis/service.hpp"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

using namespace eyevis;
using eyevis::testing::TempDir;
using nlohmann::json;

namespace {

// A service on a free port, served from a background thread.
class Running {
 public:
  explicit Running(std::unique_ptr<LandmarkProvider> provider, int port = 0) {
    AppConfig cfg;
    cfg.data_dir = dir_.path();
    cfg.port = port;
    cfg.workers = 2;
    service_ = std::make_unique<Service>(cfg, std::move(provider));
    port_ = service_->bind();
    thread_ = std::thread([this] { service_->listen(); });
    service_->wait_until_ready();
  }
  ~Running() {
    service_->stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(20, 0);
    return c;
  }
  int port() const { return port_; }
  Service& service() { return *service_; }

 private:
  TempDir dir_{"svc"};
  std::unique_ptr<Service> service_;
  std::thread thread_;
  int port_ = 0;
};

std::unique_ptr<LandmarkProvider> open_eyes_provider() {
  auto p = std::make_unique<FixtureProvider>();
  p->set_fallback(testing::whole_frame_open_eyes());
  return p;
}

std::string png(Rgb c, int w = 60, int h = 40) {
  const auto bytes = encode_image(testing::solid(w, h, c), ImageFormat::kPng);
  return {bytes.begin(), bytes.end()};
}

httplib::Result upload(httplib::Client& c, const std::string& path, const std::string& image,
                       const std::string& metadata = {}) {
  httplib::MultipartFormDataItems items{{"image", image, "photo.png", "image/png"}};
  if (!metadata.empty()) items.push_back({"metadata", metadata, "", "application/json"});
  return c.Post(path, items);
}

json body(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

std::string error_code(const httplib::Result& r) { return body(r)["error"]["code"].get<std::string>(); }

}  // namespace

TEST_CASE("health reports the version") {
  Running svc(open_eyes_provider());
  auto c = svc.client();
  const auto r = c.Get("/health");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(body(r)["version"] == std::string(kVersion));
}

TEST_CASE("a busy port is a startup failure") {
  Running svc(open_eyes_provider());
  AppConfig cfg;
  TempDir dir("svc");
  cfg.data_dir = dir.path();
  cfg.port = svc.port();
  Service second(cfg, open_eyes_provider());
  try {
    second.bind();
    FAIL("bind should fail");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("status mapping covers every error code") {
  CHECK(http_status_for(ErrorCode::kInvalidArgument) == 400);
  CHECK(http_status_for(ErrorCode::kInvalidImage) == 400);
  CHECK(http_status_for(ErrorCode::kMissingAnnotation) == 400);
  CHECK(http_status_for(ErrorCode::kDetectionFailure) == 422);
  CHECK(http_status_for(ErrorCode::kDegenerateGeometry) == 422);
  CHECK(http_status_for(ErrorCode::kMissingBaseline) == 409);
  CHECK(http_status_for(ErrorCode::kNoOpenSession) == 409);
  CHECK(http_status_for(ErrorCode::kSessionAlreadyOpen) == 409);
  CHECK(http_status_for(ErrorCode::kNotFound) == 404);
  CHECK(http_status_for(ErrorCode::kIo) == 500);
}

TEST_CASE("workflows over raw HTTP") {
  Running svc(open_eyes_provider());
  auto c = svc.client();

  auto r = c.Post("/users", R"({"id": "ana"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  CHECK(body(r)["baselines_complete"] == false);
  CHECK(c.Get("/users/ana")->status == 200);
  CHECK(c.Get("/users/bob")->status == 404);

  // Workflow 2 is gated on the baselines.
  r = upload(c, "/users/ana/removal-check", png({200, 180, 160}));
  CHECK(r->status == 409);
  CHECK(error_code(r) == "missing-baseline");
  CHECK(body(r)["error"]["action"] == "complete-baselines");

  r = upload(c, "/users/ana/captures?kind=baseline-face", png({230, 190, 160}));
  CHECK(r->status == 201);
  r = upload(c, "/users/ana/captures?kind=baseline-eye-open", png({220, 180, 150}), R"({"iso": 100, "shutter_s": "1/60"})");
  CHECK(r->status == 201);
  CHECK(body(r)["metadata"]["shutter_s"] == "1/60");
  r = c.Post("/users/ana/captures?kind=baseline-eye-closed", png({210, 170, 140}), "image/png");
  CHECK(r->status == 201);
  CHECK(body(r)["profile"]["baselines_complete"] == true);

  CHECK(error_code(upload(c, "/users/ana/captures?kind=selfie", png({1, 1, 1}))) == "invalid-argument");
  CHECK(c.Post("/users/ana/captures", png({1, 1, 1}), "image/png")->status == 400);
  CHECK(error_code(upload(c, "/users/ana/captures?kind=baseline-eye-open", png({1, 1, 1}), R"({"iso": -1})")) ==
        "invalid-argument");

  r = upload(c, "/users/ana/removal-check", "definitely not an image");
  CHECK(r->status == 400);
  CHECK(error_code(r) == "invalid-image");

  r = c.Post("/users/ana/sessions/start");
  CHECK(r->status == 201);
  const std::string session = body(r)["session_id"];
  r = c.Post("/users/ana/sessions/start");
  CHECK(r->status == 409);
  CHECK(error_code(r) == "session-already-open");

  r = upload(c, "/users/ana/removal-check", png({240, 110, 170}));
  REQUIRE(r->status == 201);
  const json check = body(r);
  CHECK(check["session_id"] == session);
  CHECK(check["eye_state"] == "open");
  CHECK(check["ratios"]["pink"].get<double>() == 1.0);
  CHECK(check["baseline_ratios"]["pink"].get<double>() == 0.0);
  int cells = 0;
  for (const char* row : {"capture", "baseline"}) {
    for (const char* col : {"original", "hsv_uv", "binary"}) {
      const std::string url = check["grid"][row][col];
      const auto img = c.Get(url);
      REQUIRE(img);
      CHECK(img->status == 200);
      CHECK(decode_image(std::vector<std::uint8_t>(img->body.begin(), img->body.end())).width() == 60);
      ++cells;
    }
  }
  CHECK(cells == 6);

  CHECK(c.Post("/users/ana/sessions/stop")->status == 200);
  r = c.Post("/users/ana/sessions/stop");
  CHECK(r->status == 409);
  CHECK(error_code(r) == "no-open-session");

  CHECK(error_code(c.Post("/users/ana/sessions/manual", R"({"minutes": 0})", "application/json")) ==
        "invalid-argument");
  CHECK(error_code(c.Post("/users/ana/sessions/manual", "{", "application/json")) == "invalid-argument");
  r = c.Post("/users/ana/sessions/manual", R"({"minutes": 95})", "application/json");
  CHECK(r->status == 201);
  CHECK(body(r)["duration_minutes"] == 95.0);

  r = c.Get("/users/ana/trend");
  REQUIRE(r->status == 200);
  CHECK(body(r)["points"].size() == 2);
  CHECK(body(r)["points"][1]["minutes"] == 95.0);

  r = c.Get("/users/ana/sessions");
  CHECK(body(r)["sessions"].size() == 2);
  CHECK(body(r)["open_session"].is_null());

  r = c.Get("/sessions/" + session);
  REQUIRE(r->status == 200);
  CHECK(body(r)["removal_checks"].size() == 1);
  CHECK(body(r)["removal_checks"][0]["grid"]["baseline"]["binary"].is_string());
  CHECK(c.Get("/sessions/nope")->status == 404);
}

TEST_CASE("detection failures ask for a retake") {
  Running svc(std::make_unique<FixtureProvider>());
  auto c = svc.client();
  c.Post("/users", R"({"id": "eve"})", "application/json");
  const auto r = upload(c, "/users/eve/captures?kind=baseline-face", png({5, 5, 5}));
  REQUIRE(r);
  CHECK(r->status == 422);
  CHECK(error_code(r) == "detection-failure");
  CHECK(body(r)["error"]["action"] == "retake-photo");
  CHECK(body(c.Get("/users/eve"))["face_capture"].is_null());
}
