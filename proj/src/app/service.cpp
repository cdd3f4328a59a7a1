#include "eyevis/service.hpp"

#include <atomic>

#include "eyevis/codec.hpp"
#include "eyevis/error.hpp"
#include "eyevis/residue.hpp"
#include "httplib.h"
#include "json.hpp"

namespace eyevis {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kInvalidImage: return 400;
    case ErrorCode::kMissingAnnotation: return 400;
    case ErrorCode::kDetectionFailure: return 422;
    case ErrorCode::kDegenerateGeometry: return 422;
    case ErrorCode::kMissingBaseline: return 409;
    case ErrorCode::kNoOpenSession: return 409;
    case ErrorCode::kSessionAlreadyOpen: return 409;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

std::unique_ptr<LandmarkProvider> make_provider(const AppConfig& cfg) {
  if (cfg.provider == ProviderKind::kExternal) {
    std::optional<std::filesystem::path> cache;
    if (!cfg.data_dir.empty()) cache = cfg.data_dir / "landmark-cache";
    return std::make_unique<ExternalProcessProvider>(cfg.external_command, cache);
  }
  if (cfg.landmarks_dir) {
    return std::make_unique<FixtureProvider>(FixtureProvider::from_directory(*cfg.landmarks_dir));
  }
  return std::make_unique<FixtureProvider>();
}

// ---------------------------------------------------------------------------
// Workflows
// ---------------------------------------------------------------------------

Workflows::Workflows(Store& store, const LandmarkProvider& provider, VisionConfig vision, int workers)
    : store_(store),
      provider_(provider),
      vision_(std::move(vision)),
      vision_slots_(std::clamp(workers, 1, 256)) {}

std::mutex& Workflows::user_gate(const std::string& user_id) {
  std::lock_guard lock(gates_mutex_);
  auto& slot = gates_[user_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

CaptureRecord Workflows::upload_capture(const std::string& user_id, CaptureKind kind,
                                        std::span<const std::uint8_t> bytes,
                                        const std::optional<CaptureMetadata>& metadata) {
  const RasterImage img = decode_image(bytes);
  store_.get_user(user_id);
  if (kind == CaptureKind::kBaselineFace) {
    vision_slots_.acquire();
    try {
      const FaceLandmarks lm = provider_.detect(img);
      eye_bounding_box(lm, vision_.localization.indices, img.width(), img.height(),
                       vision_.localization.pad_frac);
    } catch (...) {
      vision_slots_.release();
      throw;
    }
    vision_slots_.release();
  }
  std::lock_guard gate(user_gate(user_id));
  return store_.record_capture(user_id, kind, bytes, metadata);
}

RemovalCheckRecord Workflows::removal_check(const std::string& user_id, std::span<const std::uint8_t> bytes) {
  const RasterImage eye = decode_image(bytes);
  const UserProfile profile = store_.get_user(user_id);
  if (!profile.baselines_complete()) {
    throw Error(ErrorCode::kMissingBaseline,
                "baseline photos missing: upload the whole face, eyes open and eyes closed first");
  }

  const RasterImage face = store_.load_capture_image(*profile.face_capture);
  BaselineImages baselines;
  baselines.open = BaselineImage{{*profile.baseline_open_capture, EyeClass::kOpen},
                                 store_.load_capture_image(*profile.baseline_open_capture)};
  baselines.closed = BaselineImage{{*profile.baseline_closed_capture, EyeClass::kClosed},
                                   store_.load_capture_image(*profile.baseline_closed_capture)};

  vision_slots_.acquire();
  RemovalCheckResult result;
  try {
    result = eyevis::removal_check(provider_, face, eye, baselines, vision_);
  } catch (...) {
    vision_slots_.release();
    throw;
  }
  vision_slots_.release();

  std::lock_guard gate(user_gate(user_id));
  const CaptureRecord capture = store_.record_capture(user_id, CaptureKind::kRemovalCheck, bytes, std::nullopt);

  RemovalCheckRecord record;
  record.id = store_.next_removal_check_id();
  record.user_id = user_id;
  record.capture_id = capture.id;
  record.baseline_capture_id = result.baseline.capture_id;
  record.eye_state = result.state.classification;
  record.openness = result.state.openness;
  record.capture_ratios = {result.capture.black.ratio, result.capture.pink.ratio};
  record.baseline_ratios = {result.baseline_analysis.black.ratio, result.baseline_analysis.pink.ratio};

  const RasterImage* images[] = {
      &result.capture.vis.original,           &result.capture.vis.combined,
      &result.capture.vis.contour_vis,        &result.baseline_analysis.vis.original,
      &result.baseline_analysis.vis.combined, &result.baseline_analysis.vis.contour_vis,
  };
  for (std::size_t i = 0; i < kGridCells.size(); ++i) {
    const std::string cell(kGridCells[i]);
    record.artifacts[cell] = store_.write_artifact(record.id, cell, *images[i]);
  }
  return store_.record_removal_check(std::move(record));
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json profile_json(const UserProfile& u) {
  return {{"user_id", u.user_id},
          {"created_at", u.created_at},
          {"face_capture", opt(u.face_capture)},
          {"baseline_open_capture", opt(u.baseline_open_capture)},
          {"baseline_closed_capture", opt(u.baseline_closed_capture)},
          {"baselines_complete", u.baselines_complete()}};
}

json capture_json(const CaptureRecord& c) {
  json j = {{"capture_id", c.id},
            {"user_id", c.user_id},
            {"kind", std::string(capture_kind_name(c.kind))},
            {"image_url", "/images/" + c.object},
            {"timestamp", c.timestamp},
            {"session_id", opt(c.session_id)}};
  if (c.metadata) {
    json m = json::object();
    if (c.metadata->iso) m["iso"] = *c.metadata->iso;
    if (c.metadata->shutter_s) {
      m["shutter_s"] = std::to_string(c.metadata->shutter_s->num) + "/" + std::to_string(c.metadata->shutter_s->den);
    }
    if (c.metadata->focal_length_mm) m["focal_length_mm"] = *c.metadata->focal_length_mm;
    if (c.metadata->aperture_f) m["aperture_f"] = *c.metadata->aperture_f;
    if (c.metadata->white_balance_k) m["white_balance_k"] = *c.metadata->white_balance_k;
    j["metadata"] = std::move(m);
  }
  return j;
}

json session_json(const WearSession& w) {
  return {{"session_id", w.id},
          {"user_id", w.user_id},
          {"mode", w.mode == EntryMode::kClock ? "clock" : "manual"},
          {"start", w.start},
          {"end", opt(w.end)},
          {"duration_minutes", opt(w.duration_minutes())},
          {"completed", w.completed()},
          {"removal_duration_s", opt(w.removal_duration_s)},
          {"capture_ids", w.capture_ids},
          {"removal_check_ids", w.removal_check_ids}};
}

json check_json(const RemovalCheckRecord& r) {
  json grid = {{"capture", json::object()}, {"baseline", json::object()}};
  for (const auto& [cell, path] : r.artifacts) {
    const auto split = cell.find('_');
    grid[cell.substr(0, split)][cell.substr(split + 1)] = "/artifacts/" + path;
  }
  return {{"check_id", r.id},
          {"user_id", r.user_id},
          {"session_id", opt(r.session_id)},
          {"capture_id", r.capture_id},
          {"baseline_capture_id", r.baseline_capture_id},
          {"eye_state", std::string(eye_class_name(r.eye_state))},
          {"openness", r.openness},
          {"ratios", {{"black", r.capture_ratios.black}, {"pink", r.capture_ratios.pink}}},
          {"baseline_ratios", {{"black", r.baseline_ratios.black}, {"pink", r.baseline_ratios.pink}}},
          {"grid", std::move(grid)},
          {"timestamp", r.timestamp}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  json err = {{"code", std::string(error_code_name(e.code()))}, {"message", e.what()}};
  if (!e.stage().empty()) err["stage"] = e.stage();
  switch (e.code()) {
    case ErrorCode::kMissingBaseline:
      err["action"] = "complete-baselines";
      break;
    case ErrorCode::kDetectionFailure:
    case ErrorCode::kDegenerateGeometry:
      err["action"] = "retake-photo";
      break;
    default:
      break;
  }
  send_json(res, http_status_for(e.code()), {{"error", std::move(err)}});
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::kInvalidArgument, std::string("malformed JSON body: ") + e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", {{"code", "internal"}, {"message", e.what()}}}});
    }
  };
}

// Multipart field "image", or the raw request body.
std::span<const std::uint8_t> upload_bytes(const httplib::Request& req, std::string& holder) {
  if (req.is_multipart_form_data()) {
    if (!req.has_file("image")) throw Error(ErrorCode::kInvalidImage, "multipart upload lacks an \"image\" part");
    holder = req.get_file_value("image").content;
  } else {
    holder = req.body;
  }
  if (holder.empty()) throw Error(ErrorCode::kInvalidImage, "empty image upload");
  return {reinterpret_cast<const std::uint8_t*>(holder.data()), holder.size()};
}

std::optional<CaptureMetadata> upload_metadata(const httplib::Request& req) {
  if (!req.is_multipart_form_data() || !req.has_file("metadata")) return std::nullopt;
  const json j = json::parse(req.get_file_value("metadata").content);
  CaptureMetadata m;
  if (j.contains("iso")) m.iso = j["iso"].get<double>();
  if (j.contains("shutter_s")) {
    const std::string text = j["shutter_s"].is_string() ? j["shutter_s"].get<std::string>()
                                                        : std::to_string(j["shutter_s"].get<long long>());
    const auto slash = text.find('/');
    try {
      m.shutter_s = slash == std::string::npos
                        ? Rational{std::stoll(text), 1}
                        : Rational{std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1))};
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "shutter_s must look like \"1/50\"");
    }
  }
  if (j.contains("focal_length_mm")) m.focal_length_mm = j["focal_length_mm"].get<double>();
  if (j.contains("aperture_f")) m.aperture_f = j["aperture_f"].get<double>();
  if (j.contains("white_balance_k")) m.white_balance_k = j["white_balance_k"].get<double>();
  m.validate();
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Service
// ---------------------------------------------------------------------------

Service::Service(AppConfig cfg, std::unique_ptr<LandmarkProvider> provider)
    : cfg_(std::move(cfg)),
      provider_(std::move(provider)),
      store_(std::make_unique<Store>(cfg_.data_dir)),
      workflows_(std::make_unique<Workflows>(*store_, *provider_, cfg_.vision, cfg_.workers)),
      server_(std::make_unique<httplib::Server>()) {
  const auto workers = static_cast<std::size_t>(std::max(cfg_.workers, 1));
  server_->new_task_queue = [workers] { return new httplib::ThreadPool(workers + 2); };
  // httplib's default sets SO_REUSEPORT, which lets a second server share a
  // busy port instead of failing.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (cfg_.port == 0) {
    port_ = server_->bind_to_any_port(cfg_.host);
  } else {
    port_ = server_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port) +
                                    " (port busy or not permitted)");
  }
  return port_;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::routes() {
  httplib::Server& srv = *server_;
  Store& store = *store_;
  Workflows& flows = *workflows_;

  srv.set_mount_point("/artifacts", store.artifacts_dir().string());
  srv.set_mount_point("/images", store.images_dir().string());

  srv.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", std::string(kVersion)}});
  }));

  srv.Post("/users", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    std::string id;
    if (!req.body.empty()) {
      const json body = json::parse(req.body);
      if (body.contains("id") && !body["id"].is_null()) id = body["id"].get<std::string>();
    }
    send_json(res, 201, profile_json(store.create_user(id)));
  }));

  srv.Get(R"(/users/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, profile_json(store.get_user(req.matches[1])));
  }));

  srv.Post(R"(/users/([^/]+)/captures)", guarded([&store, &flows](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("kind")) throw Error(ErrorCode::kInvalidArgument, "query parameter kind is required");
    const CaptureKind kind = parse_capture_kind(req.get_param_value("kind"));
    std::string holder;
    const auto bytes = upload_bytes(req, holder);
    const CaptureRecord c = flows.upload_capture(req.matches[1], kind, bytes, upload_metadata(req));
    json body = capture_json(c);
    body["profile"] = profile_json(store.get_user(c.user_id));
    send_json(res, 201, body);
  }));

  srv.Post(R"(/users/([^/]+)/sessions/start)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 201, session_json(store.start_timer(req.matches[1])));
  }));

  srv.Post(R"(/users/([^/]+)/sessions/stop)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, session_json(store.stop_timer(req.matches[1])));
  }));

  srv.Post(R"(/users/([^/]+)/sessions/manual)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body.empty() ? "{}" : req.body);
    if (!body.contains("minutes") || !body["minutes"].is_number()) {
      throw Error(ErrorCode::kInvalidArgument, "body must carry a numeric \"minutes\"");
    }
    send_json(res, 201, session_json(store.set_manual_duration(req.matches[1], body["minutes"].get<double>())));
  }));

  srv.Post(R"(/users/([^/]+)/removal-check)", guarded([&flows](const httplib::Request& req, httplib::Response& res) {
    std::string holder;
    const auto bytes = upload_bytes(req, holder);
    send_json(res, 201, check_json(flows.removal_check(req.matches[1], bytes)));
  }));

  srv.Get(R"(/users/([^/]+)/trend)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    json points = json::array();
    for (const TrendPoint& p : store.trend(req.matches[1])) {
      points.push_back({{"session_id", p.session_id}, {"minutes", p.minutes}});
    }
    send_json(res, 200, {{"user_id", std::string(req.matches[1])}, {"points", std::move(points)}});
  }));

  srv.Get(R"(/users/([^/]+)/sessions)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    json sessions = json::array();
    for (const WearSession& w : store.list_sessions(req.matches[1])) sessions.push_back(session_json(w));
    const auto open = store.open_session(req.matches[1]);
    send_json(res, 200, {{"user_id", std::string(req.matches[1])},
                         {"open_session", open ? json(open->id) : json(nullptr)},
                         {"sessions", std::move(sessions)}});
  }));

  srv.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const SessionDetail d = store.get_session(req.matches[1]);
    json body = session_json(d.session);
    json captures = json::array();
    for (const CaptureRecord& c : d.captures) captures.push_back(capture_json(c));
    json checks = json::array();
    for (const RemovalCheckRecord& r : d.removal_checks) checks.push_back(check_json(r));
    body["captures"] = std::move(captures);
    body["removal_checks"] = std::move(checks);
    send_json(res, 200, body);
  }));
}

}  // namespace eyevis
