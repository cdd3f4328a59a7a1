#include "eyevis/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include "eyevis/codec.hpp"
#include "eyevis/digest.hpp"
#include "eyevis/error.hpp"
#include "json.hpp"

namespace eyevis {

using nlohmann::json;

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

std::string_view capture_kind_name(CaptureKind kind) {
  switch (kind) {
    case CaptureKind::kBaselineFace: return "baseline-face";
    case CaptureKind::kBaselineEyeOpen: return "baseline-eye-open";
    case CaptureKind::kBaselineEyeClosed: return "baseline-eye-closed";
    case CaptureKind::kRemovalCheck: return "removal-check";
  }
  return "removal-check";
}

CaptureKind parse_capture_kind(std::string_view name) {
  for (CaptureKind k : {CaptureKind::kBaselineFace, CaptureKind::kBaselineEyeOpen,
                        CaptureKind::kBaselineEyeClosed, CaptureKind::kRemovalCheck}) {
    if (capture_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown capture kind: " + std::string(name));
}

void CaptureMetadata::validate() const {
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0 && std::isfinite(*v))) {
      throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be positive");
    }
  };
  positive(iso, "iso");
  positive(focal_length_mm, "focal_length_mm");
  positive(aperture_f, "aperture_f");
  positive(white_balance_k, "white_balance_k");
  if (shutter_s && (shutter_s->num <= 0 || shutter_s->den <= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "shutter must be a positive fraction");
  }
}

std::optional<double> WearSession::duration_minutes() const {
  if (mode == EntryMode::kManual) return manual_minutes;
  if (!end) return std::nullopt;
  return static_cast<double>(*end - start) / 60.0;
}

// ---------------------------------------------------------------------------
// Event encoding
// ---------------------------------------------------------------------------

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

json metadata_json(const CaptureMetadata& m) {
  json j = json::object();
  if (m.iso) j["iso"] = *m.iso;
  if (m.shutter_s) j["shutter_s"] = std::to_string(m.shutter_s->num) + "/" + std::to_string(m.shutter_s->den);
  if (m.focal_length_mm) j["focal_length_mm"] = *m.focal_length_mm;
  if (m.aperture_f) j["aperture_f"] = *m.aperture_f;
  if (m.white_balance_k) j["white_balance_k"] = *m.white_balance_k;
  return j;
}

CaptureMetadata metadata_from_json(const json& j) {
  CaptureMetadata m;
  m.iso = get_opt<double>(j, "iso");
  if (auto text = get_opt<std::string>(j, "shutter_s")) {
    const auto slash = text->find('/');
    if (slash == std::string::npos) {
      m.shutter_s = Rational{std::stoll(*text), 1};
    } else {
      m.shutter_s = Rational{std::stoll(text->substr(0, slash)), std::stoll(text->substr(slash + 1))};
    }
  }
  m.focal_length_mm = get_opt<double>(j, "focal_length_mm");
  m.aperture_f = get_opt<double>(j, "aperture_f");
  m.white_balance_k = get_opt<double>(j, "white_balance_k");
  return m;
}

std::string random_id(const char* prefix) {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  std::ostringstream out;
  out << prefix << std::hex << (rng() & 0xFFFFFFFFFFFFULL);
  return out.str();
}

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  }) && id.front() != '.';
}

}  // namespace

struct Store::State {
  std::map<std::string, UserProfile> users;
  std::map<std::string, CaptureRecord> captures;
  std::map<std::string, WearSession> sessions;
  std::map<std::string, RemovalCheckRecord> checks;
  std::map<std::string, std::string> open_session_by_user;
  std::map<std::string, Timestamp> last_ts_by_user;
  std::uint64_t events = 0;
};

// ---------------------------------------------------------------------------
// Construction and replay
// ---------------------------------------------------------------------------

Store::Store(std::filesystem::path data_dir, Clock clock)
    : data_dir_(std::move(data_dir)), clock_(std::move(clock)), state_(std::make_unique<State>()) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(images_dir(), ec);
  fs::create_directories(artifacts_dir(), ec);
  if (!fs::is_directory(images_dir()) || !fs::is_directory(artifacts_dir())) {
    throw Error(ErrorCode::kIo, "cannot create data directory " + data_dir_.string());
  }

  std::string contents;
  if (fs::exists(log_path())) {
    std::ifstream in(log_path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    contents = buf.str();
  }

  std::size_t pos = 0;
  std::size_t committed = 0;
  while (pos < contents.size()) {
    const std::size_t nl = contents.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    const std::string line = contents.substr(pos, nl - pos);
    if (!line.empty()) {
      try {
        apply(line, state_->events);
      } catch (const std::exception& e) {
        throw Error(ErrorCode::kIo, "corrupt event log record " + std::to_string(state_->events + 1) +
                                        ": " + e.what());
      }
      ++state_->events;
    }
    pos = nl + 1;
    committed = pos;
  }

  log_fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (log_fd_ < 0) {
    throw Error(ErrorCode::kIo, "cannot open event log " + log_path().string() + ": " + std::strerror(errno));
  }
  if (committed < contents.size() && ::ftruncate(log_fd_, static_cast<off_t>(committed)) != 0) {
    throw Error(ErrorCode::kIo, "cannot drop torn event log tail");
  }
}

Store::~Store() {
  if (log_fd_ >= 0) {
    ::fsync(log_fd_);
    ::close(log_fd_);
  }
}

void Store::append_event(const std::string& line) {
  const std::string record = line + "\n";
  std::size_t written = 0;
  while (written < record.size()) {
    const ssize_t n = ::write(log_fd_, record.data() + written, record.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, std::string("event log write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fdatasync(log_fd_) != 0) throw Error(ErrorCode::kIo, "event log sync failed");
}

void Store::apply(const std::string& line, std::uint64_t seq) {
  const json ev = json::parse(line);
  const std::string type = ev.at("type").get<std::string>();
  State& s = *state_;

  auto touch = [&](const std::string& user, Timestamp ts) {
    auto& last = s.last_ts_by_user[user];
    last = std::max(last, ts);
  };

  if (type == "user") {
    UserProfile u;
    u.user_id = ev.at("user").get<std::string>();
    u.created_at = ev.at("ts").get<Timestamp>();
    s.users.emplace(u.user_id, u);
    touch(u.user_id, u.created_at);
  } else if (type == "capture") {
    CaptureRecord c;
    c.id = ev.at("id").get<std::string>();
    c.user_id = ev.at("user").get<std::string>();
    c.kind = parse_capture_kind(ev.at("kind").get<std::string>());
    c.object = ev.at("object").get<std::string>();
    c.timestamp = ev.at("ts").get<Timestamp>();
    if (ev.contains("metadata") && !ev["metadata"].is_null()) c.metadata = metadata_from_json(ev["metadata"]);
    c.session_id = get_opt<std::string>(ev, "session");

    UserProfile& u = s.users.at(c.user_id);
    switch (c.kind) {
      case CaptureKind::kBaselineFace: u.face_capture = c.id; break;
      case CaptureKind::kBaselineEyeOpen: u.baseline_open_capture = c.id; break;
      case CaptureKind::kBaselineEyeClosed: u.baseline_closed_capture = c.id; break;
      case CaptureKind::kRemovalCheck: break;
    }
    if (c.session_id) {
      WearSession& session = s.sessions.at(*c.session_id);
      session.capture_ids.push_back(c.id);
      std::optional<Timestamp> first, last;
      for (const std::string& id : session.capture_ids) {
        const CaptureRecord& other = id == c.id ? c : s.captures.at(id);
        if (other.kind != CaptureKind::kRemovalCheck) continue;
        first = first ? std::min(*first, other.timestamp) : other.timestamp;
        last = last ? std::max(*last, other.timestamp) : other.timestamp;
      }
      const auto checks = std::count_if(session.capture_ids.begin(), session.capture_ids.end(), [&](const auto& id) {
        return (id == c.id ? c : s.captures.at(id)).kind == CaptureKind::kRemovalCheck;
      });
      if (checks >= 2) session.removal_duration_s = *last - *first;
    }
    touch(c.user_id, c.timestamp);
    s.captures.emplace(c.id, std::move(c));
  } else if (type == "session_start") {
    WearSession w;
    w.id = ev.at("id").get<std::string>();
    w.user_id = ev.at("user").get<std::string>();
    w.mode = EntryMode::kClock;
    w.start = ev.at("ts").get<Timestamp>();
    w.seq = seq;
    s.open_session_by_user[w.user_id] = w.id;
    touch(w.user_id, w.start);
    s.sessions.emplace(w.id, std::move(w));
  } else if (type == "session_stop") {
    WearSession& w = s.sessions.at(ev.at("id").get<std::string>());
    w.end = ev.at("ts").get<Timestamp>();
    s.open_session_by_user.erase(w.user_id);
    touch(w.user_id, *w.end);
  } else if (type == "session_manual") {
    WearSession w;
    w.id = ev.at("id").get<std::string>();
    w.user_id = ev.at("user").get<std::string>();
    w.mode = EntryMode::kManual;
    w.start = ev.at("ts").get<Timestamp>();
    w.manual_minutes = ev.at("minutes").get<double>();
    w.seq = seq;
    touch(w.user_id, w.start);
    s.sessions.emplace(w.id, std::move(w));
  } else if (type == "removal_check") {
    RemovalCheckRecord r;
    r.id = ev.at("id").get<std::string>();
    r.user_id = ev.at("user").get<std::string>();
    r.session_id = get_opt<std::string>(ev, "session");
    r.capture_id = ev.at("capture").get<std::string>();
    r.baseline_capture_id = ev.at("baseline").get<std::string>();
    r.eye_state = ev.at("state").get<std::string>() == "open" ? EyeClass::kOpen : EyeClass::kClosed;
    r.openness = ev.at("openness").get<double>();
    r.capture_ratios = {ev.at("ratios").at("capture_black").get<double>(),
                        ev.at("ratios").at("capture_pink").get<double>()};
    r.baseline_ratios = {ev.at("ratios").at("baseline_black").get<double>(),
                         ev.at("ratios").at("baseline_pink").get<double>()};
    r.artifacts = ev.at("artifacts").get<std::map<std::string, std::string>>();
    r.timestamp = ev.at("ts").get<Timestamp>();
    if (r.session_id) s.sessions.at(*r.session_id).removal_check_ids.push_back(r.id);
    touch(r.user_id, r.timestamp);
    s.checks.emplace(r.id, std::move(r));
  } else {
    throw Error(ErrorCode::kIo, "unknown event type " + type);
  }
}

Timestamp Store::now_for(const std::string& user_id) const {
  Timestamp now = clock_();
  if (auto it = state_->last_ts_by_user.find(user_id); it != state_->last_ts_by_user.end()) {
    now = std::max(now, it->second);
  }
  return now;
}

const WearSession* Store::current_session_locked(const std::string& user_id) const {
  if (auto it = state_->open_session_by_user.find(user_id); it != state_->open_session_by_user.end()) {
    return &state_->sessions.at(it->second);
  }
  const WearSession* latest = nullptr;
  for (const auto& [id, w] : state_->sessions) {
    if (w.user_id != user_id) continue;
    if (!latest || std::tie(w.start, w.seq) > std::tie(latest->start, latest->seq)) latest = &w;
  }
  return latest;
}

std::string Store::store_object(std::span<const std::uint8_t> bytes, std::string_view ext) {
  namespace fs = std::filesystem;
  const std::string name = sha256_hex(bytes) + std::string(ext);
  const fs::path target = images_dir() / name;
  if (fs::exists(target)) return name;
  const fs::path tmp = images_dir() / (name + ".tmp-" + std::to_string(::getpid()));
  write_file_bytes(tmp, bytes);
  fs::rename(tmp, target);
  return name;
}

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

UserProfile Store::create_user(const std::string& user_id) {
  std::unique_lock lock(mutex_);
  const std::string id = user_id.empty() ? random_id("u-") : user_id;
  if (!valid_id(id)) throw Error(ErrorCode::kInvalidArgument, "user id must be 1-64 chars of [A-Za-z0-9._-]");
  if (auto it = state_->users.find(id); it != state_->users.end()) return it->second;

  const json ev = {{"type", "user"}, {"seq", state_->events}, {"user", id}, {"ts", now_for(id)}};
  append_event(ev.dump());
  apply(ev.dump(), state_->events++);
  return state_->users.at(id);
}

UserProfile Store::get_user(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->users.find(user_id);
  if (it == state_->users.end()) throw Error(ErrorCode::kNotFound, "unknown user " + user_id);
  return it->second;
}

CaptureRecord Store::record_capture(const std::string& user_id, CaptureKind kind,
                                    std::span<const std::uint8_t> image_bytes,
                                    const std::optional<CaptureMetadata>& metadata) {
  const ImageFormat format = detect_format(image_bytes);
  decode_image(image_bytes);  // rejects corrupt or truncated data
  if (metadata) metadata->validate();

  std::unique_lock lock(mutex_);
  if (!state_->users.contains(user_id)) throw Error(ErrorCode::kNotFound, "unknown user " + user_id);
  const std::string object = store_object(image_bytes, format_extension(format));

  json ev = {{"type", "capture"},
             {"seq", state_->events},
             {"id", "c" + std::to_string(state_->events)},
             {"user", user_id},
             {"kind", std::string(capture_kind_name(kind))},
             {"object", object},
             {"ts", now_for(user_id)}};
  if (metadata) ev["metadata"] = metadata_json(*metadata);
  if (kind == CaptureKind::kRemovalCheck) {
    if (const WearSession* session = current_session_locked(user_id)) ev["session"] = session->id;
  }
  append_event(ev.dump());
  apply(ev.dump(), state_->events++);
  return state_->captures.at(ev["id"].get<std::string>());
}

CaptureRecord Store::get_capture(const std::string& capture_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->captures.find(capture_id);
  if (it == state_->captures.end()) throw Error(ErrorCode::kNotFound, "unknown capture " + capture_id);
  return it->second;
}

std::filesystem::path Store::capture_image_path(const CaptureRecord& capture) const {
  return images_dir() / capture.object;
}

RasterImage Store::load_capture_image(const std::string& capture_id) const {
  return read_image(capture_image_path(get_capture(capture_id)));
}

WearSession Store::start_timer(const std::string& user_id) {
  std::unique_lock lock(mutex_);
  if (!state_->users.contains(user_id)) throw Error(ErrorCode::kNotFound, "unknown user " + user_id);
  if (state_->open_session_by_user.contains(user_id)) {
    throw Error(ErrorCode::kSessionAlreadyOpen, "a wearing-time clock is already running");
  }
  const std::string id = "s" + std::to_string(state_->events);
  const json ev = {{"type", "session_start"}, {"seq", state_->events}, {"id", id}, {"user", user_id},
                   {"ts", now_for(user_id)}};
  append_event(ev.dump());
  apply(ev.dump(), state_->events++);
  return state_->sessions.at(id);
}

WearSession Store::stop_timer(const std::string& user_id) {
  std::string session_id;
  {
    std::shared_lock lock(mutex_);
    if (!state_->users.contains(user_id)) throw Error(ErrorCode::kNotFound, "unknown user " + user_id);
    auto it = state_->open_session_by_user.find(user_id);
    if (it == state_->open_session_by_user.end()) {
      throw Error(ErrorCode::kNoOpenSession, "no wearing-time clock is running");
    }
    session_id = it->second;
  }
  return stop_session(session_id);
}

WearSession Store::stop_session(const std::string& session_id) {
  std::unique_lock lock(mutex_);
  auto it = state_->sessions.find(session_id);
  if (it == state_->sessions.end()) throw Error(ErrorCode::kNotFound, "unknown session " + session_id);
  const WearSession& w = it->second;
  if (w.mode != EntryMode::kClock || w.end) {
    throw Error(ErrorCode::kNoOpenSession, "session " + session_id + " is not running");
  }
  const json ev = {{"type", "session_stop"}, {"seq", state_->events}, {"id", session_id},
                   {"ts", now_for(w.user_id)}};
  append_event(ev.dump());
  apply(ev.dump(), state_->events++);
  return state_->sessions.at(session_id);
}

WearSession Store::set_manual_duration(const std::string& user_id, double minutes) {
  if (!(minutes > 0.0) || !std::isfinite(minutes)) {
    throw Error(ErrorCode::kInvalidArgument, "wearing time must be a positive number of minutes");
  }
  std::unique_lock lock(mutex_);
  if (!state_->users.contains(user_id)) throw Error(ErrorCode::kNotFound, "unknown user " + user_id);
  const std::string id = "s" + std::to_string(state_->events);
  const json ev = {{"type", "session_manual"}, {"seq", state_->events}, {"id", id}, {"user", user_id},
                   {"minutes", minutes}, {"ts", now_for(user_id)}};
  append_event(ev.dump());
  apply(ev.dump(), state_->events++);
  return state_->sessions.at(id);
}

std::string Store::next_removal_check_id() { return random_id("k-"); }

std::string Store::write_artifact(const std::string& group, const std::string& name, const RasterImage& img) {
  if (!valid_id(group) || !valid_id(name)) throw Error(ErrorCode::kInvalidArgument, "bad artifact name");
  const std::filesystem::path dir = artifacts_dir() / group;
  std::filesystem::create_directories(dir);
  const std::string file = name + ".png";
  const std::filesystem::path tmp = dir / (file + ".tmp");
  write_image(tmp.string() + ".png", img);
  std::filesystem::rename(tmp.string() + ".png", dir / file);
  return group + "/" + file;
}

RemovalCheckRecord Store::record_removal_check(RemovalCheckRecord record) {
  std::unique_lock lock(mutex_);
  if (!state_->users.contains(record.user_id)) throw Error(ErrorCode::kNotFound, "unknown user " + record.user_id);
  if (!state_->captures.contains(record.capture_id)) {
    throw Error(ErrorCode::kNotFound, "unknown capture " + record.capture_id);
  }
  if (record.id.empty()) record.id = random_id("k-");
  if (state_->checks.contains(record.id)) throw Error(ErrorCode::kInvalidArgument, "duplicate removal check id");

  json ev = {{"type", "removal_check"},
             {"seq", state_->events},
             {"id", record.id},
             {"user", record.user_id},
             {"capture", record.capture_id},
             {"baseline", record.baseline_capture_id},
             {"state", std::string(eye_class_name(record.eye_state))},
             {"openness", record.openness},
             {"ratios",
              {{"capture_black", record.capture_ratios.black},
               {"capture_pink", record.capture_ratios.pink},
               {"baseline_black", record.baseline_ratios.black},
               {"baseline_pink", record.baseline_ratios.pink}}},
             {"artifacts", record.artifacts},
             {"ts", now_for(record.user_id)}};
  // The check belongs to the session its capture was filed under.
  if (const auto& session = state_->captures.at(record.capture_id).session_id) ev["session"] = *session;
  append_event(ev.dump());
  apply(ev.dump(), state_->events++);
  return state_->checks.at(record.id);
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

std::vector<WearSession> Store::list_sessions(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  if (!state_->users.contains(user_id)) throw Error(ErrorCode::kNotFound, "unknown user " + user_id);
  std::vector<WearSession> out;
  for (const auto& [id, w] : state_->sessions) {
    if (w.user_id == user_id) out.push_back(w);
  }
  std::sort(out.begin(), out.end(), [](const WearSession& a, const WearSession& b) {
    return std::tie(a.start, a.seq) > std::tie(b.start, b.seq);
  });
  return out;
}

SessionDetail Store::get_session(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->sessions.find(session_id);
  if (it == state_->sessions.end()) throw Error(ErrorCode::kNotFound, "unknown session " + session_id);
  SessionDetail out{it->second, {}, {}};
  for (const std::string& id : it->second.capture_ids) out.captures.push_back(state_->captures.at(id));
  for (const std::string& id : it->second.removal_check_ids) out.removal_checks.push_back(state_->checks.at(id));
  return out;
}

std::vector<TrendPoint> Store::trend(const std::string& user_id) const {
  std::vector<WearSession> sessions = list_sessions(user_id);  // newest first
  std::vector<TrendPoint> out;
  for (const WearSession& w : sessions) {
    if (!w.completed()) continue;
    out.push_back({w.id, *w.duration_minutes()});
    if (out.size() == 5) break;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<WearSession> Store::open_session(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_->open_session_by_user.find(user_id);
  if (it == state_->open_session_by_user.end()) return std::nullopt;
  return state_->sessions.at(it->second);
}

std::size_t Store::event_count() const {
  std::shared_lock lock(mutex_);
  return state_->events;
}

std::string Store::snapshot_json() const {
  std::vector<std::string> user_ids;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, _] : state_->users) user_ids.push_back(id);
  }
  json users = json::object();
  for (const std::string& id : user_ids) {
    const UserProfile u = get_user(id);
    json sessions = json::array();
    for (const WearSession& w : list_sessions(id)) {
      const SessionDetail d = get_session(w.id);
      json captures = json::array();
      for (const CaptureRecord& c : d.captures) captures.push_back({c.id, c.object, c.timestamp});
      json checks = json::array();
      for (const RemovalCheckRecord& r : d.removal_checks) {
        checks.push_back({r.id, r.capture_id, r.baseline_capture_id, r.artifacts, r.capture_ratios.black,
                          r.capture_ratios.pink});
      }
      sessions.push_back({{"id", w.id},
                          {"mode", w.mode == EntryMode::kClock ? "clock" : "manual"},
                          {"start", w.start},
                          {"end", opt(w.end)},
                          {"minutes", opt(w.duration_minutes())},
                          {"removal_duration_s", opt(w.removal_duration_s)},
                          {"captures", captures},
                          {"checks", checks}});
    }
    json trend_points = json::array();
    for (const TrendPoint& p : trend(id)) trend_points.push_back({p.session_id, p.minutes});
    const auto open = open_session(id);
    users[id] = {{"created_at", u.created_at},
                 {"face", opt(u.face_capture)},
                 {"open", opt(u.baseline_open_capture)},
                 {"closed", opt(u.baseline_closed_capture)},
                 {"open_session", open ? json(open->id) : json(nullptr)},
                 {"sessions", sessions},
                 {"trend", trend_points}};
  }
  return json{{"events", event_count()}, {"users", users}}.dump();
}

}  // namespace eyevis
