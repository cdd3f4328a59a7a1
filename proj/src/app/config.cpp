#include "eyevis/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "eyevis/colormap.hpp"
#include "eyevis/error.hpp"
#include "json.hpp"

extern char** environ;

namespace eyevis {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown config key " + where + key);
    }
  }
}

std::pair<double, double> read_pair(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw Error(ErrorCode::kInvalidArgument, "config " + name + " must be [lo, hi]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void apply_range(HsvRange& range, const json& v, const std::string& name) {
  if (!v.is_object()) throw Error(ErrorCode::kInvalidArgument, "config " + name + " must be an object");
  reject_unknown(v, {"h", "s", "v"}, name + ".");
  if (v.contains("h")) std::tie(range.h_lo, range.h_hi) = read_pair(v["h"], name + ".h");
  if (v.contains("s")) std::tie(range.s_lo, range.s_hi) = read_pair(v["s"], name + ".s");
  if (v.contains("v")) std::tie(range.v_lo, range.v_hi) = read_pair(v["v"], name + ".v");
  range.validate();
}

json range_json(const HsvRange& r) {
  return {{"h", {r.h_lo, r.h_hi}}, {"s", {r.s_lo, r.s_hi}}, {"v", {r.v_lo, r.v_hi}}};
}

void apply_ring(EyeIndexRing& ring, const json& v) {
  if (!v.is_array() || v.size() != ring.size()) {
    throw Error(ErrorCode::kInvalidArgument, "eye index rings need exactly 16 entries");
  }
  for (std::size_t i = 0; i < ring.size(); ++i) ring[i] = v[i].get<int>();
}

int parse_port(const std::string& text) {
  try {
    std::size_t used = 0;
    const int port = std::stoi(text, &used);
    if (used == text.size() && port > 0 && port < 65536) return port;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "invalid port: " + text);
}

}  // namespace

ProviderKind parse_provider_kind(const std::string& name) {
  if (name == "fixture") return ProviderKind::kFixture;
  if (name == "external") return ProviderKind::kExternal;
  throw Error(ErrorCode::kInvalidArgument, "provider must be fixture or external, got " + name);
}

void apply_config_json(AppConfig& cfg, const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  reject_unknown(doc,
                 {"black_range", "pink_range", "blue_factor", "threshold_lo", "threshold_hi",
                  "openness_threshold", "pad_frac", "colormap", "edge_color", "eye_indices",
                  "data_dir", "port", "host", "provider", "landmarks", "external_command", "workers"},
                 "");

  try {
    ResidueConfig& res = cfg.vision.residue;
    LocalizationConfig& loc = cfg.vision.localization;
    if (doc.contains("black_range")) apply_range(res.black_range, doc["black_range"], "black_range");
    if (doc.contains("pink_range")) apply_range(res.pink_range, doc["pink_range"], "pink_range");
    if (doc.contains("blue_factor")) res.blue_factor = doc["blue_factor"].get<double>();
    if (doc.contains("threshold_lo")) res.threshold_lo = doc["threshold_lo"].get<int>();
    if (doc.contains("threshold_hi")) res.threshold_hi = doc["threshold_hi"].get<int>();
    if (doc.contains("colormap")) {
      res.colormap = doc["colormap"].get<std::string>();
      colormap_by_name(res.colormap);
    }
    if (doc.contains("edge_color")) {
      const auto c = doc["edge_color"].get<std::vector<int>>();
      if (c.size() != 3 || std::any_of(c.begin(), c.end(), [](int v) { return v < 0 || v > 255; })) {
        throw Error(ErrorCode::kInvalidArgument, "edge_color must be [r, g, b] with 0..255 channels");
      }
      res.edge_color = {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
                        static_cast<std::uint8_t>(c[2])};
    }
    if (doc.contains("openness_threshold")) loc.openness_threshold = doc["openness_threshold"].get<double>();
    if (doc.contains("pad_frac")) loc.pad_frac = doc["pad_frac"].get<double>();
    if (doc.contains("eye_indices")) {
      const json& idx = doc["eye_indices"];
      reject_unknown(idx, {"left", "right"}, "eye_indices.");
      if (idx.contains("left")) apply_ring(loc.indices.left, idx["left"]);
      if (idx.contains("right")) apply_ring(loc.indices.right, idx["right"]);
      loc.indices.validate();
    }
    if (doc.contains("data_dir")) cfg.data_dir = doc["data_dir"].get<std::string>();
    if (doc.contains("port")) cfg.port = doc["port"].get<int>();
    if (doc.contains("host")) cfg.host = doc["host"].get<std::string>();
    if (doc.contains("provider")) cfg.provider = parse_provider_kind(doc["provider"].get<std::string>());
    if (doc.contains("landmarks")) cfg.landmarks_dir = doc["landmarks"].get<std::string>();
    if (doc.contains("external_command")) cfg.external_command = doc["external_command"].get<std::string>();
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config value has the wrong type: ") + e.what());
  }

  if (cfg.vision.residue.blue_factor < 0.0) throw Error(ErrorCode::kInvalidArgument, "blue_factor must be >= 0");
  if (cfg.vision.localization.pad_frac < 0.0) throw Error(ErrorCode::kInvalidArgument, "pad_frac must be >= 0");
  if (cfg.workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  const ResidueConfig& res = cfg.vision.residue;
  if (res.threshold_lo < 0 || res.threshold_hi > 255 || res.threshold_lo > res.threshold_hi) {
    throw Error(ErrorCode::kInvalidArgument, "threshold bounds must satisfy 0 <= lo <= hi <= 255");
  }
  if (cfg.port < 0 || cfg.port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
}

void apply_config_file(AppConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_json(cfg, buf.str());
}

void apply_config_env(AppConfig& cfg, const std::map<std::string, std::string>& env) {
  if (auto it = env.find("EYEVIS_DATA_DIR"); it != env.end() && !it->second.empty()) {
    cfg.data_dir = it->second;
  }
  if (auto it = env.find("EYEVIS_PORT"); it != env.end() && !it->second.empty()) {
    cfg.port = parse_port(it->second);
  }
}

std::map<std::string, std::string> process_env() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    if (auto eq = entry.find('='); eq != std::string::npos) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return env;
}

std::string config_to_json(const AppConfig& cfg) {
  const ResidueConfig& res = cfg.vision.residue;
  const LocalizationConfig& loc = cfg.vision.localization;
  json doc = {
      {"black_range", range_json(res.black_range)},
      {"pink_range", range_json(res.pink_range)},
      {"blue_factor", res.blue_factor},
      {"threshold_lo", res.threshold_lo},
      {"threshold_hi", res.threshold_hi},
      {"colormap", res.colormap},
      {"edge_color", {res.edge_color.r, res.edge_color.g, res.edge_color.b}},
      {"openness_threshold", loc.openness_threshold},
      {"pad_frac", loc.pad_frac},
      {"eye_indices", {{"left", loc.indices.left}, {"right", loc.indices.right}}},
      {"data_dir", cfg.data_dir.string()},
      {"port", cfg.port},
      {"host", cfg.host},
      {"provider", cfg.provider == ProviderKind::kFixture ? "fixture" : "external"},
      {"workers", cfg.workers},
  };
  if (cfg.landmarks_dir) doc["landmarks"] = cfg.landmarks_dir->string();
  if (!cfg.external_command.empty()) doc["external_command"] = cfg.external_command;
  return doc.dump(2);
}

}  // namespace eyevis
