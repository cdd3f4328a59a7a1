#include <iostream>

#include "CLI11.hpp"
#include "eyevis/commands.hpp"
#include "eyevis/config.hpp"
#include "eyevis/error.hpp"
#include "eyevis/service.hpp"

int main(int argc, char** argv) {
  using eyevis::AppConfig;
  namespace fs = std::filesystem;

  CLI::App app{"eyevis: eye-makeup residue visualization toolkit"};
  app.set_version_flag("--version", std::string(eyevis::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string data_dir;
  int port = 0;
  std::string provider;
  std::string landmarks;
  std::string external_command;
  int workers = 0;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--data-dir", data_dir, "data directory (env EYEVIS_DATA_DIR)");
  app.add_option("--provider", provider, "landmark provider")->check(CLI::IsMember({"fixture", "external"}));
  app.add_option("--landmarks", landmarks, "landmark fixture directory (fixture provider)");
  app.add_option("--external-command", external_command, "landmark detector command (external provider)");
  app.add_option("--workers", workers, "vision worker count")->check(CLI::PositiveNumber);

  app.add_option("--port", port, "listen port (env EYEVIS_PORT)")->check(CLI::Range(1, 65535));
  std::string host;
  app.add_option("--host", host, "listen address");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");

  auto* evaluate = app.add_subcommand("evaluate", "overlap metrics over an annotated corpus");
  std::string corpus;
  std::string report = "report.json";
  bool allow_failures = false;
  evaluate->add_option("corpus", corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("-o,--out", report, "report file");
  evaluate->add_flag("--allow-failures", allow_failures, "exit 0 even when items fail");

  auto* illum = app.add_subcommand("illum", "pairwise HSV distance table for lighting groups");
  std::vector<std::string> groups;
  illum->add_option("groups", groups, "group directories (three images each)")->required()->check(CLI::ExistingDirectory);

  auto* stats = app.add_subcommand("stats", "aggregate per-participant residue ratios");
  std::string table;
  stats->add_option("table", table, "participant CSV")->required()->check(CLI::ExistingFile);

  auto* visualize = app.add_subcommand("visualize", "render HSV-UV and binary-threshold images");
  std::string image;
  std::string out_dir;
  visualize->add_option("image", image, "input PNG/JPEG")->required()->check(CLI::ExistingFile);
  visualize->add_option("out_dir", out_dir, "output directory")->required();

  auto* show_config = app.add_subcommand("config", "print the effective configuration as JSON");

  CLI11_PARSE(app, argc, argv);

  AppConfig cfg;
  try {
    if (!config_path.empty()) eyevis::apply_config_file(cfg, config_path);
    eyevis::apply_config_env(cfg, eyevis::process_env());
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (port != 0) cfg.port = port;
    if (!host.empty()) cfg.host = host;
    if (!provider.empty()) cfg.provider = eyevis::parse_provider_kind(provider);
    if (!landmarks.empty()) cfg.landmarks_dir = landmarks;
    if (!external_command.empty()) cfg.external_command = external_command;
    if (workers > 0) cfg.workers = workers;
  } catch (const eyevis::Error& e) {
    std::cerr << "error [" << eyevis::error_code_name(e.code()) << "]: " << e.what() << '\n';
    return 1;
  }

  if (*show_config) {
    std::cout << eyevis::config_to_json(cfg) << '\n';
    return 0;
  }
  if (*serve) return eyevis::run_serve(cfg, std::cout, std::cerr);
  if (*stats) return eyevis::run_stats(table, std::cout, std::cerr);
  if (*visualize) return eyevis::run_visualize(image, out_dir, cfg.vision, std::cout, std::cerr);
  if (*illum) {
    const std::vector<fs::path> dirs(groups.begin(), groups.end());
    return eyevis::run_illum(dirs, std::cout, std::cerr);
  }
  if (*evaluate) {
    try {
      // A corpus ships its own fixtures under landmarks/ unless overridden.
      if (cfg.provider == eyevis::ProviderKind::kFixture && !cfg.landmarks_dir &&
          fs::is_directory(fs::path(corpus) / "landmarks")) {
        cfg.landmarks_dir = fs::path(corpus) / "landmarks";
      }
      const auto provider_impl = eyevis::make_provider(cfg);
      return eyevis::run_evaluate(corpus, report, *provider_impl, cfg.vision, allow_failures, cfg.workers,
                                  std::cout, std::cerr);
    } catch (const eyevis::Error& e) {
      std::cerr << "error [" << eyevis::error_code_name(e.code()) << "]: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
