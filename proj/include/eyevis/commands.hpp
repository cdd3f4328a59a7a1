#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "eyevis/config.hpp"
#include "eyevis/landmarks.hpp"

namespace eyevis {

// Batch entry points behind the `eyevis` CLI. Each returns the process exit
// status and writes human-readable output to `out`, diagnostics to `err`.

int run_stats(const std::filesystem::path& table, std::ostream& out, std::ostream& err);

int run_illum(std::span<const std::filesystem::path> groups, std::ostream& out, std::ostream& err);

// Writes original/black/pink/combined/binary PNGs and summary.json.
int run_visualize(const std::filesystem::path& image, const std::filesystem::path& out_dir,
                  const VisionConfig& cfg, std::ostream& out, std::ostream& err);

// Exit status is 0 iff no item failed, or when `allow_failures` is set.
int run_evaluate(const std::filesystem::path& corpus, const std::filesystem::path& report_path,
                 const LandmarkProvider& provider, const VisionConfig& cfg, bool allow_failures,
                 int workers, std::ostream& out, std::ostream& err);

// Blocks until SIGINT/SIGTERM, then drains in-flight requests.
int run_serve(const AppConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace eyevis
