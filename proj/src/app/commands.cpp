#include "eyevis/commands.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "eyevis/codec.hpp"
#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"
#include "eyevis/residue.hpp"
#include "eyevis/service.hpp"
#include "json.hpp"

namespace eyevis {

namespace {

int report_failure(std::ostream& err, const std::exception& e) {
  if (const auto* ee = dynamic_cast<const Error*>(&e)) {
    err << "error [" << error_code_name(ee->code()) << "]: " << ee->what() << '\n';
  } else {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int run_stats(const std::filesystem::path& table, std::ostream& out, std::ostream& err) {
  try {
    const auto rows = load_participant_table(table);
    const auto stats = participant_column_stats(rows);
    out << "participants: " << rows.size() << " (sample std, n-1)\n" << format_column_stats(stats);
    return 0;
  } catch (const std::exception& e) {
    return report_failure(err, e);
  }
}

int run_illum(std::span<const std::filesystem::path> groups, std::ostream& out, std::ostream& err) {
  try {
    if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "no group directories given");
    const auto rows = illumination_table(groups);
    out << std::left << std::setw(16) << "group" << std::right << std::setw(10) << "d_ab" << std::setw(10)
        << "d_ac" << std::setw(10) << "d_bc" << '\n';
    out << std::fixed << std::setprecision(4);
    double ab = 0, ac = 0, bc = 0;
    for (const IlluminationRow& r : rows) {
      out << std::left << std::setw(16) << r.group << std::right << std::setw(10) << r.d_ab << std::setw(10)
          << r.d_ac << std::setw(10) << r.d_bc << '\n';
      ab += r.d_ab;
      ac += r.d_ac;
      bc += r.d_bc;
    }
    const double n = static_cast<double>(rows.size());
    out << std::left << std::setw(16) << "avg" << std::right << std::setw(10) << ab / n << std::setw(10)
        << ac / n << std::setw(10) << bc / n << '\n';
    return 0;
  } catch (const std::exception& e) {
    return report_failure(err, e);
  }
}

int run_visualize(const std::filesystem::path& image, const std::filesystem::path& out_dir,
                  const VisionConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const RasterImage img = read_image(image);
    const ImageAnalysis a = analyze_image(img, cfg.residue);
    std::filesystem::create_directories(out_dir);
    write_image(out_dir / "original.png", a.vis.original);
    write_image(out_dir / "black.png", a.vis.black_vis);
    write_image(out_dir / "pink.png", a.vis.pink_vis);
    write_image(out_dir / "combined.png", a.vis.combined);
    write_image(out_dir / "binary.png", a.vis.contour_vis);
    const nlohmann::json summary = {
        {"image", image.filename().string()},
        {"width", img.width()},
        {"height", img.height()},
        {"black_ratio", a.black.ratio},
        {"pink_ratio", a.pink.ratio},
    };
    std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
    out << std::fixed << std::setprecision(4) << "black_ratio " << a.black.ratio << "\npink_ratio "
        << a.pink.ratio << '\n';
    return 0;
  } catch (const std::exception& e) {
    return report_failure(err, e);
  }
}

int run_evaluate(const std::filesystem::path& corpus, const std::filesystem::path& report_path,
                 const LandmarkProvider& provider, const VisionConfig& cfg, bool allow_failures,
                 int workers, std::ostream& out, std::ostream& err) {
  try {
    const CorpusReport report = run_corpus_eval(corpus, provider, cfg, workers);
    if (report_path.has_parent_path()) std::filesystem::create_directories(report_path.parent_path());
    std::ofstream file(report_path);
    if (!file) throw Error(ErrorCode::kIo, "cannot write report " + report_path.string());
    file << corpus_report_to_json(report) << '\n';

    for (const std::string& w : report.warnings) err << "warning: " << w << '\n';
    for (const CorpusItemResult& item : report.items) {
      if (!item.ok) err << "failed: " << item.name << " [" << item.error_code << "] " << item.error_message << '\n';
    }
    auto show = [](const std::optional<double>& v) {
      std::ostringstream s;
      if (v) {
        s << std::fixed << std::setprecision(4) << *v;
      } else {
        s << "n/a";
      }
      return s.str();
    };
    out << "items " << report.items.size() << ", failed " << report.failed() << '\n'
        << "r_eye " << show(report.avg_r_eye) << "\nr_pink " << show(report.avg_r_pink) << "\nr_black "
        << show(report.avg_r_black) << "\nr_bin " << show(report.avg_r_bin) << '\n';
    return report.failed() == 0 || allow_failures ? 0 : 2;
  } catch (const std::exception& e) {
    return report_failure(err, e);
  }
}

int run_serve(const AppConfig& cfg, std::ostream& out, std::ostream& err) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Worker threads inherit the mask, so only the waiter below sees them.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    Service service(cfg, make_provider(cfg));
    const int port = service.bind();
    out << "eyevis " << kVersion << " listening on " << cfg.host << ':' << port << " (data "
        << cfg.data_dir.string() << ")" << std::endl;

    std::jthread waiter([&service, &signals] {
      int sig = 0;
      sigwait(&signals, &sig);
      service.stop();
    });
    service.listen();
    // Reached either through a signal or a listener failure; wake the waiter.
    if (waiter.joinable()) pthread_kill(waiter.native_handle(), SIGTERM);
    out << "eyevis stopped" << std::endl;
    return 0;
  } catch (const std::exception& e) {
    return report_failure(err, e);
  }
}

}  // namespace eyevis
