#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "eyevis/error.hpp"
#include "eyevis/evaluation.hpp"

namespace eyevis {

AggregateStats aggregate_ratios(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "aggregate needs at least two values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

ParticipantRatios participant_from_trials(std::string participant, double r_p_baseline,
                                          double r_b_baseline,
                                          const std::array<double, kTrialsPerParticipant>& r_p_trials,
                                          const std::array<double, kTrialsPerParticipant>& r_b_trials) {
  auto mean = [](const std::array<double, kTrialsPerParticipant>& t) {
    return std::accumulate(t.begin(), t.end(), 0.0) / kTrialsPerParticipant;
  };
  ParticipantRatios out;
  out.participant = std::move(participant);
  out.r_p_baseline = r_p_baseline;
  out.r_b_baseline = r_b_baseline;
  out.r_p_eyevis_mean = mean(r_p_trials);
  out.r_b_eyevis_mean = mean(r_b_trials);
  out.r_p_trials = r_p_trials;
  out.r_b_trials = r_b_trials;
  return out;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_percent(const std::string& cell, int line) {
  std::string text = trim(cell);
  if (!text.empty() && text.back() == '%') text.pop_back();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "line " + std::to_string(line) + ": bad number '" + cell + "'");
}

}  // namespace

std::vector<ParticipantRatios> parse_participant_table(const std::string& csv) {
  std::vector<ParticipantRatios> rows;
  std::istringstream in(csv);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(trim(cell));
    if (!header_seen) {
      header_seen = true;
      if (cells.size() != 5 || cells[0] != "participant") {
        throw Error(ErrorCode::kInvalidArgument, "participant table header must have 5 columns");
      }
      continue;
    }
    if (cells.size() != 5) {
      throw Error(ErrorCode::kInvalidArgument, "line " + std::to_string(line_no) + ": expected 5 columns");
    }
    ParticipantRatios row;
    row.participant = cells[0];
    row.r_p_baseline = parse_percent(cells[1], line_no);
    row.r_p_eyevis_mean = parse_percent(cells[2], line_no);
    row.r_b_baseline = parse_percent(cells[3], line_no);
    row.r_b_eyevis_mean = parse_percent(cells[4], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ParticipantRatios> load_participant_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open participant table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_participant_table(buf.str());
}

std::vector<ColumnStats> participant_column_stats(std::span<const ParticipantRatios> rows) {
  auto column = [&](double ParticipantRatios::*field) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const ParticipantRatios& r : rows) values.push_back(r.*field);
    return aggregate_ratios(values);
  };
  return {
      {"r_p_baseline", column(&ParticipantRatios::r_p_baseline)},
      {"r_p_EyeVis_mean", column(&ParticipantRatios::r_p_eyevis_mean)},
      {"r_b_baseline", column(&ParticipantRatios::r_b_baseline)},
      {"r_b_EyeVis_mean", column(&ParticipantRatios::r_b_eyevis_mean)},
  };
}

std::string format_column_stats(std::span<const ColumnStats> stats) {
  std::ostringstream out;
  out << std::left << std::setw(18) << "column" << std::right << std::setw(8) << "avg" << std::setw(8)
      << "std" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const ColumnStats& c : stats) {
    out << std::left << std::setw(18) << c.column << std::right << std::setw(8) << c.stats.avg
        << std::setw(8) << c.stats.std << '\n';
  }
  return out.str();
}

}  // namespace eyevis
