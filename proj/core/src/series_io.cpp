#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "innodiff/error.hpp"
#include "innodiff/scenario.hpp"

// CSV rows are only written for non-empty groups; on reading, a group that
// has no rows at a step comes back flagged empty with a zero vector.

namespace innodiff {

namespace {

std::string number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void check_label(std::string_view label) {
  if (label.empty() || label.find_first_of(",\"\r\n") != std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument,
                "mode label '" + std::string(label) + "' cannot be written to CSV");
  }
}

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Schema, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

long long parse_int(std::string_view field, std::size_t line, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    csv_error(line, std::string(what) + " '" + std::string(field) + "' is not an integer");
  }
  return v;
}

double parse_double(std::string_view field, std::size_t line, const char* what) {
  std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    csv_error(line, std::string(what) + " '" + s + "' is not a finite number");
  }
  return v;
}

void append_group_rows(std::string& out, const std::string& prefix, const StepShares& step,
                       const std::vector<std::string>& modes) {
  for (const auto& gs : step) {
    if (gs.empty) continue;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      out += prefix;
      out += group_label(gs.group);
      out += ',';
      out += modes[m];
      out += ',';
      out += number(gs.shares[m]);
      out += '\n';
    }
  }
}

struct Cell {
  int group;
  int mode;
  double share;
};

// Rebuilds one series of steps from (step -> cells) using the standard group
// layout: ALL, then types 1..kMobilityTypes.
std::vector<StepShares> assemble(const std::map<int, std::vector<Cell>>& by_step,
                                 std::size_t modes) {
  std::vector<StepShares> steps;
  int expected = 1;
  for (const auto& [step, cells] : by_step) {
    if (step != expected) {
      throw Error(ErrorCode::Schema, "steps must run 1, 2, ... without gaps; missing step " +
                                         std::to_string(expected));
    }
    ++expected;
    StepShares shares(kMobilityTypes + 1);
    for (int g = 0; g <= kMobilityTypes; ++g) {
      shares[g].group = g;
      shares[g].shares.assign(modes, 0.0);
    }
    std::vector<std::vector<bool>> seen(kMobilityTypes + 1, std::vector<bool>(modes, false));
    for (const Cell& c : cells) {
      if (seen[c.group][c.mode]) {
        throw Error(ErrorCode::Schema, "duplicate row for step " + std::to_string(step));
      }
      seen[c.group][c.mode] = true;
      shares[c.group].shares[c.mode] = c.share;
      shares[c.group].empty = false;
    }
    for (int g = 0; g <= kMobilityTypes; ++g) {
      if (shares[g].empty) continue;
      if (std::find(seen[g].begin(), seen[g].end(), false) != seen[g].end()) {
        throw Error(ErrorCode::Schema, "group " + group_label(g) + " at step " +
                                           std::to_string(step) + " lacks some modes");
      }
    }
    steps.push_back(std::move(shares));
  }
  return steps;
}

int mode_index(std::vector<std::string>& modes, std::string_view label, std::size_t line) {
  if (label.empty()) csv_error(line, "empty mode label");
  const auto it = std::find(modes.begin(), modes.end(), label);
  if (it != modes.end()) return static_cast<int>(it - modes.begin());
  modes.emplace_back(label);
  return static_cast<int>(modes.size() - 1);
}

}  // namespace

std::string group_label(int group) {
  if (group == kAllGroup) return "ALL";
  if (group < 1 || group > kMobilityTypes) {
    throw Error(ErrorCode::OutOfRange, "group " + std::to_string(group) + " outside 0..4");
  }
  return std::to_string(group);
}

int parse_group_label(std::string_view label) {
  if (label == "ALL") return kAllGroup;
  if (label.size() == 1 && label[0] >= '1' && label[0] <= '0' + kMobilityTypes) {
    return label[0] - '0';
  }
  throw Error(ErrorCode::Schema, "unknown group '" + std::string(label) + "'");
}

std::string format_replicate_csv(const ModalShareSeries& series) {
  for (const auto& m : series.mode_labels) check_label(m);
  std::string out = "replicate,step,group,mode,share\n";
  for (const auto& rep : series.replicates) {
    for (std::size_t t = 0; t < rep.steps.size(); ++t) {
      append_group_rows(out, std::to_string(rep.replicate) + "," + std::to_string(t + 1) + ",",
                        rep.steps[t], series.mode_labels);
    }
  }
  return out;
}

std::string format_averaged_csv(const AveragedSeries& series) {
  for (const auto& m : series.mode_labels) check_label(m);
  std::string out = "step,group,mode,mean_share\n";
  for (std::size_t t = 0; t < series.steps.size(); ++t) {
    append_group_rows(out, std::to_string(t + 1) + ",", series.steps[t], series.mode_labels);
  }
  return out;
}

AveragedSeries parse_averaged_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "step,group,mode,mean_share") {
    csv_error(1, "expected header 'step,group,mode,mean_share'");
  }
  AveragedSeries series;
  std::map<int, std::vector<Cell>> by_step;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 4) csv_error(i + 1, "expected 4 fields");
    const auto step = parse_int(f[0], i + 1, "step");
    if (step < 1) csv_error(i + 1, "step must be >= 1");
    int group = 0;
    try {
      group = parse_group_label(f[1]);
    } catch (const Error& e) {
      csv_error(i + 1, e.what());
    }
    const int mode = mode_index(series.mode_labels, f[2], i + 1);
    by_step[static_cast<int>(step)].push_back({group, mode, parse_double(f[3], i + 1, "share")});
  }
  series.steps = assemble(by_step, series.mode_labels.size());
  return series;
}

std::vector<ReplicateSeries> parse_replicate_csv(std::string_view text,
                                                 std::vector<std::string>* mode_labels) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "replicate,step,group,mode,share") {
    csv_error(1, "expected header 'replicate,step,group,mode,share'");
  }
  std::vector<std::string> modes;
  std::map<int, std::map<int, std::vector<Cell>>> by_rep;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 5) csv_error(i + 1, "expected 5 fields");
    const auto rep = parse_int(f[0], i + 1, "replicate");
    const auto step = parse_int(f[1], i + 1, "step");
    if (rep < 0 || step < 1) csv_error(i + 1, "replicate must be >= 0 and step >= 1");
    int group = 0;
    try {
      group = parse_group_label(f[2]);
    } catch (const Error& e) {
      csv_error(i + 1, e.what());
    }
    const int mode = mode_index(modes, f[3], i + 1);
    by_rep[static_cast<int>(rep)][static_cast<int>(step)].push_back(
        {group, mode, parse_double(f[4], i + 1, "share")});
  }
  std::vector<ReplicateSeries> out;
  for (const auto& [rep, by_step] : by_rep) {
    ReplicateSeries series;
    series.replicate = rep;
    series.steps = assemble(by_step, modes.size());
    out.push_back(std::move(series));
  }
  if (mode_labels) *mode_labels = std::move(modes);
  return out;
}

std::string format_sweep_csv(const SweepResult& result) {
  std::string out = "setting,mu,replicates,mean_final_share\n";
  for (std::size_t s = 0; s < result.settings.size(); ++s) {
    const auto reps = std::count_if(result.rows.begin(), result.rows.end(), [&](const SweepRow& r) {
      return r.setting == static_cast<int>(s);
    });
    out += std::to_string(s) + "," + result.settings[s].label() + "," + std::to_string(reps) +
           "," + number(result.mean_final_share.at(s)) + "\n";
  }
  return out;
}

std::string format_sweep_replicates_csv(const SweepResult& result) {
  std::string out = "setting,replicate,final_share\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.setting) + "," + std::to_string(r.replicate) + "," +
           number(r.final_share) + "\n";
  }
  return out;
}

std::string format_delta_csv(const std::vector<DeltaRow>& rows, std::string_view mode) {
  check_label(mode);
  std::string out = "step,group,scenario,mode,delta_pp\n";
  for (const auto& r : rows) {
    check_label(r.scenario);
    out += std::to_string(r.step) + "," + group_label(r.group) + "," + r.scenario + "," +
           std::string(mode) + "," + number(r.delta_pp) + "\n";
  }
  return out;
}

}  // namespace innodiff
