#include "cli.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "innodiff/error.hpp"
#include "innodiff/rng.hpp"
#include "innodiff/scenario.hpp"
#include "innodiff/version.hpp"

namespace innodiff::cli {

namespace fs = std::filesystem;
using OrderedJson = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;
constexpr const char* kDefaultOutDir = "results";

// Raised for command-level failures that carry their own error code.
struct CommandError {
  int exit_code;
  std::string code;
  std::string message;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::optional<std::string> env_out_dir;

  // --out beats the environment, which beats the config's own output_dir.
  fs::path out_dir(const std::string& flag, const fs::path& configured = {}) const {
    if (!flag.empty()) return flag;
    if (env_out_dir) return *env_out_dir;
    if (!configured.empty()) return configured;
    return kDefaultOutDir;
  }

  void wrote(const fs::path& path) const { out << "wrote " << path.generic_string() << "\n"; }
};

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_text;
  std::vector<fs::path> inputs;
  std::vector<std::string> outputs;

  std::string format() const {
    OrderedJson j;
    j["tool"] = "innodiff";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["config_hash"] = "fnv1a64:" + hex64(fnv1a64(config_text));
    OrderedJson in = OrderedJson::array();
    for (const auto& p : inputs) {
      in.push_back({{"path", p.generic_string()}, {"fnv1a64", hex64(fnv1a64(read_text(p)))}});
    }
    j["inputs"] = std::move(in);
    j["outputs"] = outputs;
    j["config"] = OrderedJson::parse(config_text);
    return j.dump(2) + "\n";
  }
};

void write_manifest(const Context& ctx, const fs::path& dir, const Manifest& m) {
  const fs::path path = dir / "manifest.json";
  write_text(path, m.format());
  ctx.wrote(path);
}

// ---------------------------------------------------------------------------
// Shared scenario options

struct ScenarioFlags {
  std::string scenario;
  std::string population;
  std::string profiles;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mu;
  int threads = 1;
  std::optional<int> steps;
  std::optional<int> replicates;
};

void add_scenario_flags(CLI::App& app, ScenarioFlags& f, const std::string& mu_help) {
  app.add_option("--scenario", f.scenario, "Scenario config (JSON)")->required();
  app.add_option("--population", f.population, "Population file; replaces the config's source");
  app.add_option("--profiles", f.profiles,
                 "Type profiles; generate the population from these instead");
  app.add_option("--seed", f.seed, "Master seed (overrides the config)");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--mu", f.mu, mu_help);
  app.add_option("--parallel-replicates", f.threads, "Replicates run in parallel (same results)")
      ->check(CLI::Range(1, 256));
  app.add_option("--steps", f.steps, "Steps per replicate")->check(CLI::PositiveNumber);
  app.add_option("--replicates", f.replicates, "Replicate count")->check(CLI::PositiveNumber);
}

ScenarioConfig load_with_overrides(const ScenarioFlags& f) {
  ScenarioConfig cfg = load_scenario_config(f.scenario);
  if (f.seed) cfg.seed = *f.seed;
  if (f.replicates) cfg.replicates = *f.replicates;
  if (f.steps) {
    cfg.steps = *f.steps;
    // A shorter run drops the events that would fall past its end.
    if (cfg.campaign) {
      auto& s = cfg.campaign->schedule;
      s.erase(std::remove_if(s.begin(), s.end(), [&](int e) { return e >= cfg.steps; }), s.end());
    }
  }
  if (!f.population.empty() && !f.profiles.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give either --population or --profiles, not both");
  }
  if (!f.population.empty()) {
    cfg.population.file = f.population;
    cfg.population.generator.reset();
  }
  if (!f.profiles.empty()) {
    GeneratorSpec gen = cfg.population.generator.value_or(GeneratorSpec{});
    gen.profiles = f.profiles;
    cfg.population.generator = gen;
    cfg.population.file.reset();
  }
  validate_config(cfg);
  return cfg;
}

// Config text that determines the results: the output directory is left out.
std::string result_config_text(ScenarioConfig cfg) {
  cfg.output_dir.clear();
  return format_scenario_config(cfg);
}

std::vector<fs::path> scenario_inputs(const ScenarioConfig& cfg) {
  std::vector<fs::path> inputs;
  if (cfg.population.file) inputs.push_back(*cfg.population.file);
  if (cfg.population.generator) inputs.push_back(cfg.population.generator->profiles);
  return inputs;
}

// ---------------------------------------------------------------------------
// Verbs

void cmd_generate(const Context& ctx, const std::string& profiles_path,
                  std::optional<std::uint64_t> seed_flag, const std::string& out_flag) {
  const ProfileSet profiles = load_profiles(profiles_path);
  const std::uint64_t seed = seed_flag.value_or(kDefaultSeed);
  const Population pop = generate_population(profiles.population_size, profiles, seed);
  const SocialGraph graph = build_graph(pop, derive_stream(seed, "graph"));

  const fs::path dir = ctx.out_dir(out_flag);
  save_population(pop, dir / "population.json");
  ctx.wrote(dir / "population.json");
  write_edge_list(graph, dir / "edges.txt");
  ctx.wrote(dir / "edges.txt");

  Manifest m;
  m.command = "generate";
  m.seed = seed;
  m.config_text = format_profiles(profiles);
  m.inputs = {profiles_path};
  m.outputs = {"population.json", "edges.txt"};
  write_manifest(ctx, dir, m);

  for (const GroupShares& g : tally_all_groups(pop)) {
    ctx.out << "group " << group_label(g.group) << " n=" << g.count;
    for (std::size_t a = 0; a < g.shares.size(); ++a) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " %.3f", g.shares[a]);
      ctx.out << buf;
    }
    ctx.out << "\n";
  }
}

void cmd_calibrate(const Context& ctx, const std::string& profiles_path,
                   std::optional<std::uint64_t> seed_flag, const std::string& out_flag) {
  const ProfileSet profiles = load_profiles(profiles_path);
  const std::uint64_t seed = seed_flag.value_or(kDefaultSeed);
  const CalibrationResult result = calibrate_profiles(profiles, seed);

  const fs::path dir = ctx.out_dir(out_flag);
  save_profiles(result.profiles, dir / "profiles_calibrated.json");
  ctx.wrote(dir / "profiles_calibrated.json");

  OrderedJson report;
  report["seed"] = seed;
  report["population_size"] = profiles.population_size;
  report["tolerance"] = profiles.calibration.tolerance;
  report["max_error"] = result.max_error;
  report["within_tolerance"] = result.within_tolerance;
  OrderedJson types = OrderedJson::array();
  for (std::size_t k = 0; k < result.achieved_error.size(); ++k) {
    types.push_back({{"type_id", result.profiles.types[k].type_id},
                     {"error", result.achieved_error[k]},
                     {"iterations", result.iterations[k]}});
  }
  report["types"] = std::move(types);
  report["warning"] = result.warning;
  write_text(dir / "calibration.json", report.dump(2) + "\n");
  ctx.wrote(dir / "calibration.json");

  Manifest m;
  m.command = "calibrate";
  m.seed = seed;
  m.config_text = format_profiles(profiles);
  m.inputs = {profiles_path};
  m.outputs = {"profiles_calibrated.json", "calibration.json"};
  write_manifest(ctx, dir, m);

  char buf[64];
  std::snprintf(buf, sizeof buf, "max share error %.4f\n", result.max_error);
  ctx.out << buf;
  if (!result.warning.empty()) ctx.err << "warning: calibration: " << result.warning << "\n";
}

void cmd_run(const Context& ctx, const ScenarioFlags& f) {
  ScenarioConfig cfg = load_with_overrides(f);
  if (!f.mu.empty()) cfg.mu = MuMode::parse(f.mu);
  const ModalShareSeries series = run_scenario(cfg, RunOptions{f.threads});

  const fs::path dir = ctx.out_dir(f.out, cfg.output_dir);
  const std::string rep_name = cfg.name + "_replicates.csv";
  const std::string avg_name = cfg.name + "_averaged.csv";
  write_text(dir / rep_name, format_replicate_csv(series));
  ctx.wrote(dir / rep_name);
  write_text(dir / avg_name, format_averaged_csv(series.averaged));
  ctx.wrote(dir / avg_name);

  OrderedJson diag = OrderedJson::array();
  for (const auto& r : series.replicates) {
    diag.push_back({{"replicate", r.replicate},
                    {"seed", r.seed},
                    {"exchanges", r.diagnostics.exchanges},
                    {"isolated_skips", r.diagnostics.isolated_skips},
                    {"switches", r.diagnostics.switches},
                    {"media_events", r.diagnostics.media_events},
                    {"warnings", r.diagnostics.warnings}});
  }
  const std::string diag_name = cfg.name + "_diagnostics.json";
  write_text(dir / diag_name, diag.dump(2) + "\n");
  ctx.wrote(dir / diag_name);

  Manifest m;
  m.command = "run";
  m.seed = cfg.seed;
  m.config_text = result_config_text(cfg);
  m.inputs = scenario_inputs(cfg);
  m.outputs = {rep_name, avg_name, diag_name};
  write_manifest(ctx, dir, m);
}

std::vector<MuMode> parse_mu_list(const std::string& text) {
  if (text.empty()) return default_sweep_settings();
  std::vector<MuMode> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    out.push_back(MuMode::parse(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

void cmd_sweep(const Context& ctx, const ScenarioFlags& f) {
  const ScenarioConfig cfg = load_with_overrides(f);
  const auto settings = parse_mu_list(f.mu);
  const SweepResult result = run_sweep(cfg, settings, RunOptions{f.threads});

  const fs::path dir = ctx.out_dir(f.out, cfg.output_dir);
  const std::string sweep_name = cfg.name + "_sweep.csv";
  const std::string rep_name = cfg.name + "_sweep_replicates.csv";
  write_text(dir / sweep_name, format_sweep_csv(result));
  ctx.wrote(dir / sweep_name);
  write_text(dir / rep_name, format_sweep_replicates_csv(result));
  ctx.wrote(dir / rep_name);

  Manifest m;
  m.command = "sweep";
  m.seed = cfg.seed;
  m.config_text = result_config_text(cfg);
  m.inputs = scenario_inputs(cfg);
  m.outputs = {sweep_name, rep_name};
  write_manifest(ctx, dir, m);
}

// "results/zez_averaged.csv" -> "zez"
std::string series_name(const fs::path& path) {
  std::string stem = path.stem().string();
  constexpr std::string_view suffix = "_averaged";
  if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
    stem.resize(stem.size() - suffix.size());
  }
  return stem;
}

void cmd_compare(const Context& ctx, const std::vector<std::string>& files,
                 const std::string& out_flag) {
  if (files.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "compare needs a reference and at least one more file");
  }
  std::vector<NamedSeries> all;
  for (const auto& f : files) {
    try {
      all.push_back({series_name(f), parse_averaged_csv(read_text(f))});
    } catch (const Error& e) {
      throw Error(e.code(), f + ": " + e.what());
    }
  }
  constexpr std::string_view mode = "EV";
  const auto rows =
      compare_scenarios(all.front(), std::span<const NamedSeries>(all).subspan(1), mode);

  const fs::path dir = ctx.out_dir(out_flag);
  const fs::path path = dir / "compare.csv";
  write_text(path, format_delta_csv(rows, mode));
  ctx.wrote(path);

  // Whole-population delta at the last step, one line per policy series.
  for (const auto& r : rows) {
    if (r.group != kAllGroup || r.step != static_cast<int>(all.front().series.steps.size())) {
      continue;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s vs %s at step %d: %+.2f pp %s\n", r.scenario.c_str(),
                  all.front().name.c_str(), r.step, r.delta_pp, std::string(mode).c_str());
    ctx.out << buf;
  }
}

void print_table(std::ostream& out, const char* title, const FactorTable& t) {
  out << title << "\n";
  out << "  sender    | w>=.60 | .20..60 | -.20..20 | -.60..-.20 | w<=-.60\n";
  const char* rows[] = {"positive", "negative"};
  for (int r = 0; r < kSenderBands; ++r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-9s | %+6.2f | %+7.2f | %+8.2f | %+10.2f | %+7.2f\n",
                  rows[r], t[r][0], t[r][1], t[r][2], t[r][3], t[r][4]);
    out << buf;
  }
}

void cmd_validate_tables(const Context& ctx, const std::string& scenario) {
  const InfluenceTables embedded = InfluenceTables::defaults();
  print_table(ctx.out, "pi (means-ends, percent)", embedded.pi);
  print_table(ctx.out, "alpha (contagion, percent)", embedded.alpha);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "thresholds: facts |w| > %.2f, emotions |v| > %.2f; receiver cuts %.2f, %.2f\n",
                embedded.fact_threshold, embedded.emotion_threshold, embedded.inner_cut,
                embedded.outer_cut);
  ctx.out << buf;
  if (scenario.empty()) return;

  const ScenarioConfig cfg = load_scenario_config(scenario);
  int differing = 0;
  auto check = [&](const char* name, const FactorTable& have, const FactorTable& want) {
    for (int r = 0; r < kSenderBands; ++r) {
      for (int c = 0; c < kReceiverBands; ++c) {
        if (have[r][c] == want[r][c]) continue;
        ++differing;
        std::snprintf(buf, sizeof buf, "differs: %s[%d][%d] = %g, embedded %g\n", name, r, c,
                      have[r][c], want[r][c]);
        ctx.out << buf;
      }
    }
  };
  check("pi", cfg.tables.pi, embedded.pi);
  check("alpha", cfg.tables.alpha, embedded.alpha);
  auto check_scalar = [&](const char* name, double have, double want) {
    if (have == want) return;
    ++differing;
    std::snprintf(buf, sizeof buf, "differs: %s = %g, embedded %g\n", name, have, want);
    ctx.out << buf;
  };
  check_scalar("fact_threshold", cfg.tables.fact_threshold, embedded.fact_threshold);
  check_scalar("emotion_threshold", cfg.tables.emotion_threshold, embedded.emotion_threshold);
  check_scalar("inner_cut", cfg.tables.inner_cut, embedded.inner_cut);
  check_scalar("outer_cut", cfg.tables.outer_cut, embedded.outer_cut);
  if (differing > 0) {
    throw CommandError{kExitFailure, "tables_differ",
                       scenario + ": " + std::to_string(differing) +
                           " table entries differ from the embedded defaults"};
  }
  ctx.out << scenario << ": tables match the embedded defaults\n";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema: return kExitSchema;
    case ErrorCode::Io: return kExitIo;
    default: return kExitInvalid;
  }
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

int fail(std::ostream& err, int exit_code, std::string_view code, const std::string& message) {
  err << "error: " << code << ": " << one_line(message) << "\n";
  return exit_code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& out_dir_env) {
  CLI::App app{"innodiff: agent-based simulation of transport-mode preferences", "innodiff"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string profiles, out_flag;
  std::optional<std::uint64_t> seed;

  auto* generate = app.add_subcommand("generate", "Generate a population and its social graph");
  generate->add_option("--profiles", profiles, "Type profiles (JSON)")->required();
  generate->add_option("--seed", seed, "Generation seed");
  generate->add_option("--out", out_flag, "Output directory");

  auto* calibrate = app.add_subcommand("calibrate", "Fit profile means to target initial shares");
  calibrate->add_option("--profiles", profiles, "Type profiles (JSON)")->required();
  calibrate->add_option("--seed", seed, "Generation seed the fit is made for");
  calibrate->add_option("--out", out_flag, "Output directory");

  ScenarioFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run all replicates of a scenario");
  add_scenario_flags(*run_cmd, run_flags, "Policy impact: 'empirical' or a value in [0, 1]");

  ScenarioFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Final EV share across policy impact settings");
  add_scenario_flags(*sweep, sweep_flags,
                     "Comma-separated settings (default empirical,0.25,0.5,0.75,1)");

  std::vector<std::string> files;
  auto* compare = app.add_subcommand("compare", "EV share deltas against a reference series");
  compare->add_option("files", files, "Averaged CSVs, reference first")->required();
  compare->add_option("--out", out_flag, "Output directory");

  std::string tables_scenario;
  auto* tables = app.add_subcommand("validate-tables", "Print the embedded persuasion tables");
  tables->add_option("--scenario", tables_scenario, "Check this config's table overrides");

  const Context ctx{out, err, out_dir_env};
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kExitUsage, "usage", e.what());
  }

  try {
    if (generate->parsed()) {
      cmd_generate(ctx, profiles, seed, out_flag);
    } else if (calibrate->parsed()) {
      cmd_calibrate(ctx, profiles, seed, out_flag);
    } else if (run_cmd->parsed()) {
      cmd_run(ctx, run_flags);
    } else if (sweep->parsed()) {
      cmd_sweep(ctx, sweep_flags);
    } else if (compare->parsed()) {
      cmd_compare(ctx, files, out_flag);
    } else if (tables->parsed()) {
      cmd_validate_tables(ctx, tables_scenario);
    }
  } catch (const CommandError& e) {
    return fail(err, e.exit_code, e.code, e.message);
  } catch (const Error& e) {
    return fail(err, exit_code_for(e.code()), to_string(e.code()), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(err, kExitIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(err, kExitFailure, "internal", e.what());
  }
  return kExitOk;
}

}  // namespace innodiff::cli
