#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "innodiff/influence.hpp"
#include "innodiff/population.hpp"
#include "innodiff/socialnet.hpp"

namespace innodiff {

enum class ScenarioKind : std::uint8_t { Reference, ZeroEmissionZone, TaxExemption, PurchaseSubsidy };

/// "reference", "zero_emission_zone", "tax_exemption", "purchase_subsidy".
std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);
std::optional<PolicyKind> policy_of(ScenarioKind kind);

/// Media campaign as written in a config file: links are named by label and
/// resolved against the population at run time.
struct CampaignSpec {
  struct Target {
    std::string need;
    std::string action;
    double base_delta = 0.1;
    friend bool operator==(const Target&, const Target&) = default;
  };
  double reach = 0.7;
  std::vector<int> schedule;
  std::vector<Target> targets;

  friend bool operator==(const CampaignSpec&, const CampaignSpec&) = default;
};

/// The default campaign for a policy kind (see default_campaign), by label.
CampaignSpec default_campaign_spec(ScenarioKind kind, int steps);
MediaCampaign resolve_campaign(const CampaignSpec& spec, PolicyKind kind, const Population& pop);

struct GeneratorSpec {
  std::filesystem::path profiles;
  /// 0 means profiles.population_size.
  int size = 0;
  /// Population seed when not regenerating per replicate; defaults to a
  /// stream of the scenario seed.
  std::optional<std::uint64_t> seed;
  bool regenerate_per_replicate = true;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

struct PopulationSource {
  std::optional<std::filesystem::path> file;
  std::optional<GeneratorSpec> generator;

  friend bool operator==(const PopulationSource&, const PopulationSource&) = default;
};

/// Policy impact used by the media agent: each agent's own factor, or one
/// fixed value for everybody.
struct MuMode {
  std::optional<double> fixed;

  static MuMode empirical() { return {}; }
  static MuMode constant(double mu) { return {mu}; }
  /// "empirical" or the value, e.g. "0.25".
  std::string label() const;
  static MuMode parse(std::string_view text);

  friend bool operator==(const MuMode&, const MuMode&) = default;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::Reference;
  int steps = 100;
  int replicates = 10;
  std::uint64_t seed = 42;
  /// Absent for Reference. For policy kinds a missing campaign means the
  /// default one.
  std::optional<CampaignSpec> campaign;
  PopulationSource population;
  MuMode mu;
  MediaRule media_rule = MediaRule::Additive;
  /// Use one graph for every replicate instead of one per replicate.
  bool freeze_graph = false;
  GraphOptions graph;
  InfluenceTables tables = InfluenceTables::defaults();
  PersuasionOptions persuasion;
  NetworkParams network;
  SettleOptions settle;
  /// Mode whose share the sweep and comparisons report.
  std::string focus_mode = "EV";
  std::filesystem::path output_dir;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws Error(InvalidArgument) on an inconsistent config.
void validate_config(const ScenarioConfig& cfg);

/// Seed of replicate r: derive_stream(master, "replicate", {r}).
std::uint64_t replicate_seed(std::uint64_t master, int replicate);

// ---------------------------------------------------------------------------
// Results

/// Shares of every group at one step: whole population, then types 1..4.
using StepShares = std::vector<GroupShares>;

struct ReplicateDiagnostics {
  long long exchanges = 0;
  long long isolated_skips = 0;
  long long switches = 0;
  int media_events = 0;
  std::vector<std::string> warnings;
};

struct ReplicateSeries {
  int replicate = 0;
  std::uint64_t seed = 0;
  /// steps[t - 1] holds the tally recorded after step t.
  std::vector<StepShares> steps;
  ReplicateDiagnostics diagnostics;
};

struct AveragedSeries {
  std::vector<std::string> mode_labels;
  std::vector<StepShares> steps;

  friend bool operator==(const AveragedSeries&, const AveragedSeries&) = default;
};

struct ModalShareSeries {
  std::vector<std::string> mode_labels;
  std::vector<ReplicateSeries> replicates;
  AveragedSeries averaged;
};

/// Mean of each (step, group, mode) share over the replicates in which the
/// group is non-empty.
AveragedSeries average_replicates(const std::vector<ReplicateSeries>& replicates,
                                  const std::vector<std::string>& mode_labels);

struct RunOptions {
  /// Replicates run on this many threads; results do not depend on it.
  int threads = 1;
};

/// One replicate of the step loop on a copy of `pop`:
///   1. media event for this step, if scheduled (event 0 runs before step 1)
///   2. agents visited in a random permutation; each with at least one
///      neighbor talks to a uniformly chosen neighbor
///   3. tally recorded
/// Streams "communication" and "media" of `seed` drive steps 2 and 1.
ReplicateSeries run_replicate(Population pop, const SocialGraph& graph,
                              const ScenarioConfig& cfg, int replicate, std::uint64_t seed);

/// Loads or generates the population and runs every replicate.
ModalShareSeries run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});
/// Runs every replicate on copies of `base`; only graph and communication
/// streams vary between replicates.
ModalShareSeries run_scenario(const ScenarioConfig& cfg, const Population& base,
                              const RunOptions& options = {});

struct SweepRow {
  int setting = 0;
  int replicate = 0;
  double final_share = 0.0;
};

struct SweepResult {
  std::string focus_mode;
  std::vector<MuMode> settings;
  std::vector<SweepRow> rows;
  /// Mean final share per setting.
  std::vector<double> mean_final_share;
};

std::vector<MuMode> default_sweep_settings();

/// Runs the scenario once per setting with identical seeds, so only the
/// policy impact differs; records the focus mode's whole-population share
/// at the final step.
SweepResult run_sweep(const ScenarioConfig& cfg, const std::vector<MuMode>& settings,
                      const RunOptions& options = {});
SweepResult run_sweep(const ScenarioConfig& cfg, const Population& base,
                      const std::vector<MuMode>& settings, const RunOptions& options = {});

struct NamedSeries {
  std::string name;
  AveragedSeries series;
};

struct DeltaRow {
  int step = 0;
  int group = kAllGroup;
  std::string scenario;
  /// Percentage points, policy minus reference.
  double delta_pp = 0.0;
};

/// Per (step, group) difference of `mode` share between each policy series
/// and the reference. Throws Error(StructureMismatch) when steps, groups or
/// mode labels differ.
std::vector<DeltaRow> compare_scenarios(const NamedSeries& reference,
                                        std::span<const NamedSeries> policies,
                                        std::string_view mode);

// ---------------------------------------------------------------------------
// Files

ScenarioConfig parse_scenario_config(std::string_view text,
                                     const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
/// Canonical JSON used for the manifest hash.
std::string format_scenario_config(const ScenarioConfig& cfg);

/// `replicate,step,group,mode,share`
std::string format_replicate_csv(const ModalShareSeries& series);
/// `step,group,mode,mean_share`
std::string format_averaged_csv(const AveragedSeries& series);
AveragedSeries parse_averaged_csv(std::string_view text);
std::vector<ReplicateSeries> parse_replicate_csv(std::string_view text,
                                                 std::vector<std::string>* mode_labels = nullptr);
/// `setting,mu,replicates,mean_final_share`
std::string format_sweep_csv(const SweepResult& result);
/// `setting,replicate,final_share`
std::string format_sweep_replicates_csv(const SweepResult& result);
/// `step,group,scenario,mode,delta_pp`
std::string format_delta_csv(const std::vector<DeltaRow>& rows, std::string_view mode);

/// "ALL" for the whole population, else the type number.
std::string group_label(int group);
int parse_group_label(std::string_view label);

}  // namespace innodiff
