#include "innodiff/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "innodiff/error.hpp"
#include "innodiff/rng.hpp"

namespace innodiff {

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Reference: return "reference";
    case ScenarioKind::ZeroEmissionZone: return "zero_emission_zone";
    case ScenarioKind::TaxExemption: return "tax_exemption";
    case ScenarioKind::PurchaseSubsidy: return "purchase_subsidy";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (auto k : {ScenarioKind::Reference, ScenarioKind::ZeroEmissionZone,
                 ScenarioKind::TaxExemption, ScenarioKind::PurchaseSubsidy}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario kind '" + std::string(name) + "'");
}

std::optional<PolicyKind> policy_of(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Reference: return std::nullopt;
    case ScenarioKind::ZeroEmissionZone: return PolicyKind::ZeroEmissionZone;
    case ScenarioKind::TaxExemption: return PolicyKind::TaxExemption;
    case ScenarioKind::PurchaseSubsidy: return PolicyKind::PurchaseSubsidy;
  }
  return std::nullopt;
}

CampaignSpec default_campaign_spec(ScenarioKind kind, int steps) {
  CampaignSpec spec;
  for (int s = 0; s < steps; s += 10) spec.schedule.push_back(s);
  if (kind == ScenarioKind::ZeroEmissionZone) {
    spec.targets = {{"independence", "EV", 0.1}, {"freedom from stress", "EV", 0.1}};
  } else if (kind != ScenarioKind::Reference) {
    spec.targets = {{"cost efficiency", "EV", 0.1}};
  }
  return spec;
}

MediaCampaign resolve_campaign(const CampaignSpec& spec, PolicyKind kind, const Population& pop) {
  MediaCampaign c;
  c.kind = kind;
  c.reach = spec.reach;
  c.schedule = spec.schedule;
  for (const auto& t : spec.targets) {
    c.targets.push_back({pop.need_index(t.need), pop.action_index(t.action), t.base_delta});
  }
  return c;
}

std::string MuMode::label() const {
  if (!fixed) return "empirical";
  std::ostringstream out;
  out << *fixed;
  return out.str();
}

MuMode MuMode::parse(std::string_view text) {
  if (text == "empirical") return empirical();
  try {
    std::size_t used = 0;
    const double mu = std::stod(std::string(text), &used);
    if (used == text.size() && mu >= 0.0 && mu <= 1.0) return constant(mu);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument,
              "policy impact setting '" + std::string(text) + "' is neither 'empirical' nor in [0, 1]");
}

void validate_config(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (cfg.steps < 1) fail("steps must be >= 1");
  if (cfg.replicates < 1) fail("replicates must be >= 1");
  if (cfg.kind == ScenarioKind::Reference && cfg.campaign) {
    fail("the reference scenario cannot carry a media campaign");
  }
  if (cfg.campaign) {
    const auto& c = *cfg.campaign;
    if (!(c.reach >= 0.0 && c.reach <= 1.0)) fail("campaign.reach must be in [0, 1]");
    for (int s : c.schedule) {
      if (s < 0 || s >= cfg.steps) fail("campaign.schedule entries must be in [0, steps)");
    }
    for (const auto& t : c.targets) {
      if (!(t.base_delta >= 0.0 && t.base_delta <= 1.0)) {
        fail("campaign target base_delta must be in [0, 1]");
      }
    }
  }
  if (cfg.mu.fixed && !(*cfg.mu.fixed >= 0.0 && *cfg.mu.fixed <= 1.0)) {
    fail("fixed policy impact must be in [0, 1]");
  }
  if (cfg.population.file.has_value() == cfg.population.generator.has_value()) {
    fail("population source needs exactly one of 'file' or 'generator'");
  }
  if (!(cfg.graph.radius_scale >= 0.0)) fail("graph.radius_scale must be >= 0");
  if (!(cfg.persuasion.weight_floor >= 0.0)) fail("persuasion.weight_floor must be >= 0");
  if (!(cfg.settle.tolerance > 0.0) || cfg.settle.max_iterations < 1) {
    fail("settle needs tolerance > 0 and max_iterations >= 1");
  }
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
  return derive_stream(master, "replicate", {static_cast<std::uint64_t>(replicate)});
}

namespace {

std::optional<MediaCampaign> campaign_for(const ScenarioConfig& cfg, const Population& pop) {
  const auto policy = policy_of(cfg.kind);
  if (!policy) return std::nullopt;
  const CampaignSpec spec = cfg.campaign.value_or(default_campaign_spec(cfg.kind, cfg.steps));
  return resolve_campaign(spec, *policy, pop);
}

}  // namespace

ReplicateSeries run_replicate(Population pop, const SocialGraph& graph, const ScenarioConfig& cfg,
                              int replicate, std::uint64_t seed) {
  if (graph.size() != pop.size()) {
    throw Error(ErrorCode::StructureMismatch, "graph and population sizes differ");
  }
  ReplicateSeries out;
  out.replicate = replicate;
  out.seed = seed;
  out.steps.reserve(static_cast<std::size_t>(cfg.steps));

  const auto campaign = campaign_for(cfg, pop);
  Rng communication(derive_stream(seed, "communication"));
  Rng media(derive_stream(seed, "media"));
  MediaOptions media_options;
  media_options.rule = cfg.media_rule;
  media_options.mu_override = cfg.mu.fixed;
  media_options.settle = cfg.settle;

  for (int t = 1; t <= cfg.steps; ++t) {
    if (campaign) {
      // Event 0 fires before the first round; event s >= 1 at the start of
      // step s.
      for (int event : {0, t}) {
        if ((event == 0 && t != 1) || !campaign->scheduled_at(event)) continue;
        const auto report = apply_media(pop, *campaign, event, media, media_options);
        ++out.diagnostics.media_events;
        if (!report.warning.empty()) out.diagnostics.warnings.push_back(report.warning);
      }
    }

    for (int i : communication.permutation(pop.size())) {
      const auto nbrs = graph.neighbors(i);
      if (nbrs.empty()) {
        ++out.diagnostics.isolated_skips;
        continue;
      }
      const int j = nbrs[communication.below(nbrs.size())];
      const auto outcome =
          exchange(pop.agents[i], pop.agents[j], cfg.tables, cfg.persuasion, cfg.settle);
      ++out.diagnostics.exchanges;
      out.diagnostics.switches += int{outcome.a_switched} + int{outcome.b_switched};
    }
    out.steps.push_back(tally_all_groups(pop));
  }
  return out;
}

AveragedSeries average_replicates(const std::vector<ReplicateSeries>& replicates,
                                  const std::vector<std::string>& mode_labels) {
  AveragedSeries avg;
  avg.mode_labels = mode_labels;
  if (replicates.empty()) return avg;
  const std::size_t steps = replicates.front().steps.size();
  for (const auto& r : replicates) {
    if (r.steps.size() != steps) {
      throw Error(ErrorCode::StructureMismatch, "replicates have different step counts");
    }
  }
  avg.steps.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t groups = replicates.front().steps[t].size();
    for (std::size_t g = 0; g < groups; ++g) {
      GroupShares mean;
      mean.group = replicates.front().steps[t][g].group;
      mean.shares.assign(mode_labels.size(), 0.0);
      int used = 0;
      for (const auto& r : replicates) {
        const GroupShares& gs = r.steps[t][g];
        if (gs.empty) continue;
        for (std::size_t m = 0; m < gs.shares.size(); ++m) mean.shares[m] += gs.shares[m];
        mean.count += gs.count;
        ++used;
      }
      mean.empty = used == 0;
      if (used > 0) {
        for (double& s : mean.shares) s /= used;
        mean.count /= used;
      }
      avg.steps[t].push_back(std::move(mean));
    }
  }
  return avg;
}

namespace {

template <typename Fn>
void for_each_replicate(int replicates, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, replicates);
  if (threads == 1) {
    for (int r = 0; r < replicates; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < replicates; r = next++) {
        try {
          fn(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ModalShareSeries finish(std::vector<ReplicateSeries> replicates, std::vector<std::string> labels) {
  ModalShareSeries series;
  series.mode_labels = std::move(labels);
  series.replicates = std::move(replicates);
  series.averaged = average_replicates(series.replicates, series.mode_labels);
  return series;
}

}  // namespace

ModalShareSeries run_scenario(const ScenarioConfig& cfg, const Population& base,
                              const RunOptions& options) {
  validate_config(cfg);
  validate_population(base);
  // Resolve the campaign once up front so label errors surface before work.
  campaign_for(cfg, base);

  std::optional<SocialGraph> frozen;
  if (cfg.freeze_graph) frozen = build_graph(base, derive_stream(cfg.seed, "frozen-graph"), cfg.graph);

  std::vector<ReplicateSeries> replicates(static_cast<std::size_t>(cfg.replicates));
  for_each_replicate(cfg.replicates, options.threads, [&](int r) {
    const std::uint64_t seed = replicate_seed(cfg.seed, r);
    if (frozen) {
      replicates[r] = run_replicate(base, *frozen, cfg, r, seed);
    } else {
      const SocialGraph graph = build_graph(base, derive_stream(seed, "graph"), cfg.graph);
      replicates[r] = run_replicate(base, graph, cfg, r, seed);
    }
  });
  return finish(std::move(replicates), base.action_labels);
}

ModalShareSeries run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  validate_config(cfg);
  if (cfg.population.file) {
    LoadOptions load;
    load.network = cfg.network;
    load.settle = cfg.settle;
    return run_scenario(cfg, load_population(*cfg.population.file, load), options);
  }

  const GeneratorSpec& gen = *cfg.population.generator;
  const ProfileSet profiles = load_profiles(gen.profiles);
  const int n = gen.size > 0 ? gen.size : profiles.population_size;
  if (!gen.regenerate_per_replicate) {
    const std::uint64_t pop_seed = gen.seed.value_or(derive_stream(cfg.seed, "population"));
    return run_scenario(cfg, generate_population(n, profiles, pop_seed), options);
  }

  // Population and graph are rebuilt per replicate from the replicate seed.
  std::optional<Population> first;
  std::vector<ReplicateSeries> replicates(static_cast<std::size_t>(cfg.replicates));
  std::mutex first_mutex;
  for_each_replicate(cfg.replicates, options.threads, [&](int r) {
    const std::uint64_t seed = replicate_seed(cfg.seed, r);
    Population pop = generate_population(n, profiles, derive_stream(seed, "population"));
    if (r == 0) {
      std::lock_guard lock(first_mutex);
      first = pop;
    }
    const SocialGraph graph =
        build_graph(pop, derive_stream(cfg.freeze_graph ? cfg.seed : seed, "graph"), cfg.graph);
    replicates[r] = run_replicate(std::move(pop), graph, cfg, r, seed);
  });
  return finish(std::move(replicates), first->action_labels);
}

std::vector<MuMode> default_sweep_settings() {
  return {MuMode::empirical(), MuMode::constant(0.25), MuMode::constant(0.5),
          MuMode::constant(0.75), MuMode::constant(1.0)};
}

namespace {

SweepResult sweep_impl(const ScenarioConfig& cfg, const std::vector<MuMode>& settings,
                       const std::function<ModalShareSeries(const ScenarioConfig&)>& run) {
  if (cfg.kind == ScenarioKind::Reference) {
    throw Error(ErrorCode::InvalidArgument, "a sweep needs a policy scenario, not reference");
  }
  SweepResult result;
  result.focus_mode = cfg.focus_mode;
  result.settings = settings;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    ScenarioConfig variant = cfg;
    variant.mu = settings[s];
    const ModalShareSeries series = run(variant);
    const auto labels = series.mode_labels;
    const auto it = std::find(labels.begin(), labels.end(), cfg.focus_mode);
    if (it == labels.end()) {
      throw Error(ErrorCode::InvalidArgument, "focus mode '" + cfg.focus_mode + "' not in population");
    }
    const auto mode = static_cast<std::size_t>(it - labels.begin());
    double sum = 0.0;
    for (const auto& rep : series.replicates) {
      const double share = rep.steps.back().front().shares[mode];
      result.rows.push_back({static_cast<int>(s), rep.replicate, share});
      sum += share;
    }
    result.mean_final_share.push_back(sum / static_cast<double>(series.replicates.size()));
  }
  return result;
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& cfg, const std::vector<MuMode>& settings,
                      const RunOptions& options) {
  return sweep_impl(cfg, settings,
                    [&](const ScenarioConfig& c) { return run_scenario(c, options); });
}

SweepResult run_sweep(const ScenarioConfig& cfg, const Population& base,
                      const std::vector<MuMode>& settings, const RunOptions& options) {
  return sweep_impl(cfg, settings,
                    [&](const ScenarioConfig& c) { return run_scenario(c, base, options); });
}

std::vector<DeltaRow> compare_scenarios(const NamedSeries& reference,
                                        std::span<const NamedSeries> policies,
                                        std::string_view mode) {
  const auto& ref = reference.series;
  const auto it = std::find(ref.mode_labels.begin(), ref.mode_labels.end(), mode);
  if (it == ref.mode_labels.end()) {
    throw Error(ErrorCode::StructureMismatch,
                "mode '" + std::string(mode) + "' missing from reference series");
  }
  const auto m = static_cast<std::size_t>(it - ref.mode_labels.begin());
  std::vector<DeltaRow> rows;
  for (const NamedSeries& p : policies) {
    const auto& s = p.series;
    if (s.mode_labels != ref.mode_labels || s.steps.size() != ref.steps.size()) {
      throw Error(ErrorCode::StructureMismatch,
                  "series '" + p.name + "' differs from the reference in modes or steps");
    }
    for (std::size_t t = 0; t < ref.steps.size(); ++t) {
      if (s.steps[t].size() != ref.steps[t].size()) {
        throw Error(ErrorCode::StructureMismatch, "series '" + p.name + "' has different groups");
      }
      for (std::size_t g = 0; g < ref.steps[t].size(); ++g) {
        const GroupShares& a = s.steps[t][g];
        const GroupShares& b = ref.steps[t][g];
        if (a.group != b.group) {
          throw Error(ErrorCode::StructureMismatch, "series '" + p.name + "' has different groups");
        }
        if (a.empty || b.empty) continue;
        rows.push_back({static_cast<int>(t) + 1, a.group, p.name,
                        100.0 * (a.shares[m] - b.shares[m])});
      }
    }
  }
  return rows;
}

}  // namespace innodiff
