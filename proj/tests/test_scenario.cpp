#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "innodiff/error.hpp"
#include "innodiff/scenario.hpp"
#include "properties.hpp"

using namespace innodiff;
using namespace innodiff::testing;

namespace {

ScenarioConfig small_config(ScenarioKind kind, int steps = 12, int replicates = 3) {
  ScenarioConfig cfg;
  cfg.name = std::string(to_string(kind));
  cfg.kind = kind;
  cfg.steps = steps;
  cfg.replicates = replicates;
  cfg.seed = 7;
  cfg.population.file = "in-memory";
  return cfg;
}

const Population& small_population() {
  static const Population pop = generate_population(60, small_profiles(60), 3);
  return pop;
}

}  // namespace

TEST(Scenario, Properties) {
  const auto r = scenario_property(1000, 51);
  EXPECT_TRUE(r.ok()) << r.first_failure;
  EXPECT_EQ(r.cases, 1000);
}

TEST(Scenario, EdgelessGraphIsStatic) {
  const auto& pop = small_population();
  const auto cfg = small_config(ScenarioKind::Reference, 20, 1);
  const auto rep = run_replicate(pop, SocialGraph(pop.size(), {}), cfg, 0, 1);
  ASSERT_EQ(rep.steps.size(), 20u);
  const auto initial = tally_all_groups(pop);
  for (const auto& step : rep.steps) EXPECT_EQ(step, initial);
  EXPECT_EQ(rep.diagnostics.exchanges, 0);
  EXPECT_EQ(rep.diagnostics.isolated_skips, 20LL * pop.size());
}

TEST(Scenario, SingleReplicateAverageIsThatReplicate) {
  const auto series = run_scenario(small_config(ScenarioKind::ZeroEmissionZone, 12, 1),
                                   small_population());
  ASSERT_EQ(series.replicates.size(), 1u);
  EXPECT_EQ(series.averaged.steps, series.replicates[0].steps);
}

TEST(Scenario, DeterministicAcrossRunsAndThreads) {
  const auto cfg = small_config(ScenarioKind::TaxExemption, 15, 4);
  const auto a = run_scenario(cfg, small_population());
  const auto b = run_scenario(cfg, small_population(), {3});
  EXPECT_EQ(format_replicate_csv(a), format_replicate_csv(b));
  EXPECT_EQ(a.averaged, b.averaged);
  EXPECT_EQ(a.replicates[2].seed, replicate_seed(7, 2));
}

TEST(Scenario, SharesSumToOne) {
  const auto series = run_scenario(small_config(ScenarioKind::PurchaseSubsidy),
                                   small_population());
  for (const auto& rep : series.replicates) {
    for (const auto& step : rep.steps) {
      for (const auto& gs : step) {
        if (gs.empty) continue;
        double sum = 0.0;
        for (double s : gs.shares) sum += s;
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(Scenario, ZeroImpactEqualsReference) {
  const auto reference = run_scenario(small_config(ScenarioKind::Reference), small_population());
  for (auto kind : {ScenarioKind::ZeroEmissionZone, ScenarioKind::TaxExemption,
                    ScenarioKind::PurchaseSubsidy}) {
    auto cfg = small_config(kind);
    cfg.mu = MuMode::constant(0.0);
    const auto policy = run_scenario(cfg, small_population());
    EXPECT_EQ(format_replicate_csv(policy), format_replicate_csv(reference));
  }
}

TEST(Scenario, MediaEventsFollowSchedule) {
  const auto series = run_scenario(small_config(ScenarioKind::ZeroEmissionZone, 25, 1),
                                   small_population());
  EXPECT_EQ(series.replicates[0].diagnostics.media_events, 3);  // 0, 10, 20
}

TEST(Scenario, FrozenGraphSharesOneGraph) {
  auto cfg = small_config(ScenarioKind::Reference, 5, 2);
  cfg.freeze_graph = true;
  const auto series = run_scenario(cfg, small_population());
  const auto graph = build_graph(small_population(), derive_stream(7, "frozen-graph"));
  for (int r = 0; r < 2; ++r) {
    const auto rep = run_replicate(small_population(), graph, cfg, r, replicate_seed(7, r));
    EXPECT_EQ(rep.steps, series.replicates[r].steps);
  }
}

TEST(Scenario, CompareReportsPercentagePoints) {
  const auto ref = run_scenario(small_config(ScenarioKind::Reference), small_population());
  const auto pol = run_scenario(small_config(ScenarioKind::ZeroEmissionZone), small_population());
  const NamedSeries reference{"reference", ref.averaged};
  const std::vector<NamedSeries> policies = {{"zez", pol.averaged}};
  const auto rows = compare_scenarios(reference, policies, "EV");
  const int ev = small_population().action_index("EV");
  ASSERT_FALSE(rows.empty());
  for (const auto& row : rows) {
    const double expect = 100.0 * (pol.averaged.steps[row.step - 1][row.group].shares[ev] -
                                   ref.averaged.steps[row.step - 1][row.group].shares[ev]);
    EXPECT_NEAR(row.delta_pp, expect, 1e-12);
  }
  EXPECT_THROW(compare_scenarios(reference, policies, "hovercraft"), Error);
  auto shorter = pol.averaged;
  shorter.steps.pop_back();
  const std::vector<NamedSeries> bad = {{"short", shorter}};
  try {
    compare_scenarios(reference, bad, "EV");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StructureMismatch);
  }
}

TEST(Scenario, SweepRunsEverySetting) {
  auto cfg = small_config(ScenarioKind::ZeroEmissionZone, 10, 2);
  const auto sweep = run_sweep(cfg, small_population(), default_sweep_settings());
  ASSERT_EQ(sweep.mean_final_share.size(), 5u);
  EXPECT_EQ(sweep.rows.size(), 10u);
  const auto empirical = run_scenario(cfg, small_population());
  const int ev = small_population().action_index("EV");
  EXPECT_EQ(sweep.rows[0].final_share, empirical.replicates[0].steps.back()[0].shares[ev]);
  const auto csv = format_sweep_csv(sweep);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "setting,mu,replicates,mean_final_share");
  EXPECT_THROW(run_sweep(small_config(ScenarioKind::Reference), small_population(),
                         default_sweep_settings()),
               Error);
}

TEST(Scenario, ValidateConfig) {
  auto cfg = small_config(ScenarioKind::Reference);
  EXPECT_NO_THROW(validate_config(cfg));
  cfg.steps = 0;
  EXPECT_THROW(validate_config(cfg), Error);
  cfg = small_config(ScenarioKind::Reference);
  cfg.campaign = CampaignSpec{};
  EXPECT_THROW(validate_config(cfg), Error);
  cfg = small_config(ScenarioKind::ZeroEmissionZone);
  cfg.campaign = default_campaign_spec(cfg.kind, cfg.steps);
  cfg.campaign->schedule.push_back(cfg.steps);
  EXPECT_THROW(validate_config(cfg), Error);
  cfg = small_config(ScenarioKind::ZeroEmissionZone);
  cfg.population.generator = GeneratorSpec{};
  EXPECT_THROW(validate_config(cfg), Error);
  EXPECT_THROW(MuMode::parse("1.5"), Error);
  EXPECT_THROW(MuMode::parse("lots"), Error);
  EXPECT_EQ(MuMode::parse("empirical"), MuMode::empirical());
}

TEST(ScenarioConfig, ParseRoundTripAndUnknownFields) {
  const std::string text = R"({
    "name": "zez", "kind": "zero_emission_zone", "steps": 50, "replicates": 4, "seed": 9,
    "population": {"file": "pop.json"},
    "mu": "0.5", "focus_mode": "EV",
    "campaign": {"reach": 0.5, "schedule_every": 5}
  })";
  const auto cfg = parse_scenario_config(text, "/base");
  EXPECT_EQ(cfg.kind, ScenarioKind::ZeroEmissionZone);
  EXPECT_EQ(cfg.mu, MuMode::constant(0.5));
  EXPECT_EQ(*cfg.population.file, std::filesystem::path("/base/pop.json"));
  ASSERT_TRUE(cfg.campaign);
  EXPECT_EQ(cfg.campaign->reach, 0.5);
  EXPECT_EQ(cfg.campaign->schedule.size(), 10u);
  EXPECT_EQ(parse_scenario_config(format_scenario_config(cfg)), cfg);

  try {
    parse_scenario_config(R"({"name":"x","kind":"reference","population":{"file":"p"},"colour":1})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Schema);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  EXPECT_THROW(parse_scenario_config(R"({"name":"x","kind":"utopia","population":{"file":"p"}})"),
               Error);
}

TEST(ScenarioConfig, ShippedScenariosLoad) {
  const std::filesystem::path dir = INNODIFF_DATA_DIR;
  for (const char* name : {"reference", "zero_emission_zone", "tax_exemption", "purchase_subsidy"}) {
    const auto cfg = load_scenario_config(dir / "scenarios" / (std::string(name) + ".json"));
    EXPECT_EQ(to_string(cfg.kind), name);
    EXPECT_EQ(cfg.steps, 100);
    EXPECT_EQ(cfg.replicates, 10);
    EXPECT_TRUE(std::filesystem::exists(cfg.population.generator->profiles));
  }
}

TEST(SeriesCsv, ReplicateRoundTrip) {
  const auto series = run_scenario(small_config(ScenarioKind::TaxExemption, 5, 2),
                                   small_population());
  std::vector<std::string> modes;
  const auto back = parse_replicate_csv(format_replicate_csv(series), &modes);
  EXPECT_EQ(modes, series.mode_labels);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t r = 0; r < back.size(); ++r) {
    for (std::size_t t = 0; t < back[r].steps.size(); ++t) {
      for (std::size_t g = 0; g < back[r].steps[t].size(); ++g) {
        EXPECT_EQ(back[r].steps[t][g].shares, series.replicates[r].steps[t][g].shares);
      }
    }
  }
  const auto avg = parse_averaged_csv(format_averaged_csv(series.averaged));
  EXPECT_EQ(format_averaged_csv(avg), format_averaged_csv(series.averaged));
}

TEST(SeriesCsv, RejectsMalformedInput) {
  EXPECT_THROW(parse_averaged_csv("step,group,mode,share\n"), Error);
  EXPECT_THROW(parse_averaged_csv("step,group,mode,mean_share\n1,ALL,EV\n"), Error);
  EXPECT_THROW(parse_averaged_csv("step,group,mode,mean_share\n2,ALL,EV,0.5\n"), Error);
  EXPECT_THROW(parse_averaged_csv("step,group,mode,mean_share\n1,9,EV,0.5\n"), Error);
  EXPECT_THROW(parse_averaged_csv("step,group,mode,mean_share\n1,ALL,EV,x\n"), Error);
  EXPECT_THROW(parse_averaged_csv("step,group,mode,mean_share\n1,ALL,EV,0.5\n1,ALL,EV,0.5\n"),
               Error);
  EXPECT_THROW(
      parse_averaged_csv("step,group,mode,mean_share\n1,ALL,EV,0.5\n1,ALL,ICE,0.5\n1,1,EV,1\n"),
      Error);
  EXPECT_EQ(group_label(kAllGroup), "ALL");
  EXPECT_EQ(parse_group_label("3"), 3);
  EXPECT_THROW(group_label(5), Error);
}
