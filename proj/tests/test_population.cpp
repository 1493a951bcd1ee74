#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>

#include "innodiff/error.hpp"
#include "innodiff/population.hpp"
#include "properties.hpp"

using namespace innodiff;
using namespace innodiff::testing;

namespace {

// Shares of each mode per type, recounted from scratch.
std::vector<std::vector<double>> recount(const Population& pop) {
  std::vector<std::vector<double>> counts(kMobilityTypes, std::vector<double>(pop.actions(), 0.0));
  std::vector<int> n(kMobilityTypes, 0);
  for (const auto& a : pop.agents) {
    counts[a.mobility_type - 1][a.current_preference] += 1.0;
    ++n[a.mobility_type - 1];
  }
  for (int t = 0; t < kMobilityTypes; ++t) {
    for (auto& c : counts[t]) c = n[t] ? c / n[t] : 0.0;
  }
  return counts;
}

std::string one_agent_json(const std::string& field, const std::string& value) {
  auto pop = make_population({make_agent(0, build([] {
                                           Rng rng(1);
                                           return random_weights(rng, 8, 5, 0.3);
                                         }()))});
  auto j = nlohmann::json::parse(format_population(pop));
  j["agents"][0][field] = nlohmann::json::parse(value);
  return j.dump();
}

}  // namespace

TEST(Population, Properties) {
  const auto r = population_property(1000, 21);
  EXPECT_TRUE(r.ok()) << r.first_failure;
  EXPECT_EQ(r.cases, 1000);
}

TEST(Population, LargestRemainderSurveyCounts) {
  const std::vector<double> shares = {0.15, 0.16, 0.34, 0.35};
  EXPECT_EQ(largest_remainder_counts(675, shares), (std::vector<int>{101, 108, 230, 236}));
  // Equal remainders go to the lower index.
  const std::vector<double> halves = {0.5, 0.5};
  EXPECT_EQ(largest_remainder_counts(3, halves), (std::vector<int>{2, 1}));
  EXPECT_THROW(largest_remainder_counts(-1, shares), Error);
}

TEST(Population, RejectsOutOfRangeAttributes) {
  const std::pair<const char*, const char*> bad[] = {
      {"age", "17"},         {"age", "70"},       {"income", "8"},        {"education", "0"},
      {"gender", "2"},       {"x", "0.2"},        {"social_radius", "1.5"}, {"consumption", "3.7"},
      {"modernity", "0.5"},  {"mobility_type", "5"}};
  for (const auto& [field, value] : bad) {
    try {
      parse_population(one_agent_json(field, value));
      FAIL() << field << "=" << value << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OutOfRange) << field;
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
  EXPECT_NO_THROW(parse_population(one_agent_json("age", "18")));
}

TEST(Population, RejectsUnknownFieldsAndBadShapes) {
  try {
    parse_population(one_agent_json("shoe_size", "42"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Schema);
    EXPECT_NE(std::string(e.what()).find("shoe_size"), std::string::npos);
  }
  EXPECT_THROW(parse_population(one_agent_json("priorities", "[0.1, 0.2]")), Error);
  EXPECT_THROW(parse_population(one_agent_json("facilitation", "[]")), Error);
  EXPECT_THROW(parse_population(one_agent_json("age", "\"old\"")), Error);
  EXPECT_THROW(parse_population("not json"), Error);
  EXPECT_THROW(parse_population(R"({"format":"other","version":1})"), Error);
}

TEST(Population, RoundTripThroughFile) {
  const auto profiles = small_profiles();
  const auto pop = generate_population(40, profiles, 3);
  const auto dir = scratch_dir("population_roundtrip");
  save_population(pop, dir / "pop.json");
  EXPECT_EQ(load_population(dir / "pop.json"), pop);
  EXPECT_THROW(load_population(dir / "missing.json"), Error);

  save_profiles(profiles, dir / "profiles.json");
  const auto back = load_profiles(dir / "profiles.json");
  EXPECT_EQ(format_profiles(back), format_profiles(profiles));
}

TEST(Population, GenerationIsDeterministicWithExactTypeCounts) {
  auto profiles = small_profiles(675);
  const auto a = generate_population(675, profiles, 42);
  const auto b = generate_population(675, profiles, 42);
  EXPECT_EQ(a, b);
  EXPECT_NO_THROW(validate_population(a));
  std::vector<int> counts(kMobilityTypes, 0);
  for (const auto& agent : a.agents) ++counts[agent.mobility_type - 1];
  EXPECT_EQ(counts, (std::vector<int>{101, 108, 230, 236}));
  EXPECT_NE(generate_population(675, profiles, 43), a);
}

TEST(Population, GeneratedAgentsAreSettled) {
  const auto pop = generate_population(30, small_profiles(), 8);
  for (const auto& agent : pop.agents) {
    Agent copy = agent;
    refresh_preference(copy, {});
    EXPECT_EQ(copy.current_preference, agent.current_preference);
    EXPECT_EQ(copy.mind, agent.mind);
  }
}

TEST(Population, TalliesMatchRecount) {
  const auto pop = generate_population(200, small_profiles(200), 9);
  const auto groups = tally_all_groups(pop);
  ASSERT_EQ(groups.size(), static_cast<std::size_t>(kMobilityTypes + 1));
  const auto expect = recount(pop);
  for (int t = 1; t <= kMobilityTypes; ++t) {
    EXPECT_EQ(groups[t].group, t);
    for (int m = 0; m < pop.actions(); ++m) {
      EXPECT_NEAR(groups[t].shares[m], expect[t - 1][m], 1e-15);
    }
  }
  EXPECT_EQ(groups[0].count, 200);
}

TEST(Population, EmptyTypeIsFlagged) {
  auto pop = make_population({});
  Rng rng(2);
  pop.agents.push_back(make_agent(0, build(random_weights(rng, 8, 5, 0.3)), 2));
  const auto groups = tally_shares(pop, true);
  ASSERT_EQ(groups.size(), 4u);
  EXPECT_TRUE(groups[0].empty);
  EXPECT_FALSE(groups[1].empty);
  EXPECT_EQ(groups[1].count, 1);
}

TEST(Population, ValidateProfilesCatchesBadInput) {
  auto p = small_profiles();
  p.types[0].share = 0.5;
  EXPECT_THROW(validate_profiles(p), Error);
  p = small_profiles();
  p.types[1].facilitation.pop_back();
  EXPECT_THROW(validate_profiles(p), Error);
  p = small_profiles();
  p.calibration.min_step = 0.0;
  EXPECT_THROW(validate_profiles(p), Error);
  EXPECT_NO_THROW(validate_profiles(small_profiles()));
}

TEST(Calibration, ReportedErrorMatchesRegeneratedPopulation) {
  auto profiles = small_profiles(120);
  std::vector<std::vector<double>> targets = {{0.6, 0.1, 0.1, 0.1, 0.1},
                                              {0.2, 0.2, 0.2, 0.2, 0.2},
                                              {0.4, 0.3, 0.1, 0.1, 0.1},
                                              {0.1, 0.5, 0.2, 0.1, 0.1}};
  const auto result = calibrate_profiles(profiles, targets, 4, 150);
  const auto pop = generate_population(120, result.profiles, 4);
  const auto shares = recount(pop);
  double worst = 0.0;
  for (int t = 0; t < kMobilityTypes; ++t) {
    double err = 0.0;
    for (int m = 0; m < 5; ++m) err = std::max(err, std::fabs(shares[t][m] - targets[t][m]));
    EXPECT_NEAR(result.achieved_error[t], err, 1e-12) << "type " << t + 1;
    worst = std::max(worst, err);
  }
  EXPECT_NEAR(result.max_error, worst, 1e-12);
  EXPECT_EQ(result.within_tolerance, worst <= profiles.calibration.tolerance);
  EXPECT_EQ(result.warning.empty(), result.within_tolerance);

  const auto again = calibrate_profiles(profiles, targets, 4, 150);
  EXPECT_EQ(format_profiles(again.profiles), format_profiles(result.profiles));
}

TEST(Calibration, ReachesDegenerateTarget) {
  auto profiles = small_profiles(80);
  profiles.calibration.facilitation_bound = 1.0;
  const std::vector<std::vector<double>> targets(kMobilityTypes, {1.0, 0.0, 0.0, 0.0, 0.0});
  const auto result = calibrate_profiles(profiles, targets, 6, 400);
  EXPECT_TRUE(result.within_tolerance) << result.warning;
  EXPECT_LE(result.max_error, profiles.calibration.tolerance);
}

TEST(Calibration, RejectsMalformedTargets) {
  const auto profiles = small_profiles();
  EXPECT_THROW(calibrate_profiles(profiles, {{1.0}}, 1, 10), Error);
  const std::vector<std::vector<double>> not_normalized(kMobilityTypes, {0.5, 0.0, 0.0, 0.0, 0.0});
  EXPECT_THROW(calibrate_profiles(profiles, not_normalized, 1, 10), Error);
}
