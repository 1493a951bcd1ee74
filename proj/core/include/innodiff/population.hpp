#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "innodiff/coherence.hpp"

namespace innodiff {

enum class PolicyKind : std::uint8_t { ZeroEmissionZone = 0, TaxExemption = 1, PurchaseSubsidy = 2 };
inline constexpr int kPolicyKinds = 3;
inline constexpr std::array<PolicyKind, kPolicyKinds> kAllPolicyKinds = {
    PolicyKind::ZeroEmissionZone, PolicyKind::TaxExemption, PolicyKind::PurchaseSubsidy};

/// "zero_emission_zone", "tax_exemption", "purchase_subsidy".
std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

inline constexpr int kMobilityTypes = 4;

// Attribute ranges of the survey population.
namespace bounds {
inline constexpr int kAgeMin = 18, kAgeMax = 69;
inline constexpr int kIncomeMin = 1, kIncomeMax = 7;
inline constexpr int kEducationMin = 1, kEducationMax = 5;
inline constexpr double kConsumptionMin = 1.0, kConsumptionMax = 3.6;
inline constexpr double kModernityMin = 1.0, kModernityMax = 4.0;
inline constexpr double kCoordMin = 0.33, kCoordMax = 0.68;
inline constexpr double kRadiusMin = 0.0, kRadiusMax = 1.0;
}  // namespace bounds

struct Demographics {
  int age = bounds::kAgeMin;
  int gender = 0;
  int income = bounds::kIncomeMin;
  int education = bounds::kEducationMin;
  double consumption = bounds::kConsumptionMin;
  double modernity = bounds::kModernityMin;

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct Agent {
  int id = 0;
  CoherenceNetwork mind;
  Demographics demographics;
  double x = bounds::kCoordMin;
  double y = bounds::kCoordMin;
  double social_radius = 0.0;
  int mobility_type = 1;
  /// Policy impact factor per PolicyKind, each in [0, 1].
  std::array<double, kPolicyKinds> policy_impact{};
  int current_preference = 0;

  double mu(PolicyKind kind) const { return policy_impact[static_cast<int>(kind)]; }

  friend bool operator==(const Agent&, const Agent&) = default;
};

/// Throws Error(OutOfRange) naming `context` and the violated bound.
void validate_agent(const Agent& agent, std::string_view context);

/// Re-settles the agent's mind from its initial state and refreshes
/// current_preference (ties keep the previous preference).
void refresh_preference(Agent& agent, const SettleOptions& settle);

struct Population {
  std::vector<Agent> agents;
  std::vector<std::string> need_labels;
  std::vector<std::string> action_labels;

  int size() const { return static_cast<int>(agents.size()); }
  int needs() const { return static_cast<int>(need_labels.size()); }
  int actions() const { return static_cast<int>(action_labels.size()); }
  /// Index of a label; throws Error(InvalidArgument) when absent.
  int need_index(std::string_view label) const;
  int action_index(std::string_view label) const;

  friend bool operator==(const Population&, const Population&) = default;
};

std::vector<std::string> default_action_labels();
/// Six needs are named in the survey typology; the last two are unnamed.
std::vector<std::string> default_need_labels();

/// Checks ids, label sizes and every agent's ranges.
void validate_population(const Population& pop);

// ---------------------------------------------------------------------------
// Population files

struct LoadOptions {
  NetworkParams network;
  SettleOptions settle;
};

/// Parses the population schema (see docs/population_format.md), builds and
/// settles every agent's network. Errors name the record and field.
Population parse_population(std::string_view text, const LoadOptions& options = {});
Population load_population(const std::filesystem::path& path, const LoadOptions& options = {});
std::string format_population(const Population& pop);
void save_population(const Population& pop, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic generation

struct SlotDistribution {
  double mean = 0.0;
  double sd = 0.0;
  friend bool operator==(const SlotDistribution&, const SlotDistribution&) = default;
};

struct TypeProfile {
  int type_id = 1;
  std::string name;
  double share = 0.0;
  /// One entry per action; a probability vector.
  std::vector<double> target_initial_shares;
  std::array<double, kPolicyKinds> mu_mean{};
  std::array<double, kPolicyKinds> mu_sd{};
  /// Need-major, G*A entries.
  std::vector<SlotDistribution> facilitation;
  std::vector<SlotDistribution> priorities;
  std::vector<SlotDistribution> need_valences;
  std::vector<SlotDistribution> action_valences;

  friend bool operator==(const TypeProfile&, const TypeProfile&) = default;
};

struct CalibrationSettings {
  int budget = 1500;          ///< search iterations per type
  double tolerance = 0.05;    ///< acceptance bound on max |share - target|
  double goal = 0.02;         ///< search stops early below this error
  double initial_step = 0.15;
  double min_step = 0.005;
  /// Facilitation means stay within [-bound, bound].
  double facilitation_bound = 1.0;

  friend bool operator==(const CalibrationSettings&, const CalibrationSettings&) = default;
};

struct ProfileSet {
  int population_size = 675;
  std::vector<std::string> need_labels;
  std::vector<std::string> action_labels;
  std::vector<TypeProfile> types;
  NetworkParams network;
  SettleOptions settle;
  CalibrationSettings calibration;

  int needs() const { return static_cast<int>(need_labels.size()); }
  int actions() const { return static_cast<int>(action_labels.size()); }
};

/// Checks dimensions, share sum (1 +- 1e-9), distribution ranges.
void validate_profiles(const ProfileSet& profiles);
ProfileSet parse_profiles(std::string_view text);
ProfileSet load_profiles(const std::filesystem::path& path);
std::string format_profiles(const ProfileSet& profiles);
void save_profiles(const ProfileSet& profiles, const std::filesystem::path& path);

/// Largest-remainder apportionment of n over shares; ties in the fractional
/// part go to the lower index.
std::vector<int> largest_remainder_counts(int n, std::span<const double> shares);

/// Synthesizes a settled population. Deterministic in (n, profiles, seed).
///
/// Stream layout: type assignment uses stream "types"; agent i draws its
/// attributes from stream ("agent", i) and its network noise from stream
/// ("mind", i). Network weights are clamp(mean + sd * z, -1, 1) with one
/// standard-normal z per slot, so shifting distribution means never changes
/// which noise an agent receives.
Population generate_population(int n, const ProfileSet& profiles, std::uint64_t seed);

struct CalibrationResult {
  ProfileSet profiles;
  /// Max |share - target| across modes, per type (profile order).
  std::vector<double> achieved_error;
  std::vector<int> iterations;
  double max_error = 0.0;
  bool within_tolerance = false;
  /// Non-empty when the budget ran out above tolerance.
  std::string warning;
};

/// Stochastic local search over distribution means so that the population
/// produced by generate_population(profiles.population_size, result, seed)
/// has per-type initial preference shares close to `targets`.
CalibrationResult calibrate_profiles(const ProfileSet& profiles,
                                     const std::vector<std::vector<double>>& targets,
                                     std::uint64_t seed, int budget);
/// Uses each profile's target_initial_shares and calibration.budget.
CalibrationResult calibrate_profiles(const ProfileSet& profiles, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Tallies

inline constexpr int kAllGroup = 0;

struct GroupShares {
  int group = kAllGroup;  ///< 0 = whole population, else mobility type
  int count = 0;
  bool empty = true;
  std::vector<double> shares;

  friend bool operator==(const GroupShares&, const GroupShares&) = default;
};

/// by_type: one entry per mobility type 1..4 (empty ones flagged); otherwise
/// a single whole-population entry.
std::vector<GroupShares> tally_shares(const Population& pop, bool by_type);
/// Whole population followed by types 1..4.
std::vector<GroupShares> tally_all_groups(const Population& pop);

}  // namespace innodiff
