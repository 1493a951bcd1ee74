#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "innodiff/population.hpp"
#include "innodiff/rng.hpp"

namespace innodiff {

// ---------------------------------------------------------------------------
// Persuasion tables

inline constexpr int kSenderBands = 2;
inline constexpr int kReceiverBands = 5;
using FactorTable = std::array<std::array<double, kReceiverBands>, kSenderBands>;

/// Percentage factors for the listening agent. Row 0 is a positive sender
/// (value above the selection threshold), row 1 a negative one. Columns are
/// receiver bands, strongest positive first:
///   w >= .60 | .20 <= w < .60 | -.20 <= w < .20 | -.60 < w < -.20 | w <= -.60
struct InfluenceTables {
  FactorTable pi{};     ///< rational influence, means-ends (facts)
  FactorTable alpha{};  ///< emotional influence, contagion (valences)
  double fact_threshold = 0.30;
  double emotion_threshold = 0.10;
  double inner_cut = 0.20;
  double outer_cut = 0.60;

  /// The experimentally derived defaults.
  static InfluenceTables defaults();

  friend bool operator==(const InfluenceTables&, const InfluenceTables&) = default;
};

/// 0 for value > threshold, 1 for value < -threshold, nullopt otherwise.
std::optional<int> sender_band(double value, double threshold);
int receiver_band(double value, const InfluenceTables& tables);

/// pi for a sender facilitation weight against the receiver's weight on the
/// same link; nullopt when the sender weight is not above the threshold.
std::optional<double> lookup_pi(const InfluenceTables& tables, double sender_w, double receiver_w);
std::optional<double> lookup_alpha(const InfluenceTables& tables, double sender_v,
                                   double receiver_v);

// ---------------------------------------------------------------------------
// Weight updates

enum class UpdateRule : std::uint8_t {
  /// w + max(|w|, floor)/100 * factor: the factor's sign is the direction.
  Directional,
  /// w + w/100 * factor: proportional to the receiver's signed weight.
  Literal,
};

struct PersuasionOptions {
  UpdateRule rule = UpdateRule::Directional;
  double weight_floor = 0.05;

  friend bool operator==(const PersuasionOptions&, const PersuasionOptions&) = default;
};

/// New facilitation weight after a fact with factor pi (percent). Clamped.
double apply_means_ends(double receiver_w, double pi, const PersuasionOptions& options = {});

/// New action-valence link weight. The link is reset to the receiver's
/// settled valence of that action and nudged by alpha (percent); under the
/// literal rule the nudge scales with the previous link weight instead.
double apply_contagion(double receiver_valence_link_w, double receiver_action_valence,
                       double alpha, const PersuasionOptions& options = {});

// ---------------------------------------------------------------------------
// Dyadic communication

struct Fact {
  int need = 0;
  int action = 0;
  double weight = 0.0;
  friend bool operator==(const Fact&, const Fact&) = default;
};

struct Emotion {
  int action = 0;
  double valence = 0.0;
  friend bool operator==(const Emotion&, const Emotion&) = default;
};

struct Message {
  std::vector<Fact> facts;
  std::vector<Emotion> emotions;

  bool empty() const { return facts.empty() && emotions.empty(); }
  friend bool operator==(const Message&, const Message&) = default;
};

/// Facts: facilitation links with |w| > fact_threshold. Emotions: settled
/// action valences with |v| > emotion_threshold.
Message compose_message(const Agent& sender, const InfluenceTables& tables);

struct ReceiveStats {
  int facts = 0;
  int emotions = 0;
};

/// Applies a message to the receiver's weights without re-settling.
ReceiveStats receive_message(Agent& receiver, const Message& message,
                             const InfluenceTables& tables, const PersuasionOptions& options);

struct ExchangeOutcome {
  ReceiveStats a_received;
  ReceiveStats b_received;
  bool a_switched = false;
  bool b_switched = false;
};

/// Both agents speak and listen at once: messages are composed from the
/// pre-exchange states, applied crosswise, then each agent re-settles.
ExchangeOutcome exchange(Agent& a, Agent& b, const InfluenceTables& tables,
                         const PersuasionOptions& options, const SettleOptions& settle);

// ---------------------------------------------------------------------------
// Media agent

enum class MediaRule : std::uint8_t {
  Additive,        ///< w + mu * base_delta
  Multiplicative,  ///< w * mu
};

struct CampaignTarget {
  int need = 0;
  int action = 0;
  double base_delta = 0.1;
  friend bool operator==(const CampaignTarget&, const CampaignTarget&) = default;
};

struct MediaCampaign {
  PolicyKind kind = PolicyKind::ZeroEmissionZone;
  std::vector<CampaignTarget> targets;
  std::vector<int> schedule;
  double reach = 0.7;

  bool scheduled_at(int step) const;
  friend bool operator==(const MediaCampaign&, const MediaCampaign&) = default;
};

/// The three policy campaigns: zero-emission zone strengthens
/// independence->EV and freedom from stress->EV, the two fiscal incentives
/// strengthen cost efficiency->EV. Events at 0, 10, 20, ... below `steps`.
MediaCampaign default_campaign(PolicyKind kind, const Population& labels, int steps = 100,
                               double reach = 0.7, double base_delta = 0.1);

struct MediaOptions {
  MediaRule rule = MediaRule::Additive;
  /// Replaces every agent's own policy impact factor when set.
  std::optional<double> mu_override;
  SettleOptions settle;
};

struct MediaReport {
  std::vector<int> sampled;
  /// Agents whose weights changed and were re-settled.
  int changed_agents = 0;
  std::string warning;
};

/// Samples floor(reach * N) distinct agents from `rng` and shifts each
/// targeted link by the agent's policy impact. Only agents whose weights
/// actually changed re-settle.
MediaReport apply_media(Population& pop, const MediaCampaign& campaign, int step, Rng& rng,
                        const MediaOptions& options = {});

}  // namespace innodiff
