#include "innodiff/influence.hpp"

#include <algorithm>
#include <cmath>

#include "innodiff/error.hpp"

namespace innodiff {

InfluenceTables InfluenceTables::defaults() {
  InfluenceTables t;
  t.pi = {{{+8.3, +7.3, +4.0, -4.1, -3.0},  //
           {-0.3, -0.6, -1.3, -0.3, -2.0}}};
  t.alpha = {{{+7.5, +3.5, +0.6, -1.0, -2.5},  //
              {+4.0, +0.35, -0.1, -0.85, -1.8}}};
  return t;
}

std::optional<int> sender_band(double value, double threshold) {
  if (value > threshold) return 0;
  if (value < -threshold) return 1;
  return std::nullopt;
}

int receiver_band(double value, const InfluenceTables& t) {
  if (value >= t.outer_cut) return 0;
  if (value >= t.inner_cut) return 1;
  if (value >= -t.inner_cut) return 2;
  if (value > -t.outer_cut) return 3;
  return 4;
}

std::optional<double> lookup_pi(const InfluenceTables& t, double sender_w, double receiver_w) {
  const auto row = sender_band(sender_w, t.fact_threshold);
  if (!row) return std::nullopt;
  return t.pi[*row][receiver_band(receiver_w, t)];
}

std::optional<double> lookup_alpha(const InfluenceTables& t, double sender_v, double receiver_v) {
  const auto row = sender_band(sender_v, t.emotion_threshold);
  if (!row) return std::nullopt;
  return t.alpha[*row][receiver_band(receiver_v, t)];
}

double apply_means_ends(double receiver_w, double pi, const PersuasionOptions& options) {
  const double scale = options.rule == UpdateRule::Directional
                           ? std::max(std::abs(receiver_w), options.weight_floor)
                           : receiver_w;
  return std::clamp(receiver_w + scale / 100.0 * pi, -1.0, 1.0);
}

double apply_contagion(double receiver_valence_link_w, double receiver_action_valence,
                       double alpha, const PersuasionOptions& options) {
  const double v = receiver_action_valence;
  const double scale = options.rule == UpdateRule::Directional
                           ? std::max(std::abs(v), options.weight_floor)
                           : receiver_valence_link_w;
  return std::clamp(v + scale / 100.0 * alpha, -1.0, 1.0);
}

Message compose_message(const Agent& sender, const InfluenceTables& tables) {
  Message m;
  const CoherenceNetwork& net = sender.mind;
  for (int g = 0; g < net.needs(); ++g) {
    for (int a = 0; a < net.actions(); ++a) {
      const double w = net.facilitation(g, a);
      if (std::abs(w) > tables.fact_threshold) m.facts.push_back({g, a, w});
    }
  }
  for (int a = 0; a < net.actions(); ++a) {
    const double v = net.valence(UnitId::action(a));
    if (std::abs(v) > tables.emotion_threshold) m.emotions.push_back({a, v});
  }
  return m;
}

ReceiveStats receive_message(Agent& receiver, const Message& message,
                             const InfluenceTables& tables, const PersuasionOptions& options) {
  ReceiveStats stats;
  CoherenceNetwork& net = receiver.mind;
  for (const Fact& f : message.facts) {
    const double current = net.facilitation(f.need, f.action);
    const auto pi = lookup_pi(tables, f.weight, current);
    if (!pi) continue;
    net.set_facilitation(f.need, f.action, apply_means_ends(current, *pi, options));
    ++stats.facts;
  }
  for (const Emotion& e : message.emotions) {
    const double settled = net.valence(UnitId::action(e.action));
    const auto alpha = lookup_alpha(tables, e.valence, settled);
    if (!alpha) continue;
    net.set_action_valence_weight(
        e.action, apply_contagion(net.action_valence_weight(e.action), settled, *alpha, options));
    ++stats.emotions;
  }
  return stats;
}

ExchangeOutcome exchange(Agent& a, Agent& b, const InfluenceTables& tables,
                         const PersuasionOptions& options, const SettleOptions& settle) {
  const Message from_a = compose_message(a, tables);
  const Message from_b = compose_message(b, tables);

  ExchangeOutcome out;
  out.b_received = receive_message(b, from_a, tables, options);
  out.a_received = receive_message(a, from_b, tables, options);

  // Settling is a pure function of the weights, so an agent that received
  // nothing would settle back to exactly its current state.
  auto resettle = [&](Agent& agent, const ReceiveStats& got) {
    if (got.facts == 0 && got.emotions == 0) return false;
    const int before = agent.current_preference;
    refresh_preference(agent, settle);
    return agent.current_preference != before;
  };
  out.a_switched = resettle(a, out.a_received);
  out.b_switched = resettle(b, out.b_received);
  return out;
}

bool MediaCampaign::scheduled_at(int step) const {
  return std::find(schedule.begin(), schedule.end(), step) != schedule.end();
}

MediaCampaign default_campaign(PolicyKind kind, const Population& labels, int steps, double reach,
                               double base_delta) {
  MediaCampaign c;
  c.kind = kind;
  c.reach = reach;
  const int ev = labels.action_index("EV");
  if (kind == PolicyKind::ZeroEmissionZone) {
    c.targets.push_back({labels.need_index("independence"), ev, base_delta});
    c.targets.push_back({labels.need_index("freedom from stress"), ev, base_delta});
  } else {
    c.targets.push_back({labels.need_index("cost efficiency"), ev, base_delta});
  }
  for (int s = 0; s < steps; s += 10) c.schedule.push_back(s);
  return c;
}

MediaReport apply_media(Population& pop, const MediaCampaign& campaign, int step, Rng& rng,
                        const MediaOptions& options) {
  if (!(campaign.reach >= 0.0 && campaign.reach <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "campaign reach must be in [0, 1]");
  }
  for (const CampaignTarget& t : campaign.targets) {
    if (t.need < 0 || t.need >= pop.needs() || t.action < 0 || t.action >= pop.actions()) {
      throw Error(ErrorCode::OutOfRange, "campaign target link outside the network");
    }
  }
  MediaReport report;
  const int n = pop.size();
  // The small epsilon keeps products like 0.7 * 10 from flooring to 6.
  const int k = static_cast<int>(std::floor(campaign.reach * n + 1e-9));
  if (k == 0) {
    report.warning = "media event at step " + std::to_string(step) +
                     " reaches no agents (reach * N < 1)";
    return report;
  }
  report.sampled = rng.sample_without_replacement(n, k);

  for (int id : report.sampled) {
    Agent& agent = pop.agents[id];
    const double mu = options.mu_override.value_or(agent.mu(campaign.kind));
    bool changed = false;
    for (const CampaignTarget& t : campaign.targets) {
      const double w = agent.mind.facilitation(t.need, t.action);
      const double next = options.rule == MediaRule::Additive
                              ? std::clamp(w + mu * t.base_delta, -1.0, 1.0)
                              : std::clamp(w * mu, -1.0, 1.0);
      if (next != w) {
        agent.mind.set_facilitation(t.need, t.action, next);
        changed = true;
      }
    }
    if (changed) {
      refresh_preference(agent, options.settle);
      ++report.changed_agents;
    }
  }
  return report;
}

}  // namespace innodiff
