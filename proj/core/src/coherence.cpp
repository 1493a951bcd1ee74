#include "innodiff/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "innodiff/error.hpp"

namespace innodiff {

namespace {

std::string describe(UnitKind kind) {
  switch (kind) {
    case UnitKind::Need: return "Need";
    case UnitKind::Action: return "Action";
    case UnitKind::Special: return "Special";
  }
  return "?";
}

}  // namespace

std::string to_string(UnitId id) {
  if (id.kind == UnitKind::Special) return "Special";
  return describe(id.kind) + "[" + std::to_string(id.index) + "]";
}

CoherenceNetwork CoherenceNetwork::build(const DenseMatrix& facilitation,
                                         std::span<const double> priorities,
                                         std::span<const double> need_valences,
                                         std::span<const double> action_valences,
                                         const NetworkParams& params) {
  const int g = facilitation.rows();
  const int a = facilitation.cols();
  if (g < 1 || a < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "network needs at least one need and one action unit");
  }
  if (std::ssize(priorities) != g || std::ssize(need_valences) != g) {
    throw Error(ErrorCode::DimensionMismatch,
                "priorities and need valences must have one entry per need (" +
                    std::to_string(g) + ")");
  }
  if (std::ssize(action_valences) != a) {
    throw Error(ErrorCode::DimensionMismatch,
                "action valences must have one entry per action (" + std::to_string(a) + ")");
  }
  if (!(params.act_min < params.act_max) || !(params.decay >= 0.0 && params.decay <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "network params: need act_min < act_max, decay in [0,1]");
  }
  if (!(params.initial_state >= params.act_min && params.initial_state <= params.act_max)) {
    throw Error(ErrorCode::OutOfRange, "network params: initial state outside [act_min, act_max]");
  }

  CoherenceNetwork net;
  net.needs_ = g;
  net.actions_ = a;
  net.params_ = params;
  net.links_.reserve(static_cast<std::size_t>(g * a + 2 * g + a));

  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < a; ++j) {
      net.check_weight(facilitation(i, j), "facilitation " + to_string(UnitId::need(i)) + "->" +
                                               to_string(UnitId::action(j)));
      net.links_.push_back(
          {UnitId::need(i), UnitId::action(j), facilitation(i, j), Channel::Activation});
    }
  }
  for (int i = 0; i < g; ++i) {
    net.check_weight(priorities[i], "priority of " + to_string(UnitId::need(i)));
    net.links_.push_back({UnitId::special(), UnitId::need(i), priorities[i], Channel::Activation});
  }
  for (int i = 0; i < g; ++i) {
    net.check_weight(need_valences[i], "valence of " + to_string(UnitId::need(i)));
    net.links_.push_back({UnitId::special(), UnitId::need(i), need_valences[i], Channel::Valence});
  }
  for (int j = 0; j < a; ++j) {
    net.check_weight(action_valences[j], "valence of " + to_string(UnitId::action(j)));
    net.links_.push_back(
        {UnitId::special(), UnitId::action(j), action_valences[j], Channel::Valence});
  }

  net.wire();
  net.reset_state();
  return net;
}

void CoherenceNetwork::wire() {
  const int n = unit_count();
  std::vector<std::vector<Incoming>> act(n), val(n);
  for (int l = 0; l < std::ssize(links_); ++l) {
    const Link& link = links_[l];
    const int from = slot(link.from);
    const int to = slot(link.to);
    if (link.channel == Channel::Valence) {
      val[to].push_back({from, l});
      continue;
    }
    act[to].push_back({from, l});
    if (params_.symmetric_facilitation && link.from.kind == UnitKind::Need &&
        link.to.kind == UnitKind::Action) {
      act[from].push_back({to, l});
    }
  }
  auto flatten = [n](std::vector<std::vector<Incoming>>& lists, std::vector<int>& offsets,
                     std::vector<Incoming>& flat) {
    offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    flat.clear();
    for (int j = 0; j < n; ++j) {
      // Ascending source order keeps every sum in a fixed, documented order.
      std::stable_sort(lists[j].begin(), lists[j].end(),
                       [](const Incoming& x, const Incoming& y) { return x.source < y.source; });
      flat.insert(flat.end(), lists[j].begin(), lists[j].end());
      offsets[j + 1] = static_cast<int>(flat.size());
    }
  };
  flatten(act, act_offsets_, act_in_);
  flatten(val, val_offsets_, val_in_);
}

int CoherenceNetwork::slot(UnitId id) const {
  switch (id.kind) {
    case UnitKind::Special: return 0;
    case UnitKind::Need: check_need(id.index); return 1 + id.index;
    case UnitKind::Action: check_action(id.index); return 1 + needs_ + id.index;
  }
  return 0;
}

UnitId CoherenceNetwork::unit(int s) const {
  if (s < 0 || s >= unit_count()) {
    throw Error(ErrorCode::OutOfRange, "unit slot " + std::to_string(s) + " out of range");
  }
  if (s == 0) return UnitId::special();
  if (s <= needs_) return UnitId::need(s - 1);
  return UnitId::action(s - 1 - needs_);
}

std::vector<UnitId> CoherenceNetwork::units() const {
  std::vector<UnitId> out;
  out.reserve(static_cast<std::size_t>(unit_count()));
  for (int s = 0; s < unit_count(); ++s) out.push_back(unit(s));
  return out;
}

void CoherenceNetwork::check_need(int need) const {
  if (need < 0 || need >= needs_) {
    throw Error(ErrorCode::OutOfRange, "need index " + std::to_string(need) + " out of range");
  }
}

void CoherenceNetwork::check_action(int action) const {
  if (action < 0 || action >= actions_) {
    throw Error(ErrorCode::OutOfRange, "action index " + std::to_string(action) + " out of range");
  }
}

void CoherenceNetwork::check_weight(double weight, std::string_view what) const {
  if (!std::isfinite(weight)) {
    throw Error(ErrorCode::NonFinite, std::string(what) + " weight is not finite");
  }
  if (weight < params_.act_min || weight > params_.act_max) {
    throw Error(ErrorCode::OutOfRange, std::string(what) + " weight " + std::to_string(weight) +
                                           " outside [-1, 1]");
  }
}

std::size_t CoherenceNetwork::facilitation_link(int need, int action) const {
  check_need(need);
  check_action(action);
  return static_cast<std::size_t>(need) * actions_ + action;
}

double CoherenceNetwork::facilitation(int need, int action) const {
  return links_[facilitation_link(need, action)].weight;
}

double CoherenceNetwork::priority(int need) const {
  check_need(need);
  return links_[static_cast<std::size_t>(needs_ * actions_ + need)].weight;
}

double CoherenceNetwork::need_valence_weight(int need) const {
  check_need(need);
  return links_[static_cast<std::size_t>(needs_ * actions_ + needs_ + need)].weight;
}

double CoherenceNetwork::action_valence_weight(int action) const {
  check_action(action);
  return links_[static_cast<std::size_t>(needs_ * actions_ + 2 * needs_ + action)].weight;
}

void CoherenceNetwork::set_facilitation(int need, int action, double weight) {
  check_weight(weight, "facilitation");
  links_[facilitation_link(need, action)].weight = weight;
}

void CoherenceNetwork::set_priority(int need, double weight) {
  check_need(need);
  check_weight(weight, "priority");
  links_[static_cast<std::size_t>(needs_ * actions_ + need)].weight = weight;
}

void CoherenceNetwork::set_need_valence_weight(int need, double weight) {
  check_need(need);
  check_weight(weight, "need valence");
  links_[static_cast<std::size_t>(needs_ * actions_ + needs_ + need)].weight = weight;
}

void CoherenceNetwork::set_action_valence_weight(int action, double weight) {
  check_action(action);
  check_weight(weight, "action valence");
  links_[static_cast<std::size_t>(needs_ * actions_ + 2 * needs_ + action)].weight = weight;
}

std::vector<double> CoherenceNetwork::action_activations() const {
  return {activation_.begin() + 1 + needs_, activation_.end()};
}

std::vector<double> CoherenceNetwork::action_valences() const {
  return {valence_.begin() + 1 + needs_, valence_.end()};
}

void CoherenceNetwork::reset_state() {
  const auto n = static_cast<std::size_t>(unit_count());
  activation_.assign(n, params_.initial_state);
  valence_.assign(n, params_.initial_state);
  activation_[0] = 1.0;
  valence_[0] = 1.0;
}

void CoherenceNetwork::set_state(std::span<const double> activation,
                                 std::span<const double> valence) {
  if (std::ssize(activation) != unit_count() || std::ssize(valence) != unit_count()) {
    throw Error(ErrorCode::DimensionMismatch, "state vectors must have one entry per unit");
  }
  if (activation[0] != 1.0 || valence[0] != 1.0) {
    throw Error(ErrorCode::OutOfRange, "special unit state must be (1, 1)");
  }
  for (int s = 1; s < unit_count(); ++s) {
    for (double x : {activation[s], valence[s]}) {
      if (!std::isfinite(x) || x < params_.act_min || x > params_.act_max) {
        throw Error(ErrorCode::OutOfRange, "state of " + to_string(unit(s)) + " out of bounds");
      }
    }
  }
  activation_.assign(activation.begin(), activation.end());
  valence_.assign(valence.begin(), valence.end());
}

SettleReport CoherenceNetwork::settle(const SettleOptions& options) {
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "settle needs tolerance > 0 and max_iterations >= 1");
  }
  const int n = unit_count();
  const double keep = 1.0 - params_.decay;
  const double lo = params_.act_min;
  const double hi = params_.act_max;
  const bool modulated = params_.net_input == NetInputRule::ValenceModulated;

  auto step = [&](double x, double net) {
    const double y = net > 0.0 ? x * keep + net * (hi - x) : x * keep + net * (x - lo);
    return std::clamp(y, lo, hi);
  };

  next_activation_.resize(static_cast<std::size_t>(n));
  next_valence_.resize(static_cast<std::size_t>(n));
  next_activation_[0] = 1.0;
  next_valence_[0] = 1.0;

  SettleReport report;
  for (int it = 1; it <= options.max_iterations; ++it) {
    double max_delta = 0.0;
    for (int j = 1; j < n; ++j) {
      double plain = 0.0;
      double weighted = 0.0;
      for (int k = act_offsets_[j]; k < act_offsets_[j + 1]; ++k) {
        const Incoming& in = act_in_[k];
        const double w = links_[in.link].weight;
        plain += w * activation_[in.source];
        weighted += w * valence_[in.source] * activation_[in.source];
      }
      const double net = modulated ? plain + weighted : plain;

      double net_valence = 0.0;
      for (int k = val_offsets_[j]; k < val_offsets_[j + 1]; ++k) {
        const Incoming& in = val_in_[k];
        net_valence += links_[in.link].weight * valence_[in.source] * activation_[in.source];
      }

      const double a = step(activation_[j], net);
      const double v = step(valence_[j], net_valence);
      if (!std::isfinite(a) || !std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite,
                    "non-finite state at " + to_string(unit(j)) + " on iteration " +
                        std::to_string(it));
      }
      max_delta = std::max({max_delta, std::abs(a - activation_[j]), std::abs(v - valence_[j])});
      next_activation_[j] = a;
      next_valence_[j] = v;
    }
    activation_.swap(next_activation_);
    valence_.swap(next_valence_);
    report.iterations = it;
    report.max_delta = max_delta;
    if (max_delta < options.tolerance) {
      report.converged = true;
      break;
    }
  }
  return report;
}

Decision decide(const CoherenceNetwork& net, std::optional<int> previous) {
  Decision d;
  d.action_activations = net.action_activations();
  d.action_valences = net.action_valences();
  const auto& acts = d.action_activations;
  const double best = *std::max_element(acts.begin(), acts.end());

  int within = 0;
  for (double x : acts) {
    if (best - x <= kTieEpsilon) ++within;
  }
  d.tied = within >= 2;

  const bool keep_previous = previous && *previous >= 0 && *previous < std::ssize(acts) &&
                             acts[*previous] == best;
  if (keep_previous) {
    d.chosen_action = *previous;
  } else {
    d.chosen_action =
        static_cast<int>(std::find(acts.begin(), acts.end(), best) - acts.begin());
  }
  return d;
}

namespace {

std::string unit_code(UnitId id) {
  switch (id.kind) {
    case UnitKind::Special: return "S";
    case UnitKind::Need: return "N" + std::to_string(id.index);
    case UnitKind::Action: return "A" + std::to_string(id.index);
  }
  return "?";
}

UnitId parse_unit_code(const std::string& code) {
  if (code == "S") return UnitId::special();
  if (code.size() >= 2 && (code[0] == 'N' || code[0] == 'A')) {
    try {
      std::size_t used = 0;
      const int index = std::stoi(code.substr(1), &used);
      if (used == code.size() - 1) {
        return code[0] == 'N' ? UnitId::need(index) : UnitId::action(index);
      }
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::Schema, "snapshot: bad unit code '" + code + "'");
}

const char* rule_name(NetInputRule rule) {
  return rule == NetInputRule::ValenceModulated ? "valence_modulated" : "activation_only";
}

}  // namespace

std::string to_snapshot(const CoherenceNetwork& net) {
  nlohmann::ordered_json j;
  const auto& p = net.params();
  j["needs"] = net.needs();
  j["actions"] = net.actions();
  j["params"] = {{"decay", p.decay},
                 {"act_min", p.act_min},
                 {"act_max", p.act_max},
                 {"initial_state", p.initial_state},
                 {"symmetric_facilitation", p.symmetric_facilitation},
                 {"net_input", rule_name(p.net_input)}};
  auto& units = j["units"] = nlohmann::ordered_json::array();
  for (UnitId u : net.units()) units.push_back(unit_code(u));
  auto& links = j["links"] = nlohmann::ordered_json::array();
  for (const Link& l : net.links()) {
    links.push_back({{"from", unit_code(l.from)},
                     {"to", unit_code(l.to)},
                     {"channel", l.channel == Channel::Activation ? "activation" : "valence"},
                     {"weight", l.weight}});
  }
  j["activation"] = std::vector<double>(net.activations().begin(), net.activations().end());
  j["valence"] = std::vector<double>(net.valences().begin(), net.valences().end());
  return j.dump(2);
}

CoherenceNetwork from_snapshot(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("snapshot: ") + e.what());
  }
  try {
    const int g = j.at("needs").get<int>();
    const int a = j.at("actions").get<int>();
    if (g < 1 || a < 1) throw Error(ErrorCode::DimensionMismatch, "snapshot: empty network");
    NetworkParams p;
    const auto& jp = j.at("params");
    p.decay = jp.at("decay").get<double>();
    p.act_min = jp.at("act_min").get<double>();
    p.act_max = jp.at("act_max").get<double>();
    p.initial_state = jp.at("initial_state").get<double>();
    p.symmetric_facilitation = jp.at("symmetric_facilitation").get<bool>();
    const auto rule = jp.at("net_input").get<std::string>();
    if (rule == "valence_modulated") {
      p.net_input = NetInputRule::ValenceModulated;
    } else if (rule == "activation_only") {
      p.net_input = NetInputRule::ActivationOnly;
    } else {
      throw Error(ErrorCode::Schema, "snapshot: unknown net_input '" + rule + "'");
    }

    DenseMatrix fac(g, a);
    std::vector<double> pri(g), nval(g), aval(a);
    const auto& links = j.at("links");
    if (std::ssize(links) != g * a + 2 * g + a) {
      throw Error(ErrorCode::DimensionMismatch, "snapshot: link count does not match G and A");
    }
    for (const auto& l : links) {
      const UnitId from = parse_unit_code(l.at("from").get<std::string>());
      const UnitId to = parse_unit_code(l.at("to").get<std::string>());
      const auto channel = l.at("channel").get<std::string>();
      const double w = l.at("weight").get<double>();
      auto in_range = [](int i, int n) { return i >= 0 && i < n; };
      if (channel == "activation" && from.kind == UnitKind::Need &&
          to.kind == UnitKind::Action && in_range(from.index, g) && in_range(to.index, a)) {
        fac(from.index, to.index) = w;
      } else if (channel == "activation" && from.kind == UnitKind::Special &&
                 to.kind == UnitKind::Need && in_range(to.index, g)) {
        pri[to.index] = w;
      } else if (channel == "valence" && from.kind == UnitKind::Special &&
                 to.kind == UnitKind::Need && in_range(to.index, g)) {
        nval[to.index] = w;
      } else if (channel == "valence" && from.kind == UnitKind::Special &&
                 to.kind == UnitKind::Action && in_range(to.index, a)) {
        aval[to.index] = w;
      } else {
        throw Error(ErrorCode::Schema, "snapshot: link " + l.dump() + " is not a valid role");
      }
    }
    CoherenceNetwork net = CoherenceNetwork::build(fac, pri, nval, aval, p);
    net.set_state(j.at("activation").get<std::vector<double>>(),
                  j.at("valence").get<std::vector<double>>());
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("snapshot: ") + e.what());
  }
}

}  // namespace innodiff
