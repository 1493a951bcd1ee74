#include "innodiff/population.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "innodiff/error.hpp"
#include "innodiff/rng.hpp"
#include "json_util.hpp"
#include "population_internal.hpp"

namespace innodiff {

using detail::Json;
using detail::OrderedJson;

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ZeroEmissionZone: return "zero_emission_zone";
    case PolicyKind::TaxExemption: return "tax_exemption";
    case PolicyKind::PurchaseSubsidy: return "purchase_subsidy";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : kAllPolicyKinds) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy kind '" + std::string(name) + "'");
}

std::vector<std::string> default_action_labels() {
  return {"ICE car", "EV", "public transport", "bicycle", "car sharing"};
}

std::vector<std::string> default_need_labels() {
  return {"independence", "security",        "comfort",     "cost efficiency",
          "eco-friendliness", "freedom from stress", "unnamed need 7", "unnamed need 8"};
}

namespace {

int find_label(const std::vector<std::string>& labels, std::string_view label,
               std::string_view what) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "no " + std::string(what) + " labelled '" + std::string(label) + "'");
  }
  return static_cast<int>(it - labels.begin());
}

template <typename T>
void check_range(T value, T lo, T hi, std::string_view context, std::string_view field) {
  if (!(value >= lo && value <= hi)) {
    std::ostringstream msg;
    msg << context << "." << field << ": " << value << " outside [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
}

}  // namespace

int Population::need_index(std::string_view label) const {
  return find_label(need_labels, label, "need");
}

int Population::action_index(std::string_view label) const {
  return find_label(action_labels, label, "action");
}

void validate_agent(const Agent& a, std::string_view context) {
  using namespace bounds;
  const auto& d = a.demographics;
  check_range(d.age, kAgeMin, kAgeMax, context, "age");
  check_range(d.gender, 0, 1, context, "gender");
  check_range(d.income, kIncomeMin, kIncomeMax, context, "income");
  check_range(d.education, kEducationMin, kEducationMax, context, "education");
  check_range(d.consumption, kConsumptionMin, kConsumptionMax, context, "consumption");
  check_range(d.modernity, kModernityMin, kModernityMax, context, "modernity");
  check_range(a.x, kCoordMin, kCoordMax, context, "x");
  check_range(a.y, kCoordMin, kCoordMax, context, "y");
  check_range(a.social_radius, kRadiusMin, kRadiusMax, context, "social_radius");
  check_range(a.mobility_type, 1, kMobilityTypes, context, "mobility_type");
  for (PolicyKind k : kAllPolicyKinds) {
    check_range(a.mu(k), 0.0, 1.0, context, "policy_impact." + std::string(to_string(k)));
  }
}

void refresh_preference(Agent& agent, const SettleOptions& settle) {
  agent.mind.reset_state();
  agent.mind.settle(settle);
  agent.current_preference = decide(agent.mind, agent.current_preference).chosen_action;
}

void validate_population(const Population& pop) {
  if (pop.need_labels.empty() || pop.action_labels.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "population needs at least one need and action label");
  }
  for (int i = 0; i < pop.size(); ++i) {
    const Agent& a = pop.agents[i];
    const std::string ctx = "agents[" + std::to_string(i) + "]";
    if (a.id != i) {
      throw Error(ErrorCode::Schema, ctx + ".id: expected dense id " + std::to_string(i));
    }
    if (a.mind.needs() != pop.needs() || a.mind.actions() != pop.actions()) {
      throw Error(ErrorCode::DimensionMismatch, ctx + ": network shape differs from labels");
    }
    validate_agent(a, ctx);
  }
}

// ---------------------------------------------------------------------------
// Population file format

namespace {

constexpr std::string_view kPopulationFormat = "innodiff.population";
constexpr std::string_view kProfilesFormat = "innodiff.profiles";

Agent parse_agent(const Json& j, const std::string& path, int needs, int actions,
                  const LoadOptions& options) {
  using namespace detail;
  expect_object(j, path,
                {"id", "mobility_type", "age", "gender", "income", "education", "consumption",
                 "modernity", "x", "y", "social_radius", "policy_impact", "facilitation",
                 "priorities", "need_valences", "action_valences"});
  Agent a;
  a.id = static_cast<int>(as_integer(require(j, "id", path), join_path(path, "id")));
  a.mobility_type = static_cast<int>(
      as_integer(require(j, "mobility_type", path), join_path(path, "mobility_type")));
  auto integer = [&](std::string_view key) {
    return static_cast<int>(as_integer(require(j, key, path), join_path(path, key)));
  };
  auto number = [&](std::string_view key) {
    return as_number(require(j, key, path), join_path(path, key));
  };
  a.demographics.age = integer("age");
  a.demographics.gender = integer("gender");
  a.demographics.income = integer("income");
  a.demographics.education = integer("education");
  a.demographics.consumption = number("consumption");
  a.demographics.modernity = number("modernity");
  a.x = number("x");
  a.y = number("y");
  a.social_radius = number("social_radius");

  const std::string mu_path = join_path(path, "policy_impact");
  const Json& mu = require(j, "policy_impact", path);
  expect_object(mu, mu_path, {"zero_emission_zone", "tax_exemption", "purchase_subsidy"});
  for (PolicyKind k : kAllPolicyKinds) {
    a.policy_impact[static_cast<int>(k)] =
        as_number(require(mu, to_string(k), mu_path), join_path(mu_path, to_string(k)));
  }
  validate_agent(a, path);

  const std::string fac_path = join_path(path, "facilitation");
  const Json& fac_j = as_array(require(j, "facilitation", path), fac_path);
  if (std::ssize(fac_j) != needs) {
    schema_error(fac_path, "expected " + std::to_string(needs) + " rows (one per need)");
  }
  DenseMatrix fac(needs, actions);
  for (int g = 0; g < needs; ++g) {
    const auto row = number_array(fac_j[g], index_path(fac_path, g), actions);
    for (int c = 0; c < actions; ++c) fac(g, c) = row[c];
  }
  const auto pri =
      number_array(require(j, "priorities", path), join_path(path, "priorities"), needs);
  const auto nval =
      number_array(require(j, "need_valences", path), join_path(path, "need_valences"), needs);
  const auto aval = number_array(require(j, "action_valences", path),
                                 join_path(path, "action_valences"), actions);
  try {
    a.mind = CoherenceNetwork::build(fac, pri, nval, aval, options.network);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
  a.mind.settle(options.settle);
  a.current_preference = decide(a.mind).chosen_action;
  return a;
}

OrderedJson agent_to_json(const Agent& a) {
  const auto& net = a.mind;
  OrderedJson fac = OrderedJson::array();
  for (int g = 0; g < net.needs(); ++g) {
    OrderedJson row = OrderedJson::array();
    for (int c = 0; c < net.actions(); ++c) row.push_back(net.facilitation(g, c));
    fac.push_back(std::move(row));
  }
  std::vector<double> pri, nval, aval;
  for (int g = 0; g < net.needs(); ++g) {
    pri.push_back(net.priority(g));
    nval.push_back(net.need_valence_weight(g));
  }
  for (int c = 0; c < net.actions(); ++c) aval.push_back(net.action_valence_weight(c));

  OrderedJson mu;
  for (PolicyKind k : kAllPolicyKinds) mu[std::string(to_string(k))] = a.mu(k);

  OrderedJson j;
  j["id"] = a.id;
  j["mobility_type"] = a.mobility_type;
  j["age"] = a.demographics.age;
  j["gender"] = a.demographics.gender;
  j["income"] = a.demographics.income;
  j["education"] = a.demographics.education;
  j["consumption"] = a.demographics.consumption;
  j["modernity"] = a.demographics.modernity;
  j["x"] = a.x;
  j["y"] = a.y;
  j["social_radius"] = a.social_radius;
  j["policy_impact"] = std::move(mu);
  j["facilitation"] = std::move(fac);
  j["priorities"] = pri;
  j["need_valences"] = nval;
  j["action_valences"] = aval;
  return j;
}

}  // namespace

Population parse_population(std::string_view text, const LoadOptions& options) {
  using namespace detail;
  const Json j = parse_json(text, "population");
  expect_object(j, "", {"format", "version", "needs", "actions", "need_labels", "action_labels",
                        "agents"});
  if (as_string(require(j, "format", ""), "format") != kPopulationFormat) {
    schema_error("format", "expected \"" + std::string(kPopulationFormat) + "\"");
  }
  if (as_integer(require(j, "version", ""), "version") != 1) {
    schema_error("version", "unsupported version");
  }
  Population pop;
  pop.need_labels = string_array(require(j, "need_labels", ""), "need_labels");
  pop.action_labels = string_array(require(j, "action_labels", ""), "action_labels");
  const auto g = as_integer(require(j, "needs", ""), "needs");
  const auto a = as_integer(require(j, "actions", ""), "actions");
  if (g < 1 || g != pop.needs()) schema_error("needs", "must equal the number of need labels");
  if (a < 1 || a != pop.actions()) schema_error("actions", "must equal the number of action labels");

  const Json& agents = as_array(require(j, "agents", ""), "agents");
  pop.agents.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string path = index_path("agents", i);
    pop.agents.push_back(parse_agent(agents[i], path, pop.needs(), pop.actions(), options));
    if (pop.agents.back().id != static_cast<int>(i)) {
      schema_error(join_path(path, "id"), "ids must be dense 0..N-1 in file order");
    }
  }
  validate_population(pop);
  return pop;
}

Population load_population(const std::filesystem::path& path, const LoadOptions& options) {
  const std::string text = detail::read_file(path);
  try {
    return parse_population(text, options);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_population(const Population& pop) {
  OrderedJson j;
  j["format"] = kPopulationFormat;
  j["version"] = 1;
  j["needs"] = pop.needs();
  j["actions"] = pop.actions();
  j["need_labels"] = pop.need_labels;
  j["action_labels"] = pop.action_labels;
  OrderedJson agents = OrderedJson::array();
  for (const Agent& a : pop.agents) agents.push_back(agent_to_json(a));
  j["agents"] = std::move(agents);
  return j.dump(1) + "\n";
}

void save_population(const Population& pop, const std::filesystem::path& path) {
  detail::write_file(path, format_population(pop));
}

// ---------------------------------------------------------------------------
// Profiles

void validate_profiles(const ProfileSet& p) {
  const int g = p.needs();
  const int a = p.actions();
  if (g < 1 || a < 1) throw Error(ErrorCode::DimensionMismatch, "profiles: empty label lists");
  if (p.types.empty()) throw Error(ErrorCode::InvalidArgument, "profiles: no mobility types");
  if (p.population_size < 4) {
    throw Error(ErrorCode::InvalidArgument, "profiles: population_size must be >= 4");
  }
  const auto& cal = p.calibration;
  if (cal.budget < 0 || !(cal.tolerance > 0.0) || !(cal.goal >= 0.0) ||
      !(cal.min_step > 0.0 && cal.min_step <= cal.initial_step) ||
      !(cal.facilitation_bound > 0.0 && cal.facilitation_bound <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "profiles: calibration needs budget >= 0, tolerance > 0, goal >= 0, "
                "0 < min_step <= initial_step and facilitation_bound in (0, 1]");
  }
  double total = 0.0;
  std::vector<bool> seen(kMobilityTypes + 1, false);
  for (const TypeProfile& t : p.types) {
    const std::string ctx = "type " + std::to_string(t.type_id);
    if (t.type_id < 1 || t.type_id > kMobilityTypes || seen[t.type_id]) {
      throw Error(ErrorCode::InvalidArgument, ctx + ": type ids must be unique within 1..4");
    }
    seen[t.type_id] = true;
    if (!(t.share >= 0.0)) throw Error(ErrorCode::OutOfRange, ctx + ": negative share");
    total += t.share;
    if (std::ssize(t.target_initial_shares) != a) {
      throw Error(ErrorCode::DimensionMismatch, ctx + ": target shares need one entry per action");
    }
    double tsum = 0.0;
    for (double s : t.target_initial_shares) {
      if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::OutOfRange, ctx + ": target share outside [0,1]");
      tsum += s;
    }
    if (std::abs(tsum - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, ctx + ": target shares must sum to 1");
    }
    for (int k = 0; k < kPolicyKinds; ++k) {
      if (!(t.mu_mean[k] >= 0.0 && t.mu_mean[k] <= 1.0) || !(t.mu_sd[k] >= 0.0)) {
        throw Error(ErrorCode::OutOfRange, ctx + ": policy impact mean must be in [0,1], sd >= 0");
      }
    }
    auto check_slots = [&](const std::vector<SlotDistribution>& slots, int n,
                           std::string_view what) {
      if (std::ssize(slots) != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    ctx + ": " + std::string(what) + " needs " + std::to_string(n) + " slots");
      }
      for (const auto& s : slots) {
        if (!(s.mean >= -1.0 && s.mean <= 1.0) || !(s.sd >= 0.0)) {
          throw Error(ErrorCode::OutOfRange,
                      ctx + ": " + std::string(what) + " means must be in [-1,1], sd >= 0");
        }
      }
    };
    check_slots(t.facilitation, g * a, "facilitation");
    check_slots(t.priorities, g, "priorities");
    check_slots(t.need_valences, g, "need_valences");
    check_slots(t.action_valences, a, "action_valences");
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "profiles: type shares must sum to 1 (got " +
                                                std::to_string(total) + ")");
  }
}

namespace {

std::vector<SlotDistribution> parse_slots(const Json& j, const std::string& path,
                                          std::ptrdiff_t n) {
  using namespace detail;
  expect_object(j, path, {"mean", "sd"});
  const std::string mean_path = join_path(path, "mean");
  const std::string sd_path = join_path(path, "sd");
  const Json& mean = require(j, "mean", path);
  const Json& sd = require(j, "sd", path);
  // Matrices are given as arrays of rows; flatten row-major.
  std::vector<double> means, sds;
  auto flatten = [&](const Json& v, const std::string& p, std::vector<double>& out) {
    if (v.is_number()) {
      out.assign(static_cast<std::size_t>(n), as_number(v, p));
      return;
    }
    as_array(v, p);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].is_array()) {
        const auto row = number_array(v[i], index_path(p, i));
        out.insert(out.end(), row.begin(), row.end());
      } else {
        out.push_back(as_number(v[i], index_path(p, i)));
      }
    }
    if (std::ssize(out) != n) {
      schema_error(p, "expected " + std::to_string(n) + " values, got " + std::to_string(out.size()));
    }
  };
  flatten(mean, mean_path, means);
  flatten(sd, sd_path, sds);
  std::vector<SlotDistribution> out(static_cast<std::size_t>(n));
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = {means[i], sds[i]};
  return out;
}

OrderedJson slots_to_json(const std::vector<SlotDistribution>& slots, int cols) {
  auto column = [&](auto field) {
    OrderedJson out = OrderedJson::array();
    if (cols <= 0) {
      for (const auto& s : slots) out.push_back(field(s));
      return out;
    }
    for (std::size_t r = 0; r * cols < slots.size(); ++r) {
      OrderedJson row = OrderedJson::array();
      for (int c = 0; c < cols; ++c) row.push_back(field(slots[r * cols + c]));
      out.push_back(std::move(row));
    }
    return out;
  };
  OrderedJson j;
  j["mean"] = column([](const SlotDistribution& s) { return s.mean; });
  j["sd"] = column([](const SlotDistribution& s) { return s.sd; });
  return j;
}

}  // namespace

ProfileSet parse_profiles(std::string_view text) {
  using namespace detail;
  const Json j = parse_json(text, "profiles");
  expect_object(j, "", {"format", "version", "population_size", "need_labels", "action_labels",
                        "network", "settle", "calibration", "types"});
  if (as_string(require(j, "format", ""), "format") != kProfilesFormat) {
    schema_error("format", "expected \"" + std::string(kProfilesFormat) + "\"");
  }
  if (as_integer(require(j, "version", ""), "version") != 1) {
    schema_error("version", "unsupported version");
  }
  ProfileSet p;
  if (j.contains("population_size")) {
    p.population_size = static_cast<int>(as_integer(j["population_size"], "population_size"));
  }
  p.need_labels = string_array(require(j, "need_labels", ""), "need_labels");
  p.action_labels = string_array(require(j, "action_labels", ""), "action_labels");
  const int g = p.needs();
  const int a = p.actions();

  if (j.contains("network")) {
    const Json& n = j["network"];
    expect_object(n, "network", {"decay", "initial_state", "symmetric_facilitation", "net_input"});
    if (n.contains("decay")) p.network.decay = as_number(n["decay"], "network.decay");
    if (n.contains("initial_state")) {
      p.network.initial_state = as_number(n["initial_state"], "network.initial_state");
    }
    if (n.contains("symmetric_facilitation")) {
      p.network.symmetric_facilitation =
          as_bool(n["symmetric_facilitation"], "network.symmetric_facilitation");
    }
    if (n.contains("net_input")) {
      const auto rule = as_string(n["net_input"], "network.net_input");
      if (rule == "valence_modulated") {
        p.network.net_input = NetInputRule::ValenceModulated;
      } else if (rule == "activation_only") {
        p.network.net_input = NetInputRule::ActivationOnly;
      } else {
        schema_error("network.net_input", "expected valence_modulated or activation_only");
      }
    }
  }
  if (j.contains("settle")) {
    const Json& s = j["settle"];
    expect_object(s, "settle", {"tolerance", "max_iterations"});
    if (s.contains("tolerance")) p.settle.tolerance = as_number(s["tolerance"], "settle.tolerance");
    if (s.contains("max_iterations")) {
      p.settle.max_iterations =
          static_cast<int>(as_integer(s["max_iterations"], "settle.max_iterations"));
    }
  }
  if (j.contains("calibration")) {
    const Json& c = j["calibration"];
    expect_object(c, "calibration", {"budget", "tolerance", "goal", "initial_step", "min_step",
                                      "facilitation_bound"});
    auto& cal = p.calibration;
    if (c.contains("budget")) cal.budget = static_cast<int>(as_integer(c["budget"], "calibration.budget"));
    if (c.contains("tolerance")) cal.tolerance = as_number(c["tolerance"], "calibration.tolerance");
    if (c.contains("goal")) cal.goal = as_number(c["goal"], "calibration.goal");
    if (c.contains("initial_step")) {
      cal.initial_step = as_number(c["initial_step"], "calibration.initial_step");
    }
    if (c.contains("min_step")) cal.min_step = as_number(c["min_step"], "calibration.min_step");
    if (c.contains("facilitation_bound")) {
      cal.facilitation_bound = as_number(c["facilitation_bound"], "calibration.facilitation_bound");
    }
  }

  const Json& types = as_array(require(j, "types", ""), "types");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string path = index_path("types", i);
    const Json& t = types[i];
    expect_object(t, path, {"type_id", "name", "share", "target_initial_shares", "policy_impact",
                            "facilitation", "priorities", "need_valences", "action_valences"});
    TypeProfile tp;
    tp.type_id = static_cast<int>(as_integer(require(t, "type_id", path), join_path(path, "type_id")));
    if (t.contains("name")) tp.name = as_string(t["name"], join_path(path, "name"));
    tp.share = as_number(require(t, "share", path), join_path(path, "share"));
    tp.target_initial_shares = number_array(require(t, "target_initial_shares", path),
                                            join_path(path, "target_initial_shares"), a);
    const std::string mu_path = join_path(path, "policy_impact");
    const Json& mu = require(t, "policy_impact", path);
    expect_object(mu, mu_path, {"zero_emission_zone", "tax_exemption", "purchase_subsidy"});
    for (PolicyKind k : kAllPolicyKinds) {
      const std::string kp = join_path(mu_path, to_string(k));
      const Json& m = require(mu, to_string(k), mu_path);
      expect_object(m, kp, {"mean", "sd"});
      tp.mu_mean[static_cast<int>(k)] = as_number(require(m, "mean", kp), join_path(kp, "mean"));
      tp.mu_sd[static_cast<int>(k)] = as_number(require(m, "sd", kp), join_path(kp, "sd"));
    }
    tp.facilitation = parse_slots(require(t, "facilitation", path), join_path(path, "facilitation"), g * a);
    tp.priorities = parse_slots(require(t, "priorities", path), join_path(path, "priorities"), g);
    tp.need_valences =
        parse_slots(require(t, "need_valences", path), join_path(path, "need_valences"), g);
    tp.action_valences =
        parse_slots(require(t, "action_valences", path), join_path(path, "action_valences"), a);
    p.types.push_back(std::move(tp));
  }
  validate_profiles(p);
  return p;
}

ProfileSet load_profiles(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return parse_profiles(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_profiles(const ProfileSet& p) {
  OrderedJson j;
  j["format"] = kProfilesFormat;
  j["version"] = 1;
  j["population_size"] = p.population_size;
  j["need_labels"] = p.need_labels;
  j["action_labels"] = p.action_labels;
  j["network"] = {{"decay", p.network.decay},
                  {"initial_state", p.network.initial_state},
                  {"symmetric_facilitation", p.network.symmetric_facilitation},
                  {"net_input", p.network.net_input == NetInputRule::ValenceModulated
                                    ? "valence_modulated"
                                    : "activation_only"}};
  j["settle"] = {{"tolerance", p.settle.tolerance}, {"max_iterations", p.settle.max_iterations}};
  j["calibration"] = {{"budget", p.calibration.budget},
                      {"tolerance", p.calibration.tolerance},
                      {"goal", p.calibration.goal},
                      {"initial_step", p.calibration.initial_step},
                      {"min_step", p.calibration.min_step},
                      {"facilitation_bound", p.calibration.facilitation_bound}};
  OrderedJson types = OrderedJson::array();
  for (const TypeProfile& t : p.types) {
    OrderedJson tj;
    tj["type_id"] = t.type_id;
    if (!t.name.empty()) tj["name"] = t.name;
    tj["share"] = t.share;
    tj["target_initial_shares"] = t.target_initial_shares;
    OrderedJson mu;
    for (PolicyKind k : kAllPolicyKinds) {
      mu[std::string(to_string(k))] = {{"mean", t.mu_mean[static_cast<int>(k)]},
                                       {"sd", t.mu_sd[static_cast<int>(k)]}};
    }
    tj["policy_impact"] = std::move(mu);
    tj["facilitation"] = slots_to_json(t.facilitation, p.actions());
    tj["priorities"] = slots_to_json(t.priorities, 0);
    tj["need_valences"] = slots_to_json(t.need_valences, 0);
    tj["action_valences"] = slots_to_json(t.action_valences, 0);
    types.push_back(std::move(tj));
  }
  j["types"] = std::move(types);
  return j.dump(2) + "\n";
}

void save_profiles(const ProfileSet& profiles, const std::filesystem::path& path) {
  detail::write_file(path, format_profiles(profiles));
}

// ---------------------------------------------------------------------------
// Generation

std::vector<int> largest_remainder_counts(int n, std::span<const double> shares) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "largest_remainder_counts: n < 0");
  std::vector<int> counts(shares.size());
  std::vector<double> remainder(shares.size());
  int assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double quota = shares[i] * n;
    counts[i] = static_cast<int>(std::floor(quota));
    remainder[i] = quota - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n && k < order.size(); ++k, ++assigned) {
    ++counts[order[k]];
  }
  return counts;
}

namespace detail {

std::vector<int> assign_types(int n, const ProfileSet& profiles, std::uint64_t seed) {
  std::vector<double> shares;
  for (const auto& t : profiles.types) shares.push_back(t.share);
  const auto counts = largest_remainder_counts(n, shares);
  std::vector<int> sequence;
  sequence.reserve(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < counts.size(); ++k) sequence.insert(sequence.end(), counts[k], static_cast<int>(k));
  Rng rng(derive_stream(seed, "types"));
  const auto perm = rng.permutation(n);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = sequence[perm[i]];
  return out;
}

std::vector<double> draw_mind_noise(int agent_id, int needs, int actions, std::uint64_t seed) {
  Rng rng(derive_stream(seed, "mind", {static_cast<std::uint64_t>(agent_id)}));
  std::vector<double> z(static_cast<std::size_t>(needs * actions + 2 * needs + actions));
  for (double& x : z) x = rng.normal();
  return z;
}

CoherenceNetwork build_mind(const TypeProfile& profile, const std::vector<double>& noise,
                            int needs, int actions, const NetworkParams& params) {
  auto draw = [&](const SlotDistribution& s, std::size_t k) {
    return std::clamp(s.mean + s.sd * noise[k], -1.0, 1.0);
  };
  std::size_t k = 0;
  DenseMatrix fac(needs, actions);
  for (int g = 0; g < needs; ++g) {
    for (int a = 0; a < actions; ++a, ++k) fac(g, a) = draw(profile.facilitation[k], k);
  }
  std::vector<double> pri(needs), nval(needs), aval(actions);
  for (int g = 0; g < needs; ++g, ++k) pri[g] = draw(profile.priorities[g], k);
  for (int g = 0; g < needs; ++g, ++k) nval[g] = draw(profile.need_valences[g], k);
  for (int a = 0; a < actions; ++a, ++k) aval[a] = draw(profile.action_valences[a], k);
  return CoherenceNetwork::build(fac, pri, nval, aval, params);
}

}  // namespace detail

Population generate_population(int n, const ProfileSet& profiles, std::uint64_t seed) {
  validate_profiles(profiles);
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "generate_population: n must be >= 4");
  using namespace bounds;
  const int g = profiles.needs();
  const int a = profiles.actions();

  Population pop;
  pop.need_labels = profiles.need_labels;
  pop.action_labels = profiles.action_labels;
  pop.agents.reserve(static_cast<std::size_t>(n));
  const auto types = detail::assign_types(n, profiles, seed);

  for (int i = 0; i < n; ++i) {
    const TypeProfile& profile = profiles.types[types[i]];
    Rng rng(derive_stream(seed, "agent", {static_cast<std::uint64_t>(i)}));
    Agent agent;
    agent.id = i;
    agent.mobility_type = profile.type_id;
    auto& d = agent.demographics;
    d.age = static_cast<int>(rng.integer(kAgeMin, kAgeMax));
    d.gender = static_cast<int>(rng.integer(0, 1));
    d.income = static_cast<int>(rng.integer(kIncomeMin, kIncomeMax));
    d.education = static_cast<int>(rng.integer(kEducationMin, kEducationMax));
    d.consumption = rng.uniform(kConsumptionMin, kConsumptionMax);
    d.modernity = rng.uniform(kModernityMin, kModernityMax);
    agent.x = rng.uniform(kCoordMin, kCoordMax);
    agent.y = rng.uniform(kCoordMin, kCoordMax);
    agent.social_radius = rng.uniform(kRadiusMin, kRadiusMax);
    for (int k = 0; k < kPolicyKinds; ++k) {
      agent.policy_impact[k] = rng.truncated_normal(profile.mu_mean[k], profile.mu_sd[k], 0.0, 1.0);
    }
    agent.mind = detail::build_mind(profile, detail::draw_mind_noise(i, g, a, seed), g, a,
                                    profiles.network);
    agent.mind.settle(profiles.settle);
    agent.current_preference = decide(agent.mind).chosen_action;
    pop.agents.push_back(std::move(agent));
  }
  return pop;
}

// ---------------------------------------------------------------------------
// Tallies

namespace {

GroupShares tally_group(const Population& pop, int group) {
  GroupShares out;
  out.group = group;
  out.shares.assign(static_cast<std::size_t>(pop.actions()), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(pop.actions()), 0);
  for (const Agent& a : pop.agents) {
    if (group != kAllGroup && a.mobility_type != group) continue;
    ++counts[a.current_preference];
    ++out.count;
  }
  out.empty = out.count == 0;
  if (!out.empty) {
    for (std::size_t k = 0; k < counts.size(); ++k) {
      out.shares[k] = static_cast<double>(counts[k]) / out.count;
    }
  }
  return out;
}

}  // namespace

std::vector<GroupShares> tally_shares(const Population& pop, bool by_type) {
  std::vector<GroupShares> out;
  if (!by_type) {
    out.push_back(tally_group(pop, kAllGroup));
    return out;
  }
  for (int t = 1; t <= kMobilityTypes; ++t) out.push_back(tally_group(pop, t));
  return out;
}

std::vector<GroupShares> tally_all_groups(const Population& pop) {
  std::vector<GroupShares> out;
  out.reserve(kMobilityTypes + 1);
  for (int group = kAllGroup; group <= kMobilityTypes; ++group) {
    out.push_back(tally_group(pop, group));
  }
  return out;
}

}  // namespace innodiff
