#include <algorithm>

#include "innodiff/error.hpp"
#include "innodiff/scenario.hpp"
#include "json_util.hpp"

namespace innodiff {

using namespace detail;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal();
  return (base / path).lexically_normal();
}

FactorTable parse_factor_table(const Json& j, const std::string& path) {
  as_array(j, path);
  if (j.size() != kSenderBands) schema_error(path, "expected 2 rows (positive, negative sender)");
  FactorTable t{};
  for (std::size_t r = 0; r < kSenderBands; ++r) {
    const auto row = number_array(j[r], index_path(path, r), kReceiverBands);
    std::copy(row.begin(), row.end(), t[r].begin());
  }
  return t;
}

OrderedJson factor_table_json(const FactorTable& t) {
  OrderedJson out = OrderedJson::array();
  for (const auto& row : t) out.push_back(std::vector<double>(row.begin(), row.end()));
  return out;
}

void parse_network(const Json& n, const std::string& path, NetworkParams& p) {
  expect_object(n, path, {"decay", "initial_state", "symmetric_facilitation", "net_input"});
  if (n.contains("decay")) p.decay = as_number(n["decay"], join_path(path, "decay"));
  if (n.contains("initial_state")) {
    p.initial_state = as_number(n["initial_state"], join_path(path, "initial_state"));
  }
  if (n.contains("symmetric_facilitation")) {
    p.symmetric_facilitation =
        as_bool(n["symmetric_facilitation"], join_path(path, "symmetric_facilitation"));
  }
  if (n.contains("net_input")) {
    const auto rule = as_string(n["net_input"], join_path(path, "net_input"));
    if (rule == "valence_modulated") {
      p.net_input = NetInputRule::ValenceModulated;
    } else if (rule == "activation_only") {
      p.net_input = NetInputRule::ActivationOnly;
    } else {
      schema_error(join_path(path, "net_input"), "expected valence_modulated or activation_only");
    }
  }
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text, const std::filesystem::path& base_dir) {
  const Json j = parse_json(text, "scenario config");
  expect_object(j, "", {"name", "kind", "steps", "replicates", "seed", "campaign", "population",
                        "mu", "media_rule", "freeze_graph", "graph", "tables", "persuasion",
                        "network", "settle", "focus_mode", "output_dir"});
  ScenarioConfig cfg;
  try {
    cfg.kind = parse_scenario_kind(as_string(require(j, "kind", ""), "kind"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Schema) throw;
    schema_error("kind", e.what());
  }
  cfg.name = j.contains("name") ? as_string(j["name"], "name") : std::string(to_string(cfg.kind));
  if (j.contains("steps")) cfg.steps = static_cast<int>(as_integer(j["steps"], "steps"));
  if (j.contains("replicates")) {
    cfg.replicates = static_cast<int>(as_integer(j["replicates"], "replicates"));
  }
  if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "seed");

  if (j.contains("campaign")) {
    const Json& c = j["campaign"];
    expect_object(c, "campaign", {"reach", "schedule", "schedule_every", "targets"});
    CampaignSpec spec = default_campaign_spec(cfg.kind, cfg.steps);
    if (c.contains("reach")) spec.reach = as_number(c["reach"], "campaign.reach");
    if (c.contains("schedule") && c.contains("schedule_every")) {
      schema_error("campaign", "give either schedule or schedule_every, not both");
    }
    if (c.contains("schedule")) {
      const Json& s = as_array(c["schedule"], "campaign.schedule");
      spec.schedule.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        spec.schedule.push_back(
            static_cast<int>(as_integer(s[i], index_path("campaign.schedule", i))));
      }
    }
    if (c.contains("schedule_every")) {
      const auto every = as_integer(c["schedule_every"], "campaign.schedule_every");
      if (every < 1) schema_error("campaign.schedule_every", "must be >= 1");
      spec.schedule.clear();
      for (long long s = 0; s < cfg.steps; s += every) spec.schedule.push_back(static_cast<int>(s));
    }
    if (c.contains("targets")) {
      const Json& ts = as_array(c["targets"], "campaign.targets");
      spec.targets.clear();
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tp = index_path("campaign.targets", i);
        expect_object(ts[i], tp, {"need", "action", "base_delta"});
        CampaignSpec::Target t;
        t.need = as_string(require(ts[i], "need", tp), join_path(tp, "need"));
        t.action = as_string(require(ts[i], "action", tp), join_path(tp, "action"));
        if (ts[i].contains("base_delta")) {
          t.base_delta = as_number(ts[i]["base_delta"], join_path(tp, "base_delta"));
        }
        spec.targets.push_back(std::move(t));
      }
    }
    cfg.campaign = std::move(spec);
  } else if (cfg.kind != ScenarioKind::Reference) {
    cfg.campaign = default_campaign_spec(cfg.kind, cfg.steps);
  }

  const Json& pop = require(j, "population", "");
  expect_object(pop, "population", {"file", "generator"});
  if (pop.contains("file")) {
    cfg.population.file = resolve(base_dir, as_string(pop["file"], "population.file"));
  }
  if (pop.contains("generator")) {
    const Json& g = pop["generator"];
    const std::string gp = "population.generator";
    expect_object(g, gp, {"profiles", "size", "seed", "regenerate_per_replicate"});
    GeneratorSpec spec;
    spec.profiles = resolve(base_dir, as_string(require(g, "profiles", gp), gp + ".profiles"));
    if (g.contains("size")) spec.size = static_cast<int>(as_integer(g["size"], gp + ".size"));
    if (g.contains("seed")) spec.seed = as_seed(g["seed"], gp + ".seed");
    if (g.contains("regenerate_per_replicate")) {
      spec.regenerate_per_replicate =
          as_bool(g["regenerate_per_replicate"], gp + ".regenerate_per_replicate");
    }
    cfg.population.generator = std::move(spec);
  }

  if (j.contains("mu")) {
    const Json& mu = j["mu"];
    if (mu.is_string()) {
      try {
        cfg.mu = MuMode::parse(mu.get<std::string>());
      } catch (const Error& e) {
        schema_error("mu", e.what());
      }
    } else {
      const double v = as_number(mu, "mu");
      if (!(v >= 0.0 && v <= 1.0)) schema_error("mu", "fixed policy impact must be in [0, 1]");
      cfg.mu = MuMode::constant(v);
    }
  }
  if (j.contains("media_rule")) {
    const auto rule = as_string(j["media_rule"], "media_rule");
    if (rule == "additive") {
      cfg.media_rule = MediaRule::Additive;
    } else if (rule == "multiplicative") {
      cfg.media_rule = MediaRule::Multiplicative;
    } else {
      schema_error("media_rule", "expected additive or multiplicative");
    }
  }
  if (j.contains("freeze_graph")) cfg.freeze_graph = as_bool(j["freeze_graph"], "freeze_graph");

  if (j.contains("graph")) {
    const Json& g = j["graph"];
    expect_object(g, "graph", {"reach_rule", "radius_scale", "max_delta_scope"});
    if (g.contains("reach_rule")) {
      const auto r = as_string(g["reach_rule"], "graph.reach_rule");
      if (r == "either") {
        cfg.graph.reach = ReachRule::Either;
      } else if (r == "both") {
        cfg.graph.reach = ReachRule::Both;
      } else {
        schema_error("graph.reach_rule", "expected either or both");
      }
    }
    if (g.contains("radius_scale")) {
      cfg.graph.radius_scale = as_number(g["radius_scale"], "graph.radius_scale");
    }
    if (g.contains("max_delta_scope")) {
      const auto s = as_string(g["max_delta_scope"], "graph.max_delta_scope");
      if (s == "global") {
        cfg.graph.max_delta_scope = MaxDeltaScope::Global;
      } else if (s == "per_reach") {
        cfg.graph.max_delta_scope = MaxDeltaScope::PerReach;
      } else {
        schema_error("graph.max_delta_scope", "expected global or per_reach");
      }
    }
  }

  if (j.contains("tables")) {
    const Json& t = j["tables"];
    expect_object(t, "tables", {"pi", "alpha", "fact_threshold", "emotion_threshold", "inner_cut",
                                "outer_cut"});
    auto& tables = cfg.tables;
    if (t.contains("pi")) tables.pi = parse_factor_table(t["pi"], "tables.pi");
    if (t.contains("alpha")) tables.alpha = parse_factor_table(t["alpha"], "tables.alpha");
    if (t.contains("fact_threshold")) {
      tables.fact_threshold = as_number(t["fact_threshold"], "tables.fact_threshold");
    }
    if (t.contains("emotion_threshold")) {
      tables.emotion_threshold = as_number(t["emotion_threshold"], "tables.emotion_threshold");
    }
    if (t.contains("inner_cut")) tables.inner_cut = as_number(t["inner_cut"], "tables.inner_cut");
    if (t.contains("outer_cut")) tables.outer_cut = as_number(t["outer_cut"], "tables.outer_cut");
    if (!(tables.inner_cut > 0.0 && tables.inner_cut < tables.outer_cut)) {
      schema_error("tables", "need 0 < inner_cut < outer_cut");
    }
  }

  if (j.contains("persuasion")) {
    const Json& p = j["persuasion"];
    expect_object(p, "persuasion", {"rule", "weight_floor"});
    if (p.contains("rule")) {
      const auto r = as_string(p["rule"], "persuasion.rule");
      if (r == "directional") {
        cfg.persuasion.rule = UpdateRule::Directional;
      } else if (r == "literal") {
        cfg.persuasion.rule = UpdateRule::Literal;
      } else {
        schema_error("persuasion.rule", "expected directional or literal");
      }
    }
    if (p.contains("weight_floor")) {
      cfg.persuasion.weight_floor = as_number(p["weight_floor"], "persuasion.weight_floor");
    }
  }

  if (j.contains("network")) parse_network(j["network"], "network", cfg.network);
  if (j.contains("settle")) {
    const Json& s = j["settle"];
    expect_object(s, "settle", {"tolerance", "max_iterations"});
    if (s.contains("tolerance")) cfg.settle.tolerance = as_number(s["tolerance"], "settle.tolerance");
    if (s.contains("max_iterations")) {
      cfg.settle.max_iterations =
          static_cast<int>(as_integer(s["max_iterations"], "settle.max_iterations"));
    }
  }
  if (j.contains("focus_mode")) cfg.focus_mode = as_string(j["focus_mode"], "focus_mode");
  if (j.contains("output_dir")) {
    cfg.output_dir = resolve(base_dir, as_string(j["output_dir"], "output_dir"));
  }

  try {
    validate_config(cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, std::string("scenario config: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_scenario_config(text, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_scenario_config(const ScenarioConfig& cfg) {
  OrderedJson j;
  j["name"] = cfg.name;
  j["kind"] = to_string(cfg.kind);
  j["steps"] = cfg.steps;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  if (cfg.campaign) {
    OrderedJson c;
    c["reach"] = cfg.campaign->reach;
    c["schedule"] = cfg.campaign->schedule;
    OrderedJson targets = OrderedJson::array();
    for (const auto& t : cfg.campaign->targets) {
      targets.push_back({{"need", t.need}, {"action", t.action}, {"base_delta", t.base_delta}});
    }
    c["targets"] = std::move(targets);
    j["campaign"] = std::move(c);
  }
  OrderedJson pop;
  if (cfg.population.file) pop["file"] = cfg.population.file->generic_string();
  if (cfg.population.generator) {
    const auto& g = *cfg.population.generator;
    OrderedJson gj;
    gj["profiles"] = g.profiles.generic_string();
    gj["size"] = g.size;
    if (g.seed) gj["seed"] = *g.seed;
    gj["regenerate_per_replicate"] = g.regenerate_per_replicate;
    pop["generator"] = std::move(gj);
  }
  j["population"] = std::move(pop);
  if (cfg.mu.fixed) {
    j["mu"] = *cfg.mu.fixed;
  } else {
    j["mu"] = "empirical";
  }
  j["media_rule"] = cfg.media_rule == MediaRule::Additive ? "additive" : "multiplicative";
  j["freeze_graph"] = cfg.freeze_graph;
  j["graph"] = {{"reach_rule", cfg.graph.reach == ReachRule::Either ? "either" : "both"},
                {"radius_scale", cfg.graph.radius_scale},
                {"max_delta_scope",
                 cfg.graph.max_delta_scope == MaxDeltaScope::Global ? "global" : "per_reach"}};
  j["tables"] = {{"pi", factor_table_json(cfg.tables.pi)},
                 {"alpha", factor_table_json(cfg.tables.alpha)},
                 {"fact_threshold", cfg.tables.fact_threshold},
                 {"emotion_threshold", cfg.tables.emotion_threshold},
                 {"inner_cut", cfg.tables.inner_cut},
                 {"outer_cut", cfg.tables.outer_cut}};
  j["persuasion"] = {
      {"rule", cfg.persuasion.rule == UpdateRule::Directional ? "directional" : "literal"},
      {"weight_floor", cfg.persuasion.weight_floor}};
  j["network"] = {{"decay", cfg.network.decay},
                  {"initial_state", cfg.network.initial_state},
                  {"symmetric_facilitation", cfg.network.symmetric_facilitation},
                  {"net_input", cfg.network.net_input == NetInputRule::ValenceModulated
                                    ? "valence_modulated"
                                    : "activation_only"}};
  j["settle"] = {{"tolerance", cfg.settle.tolerance},
                 {"max_iterations", cfg.settle.max_iterations}};
  j["focus_mode"] = cfg.focus_mode;
  if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir.generic_string();
  return j.dump(2) + "\n";
}

}  // namespace innodiff
