#pragma once

// Randomized property checks, one family per module. Each draws `cases`
// independent cases from a fixed seed and reports the first counterexample.
// The unit tests and the acceptance binary both run them.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "innodiff/error.hpp"
#include "innodiff/influence.hpp"
#include "innodiff/scenario.hpp"
#include "innodiff/socialnet.hpp"
#include "support.hpp"

namespace innodiff::testing {

struct PropertyOutcome {
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0; }
  void fail(int k, const std::string& what) {
    if (failures++ == 0) first_failure = "case " + std::to_string(k) + ": " + what;
  }
};

inline Demographics random_demographics(Rng& rng) {
  Demographics d;
  d.age = static_cast<int>(rng.integer(bounds::kAgeMin, bounds::kAgeMax));
  d.gender = static_cast<int>(rng.integer(0, 1));
  d.income = static_cast<int>(rng.integer(bounds::kIncomeMin, bounds::kIncomeMax));
  d.education = static_cast<int>(rng.integer(bounds::kEducationMin, bounds::kEducationMax));
  d.consumption = rng.uniform(bounds::kConsumptionMin, bounds::kConsumptionMax);
  d.modernity = rng.uniform(bounds::kModernityMin, bounds::kModernityMax);
  return d;
}

inline Agent random_agent(Rng& rng, int id, int needs = 8, int actions = 5, double scale = 0.5) {
  Agent a = make_agent(id, build(random_weights(rng, needs, actions, scale)),
                       static_cast<int>(rng.integer(1, kMobilityTypes)));
  a.demographics = random_demographics(rng);
  a.x = rng.uniform(bounds::kCoordMin, bounds::kCoordMax);
  a.y = rng.uniform(bounds::kCoordMin, bounds::kCoordMax);
  a.social_radius = rng.uniform();
  for (auto& m : a.policy_impact) m = rng.uniform();
  return a;
}

/// Settled states match the dense oracle within `tol` for random networks
/// with up to 3 needs and 2 actions, and stay inside [-1, 1].
inline PropertyOutcome coherence_property(int cases, std::uint64_t seed, double tol = 1e-9) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    const int g = static_cast<int>(rng.integer(1, 3));
    const int a = static_cast<int>(rng.integer(1, 2));
    const auto w = random_weights(rng, g, a);
    auto net = build(w);
    const auto report = net.settle();
    OracleNet oracle(w.fac, w.pri, w.nval, w.aval);
    oracle.settle();
    double worst = 0.0;
    for (int s = 0; s < net.unit_count(); ++s) {
      worst = std::max({worst, std::fabs(net.activations()[s] - oracle.a[s]),
                        std::fabs(net.valences()[s] - oracle.v[s])});
      if (std::fabs(net.activations()[s]) > 1.0 || std::fabs(net.valences()[s]) > 1.0) {
        out.fail(k, "state outside [-1, 1]");
      }
    }
    if (worst > tol) {
      out.fail(k, "G=" + std::to_string(g) + " A=" + std::to_string(a) +
                      " differs from oracle by " + std::to_string(worst));
    } else if (report.iterations != oracle.iterations) {
      out.fail(k, "iteration count " + std::to_string(report.iterations) + " vs oracle " +
                      std::to_string(oracle.iterations));
    }
  }
  return out;
}

/// Largest-remainder counts sum to n and stay within one of the quota; a
/// random population survives a format/parse round trip unchanged.
inline PropertyOutcome population_property(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    const int n = static_cast<int>(rng.integer(0, 2000));
    std::vector<double> shares(static_cast<std::size_t>(rng.integer(1, 6)));
    double total = 0.0;
    for (auto& s : shares) total += (s = rng.uniform() + 1e-3);
    for (auto& s : shares) s /= total;
    const auto counts = largest_remainder_counts(n, shares);
    int sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      sum += counts[i];
      if (std::fabs(counts[i] - shares[i] * n) >= 1.0 + 1e-9) out.fail(k, "count off quota");
    }
    if (sum != n) out.fail(k, "counts sum to " + std::to_string(sum));

    std::vector<Agent> agents;
    const int size = static_cast<int>(rng.integer(1, 3));
    for (int i = 0; i < size; ++i) agents.push_back(random_agent(rng, i));
    const Population pop = make_population(std::move(agents));
    const Population back = parse_population(format_population(pop));
    if (!(back == pop)) out.fail(k, "population round trip changed the data");
  }
  return out;
}

/// Dissimilarity is symmetric, zero on the diagonal and never exceeds the
/// population maximum; tie weights lie in [0, 1]; graphs built from random
/// edge sets have symmetric adjacency.
inline PropertyOutcome socialnet_property(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  for (int k = 0; k < cases; ++k, ++out.cases) {
    const int n = static_cast<int>(rng.integer(2, 6));
    std::vector<Agent> agents;
    for (int i = 0; i < n; ++i) {
      Agent a;
      a.id = i;
      a.demographics = random_demographics(rng);
      agents.push_back(std::move(a));
    }
    Population pop;
    pop.agents = std::move(agents);
    const auto space = SimilaritySpace::build(pop);
    for (int i = 0; i < n; ++i) {
      if (similarity(space, pop.agents[i], pop.agents[i]) != 0.0) out.fail(k, "self distance");
      for (int j = i + 1; j < n; ++j) {
        const double d = similarity(space, pop.agents[i], pop.agents[j]);
        if (d != similarity(space, pop.agents[j], pop.agents[i])) out.fail(k, "asymmetric");
        if (d > space.max_delta + 1e-12) out.fail(k, "distance above max_delta");
        const double t = tie_weight(space, std::min(d, space.max_delta));
        if (!(t >= 0.0 && t <= 1.0)) out.fail(k, "tie weight outside [0, 1]");
      }
    }

    std::vector<SocialGraph::Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.uniform() < 0.5) {
          edges.emplace_back(rng.uniform() < 0.5 ? std::pair{i, j} : std::pair{j, i});
        }
      }
    }
    const std::size_t m = edges.size();
    const SocialGraph graph(n, edges);
    if (graph.edge_count() != m) out.fail(k, "edge count");
    std::size_t degree_sum = 0;
    for (int i = 0; i < n; ++i) {
      for (int j : graph.neighbors(i)) {
        ++degree_sum;
        if (!graph.connected(j, i)) out.fail(k, "adjacency not symmetric");
      }
    }
    if (degree_sum != 2 * m) out.fail(k, "degree sum");
  }
  return out;
}

/// Means-ends updates move the weight in the direction of the factor by
/// max(|w|, floor)/100 * |factor| (up to the clamp) and never leave [-1, 1];
/// contagion lands at the settled valence plus the same nudge.
inline PropertyOutcome influence_property(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  const auto tables = InfluenceTables::defaults();
  const PersuasionOptions opts;
  for (int k = 0; k < cases; ++k, ++out.cases) {
    const double sender = rng.uniform(-1.0, 1.0);
    const double receiver = rng.uniform(-1.0, 1.0);
    const auto pi = lookup_pi(tables, sender, receiver);
    if (std::fabs(sender) > tables.fact_threshold) {
      if (!pi) {
        out.fail(k, "no factor above threshold");
        continue;
      }
      const int row = sender > 0.0 ? 0 : 1;
      if (*pi != tables.pi[row][receiver_band(receiver, tables)]) out.fail(k, "wrong cell");
      const double next = apply_means_ends(receiver, *pi, opts);
      const double expect =
          std::clamp(receiver + std::max(std::fabs(receiver), opts.weight_floor) / 100.0 * *pi,
                     -1.0, 1.0);
      if (std::fabs(next - expect) > 1e-15) out.fail(k, "means-ends update");
      if (next < -1.0 || next > 1.0) out.fail(k, "weight left [-1, 1]");
    } else if (pi) {
      out.fail(k, "factor below threshold");
    }

    const double valence = rng.uniform(-1.0, 1.0);
    const double link = rng.uniform(-1.0, 1.0);
    const auto alpha = lookup_alpha(tables, sender, valence);
    if (alpha) {
      const double next = apply_contagion(link, valence, *alpha, opts);
      const double expect = std::clamp(
          valence + std::max(std::fabs(valence), opts.weight_floor) / 100.0 * *alpha, -1.0, 1.0);
      if (std::fabs(next - expect) > 1e-15) out.fail(k, "contagion update");
    }
  }
  return out;
}

/// Random averaged series survive a CSV round trip bit for bit, and group
/// tallies of random populations sum to one.
inline PropertyOutcome scenario_property(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  const std::vector<std::string> modes = {"ICE car", "EV", "public transport", "bicycle",
                                          "car sharing"};
  for (int k = 0; k < cases; ++k, ++out.cases) {
    AveragedSeries series;
    series.mode_labels = modes;
    const int steps = static_cast<int>(rng.integer(1, 4));
    for (int t = 0; t < steps; ++t) {
      StepShares step(kMobilityTypes + 1);
      for (int g = 0; g <= kMobilityTypes; ++g) {
        step[g].group = g;
        step[g].empty = g != kAllGroup && rng.uniform() < 0.2;
        step[g].shares.assign(modes.size(), 0.0);
        if (!step[g].empty) {
          for (auto& s : step[g].shares) s = rng.uniform();
        }
      }
      series.steps.push_back(std::move(step));
    }
    const auto back = parse_averaged_csv(format_averaged_csv(series));
    bool same = back.mode_labels == series.mode_labels && back.steps.size() == series.steps.size();
    for (std::size_t t = 0; same && t < back.steps.size(); ++t) {
      for (int g = 0; g <= kMobilityTypes; ++g) {
        same = same && back.steps[t][g].empty == series.steps[t][g].empty &&
               back.steps[t][g].shares == series.steps[t][g].shares;
      }
    }
    if (!same) out.fail(k, "averaged CSV round trip");

    Population pop = make_population({});
    const int n = static_cast<int>(rng.integer(1, 12));
    for (int i = 0; i < n; ++i) {
      Agent a;
      a.id = i;
      a.mobility_type = static_cast<int>(rng.integer(1, kMobilityTypes));
      a.current_preference = static_cast<int>(rng.integer(0, 4));
      pop.agents.push_back(std::move(a));
    }
    for (const auto& gs : tally_all_groups(pop)) {
      if (gs.empty) continue;
      double sum = 0.0;
      for (double s : gs.shares) sum += s;
      if (std::fabs(sum - 1.0) > 1e-12) out.fail(k, "tally does not sum to 1");
    }
  }
  return out;
}

/// Any unknown flag on any verb is rejected with the usage exit code and a
/// single machine-parsable error line.
inline PropertyOutcome cli_property(int cases, std::uint64_t seed) {
  PropertyOutcome out;
  Rng rng(seed);
  const std::vector<std::string> verbs = {"generate", "calibrate", "run", "sweep", "compare",
                                          "validate-tables"};
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz-";
  for (int k = 0; k < cases; ++k, ++out.cases) {
    std::string flag = "--x";
    const int len = static_cast<int>(rng.integer(1, 10));
    for (int i = 0; i < len; ++i) flag += alphabet[rng.below(alphabet.size())];
    std::vector<std::string> args = {verbs[rng.below(verbs.size())], flag};
    if (rng.uniform() < 0.5) args.push_back("1");
    std::ostringstream o, e;
    const int code = cli::run(args, o, e, std::nullopt);
    const std::string err = e.str();
    if (code != cli::kExitUsage) out.fail(k, flag + " gave exit " + std::to_string(code));
    if (err.rfind("error: ", 0) != 0 || err.find('\n') != err.size() - 1) {
      out.fail(k, flag + " error line malformed: " + err);
    }

    const double mu = static_cast<double>(rng.integer(0, 1000)) / 1000.0;
    if (MuMode::parse(MuMode::constant(mu).label()) != MuMode::constant(mu)) {
      out.fail(k, "mu label round trip");
    }
  }
  return out;
}

/// Five agents at one location with distinct demographics, all in reach.
inline Population five_agent_population() {
  const Demographics demo[] = {{18, 0, 1, 1, 1.0, 1.0},
                               {30, 1, 3, 2, 2.0, 1.5},
                               {45, 0, 5, 4, 3.0, 2.5},
                               {69, 1, 7, 5, 3.6, 4.0},
                               {52, 1, 2, 3, 1.5, 3.0}};
  Population pop;
  for (int i = 0; i < 5; ++i) {
    Agent a;
    a.id = i;
    a.demographics = demo[i];
    a.x = a.y = 0.5;
    a.social_radius = 0.1;
    pop.agents.push_back(std::move(a));
  }
  return pop;
}

struct HomophilyCheck {
  double worst_gap = 0.0;
  int builds = 0;
};

/// Builds the graph `builds` times with different seeds and compares each
/// pair's tie frequency with its expected tie weight.
inline HomophilyCheck homophily_check(const Population& pop, int builds) {
  const auto space = SimilaritySpace::build(pop);
  const int n = pop.size();
  std::vector<std::vector<int>> ties(n, std::vector<int>(n, 0));
  for (int b = 0; b < builds; ++b) {
    const auto graph = build_graph(pop, static_cast<std::uint64_t>(b) + 1);
    for (const auto& [i, j] : graph.edges()) ++ties[i][j];
  }
  HomophilyCheck out;
  out.builds = builds;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double delta = 1.0 - similarity(space, pop.agents[i], pop.agents[j]) / space.max_delta;
      out.worst_gap = std::max(out.worst_gap, std::fabs(ties[i][j] / double(builds) - delta));
    }
  }
  return out;
}

}  // namespace innodiff::testing
