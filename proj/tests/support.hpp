#pragma once

// Helpers shared by the test binaries: a straight-line settling oracle and
// small hand-built agents and populations.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "innodiff/coherence.hpp"
#include "innodiff/population.hpp"
#include "innodiff/rng.hpp"

namespace innodiff::testing {

/// Dense brute-force settling of the decision network, written from the
/// update equations without sharing code with the library. Unit 0 is the
/// clamped special unit, then needs, then actions.
struct OracleNet {
  int needs = 0;
  int actions = 0;
  // act[i][j]: weight of the activation-channel link i -> j (0 when absent).
  std::vector<std::vector<double>> act;
  // val[i][j]: weight of the valence-channel link i -> j.
  std::vector<std::vector<double>> val;
  std::vector<double> a;
  std::vector<double> v;
  double decay = 0.05;
  bool modulated = true;
  int iterations = 0;

  OracleNet(const DenseMatrix& fac, const std::vector<double>& pri,
            const std::vector<double>& nval, const std::vector<double>& aval, double init = 0.01)
      : needs(fac.rows()), actions(fac.cols()) {
    const int n = 1 + needs + actions;
    act.assign(n, std::vector<double>(n, 0.0));
    val.assign(n, std::vector<double>(n, 0.0));
    for (int g = 0; g < needs; ++g) {
      for (int k = 0; k < actions; ++k) {
        act[1 + g][1 + needs + k] = fac(g, k);
        act[1 + needs + k][1 + g] = fac(g, k);
      }
      act[0][1 + g] = pri[g];
      val[0][1 + g] = nval[g];
    }
    for (int k = 0; k < actions; ++k) val[0][1 + needs + k] = aval[k];
    a.assign(n, init);
    v.assign(n, init);
    a[0] = 1.0;
    v[0] = 1.0;
  }

  static double update(double x, double net, double d) {
    double y;
    if (net > 0.0) {
      y = x * (1.0 - d) + net * (1.0 - x);
    } else {
      y = x * (1.0 - d) + net * (x + 1.0);
    }
    if (y > 1.0) y = 1.0;
    if (y < -1.0) y = -1.0;
    return y;
  }

  void settle(double tolerance = 1e-4, int max_iterations = 200) {
    const int n = 1 + needs + actions;
    for (iterations = 1; iterations <= max_iterations; ++iterations) {
      std::vector<double> na(a), nv(v);
      double biggest = 0.0;
      for (int j = 1; j < n; ++j) {
        double s1 = 0.0, s2 = 0.0, sv = 0.0;
        for (int i = 0; i < n; ++i) {
          s1 += act[i][j] * a[i];
          s2 += act[i][j] * v[i] * a[i];
          sv += val[i][j] * v[i] * a[i];
        }
        na[j] = update(a[j], modulated ? s1 + s2 : s1, decay);
        nv[j] = update(v[j], sv, decay);
        biggest = std::max({biggest, std::fabs(na[j] - a[j]), std::fabs(nv[j] - v[j])});
      }
      a = na;
      v = nv;
      if (biggest < tolerance) return;
    }
    iterations = max_iterations;
  }
};

struct RandomWeights {
  DenseMatrix fac;
  std::vector<double> pri, nval, aval;
};

inline RandomWeights random_weights(Rng& rng, int g, int a, double scale = 1.0) {
  RandomWeights w{DenseMatrix(g, a), {}, {}, {}};
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < a; ++j) w.fac(i, j) = scale * rng.uniform(-1.0, 1.0);
  }
  for (int i = 0; i < g; ++i) w.pri.push_back(scale * rng.uniform(-1.0, 1.0));
  for (int i = 0; i < g; ++i) w.nval.push_back(scale * rng.uniform(-1.0, 1.0));
  for (int j = 0; j < a; ++j) w.aval.push_back(scale * rng.uniform(-1.0, 1.0));
  return w;
}

inline CoherenceNetwork build(const RandomWeights& w, const NetworkParams& params = {}) {
  return CoherenceNetwork::build(w.fac, w.pri, w.nval, w.aval, params);
}

/// An agent with valid demographics and the given mind, already settled.
inline Agent make_agent(int id, CoherenceNetwork mind, int type = 1) {
  Agent agent;
  agent.id = id;
  agent.mind = std::move(mind);
  agent.mobility_type = type;
  agent.demographics = {30, 0, 3, 3, 2.0, 2.0};
  agent.x = 0.5;
  agent.y = 0.5;
  agent.social_radius = 0.5;
  agent.policy_impact = {0.5, 0.5, 0.5};
  agent.mind.settle();
  agent.current_preference = decide(agent.mind).chosen_action;
  return agent;
}

/// Eight needs, five actions, with the default labels.
inline Population make_population(std::vector<Agent> agents) {
  Population pop;
  pop.need_labels = default_need_labels();
  pop.action_labels = default_action_labels();
  pop.agents = std::move(agents);
  return pop;
}

/// A profile set with four types and moderate random means; small enough
/// populations keep tests fast.
inline ProfileSet small_profiles(int population_size = 80, std::uint64_t seed = 5) {
  ProfileSet p;
  p.population_size = population_size;
  p.need_labels = default_need_labels();
  p.action_labels = default_action_labels();
  Rng rng(seed);
  const double shares[] = {0.15, 0.16, 0.34, 0.35};
  for (int t = 1; t <= kMobilityTypes; ++t) {
    TypeProfile tp;
    tp.type_id = t;
    tp.share = shares[t - 1];
    tp.target_initial_shares = {0.2, 0.2, 0.2, 0.2, 0.2};
    tp.mu_mean = {0.5, 0.6, 0.7};
    tp.mu_sd = {0.2, 0.2, 0.2};
    for (int k = 0; k < p.needs() * p.actions(); ++k) {
      tp.facilitation.push_back({rng.uniform(-0.15, 0.15), 0.05});
    }
    for (int k = 0; k < p.needs(); ++k) tp.priorities.push_back({rng.uniform(0.1, 0.5), 0.1});
    for (int k = 0; k < p.needs(); ++k) tp.need_valences.push_back({0.1, 0.1});
    for (int k = 0; k < p.actions(); ++k) {
      tp.action_valences.push_back({rng.uniform(-0.2, 0.2), 0.1});
    }
    p.types.push_back(std::move(tp));
  }
  p.calibration.facilitation_bound = 0.2;
  return p;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("innodiff_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace innodiff::testing
