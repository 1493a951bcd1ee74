#include <algorithm>
#include <cmath>

#include "innodiff/error.hpp"
#include "innodiff/population.hpp"
#include "innodiff/rng.hpp"
#include "population_internal.hpp"

namespace innodiff {

namespace {

struct Score {
  double max_dev = 0.0;
  double sum_dev = 0.0;

  bool better_than(const Score& o) const {
    if (max_dev != o.max_dev) return max_dev < o.max_dev;
    return sum_dev < o.sum_dev;
  }
};

// Evaluates one type's profile on that type's agents only. Agents of other
// types draw from their own streams, so types calibrate independently.
class TypeEvaluator {
 public:
  TypeEvaluator(const ProfileSet& profiles, std::vector<int> members, std::uint64_t seed)
      : profiles_(profiles), members_(std::move(members)) {
    noise_.reserve(members_.size());
    for (int id : members_) {
      noise_.push_back(detail::draw_mind_noise(id, profiles.needs(), profiles.actions(), seed));
    }
  }

  std::vector<double> shares(const TypeProfile& profile) const {
    const int a = profiles_.actions();
    std::vector<double> out(static_cast<std::size_t>(a), 0.0);
    if (members_.empty()) return out;
    for (const auto& z : noise_) {
      CoherenceNetwork net =
          detail::build_mind(profile, z, profiles_.needs(), a, profiles_.network);
      net.settle(profiles_.settle);
      out[decide(net).chosen_action] += 1.0;
    }
    for (double& s : out) s /= static_cast<double>(members_.size());
    return out;
  }

  bool empty() const { return members_.empty(); }

 private:
  const ProfileSet& profiles_;
  std::vector<int> members_;
  std::vector<std::vector<double>> noise_;
};

Score score(const std::vector<double>& shares, const std::vector<double>& target) {
  Score s;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    const double dev = std::abs(shares[k] - target[k]);
    s.max_dev = std::max(s.max_dev, dev);
    s.sum_dev += dev;
  }
  return s;
}

void shift(SlotDistribution& slot, double delta, double bound) {
  slot.mean = std::clamp(slot.mean + delta, -bound, bound);
}

}  // namespace

CalibrationResult calibrate_profiles(const ProfileSet& profiles,
                                     const std::vector<std::vector<double>>& targets,
                                     std::uint64_t seed, int budget) {
  validate_profiles(profiles);
  if (targets.size() != profiles.types.size()) {
    throw Error(ErrorCode::DimensionMismatch, "calibrate: need one target vector per type");
  }
  for (const auto& t : targets) {
    if (std::ssize(t) != profiles.actions()) {
      throw Error(ErrorCode::DimensionMismatch, "calibrate: target length must equal action count");
    }
    double sum = 0.0;
    for (double x : t) {
      if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::OutOfRange, "calibrate: target share outside [0,1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "calibrate: target shares must sum to 1");
    }
  }
  if (budget < 0) throw Error(ErrorCode::InvalidArgument, "calibrate: negative budget");

  const auto& settings = profiles.calibration;
  const int g = profiles.needs();
  const int a = profiles.actions();
  const auto assignment =
      detail::assign_types(profiles.population_size, profiles, seed);

  CalibrationResult result;
  result.profiles = profiles;

  for (std::size_t k = 0; k < profiles.types.size(); ++k) {
    TypeProfile current = profiles.types[k];
    current.target_initial_shares = targets[k];
    std::vector<int> members;
    for (int i = 0; i < std::ssize(assignment); ++i) {
      if (assignment[i] == static_cast<int>(k)) members.push_back(i);
    }
    const TypeEvaluator eval(profiles, std::move(members), seed);
    auto shares = eval.shares(current);
    Score best = eval.empty() ? Score{} : score(shares, targets[k]);

    Rng rng(derive_stream(seed, "calibrate", {static_cast<std::uint64_t>(current.type_id)}));
    double step = settings.initial_step;
    int stall = 0;
    int it = 0;
    for (; it < budget && !eval.empty() && best.max_dev > settings.goal; ++it) {
      TypeProfile candidate = current;
      int action = 0;
      double direction = 1.0;
      if (rng.uniform() < 0.7) {
        double worst = -1.0;
        for (int c = 0; c < a; ++c) {
          const double dev = std::abs(shares[c] - targets[k][c]);
          if (dev > worst) {
            worst = dev;
            action = c;
          }
        }
        direction = shares[action] > targets[k][action] ? -1.0 : 1.0;
      } else {
        action = static_cast<int>(rng.below(static_cast<std::uint64_t>(a)));
        direction = rng.uniform() < 0.5 ? -1.0 : 1.0;
      }
      const double delta = direction * step * (0.5 + rng.uniform());
      const double move = rng.uniform();
      const double bound = settings.facilitation_bound;
      if (move < 0.5) {
        for (int n = 0; n < g; ++n) shift(candidate.facilitation[n * a + action], delta, bound);
      } else if (move < 0.8) {
        shift(candidate.action_valences[action], delta, 1.0);
      } else {
        const int n = static_cast<int>(rng.below(static_cast<std::uint64_t>(g)));
        shift(candidate.facilitation[n * a + action], delta, bound);
      }

      auto candidate_shares = eval.shares(candidate);
      const Score s = score(candidate_shares, targets[k]);
      // Equal scores are accepted too, so the search can cross plateaus
      // where a small shift does not change any agent's choice.
      const bool improved = s.better_than(best);
      if (improved || !best.better_than(s)) {
        best = s;
        current = std::move(candidate);
        shares = std::move(candidate_shares);
      }
      if (improved) {
        stall = 0;
      } else if (++stall >= 30) {
        step = step <= settings.min_step ? settings.initial_step
                                         : std::max(step * 0.5, settings.min_step);
        stall = 0;
      }
    }

    result.profiles.types[k] = std::move(current);
    result.achieved_error.push_back(best.max_dev);
    result.iterations.push_back(it);
    result.max_error = std::max(result.max_error, best.max_dev);
  }

  result.within_tolerance = result.max_error <= settings.tolerance;
  if (!result.within_tolerance) {
    result.warning = "calibration budget exhausted with max share error " +
                     std::to_string(result.max_error) + " above tolerance " +
                     std::to_string(settings.tolerance);
  }
  return result;
}

CalibrationResult calibrate_profiles(const ProfileSet& profiles, std::uint64_t seed) {
  std::vector<std::vector<double>> targets;
  for (const auto& t : profiles.types) targets.push_back(t.target_initial_shares);
  return calibrate_profiles(profiles, targets, seed, profiles.calibration.budget);
}

}  // namespace innodiff
