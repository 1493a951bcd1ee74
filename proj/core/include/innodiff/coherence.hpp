#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace innodiff {

enum class UnitKind : std::uint8_t { Need, Action, Special };
enum class Channel : std::uint8_t { Activation, Valence };

struct UnitId {
  UnitKind kind = UnitKind::Special;
  int index = 0;

  static constexpr UnitId special() { return {UnitKind::Special, 0}; }
  static constexpr UnitId need(int g) { return {UnitKind::Need, g}; }
  static constexpr UnitId action(int a) { return {UnitKind::Action, a}; }

  friend bool operator==(const UnitId&, const UnitId&) = default;
};

std::string to_string(UnitId id);

struct Link {
  UnitId from;
  UnitId to;
  double weight = 0.0;
  Channel channel = Channel::Activation;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Row-major dense matrix; used for the need x action facilitation weights.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const {
    return values_[static_cast<std::size_t>(r) * cols_ + c];
  }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

/// How the activation net input combines the two sums over incoming
/// activation-channel links.
enum class NetInputRule : std::uint8_t {
  /// net_j = sum_i w_ij a_i + sum_i w_ij v_i a_i  (both sums share weights)
  ValenceModulated,
  /// net_j = sum_i w_ij a_i  (valence only reaches other units through the
  /// valence channel)
  ActivationOnly,
};

struct NetworkParams {
  double decay = 0.05;
  double act_min = -1.0;
  double act_max = 1.0;
  /// Starting activation and valence of every non-special unit.
  double initial_state = 0.01;
  /// Facilitation links feed both Need->Action and Action->Need when true.
  bool symmetric_facilitation = true;
  NetInputRule net_input = NetInputRule::ValenceModulated;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct SettleOptions {
  double tolerance = 1e-4;
  int max_iterations = 200;

  friend bool operator==(const SettleOptions&, const SettleOptions&) = default;
};

struct SettleReport {
  int iterations = 0;
  bool converged = false;
  /// Largest |change| of any activation or valence on the final iteration.
  double max_delta = 0.0;
};

/// An agent's decision network: G need units, A action units and one clamped
/// special unit, coupled by facilitation, priority and valence links.
///
/// Link storage order is fixed: G*A facilitation links (need-major), then G
/// priority links, then G need-valence links, then A action-valence links.
/// Internal unit slots are 0 = special, 1..G = needs, G+1..G+A = actions.
class CoherenceNetwork {
 public:
  CoherenceNetwork() = default;

  /// Validates dimensions and weight ranges, then wires the network and puts
  /// every non-special unit at params.initial_state.
  static CoherenceNetwork build(const DenseMatrix& facilitation,
                                std::span<const double> priorities,
                                std::span<const double> need_valences,
                                std::span<const double> action_valences,
                                const NetworkParams& params = {});

  int needs() const { return needs_; }
  int actions() const { return actions_; }
  int unit_count() const { return 1 + needs_ + actions_; }
  const NetworkParams& params() const { return params_; }

  int slot(UnitId id) const;
  UnitId unit(int slot) const;
  std::vector<UnitId> units() const;
  std::span<const Link> links() const { return links_; }

  double facilitation(int need, int action) const;
  double priority(int need) const;
  double need_valence_weight(int need) const;
  double action_valence_weight(int action) const;

  /// Setters require weight in [act_min, act_max]; callers clamp first.
  void set_facilitation(int need, int action, double weight);
  void set_priority(int need, double weight);
  void set_need_valence_weight(int need, double weight);
  void set_action_valence_weight(int action, double weight);

  double activation(UnitId id) const { return activation_[slot(id)]; }
  double valence(UnitId id) const { return valence_[slot(id)]; }
  std::span<const double> activations() const { return activation_; }
  std::span<const double> valences() const { return valence_; }
  std::vector<double> action_activations() const;
  std::vector<double> action_valences() const;

  /// Restores a state vector pair (snapshot loading). Special unit must be
  /// (1, 1) and everything else within bounds.
  void set_state(std::span<const double> activation, std::span<const double> valence);
  /// Puts every non-special unit back to params().initial_state.
  void reset_state();

  /// Synchronous settling; see SettleOptions for the stopping rule.
  SettleReport settle(const SettleOptions& options = {});

  friend bool operator==(const CoherenceNetwork& a, const CoherenceNetwork& b) {
    return a.needs_ == b.needs_ && a.actions_ == b.actions_ && a.params_ == b.params_ &&
           a.links_ == b.links_ && a.activation_ == b.activation_ &&
           a.valence_ == b.valence_;
  }

 private:
  struct Incoming {
    int source;
    int link;
  };

  std::size_t facilitation_link(int need, int action) const;
  void check_need(int need) const;
  void check_action(int action) const;
  void check_weight(double weight, std::string_view what) const;
  void wire();

  int needs_ = 0;
  int actions_ = 0;
  NetworkParams params_;
  std::vector<Link> links_;
  std::vector<double> activation_;
  std::vector<double> valence_;

  // CSR incoming lists per slot, per channel; derived from links_.
  std::vector<int> act_offsets_;
  std::vector<Incoming> act_in_;
  std::vector<int> val_offsets_;
  std::vector<Incoming> val_in_;
  std::vector<double> next_activation_;
  std::vector<double> next_valence_;
};

struct Decision {
  int chosen_action = 0;
  std::vector<double> action_activations;
  std::vector<double> action_valences;
  bool tied = false;
};

/// Absolute difference under which two action activations count as tied.
inline constexpr double kTieEpsilon = 1e-12;

/// Argmax over action activations. Exact ties keep `previous` if it is one of
/// the maximizers, else the lowest index wins. `tied` is set when two or more
/// actions are within kTieEpsilon of the maximum.
Decision decide(const CoherenceNetwork& net, std::optional<int> previous = std::nullopt);

/// Structured-text (JSON) snapshot: params, unit list, link list with channel
/// tags and both state vectors.
std::string to_snapshot(const CoherenceNetwork& net);
CoherenceNetwork from_snapshot(std::string_view text);

}  // namespace innodiff
