#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aif {

using Index = std::size_t;

// Cartesian product of finite sets. Joint indices are row-major with
// dimension 0 varying slowest.
class ProductSpace {
 public:
  ProductSpace() = default;
  explicit ProductSpace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t k) const { return dims_.at(k); }
  std::size_t joint_size() const noexcept;

  Index flatten(std::span<const Index> coords) const;
  std::vector<Index> unflatten(Index joint) const;
  // Coordinate k of a joint index without materializing the full tuple.
  Index coordinate(Index joint, std::size_t k) const;

  bool operator==(const ProductSpace&) const = default;

 private:
  std::vector<std::size_t> dims_;
};

struct StateSpace : ProductSpace {
  using ProductSpace::ProductSpace;
  const std::vector<std::size_t>& factor_sizes() const noexcept { return dims(); }
  bool operator==(const StateSpace&) const = default;
};

struct ObservationSpace : ProductSpace {
  using ProductSpace::ProductSpace;
  const std::vector<std::size_t>& modality_sizes() const noexcept { return dims(); }
  bool operator==(const ObservationSpace&) const = default;
};

struct ActionSpace {
  std::size_t size = 0;
  std::vector<std::string> labels;  // empty or one per action

  bool operator==(const ActionSpace&) const = default;
};

// A^m(o^m | s) per modality, stored [joint_state][outcome] with outcome fastest.
struct LikelihoodKernel {
  std::vector<std::vector<double>> tables;

  double at(std::size_t modality, Index state, Index outcome, std::size_t outcomes) const {
    return tables[modality][state * outcomes + outcome];
  }
  bool operator==(const LikelihoodKernel&) const = default;
};

// B^f(s' | s, a) per factor, stored [action][prev][next] with next fastest.
struct TransitionKernel {
  std::vector<std::vector<double>> tables;

  double at(std::size_t factor, Index action, Index prev, Index next, std::size_t n) const {
    return tables[factor][(action * n + prev) * n + next];
  }
  bool operator==(const TransitionKernel&) const = default;
};

// How preference values are read. kProbability: ln p_C = ln(weight).
// kLog: the values already are log-preferences, p_C = softmax(values).
enum class PreferenceSpace { kProbability, kLog };

struct PreferenceDistribution {
  std::vector<std::vector<double>> values;  // [modality][outcome]
  // Optional per-timestep override, [tau - 1][modality][outcome]; empty means
  // `values` is used at every step.
  std::vector<std::vector<std::vector<double>>> per_time;
  bool normalize = true;
  PreferenceSpace space = PreferenceSpace::kProbability;

  const std::vector<std::vector<double>>& at_time(int tau) const;
  bool operator==(const PreferenceDistribution&) const = default;
};

struct InitialPrior {
  std::vector<std::vector<double>> factors;
  bool operator==(const InitialPrior&) const = default;
};

// Optional human-readable names used in logs and tables.
struct ModelLabels {
  std::vector<std::string> factor_names;
  std::vector<std::vector<std::string>> factor_values;
  std::vector<std::string> modality_names;
  std::vector<std::vector<std::string>> modality_values;
  bool operator==(const ModelLabels&) const = default;
};

struct GenerativeModel {
  StateSpace states;
  ObservationSpace observations;
  ActionSpace actions;
  LikelihoodKernel A;
  TransitionKernel B;
  PreferenceDistribution C;
  InitialPrior D;
  int horizon = 2;
  ModelLabels labels;

  std::size_t num_states() const noexcept { return states.joint_size(); }
  std::size_t num_observations() const noexcept { return observations.joint_size(); }
  std::size_t num_actions() const noexcept { return actions.size; }

  bool operator==(const GenerativeModel&) const = default;
};

struct Violation {
  std::string kernel;
  std::string index;
  std::string constraint;

  std::string to_string() const;
};

// Tolerance for kernel columns summing to one.
inline constexpr double kColumnTolerance = 1e-12;

// Reports every broken invariant. Never throws.
std::vector<Violation> validate_model(const GenerativeModel& model);

// Throws ShapeError listing the violations when the model is invalid.
void require_valid(const GenerativeModel& model);

// prod_m A^m(o^m | s).
double joint_likelihood(const GenerativeModel& model, Index observation, Index state);

// p(o | s) for every joint state s.
std::vector<double> likelihood_over_states(const GenerativeModel& model, Index observation);

// Prior over the joint state, the product of the per-factor D vectors.
std::vector<double> joint_initial_prior(const GenerativeModel& model);

// prod_f B^f(next_f | prev_f, action).
double joint_transition(const GenerativeModel& model, Index next, Index prev, Index action);

// ln p_C(o^m) for each modality at step tau, under the model's preference
// convention (normalized or raw, probability or log space).
std::vector<std::vector<double>> log_preferences_by_modality(const GenerativeModel& model,
                                                             int tau);

// ln p_C(o) over joint observations: sum over modalities.
std::vector<double> log_preferences(const GenerativeModel& model, int tau);

// ln Z of the raw preference values (sum over modalities). Zero when the model
// normalizes preferences, since the logs are then already normalized.
double preference_log_normalizer(const GenerativeModel& model, int tau);

// Per-modality label of a joint observation, falling back to indices.
std::vector<std::string> observation_labels(const GenerativeModel& model, Index observation);
std::string action_label(const GenerativeModel& model, Index action);

}  // namespace aif
