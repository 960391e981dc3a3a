#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "aif/learning.hpp"
#include "aif/model.hpp"

namespace aif {

// The generative process an agent acts in. Observations are joint indices in
// the same row-major layout as the model.
class Environment {
 public:
  virtual ~Environment() = default;

  // Starts an episode and returns o_1.
  virtual Index reset(std::uint64_t seed) = 0;
  // Applies an action and returns the next observation. Throws StepAfterDone
  // once the episode has produced its last observation.
  virtual Index step(Index action) = 0;
  virtual bool done() const = 0;
  virtual const ObservationSpace& observation_space() const = 0;
  // Joint hidden state, for logging.
  virtual Index state() const = 0;
};

namespace tmaze {

// Location factor and observation.
inline constexpr Index kCenter = 0;
inline constexpr Index kRightArm = 1;
inline constexpr Index kLeftArm = 2;
inline constexpr Index kCueLocation = 3;
// Reward condition factor.
inline constexpr Index kRewardOnRight = 0;
inline constexpr Index kRewardOnLeft = 1;
// Reward observation.
inline constexpr Index kNoReward = 0;
inline constexpr Index kReward = 1;
inline constexpr Index kLoss = 2;
// Cue observation.
inline constexpr Index kCueRight = 0;
inline constexpr Index kCueLeft = 1;

enum class RewardSide { kRight, kLeft };

struct Options {
  int horizon = 3;
  double reward_probability = 0.98;
  // Arms trap the agent for the rest of the episode. Off by default: every
  // action then moves the agent to its target location.
  bool absorbing_arms = false;
  // Dirichlet prior: alpha = concentration * kernel + floor.
  double concentration = 100.0;
  double alpha_floor = 0.01;
};

struct Bundle {
  GenerativeModel model;
  PreferenceDistribution preferences;
  DirichletParams alpha;
};

// State factors [location(4), reward condition(2)]; modalities
// [location(4), reward(3), cue(2)]; four "move to" actions. Preferences
// are log-space values 2 / 3 / 1 for no reward / reward / loss.
Bundle build_model(const Options& options = {});

Index state_index(Index location, Index reward_side);
Index observation_index(Index location, Index reward, Index cue);

}  // namespace tmaze

class TMazeEnv final : public Environment {
 public:
  explicit TMazeEnv(tmaze::Options options = {},
                    std::optional<tmaze::RewardSide> forced_side = std::nullopt);

  Index reset(std::uint64_t seed) override;
  Index step(Index action) override;
  bool done() const override { return steps_ >= options_.horizon; }
  const ObservationSpace& observation_space() const override { return space_; }
  Index state() const override;

  Index location() const noexcept { return location_; }
  tmaze::RewardSide reward_side() const noexcept { return side_; }

 private:
  Index observe();

  tmaze::Options options_;
  std::optional<tmaze::RewardSide> forced_side_;
  ObservationSpace space_;
  std::mt19937_64 rng_;
  tmaze::RewardSide side_ = tmaze::RewardSide::kRight;
  Index location_ = tmaze::kCenter;
  int steps_ = 0;
  bool started_ = false;
};

// Plays any valid generative model as the generative process: s_1 ~ D,
// s_tau ~ B(. | s_tau-1, a), o_tau^m ~ A^m(. | s_tau).
class ModelEnv final : public Environment {
 public:
  explicit ModelEnv(GenerativeModel model);

  Index reset(std::uint64_t seed) override;
  Index step(Index action) override;
  bool done() const override { return steps_ >= model_.horizon; }
  const ObservationSpace& observation_space() const override { return model_.observations; }
  Index state() const override { return state_; }

 private:
  Index observe();

  GenerativeModel model_;
  std::mt19937_64 rng_;
  Index state_ = 0;
  int steps_ = 0;
  bool started_ = false;
};

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);
// Index drawn from a probability vector.
Index draw_categorical(std::mt19937_64& rng, std::span<const double> p);

}  // namespace aif
