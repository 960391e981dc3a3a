#include "aif/env.hpp"

#include <array>
#include <string>

#include "aif/errors.hpp"

namespace aif {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Index draw_categorical(std::mt19937_64& rng, std::span<const double> p) {
  const double u = uniform01(rng);
  double acc = 0.0;
  Index last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last;
}

namespace tmaze {

Index state_index(Index location, Index reward_side) { return location * 2 + reward_side; }

Index observation_index(Index location, Index reward, Index cue) {
  return (location * 3 + reward) * 2 + cue;
}

Bundle build_model(const Options& options) {
  if (options.horizon < 2) throw InvalidArgument("tmaze: horizon must be >= 2");
  const double hit = options.reward_probability;
  if (!(hit >= 0.0 && hit <= 1.0)) throw InvalidArgument("tmaze: reward probability outside [0, 1]");

  GenerativeModel m;
  m.states = StateSpace({4, 2});
  m.observations = ObservationSpace({4, 3, 2});
  m.actions.size = 4;
  m.actions.labels = {"center", "right arm", "left arm", "cue location"};
  m.horizon = options.horizon;
  m.labels.factor_names = {"location", "reward condition"};
  m.labels.factor_values = {{"center", "right arm", "left arm", "cue location"},
                            {"reward on right", "reward on left"}};
  m.labels.modality_names = {"location", "reward", "cue"};
  m.labels.modality_values = {{"center", "right arm", "left arm", "cue location"},
                              {"no reward", "reward", "loss"},
                              {"cue right", "cue left"}};

  m.A.tables.assign(3, {});
  m.A.tables[0].assign(8 * 4, 0.0);
  m.A.tables[1].assign(8 * 3, 0.0);
  m.A.tables[2].assign(8 * 2, 0.0);
  for (Index loc = 0; loc < 4; ++loc) {
    for (Index side = 0; side < 2; ++side) {
      const Index s = state_index(loc, side);
      m.A.tables[0][s * 4 + loc] = 1.0;

      auto* reward = &m.A.tables[1][s * 3];
      if (loc == kCenter || loc == kCueLocation) {
        reward[kNoReward] = 1.0;
      } else {
        const bool matches = (loc == kRightArm) == (side == kRewardOnRight);
        reward[kReward] = matches ? hit : 1.0 - hit;
        reward[kLoss] = matches ? 1.0 - hit : hit;
      }

      auto* cue = &m.A.tables[2][s * 2];
      if (loc == kCueLocation) {
        cue[side == kRewardOnRight ? kCueRight : kCueLeft] = 1.0;
      } else {
        cue[kCueRight] = 0.5;
        cue[kCueLeft] = 0.5;
      }
    }
  }

  m.B.tables.assign(2, {});
  m.B.tables[0].assign(4 * 4 * 4, 0.0);
  for (Index a = 0; a < 4; ++a) {
    for (Index prev = 0; prev < 4; ++prev) {
      const bool in_arm = prev == kRightArm || prev == kLeftArm;
      const Index next = options.absorbing_arms && in_arm ? prev : a;
      m.B.tables[0][(a * 4 + prev) * 4 + next] = 1.0;
    }
  }
  m.B.tables[1].assign(4 * 2 * 2, 0.0);
  for (Index a = 0; a < 4; ++a) {
    for (Index side = 0; side < 2; ++side) m.B.tables[1][(a * 2 + side) * 2 + side] = 1.0;
  }

  m.D.factors = {{0.25, 0.25, 0.25, 0.25}, {0.5, 0.5}};

  m.C.space = PreferenceSpace::kLog;
  m.C.normalize = true;
  m.C.values = {{0.0, 0.0, 0.0, 0.0}, {2.0, 3.0, 1.0}, {0.0, 0.0}};

  require_valid(m);
  DirichletParams alpha = dirichlet_from_model(m, options.concentration, options.alpha_floor);
  PreferenceDistribution prefs = m.C;
  return {std::move(m), std::move(prefs), std::move(alpha)};
}

}  // namespace tmaze

TMazeEnv::TMazeEnv(tmaze::Options options, std::optional<tmaze::RewardSide> forced_side)
    : options_(options), forced_side_(forced_side), space_({4, 3, 2}) {
  if (options_.horizon < 2) throw InvalidArgument("tmaze: horizon must be >= 2");
}

Index TMazeEnv::state() const {
  return tmaze::state_index(location_, side_ == tmaze::RewardSide::kRight ? tmaze::kRewardOnRight
                                                                          : tmaze::kRewardOnLeft);
}

Index TMazeEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  // The side is drawn even when forced so the observation stream only
  // depends on the seed.
  const auto drawn = uniform01(rng_) < 0.5 ? tmaze::RewardSide::kRight : tmaze::RewardSide::kLeft;
  side_ = forced_side_.value_or(drawn);
  location_ = tmaze::kCenter;
  steps_ = 1;
  started_ = true;
  return observe();
}

Index TMazeEnv::step(Index action) {
  if (!started_) throw StepAfterDone("tmaze: step before reset");
  if (done()) throw StepAfterDone("tmaze: the episode is over");
  if (action >= 4) throw IndexError("tmaze: action out of range");
  const bool in_arm = location_ == tmaze::kRightArm || location_ == tmaze::kLeftArm;
  if (!(options_.absorbing_arms && in_arm)) location_ = action;
  ++steps_;
  return observe();
}

Index TMazeEnv::observe() {
  Index reward = tmaze::kNoReward;
  if (location_ == tmaze::kRightArm || location_ == tmaze::kLeftArm) {
    const bool matches = (location_ == tmaze::kRightArm) == (side_ == tmaze::RewardSide::kRight);
    const bool hit = uniform01(rng_) < options_.reward_probability;
    reward = (matches == hit) ? tmaze::kReward : tmaze::kLoss;
  }
  Index cue;
  if (location_ == tmaze::kCueLocation) {
    cue = side_ == tmaze::RewardSide::kRight ? tmaze::kCueRight : tmaze::kCueLeft;
  } else {
    cue = uniform01(rng_) < 0.5 ? tmaze::kCueRight : tmaze::kCueLeft;
  }
  return tmaze::observation_index(location_, reward, cue);
}

ModelEnv::ModelEnv(GenerativeModel model) : model_(std::move(model)) { require_valid(model_); }

Index ModelEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  const auto& fs = model_.states.factor_sizes();
  std::vector<Index> coords(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) coords[f] = draw_categorical(rng_, model_.D.factors[f]);
  state_ = model_.states.flatten(coords);
  steps_ = 1;
  started_ = true;
  return observe();
}

Index ModelEnv::step(Index action) {
  if (!started_) throw StepAfterDone("model env: step before reset");
  if (done()) throw StepAfterDone("model env: the episode is over");
  if (action >= model_.num_actions()) throw IndexError("model env: action out of range");
  const auto& fs = model_.states.factor_sizes();
  auto coords = model_.states.unflatten(state_);
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const std::size_t n = fs[f];
    const auto column = std::span(model_.B.tables[f]).subspan((action * n + coords[f]) * n, n);
    coords[f] = draw_categorical(rng_, column);
  }
  state_ = model_.states.flatten(coords);
  ++steps_;
  return observe();
}

Index ModelEnv::observe() {
  const auto& ms = model_.observations.modality_sizes();
  std::vector<Index> coords(ms.size());
  for (std::size_t m = 0; m < ms.size(); ++m) {
    coords[m] = draw_categorical(rng_, std::span(model_.A.tables[m]).subspan(state_ * ms[m], ms[m]));
  }
  return model_.observations.flatten(coords);
}

}  // namespace aif
