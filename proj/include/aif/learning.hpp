#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aif/inference.hpp"
#include "aif/model.hpp"

namespace aif {

// Dirichlet hyperparameters laid out exactly like the kernels they govern:
// alpha_A[m] is [joint_state][outcome], alpha_B[f] is [action][prev][next],
// alpha_D[f] is [state].
struct DirichletParams {
  std::vector<std::vector<double>> alpha_A;
  std::vector<std::vector<double>> alpha_B;
  std::vector<std::vector<double>> alpha_D;

  bool operator==(const DirichletParams&) const = default;
};

struct LearningOptions {
  // Multiplier on every increment.
  double learning_rate = 1.0;
  // Use the smoother's pairwise marginals q_T(s_tau, s_tau-1) for the B
  // update instead of the product of singleton marginals.
  bool use_pairwise_transitions = false;
};

// Checks that the parameters match the model's shapes and are all > 0.
void check_alpha(const DirichletParams& alpha, const GenerativeModel& shape);

// End-of-episode update:
//   alpha_D[j]     += q_T(s_1 = j)
//   alpha_A[i, j]  += sum_tau 1[o_tau = i] q_T(s_tau = j)
//   alpha_B[j,k,l] += sum_{tau>=2} q_T(s_tau = j) q_T(s_tau-1 = k) 1[a_tau-1 = l]
// with the D and B terms taken on per-factor marginals. Returns new params.
DirichletParams learn_episode(const DirichletParams& alpha, const GenerativeModel& shape,
                              const SmoothedPosterior& smoothed, const History& history,
                              LearningOptions options = {});

// alpha_i / sum_j alpha_j.
std::vector<double> dirichlet_mean(std::span<const double> alpha);

// Replaces every kernel column by the Dirichlet mean of its alpha column.
// C, the spaces, horizon and labels come from `tmpl`.
GenerativeModel model_from_alpha(const DirichletParams& alpha, const GenerativeModel& tmpl);

// alpha = concentration * kernel + floor, column by column.
DirichletParams dirichlet_from_model(const GenerativeModel& model, double concentration,
                                     double floor = 0.0);

// Elementwise after - before; shapes must agree.
DirichletParams alpha_difference(const DirichletParams& after, const DirichletParams& before);

// Checkpoints share the model file layout with fields alpha_A, alpha_B, alpha_D.
std::string serialize_alpha(const DirichletParams& alpha, const GenerativeModel& shape);
DirichletParams parse_alpha(std::string_view text, const GenerativeModel& shape);
void save_alpha(const DirichletParams& alpha, const GenerativeModel& shape,
                const std::filesystem::path& path);
DirichletParams load_alpha(const std::filesystem::path& path, const GenerativeModel& shape);

}  // namespace aif
