#pragma once

#include <span>
#include <vector>

#include "aif/inference.hpp"
#include "aif/learning.hpp"
#include "aif/model.hpp"

namespace aif {

// x ~ Cat(theta_A[:, z]), z ~ Cat(theta_D), with Dirichlet priors on both.
// Matrices are stored [latent][outcome], outcome fastest.
struct CategoricalLatentModel {
  std::size_t latents = 0;   // m
  std::size_t outcomes = 0;  // n
  std::vector<double> theta_D;
  std::vector<double> theta_A;
  std::vector<double> alpha_D;
  std::vector<double> alpha_A;

  double likelihood(Index outcome, Index latent) const {
    return theta_A[latent * outcomes + outcome];
  }
  // Throws ShapeError / InvalidArgument if shapes or values are off.
  void check() const;
};

struct VfeValue {
  double F = 0.0;
  double kl_to_posterior = 0.0;
  double neg_log_evidence = 0.0;
};

// F(q | x) = sum_z q(z) (ln q(z) - ln p(x, z)) under the point parameters,
// with its split F = KL(q || p(z | x)) - ln p(x).
VfeValue vfe(std::span<const double> q, const CategoricalLatentModel& model, Index x);

// F_f(q) = sum_z q(z) (ln q(z) - f(z)).
double generalized_vfe(std::span<const double> q, std::span<const double> f);

// argmin_q F_f(q) = softmax(f).
std::vector<double> exact_minimizer(std::span<const double> f);

// p(z | x) by direct normalization of theta_A[x, z] theta_D[z].
std::vector<double> exact_posterior(const CategoricalLatentModel& model, Index x);

struct LatentDirichlet {
  std::vector<double> alpha_D;
  std::vector<double> alpha_A;
};

struct CaviResult {
  std::vector<double> q_z;
  LatentDirichlet q_theta;
  // F after every half-sweep: z-update, theta-update, z-update, ...
  std::vector<double> f_trace;
};

// Coordinate ascent on q(z) q(theta), starting from q(theta) = prior.
CaviResult cavi(const CategoricalLatentModel& model, Index x, int sweeps);

// F(q(z), Dir(alpha')) for the latent model, the objective CAVI descends.
double cavi_free_energy(const CategoricalLatentModel& model, Index x, std::span<const double> q_z,
                        const LatentDirichlet& q_theta);

// KL(Dir(a) || Dir(b)).
double dirichlet_kl(std::span<const double> a, std::span<const double> b);

struct ThetaPosteriorMoments {
  std::vector<double> mixture_weights;  // over latent values
  std::vector<double> mean_D;
  std::vector<double> mean_A;  // [latent][outcome]
};

// Exact posterior means of theta given one observation. The posterior is a
// mixture of Dirichlets, one component per latent value; its moments are
// closed form. Limited to m, n <= 6.
ThetaPosteriorMoments exact_theta_posterior_moments(const CategoricalLatentModel& model, Index x);

inline constexpr std::size_t kExactMomentsLimit = 6;

// Theta-step of CAVI on the POMDP with q(s_1:T) fixed to the mean-field
// product of `marginals`: expected sufficient statistics are accumulated by
// enumerating every state path. Limited to N^T <= 2^20 paths.
DirichletParams pomdp_theta_step(const DirichletParams& alpha, const GenerativeModel& shape,
                                 const std::vector<Belief>& marginals, const History& history);

// First CAVI sweep on the POMDP: the state step smooths under the current
// point estimate model_from_alpha(alpha), then pomdp_theta_step.
DirichletParams pomdp_cavi_first_sweep(const DirichletParams& alpha, const GenerativeModel& shape,
                                       const History& history);

}  // namespace aif
