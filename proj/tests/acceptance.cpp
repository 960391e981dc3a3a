// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "aif/cli.hpp"
#include "aif/efe.hpp"
#include "aif/env.hpp"
#include "aif/inference.hpp"
#include "aif/learning.hpp"
#include "aif/policy.hpp"
#include "aif/prob.hpp"
#include "aif/varfree.hpp"
#include "oracles.hpp"
#include "random_models.hpp"

using namespace aif;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

const Index kO1 = tmaze::observation_index(tmaze::kCenter, tmaze::kNoReward, tmaze::kCueRight);
const Index kO2 = tmaze::observation_index(tmaze::kCueLocation, tmaze::kNoReward, tmaze::kCueRight);

Outcome step_one_table() {
  const double reference[16] = {0.022, 0.041, 0.041, 0.046, 0.041, 0.075, 0.075, 0.083,
                            0.041, 0.075, 0.075, 0.083, 0.046, 0.083, 0.083, 0.091};
  const auto start = std::chrono::steady_clock::now();
  const auto m = tmaze::build_model().model;
  History h{{kO1}, {}};
  const auto post = policy_posterior(m, filter_history(m, h), h);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double err = 0.0;
  for (int k = 0; k < 16; ++k) err = std::max(err, std::abs(post.probabilities[k] - reference[k]));
  return {err <= 0.005 && secs < 1.0 && post.probabilities.size() == 16,
          "max |err| " + fmt("%.4f", err) + ", " + fmt("%.2f", secs * 1000) + " ms"};
}

Outcome step_two_row() {
  const double reference[4] = {0.20, 0.52, 0.08, 0.20};
  const auto m = tmaze::build_model().model;
  History h{{kO1, kO2}, {tmaze::kCueLocation}};
  const auto post = policy_posterior(m, filter_history(m, h), h);
  double err = 0.0;
  for (int k = 0; k < 4; ++k) err = std::max(err, std::abs(post.probabilities[k] - reference[k]));
  return {err <= 0.005 && post.probabilities.size() == 4, "max |err| " + fmt("%.4f", err)};
}

Outcome belief_goldens() {
  using namespace tmaze;
  const auto m = build_model().model;
  double err = 0.0;
  const auto q1 = filter_step(m, joint_initial_prior(m), std::nullopt, kO1);
  const auto sides = factor_marginals(m, q1)[1];
  err = std::max(err, std::abs(sides[0] - 0.5));
  err = std::max(err, std::abs(sides[1] - 0.5));

  const auto q2 = filter_step(m, q1, kCueLocation, kO2);
  std::vector<double> onehot(8, 0.0);
  onehot[state_index(kCueLocation, kRewardOnRight)] = 1.0;
  err = std::max(err, max_abs(q2, onehot));

  const std::vector<Index> star{kCueLocation, kLeftArm};
  const auto qo3 = predict_observation(m, predict_state(m, q1, star)[1]);
  for (Index cue : {kCueRight, kCueLeft}) err = std::max(err, std::abs(qo3[observation_index(kLeftArm, kReward, cue)] - 0.25));

  const std::vector<Index> left{kLeftArm};
  const auto qo3b = predict_observation(m, predict_state(m, q2, left)[0]);
  for (Index cue : {kCueRight, kCueLeft}) {
    err = std::max(err, std::abs(qo3b[observation_index(kLeftArm, kLoss, cue)] - 0.49));
    err = std::max(err, std::abs(qo3b[observation_index(kLeftArm, kReward, cue)] - 0.01));
  }
  return {err <= 0.005, "max |err| " + fmt("%.2e", err)};
}

Outcome efe_forms() {
  std::mt19937_64 rng(4001);
  ts::RandomSpec spec;
  spec.max_joint = 12;
  spec.max_horizon = 4;
  double worst_g = 0.0, worst_p = 0.0;
  for (int i = 0; i < 200; ++i) {
    spec.c_space = i % 2 ? PreferenceSpace::kLog : PreferenceSpace::kProbability;
    spec.normalize_c = true;
    const auto m = ts::random_model(rng, spec);
    const int t = static_cast<int>(ts::pick(rng, 1, static_cast<std::size_t>(m.horizon)));
    const auto h = ts::random_history(rng, m, t);
    const auto q = filter_history(m, h);
    for (const auto& pi : enumerate_policies(m.num_actions(), t, m.horizon)) {
      const double a = efe_epistemic_form(m, q, pi).total;
      const double b = efe_ambiguity_form(m, q, pi).total;
      worst_g = std::max(worst_g, std::abs(a - b));
    }
    auto raw = m;
    raw.C.normalize = false;
    const auto pe = policy_posterior(raw, q, h, std::nullopt, {EfeForm::kEpistemic});
    const auto pa = policy_posterior(raw, q, h, std::nullopt, {EfeForm::kAmbiguity});
    worst_p = std::max(worst_p, max_abs(pe.probabilities, pa.probabilities));
  }
  return {worst_g < 1e-9 && worst_p < 1e-9,
          "200 models, max |dG| " + fmt("%.2e", worst_g) + ", max |dq(pi)| unnormalized " + fmt("%.2e", worst_p)};
}

Outcome inference_oracle() {
  std::mt19937_64 rng(4002);
  ts::RandomSpec spec;
  spec.max_joint = 6;
  spec.max_horizon = 4;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto m = ts::random_model(rng, spec);
    const int t = static_cast<int>(ts::pick(rng, 1, static_cast<std::size_t>(m.horizon)));
    const auto h = ts::random_history(rng, m, t);
    worst = std::max(worst, max_abs(filter_history(m, h), oracle::filter(m, h)));
    std::vector<Index> future;
    for (int k = t; k < m.horizon; ++k) future.push_back(ts::pick(rng, 0, m.num_actions() - 1));
    const auto sm = smooth(m, h, future);
    const auto brute = oracle::enumerate_paths(m, h, future);
    for (std::size_t k = 0; k < sm.marginals.size(); ++k) worst = std::max(worst, max_abs(sm.marginals[k], brute.marginals[k]));
    for (std::size_t k = 0; k < sm.pairwise.size(); ++k) worst = std::max(worst, max_abs(sm.pairwise[k], brute.pairwise[k]));
  }
  return {worst < 1e-10, "100 models, max |err| " + fmt("%.2e", worst)};
}

Outcome learning_conservation() {
  std::mt19937_64 rng(4003);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto ep = ts::separable_episode(rng, 8);
    const auto& m = ep.model;
    const auto alpha = dirichlet_from_model(m, 3.0, 0.5);
    const auto d = alpha_difference(learn_episode(alpha, m, smooth(m, ep.history, {}), ep.history), alpha);
    for (const auto& v : d.alpha_D) worst = std::max(worst, std::abs(sum(v) - 1.0));
    const auto mass = ts::step_mass(m, d.alpha_A, d.alpha_B);
    for (double x : mass.a) worst = std::max(worst, std::abs(x - 1.0));
    for (const auto& v : mass.b)
      for (double x : v) worst = std::max(worst, std::abs(x - 1.0));
  }

  // One-hot beliefs: the fully observed conjugate update, exactly.
  bool exact = true;
  ts::RandomSpec spec;
  for (int i = 0; i < 100; ++i) {
    const auto m = ts::random_model(rng, spec);
    const auto alpha = dirichlet_from_model(m, 2.0, 1.0);
    const auto h = ts::random_history(rng, m, m.horizon);
    SmoothedPosterior sm;
    std::vector<Index> path;
    for (int tau = 0; tau < m.horizon; ++tau) {
      path.push_back(ts::pick(rng, 0, m.num_states() - 1));
      std::vector<double> v(m.num_states(), 0.0);
      v[path.back()] = 1.0;
      sm.marginals.push_back(v);
    }
    auto expect = alpha;
    const auto& fs = m.states.dims();
    const auto& ms = m.observations.dims();
    const auto c0 = ts::decode(path[0], fs);
    for (std::size_t f = 0; f < fs.size(); ++f) expect.alpha_D[f][c0[f]] += 1.0;
    for (int tau = 0; tau < m.horizon; ++tau) {
      const auto oc = ts::decode(h.observations[tau], ms);
      for (std::size_t k = 0; k < ms.size(); ++k) expect.alpha_A[k][path[tau] * ms[k] + oc[k]] += 1.0;
      if (tau == 0) continue;
      const auto p = ts::decode(path[tau - 1], fs);
      const auto n = ts::decode(path[tau], fs);
      const Index a = h.actions[tau - 1];
      for (std::size_t f = 0; f < fs.size(); ++f) expect.alpha_B[f][(a * fs[f] + p[f]) * fs[f] + n[f]] += 1.0;
    }
    exact = exact && learn_episode(alpha, m, sm, h) == expect;
  }
  return {worst < 1e-10 && exact,
          "max |mass - 1| " + fmt("%.2e", worst) + ", one-hot update " + (exact ? "exact" : "MISMATCH")};
}

Outcome cavi_checks() {
  std::mt19937_64 rng(4004);
  double worst_rise = -1e300;
  for (int i = 0; i < 50; ++i) {
    CategoricalLatentModel model;
    model.latents = ts::pick(rng, 2, 4);
    model.outcomes = ts::pick(rng, 2, 4);
    model.theta_D = ts::random_distribution(rng, model.latents);
    for (std::size_t z = 0; z < model.latents; ++z) {
      const auto col = ts::random_distribution(rng, model.outcomes);
      model.theta_A.insert(model.theta_A.end(), col.begin(), col.end());
      model.alpha_D.push_back(ts::unif(rng, 0.2, 5.0));
      for (std::size_t o = 0; o < model.outcomes; ++o) model.alpha_A.push_back(ts::unif(rng, 0.2, 5.0));
    }
    const auto r = cavi(model, ts::pick(rng, 0, model.outcomes - 1), 25);
    for (std::size_t k = 1; k < r.f_trace.size(); ++k) worst_rise = std::max(worst_rise, r.f_trace[k] - r.f_trace[k - 1]);
  }

  ts::RandomSpec spec;
  spec.max_joint = 4;
  spec.max_horizon = 3;
  double worst_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto shape = ts::random_model(rng, spec);
    const auto alpha = dirichlet_from_model(shape, ts::unif(rng, 1.0, 20.0), 0.05);
    const auto point = model_from_alpha(alpha, shape);
    const auto h = ts::random_history(rng, point, shape.horizon);
    const auto d = alpha_difference(pomdp_cavi_first_sweep(alpha, shape, h),
                                    learn_episode(alpha, shape, smooth(point, h, {}), h));
    for (auto* group : {&d.alpha_A, &d.alpha_B, &d.alpha_D})
      for (const auto& v : *group)
        for (double x : v) worst_gap = std::max(worst_gap, std::abs(x));
  }
  return {worst_rise <= 1e-12 && worst_gap < 1e-10,
          "largest F step " + fmt("%.2e", worst_rise) + ", sweep-1 vs learn_episode " + fmt("%.2e", worst_gap)};
}

Outcome elbo() {
  std::mt19937_64 rng(4005);
  double worst_bound = 0.0, worst_eq = 0.0;
  for (int i = 0; i < 1000; ++i) {
    CategoricalLatentModel model;
    model.latents = ts::pick(rng, 2, 5);
    model.outcomes = ts::pick(rng, 2, 4);
    model.theta_D = ts::random_distribution(rng, model.latents);
    for (std::size_t z = 0; z < model.latents; ++z) {
      const auto col = ts::random_distribution(rng, model.outcomes, 0.2);
      model.theta_A.insert(model.theta_A.end(), col.begin(), col.end());
    }
    model.alpha_D.assign(model.latents, 1.0);
    model.alpha_A.assign(model.latents * model.outcomes, 1.0);
    const Index z = ts::draw(rng, model.theta_D);
    const Index x = ts::draw(rng, std::vector<double>(model.theta_A.begin() + static_cast<long>(z * model.outcomes),
                                                      model.theta_A.begin() + static_cast<long>((z + 1) * model.outcomes)));
    const auto q = ts::random_distribution(rng, model.latents, 0.2);
    const auto v = vfe(q, model, x);
    worst_bound = std::max(worst_bound, v.neg_log_evidence - v.F);
    const auto at = vfe(exact_posterior(model, x), model, x);
    worst_eq = std::max(worst_eq, std::abs(at.F - at.neg_log_evidence));
  }
  return {worst_bound <= 1e-12 && worst_eq < 1e-12,
          "1000 triples, max violation " + fmt("%.2e", std::max(0.0, worst_bound)) + ", gap at posterior " + fmt("%.2e", worst_eq)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "aif_acceptance_determinism";
  fs::remove_all(root);
  bool same = true;
  std::size_t bytes = 0;
  for (bool learn : {false, true}) {
    RunConfig cfg;
    cfg.episodes = 40;
    cfg.seed = 2024;
    cfg.learn = learn;
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      cfg.out = root / ((learn ? "learn_" : "plain_") + std::to_string(rep));
      cfg.threads = rep == 0 ? 1 : 0;
      write_artifacts(cfg, run_episodes(cfg));
      std::string all;
      for (const char* f : {"trajectory.jsonl", "summary.json", "episodes.csv"}) all += slurp(cfg.out / f);
      if (learn) all += slurp(cfg.out / "alpha_final.json");
      if (rep == 0) {
        first = all;
        bytes += all.size();
      } else {
        same = same && all == first;
      }
    }
  }
  return {same && bytes > 0, "two runs each, with and without learning, " + std::to_string(bytes) + " bytes compared"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"tmaze step-1 policy table", step_one_table},
      {"tmaze step-2 action posterior", step_two_row},
      {"tmaze belief goldens", belief_goldens},
      {"EFE form equivalence", efe_forms},
      {"inference vs path enumeration", inference_oracle},
      {"learning conservation", learning_conservation},
      {"CAVI monotone and sweep-1 identity", cavi_checks},
      {"ELBO bound", elbo},
      {"byte-identical logs", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu %s  %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
