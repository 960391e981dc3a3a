#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "aif/inference.hpp"
#include "aif/model.hpp"

namespace testing_support {

using aif::GenerativeModel;
using aif::Index;

struct RandomSpec {
  std::size_t max_joint = 6;
  int min_horizon = 2;
  int max_horizon = 4;
  std::size_t max_actions = 3;
  std::size_t max_modalities = 2;
  std::size_t max_outcomes = 3;
  // Chance that a kernel entry is forced to zero (never a whole column).
  double sparsity = 0.15;
  bool normalize_c = true;
  aif::PreferenceSpace c_space = aif::PreferenceSpace::kProbability;
};

inline double unif(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<double> random_column(std::mt19937_64& rng, std::size_t n, double sparsity) {
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) {
    x = unif(rng) < sparsity ? 0.0 : unif(rng, 0.05, 1.0);
    total += x;
  }
  if (total == 0.0) {
    v[pick(rng, 0, n - 1)] = 1.0;
    total = 1.0;
  }
  for (auto& x : v) x /= total;
  return v;
}

inline GenerativeModel random_model(std::mt19937_64& rng, const RandomSpec& spec) {
  GenerativeModel m;
  std::vector<std::size_t> factors;
  for (;;) {
    factors.clear();
    const std::size_t nf = pick(rng, 1, 2);
    std::size_t joint = 1;
    for (std::size_t f = 0; f < nf; ++f) {
      factors.push_back(pick(rng, 1, std::max<std::size_t>(2, spec.max_joint / 2)));
      joint *= factors.back();
    }
    if (joint >= 2 && joint <= spec.max_joint) break;
  }
  std::vector<std::size_t> modalities;
  const std::size_t nm = pick(rng, 1, spec.max_modalities);
  for (std::size_t k = 0; k < nm; ++k) modalities.push_back(pick(rng, 2, spec.max_outcomes));

  m.states = aif::StateSpace(factors);
  m.observations = aif::ObservationSpace(modalities);
  m.actions.size = pick(rng, 1, spec.max_actions);
  m.horizon = static_cast<int>(pick(rng, static_cast<std::size_t>(spec.min_horizon),
                                    static_cast<std::size_t>(spec.max_horizon)));
  const std::size_t n = m.num_states();

  for (std::size_t mod : modalities) {
    std::vector<double> table;
    for (std::size_t s = 0; s < n; ++s) {
      const auto col = random_column(rng, mod, spec.sparsity);
      table.insert(table.end(), col.begin(), col.end());
    }
    m.A.tables.push_back(std::move(table));
  }
  for (std::size_t fs : factors) {
    std::vector<double> table;
    for (std::size_t a = 0; a < m.actions.size; ++a) {
      for (std::size_t prev = 0; prev < fs; ++prev) {
        const auto col = random_column(rng, fs, spec.sparsity);
        table.insert(table.end(), col.begin(), col.end());
      }
    }
    m.B.tables.push_back(std::move(table));
    m.D.factors.push_back(random_column(rng, fs, spec.sparsity));
  }
  m.C.space = spec.c_space;
  m.C.normalize = spec.normalize_c;
  for (std::size_t mod : modalities) {
    std::vector<double> c(mod);
    for (auto& x : c) x = spec.c_space == aif::PreferenceSpace::kLog ? unif(rng, -3.0, 3.0) : unif(rng, 0.1, 5.0);
    m.C.values.push_back(std::move(c));
  }
  return m;
}

// Draws an index from an unnormalized non-negative vector.
inline Index draw(std::mt19937_64& rng, const std::vector<double>& w) {
  return std::discrete_distribution<Index>(w.begin(), w.end())(rng);
}

inline std::vector<Index> decode(Index joint, const std::vector<std::size_t>& dims) {
  std::vector<Index> c(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    c[k] = joint % dims[k];
    joint /= dims[k];
  }
  return c;
}

inline Index encode(const std::vector<Index>& c, const std::vector<std::size_t>& dims) {
  Index j = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) j = j * dims[k] + c[k];
  return j;
}

// Samples a history of length t from the model itself with random actions,
// so it always has positive probability.
inline aif::History random_history(std::mt19937_64& rng, const GenerativeModel& m, int t) {
  const auto& fs = m.states.dims();
  const auto& ms = m.observations.dims();
  std::vector<Index> s(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) s[f] = draw(rng, m.D.factors[f]);
  aif::History h;
  for (int tau = 1; tau <= t; ++tau) {
    if (tau > 1) {
      const Index a = pick(rng, 0, m.actions.size - 1);
      h.actions.push_back(a);
      for (std::size_t f = 0; f < fs.size(); ++f) {
        const auto& b = m.B.tables[f];
        std::vector<double> col(b.begin() + static_cast<long>((a * fs[f] + s[f]) * fs[f]),
                                b.begin() + static_cast<long>((a * fs[f] + s[f] + 1) * fs[f]));
        s[f] = draw(rng, col);
      }
    }
    const Index joint = encode(s, fs);
    std::vector<Index> o(ms.size());
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const auto& a = m.A.tables[k];
      std::vector<double> col(a.begin() + static_cast<long>(joint * ms[k]),
                              a.begin() + static_cast<long>((joint + 1) * ms[k]));
      o[k] = draw(rng, col);
    }
    h.observations.push_back(encode(o, ms));
  }
  return h;
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double sparsity = 0.0) {
  return random_column(rng, n, sparsity);
}

// A model and full history in which every step leaves its own trace in the
// hyperparameters: modality 0 reports outcome tau - 1 at step tau, and the
// actions are all distinct. Kernels are strictly positive so any such
// history is possible.
struct SeparableEpisode {
  GenerativeModel model;
  aif::History history;
};

inline SeparableEpisode separable_episode(std::mt19937_64& rng, std::size_t max_joint) {
  RandomSpec spec;
  spec.max_joint = max_joint;
  spec.sparsity = 0.0;
  spec.min_horizon = 2;
  spec.max_horizon = 4;
  spec.max_outcomes = 4;
  spec.max_actions = 3;
  for (;;) {
    auto m = random_model(rng, spec);
    const auto t = static_cast<std::size_t>(m.horizon);
    if (m.observations.dim(0) < t || m.actions.size < t - 1) continue;
    aif::History h;
    const auto& ms = m.observations.dims();
    for (std::size_t tau = 0; tau < t; ++tau) {
      std::vector<Index> o(ms.size());
      o[0] = tau;
      for (std::size_t k = 1; k < ms.size(); ++k) o[k] = pick(rng, 0, ms[k] - 1);
      h.observations.push_back(encode(o, ms));
      if (tau > 0) h.actions.push_back(tau - 1);
    }
    return {std::move(m), std::move(h)};
  }
}

// Per-step mass of an increment on a separable episode: A[tau] from modality
// 0 column tau, B[tau - 2][f] from factor f's slice for action tau - 2.
struct StepMass {
  std::vector<double> a;
  std::vector<std::vector<double>> b;
};

inline StepMass step_mass(const GenerativeModel& m, const std::vector<std::vector<double>>& d_a,
                          const std::vector<std::vector<double>>& d_b) {
  StepMass out;
  const std::size_t n = m.num_states();
  const std::size_t n0 = m.observations.dim(0);
  for (int tau = 0; tau < m.horizon; ++tau) {
    double acc = 0.0;
    for (Index s = 0; s < n; ++s) acc += d_a[0][s * n0 + static_cast<Index>(tau)];
    out.a.push_back(acc);
  }
  for (int tau = 1; tau < m.horizon; ++tau) {
    std::vector<double> per_factor;
    for (std::size_t f = 0; f < m.states.rank(); ++f) {
      const std::size_t nf = m.states.dim(f);
      double acc = 0.0;
      for (std::size_t k = 0; k < nf * nf; ++k) acc += d_b[f][static_cast<std::size_t>(tau - 1) * nf * nf + k];
      per_factor.push_back(acc);
    }
    out.b.push_back(per_factor);
  }
  return out;
}

}  // namespace testing_support
